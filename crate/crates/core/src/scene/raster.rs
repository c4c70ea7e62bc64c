//! Z-buffered triangle rasterizer with per-pixel layer ids.
//!
//! Coverage is sampled at pixel centers. Depth is interpolated as `1/depth`,
//! which is linear in screen space, and the nearest fragment wins; on exact
//! ties the earlier draw is kept. Triangles are clipped against the near
//! plane before projection.

use nalgebra::{Point3, Vector3};

use super::camera::Camera;
use super::mesh::{Mesh, Rgb};

pub type Layer = u8;

pub const LAYER_EMPTY: Layer = 0;
pub const LAYER_BACKDROP: Layer = 1;
pub const LAYER_GROUND: Layer = 2;
pub const LAYER_TARGET: Layer = 3;
pub const LAYER_OCCLUDER: Layer = 4;

#[derive(Debug, Clone)]
pub struct FrameBuffer {
    pub width: u32,
    pub height: u32,
    /// Inverse depth; 0 where nothing was drawn.
    pub inv_depth: Vec<f32>,
    pub layer: Vec<Layer>,
    /// Present only for color passes.
    pub color: Option<Vec<Rgb>>,
}

impl FrameBuffer {
    pub fn new(width: u32, height: u32, with_color: bool) -> Self {
        let n = width as usize * height as usize;
        Self {
            width,
            height,
            inv_depth: vec![0.0; n],
            layer: vec![LAYER_EMPTY; n],
            color: with_color.then(|| vec![[0.0; 3]; n]),
        }
    }

    pub fn len(&self) -> usize {
        self.layer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layer.is_empty()
    }

    pub fn depth_at(&self, i: usize) -> Option<f32> {
        let iz = self.inv_depth[i];
        (iz > 0.0).then(|| 1.0 / iz)
    }

    pub fn mask(&self, layer: Layer) -> Vec<bool> {
        self.layer.iter().map(|&l| l == layer).collect()
    }

    pub fn count(&self, layer: Layer) -> usize {
        self.layer.iter().filter(|&&l| l == layer).count()
    }
}

#[derive(Clone, Copy)]
struct ScreenVertex {
    x: f32,
    y: f32,
    inv_depth: f32,
}

pub struct Rasterizer<'c> {
    camera: &'c Camera,
    pub frame: FrameBuffer,
}

impl<'c> Rasterizer<'c> {
    pub fn new(camera: &'c Camera, with_color: bool) -> Self {
        Self {
            camera,
            frame: FrameBuffer::new(camera.width, camera.height, with_color),
        }
    }

    pub fn into_frame(self) -> FrameBuffer {
        self.frame
    }

    /// Draws a world-space mesh. `shade` maps (camera-facing unit normal,
    /// face color) to the output color and is only called on color passes.
    pub fn draw<F>(&mut self, mesh: &Mesh, layer: Layer, shade: F)
    where
        F: Fn(&Vector3<f32>, Rgb) -> Rgb,
    {
        let with_color = self.frame.color.is_some();
        for t in 0..mesh.triangle_count() {
            let world = mesh.triangle(t);
            let color = if with_color {
                let n = (world[1] - world[0]).cross(&(world[2] - world[0]));
                let Some(mut n) = n.try_normalize(1e-12) else {
                    continue;
                };
                if n.dot(&(self.camera.position - world[0])) < 0.0 {
                    n = -n;
                }
                shade(&n, mesh.colors[t])
            } else {
                [0.0; 3]
            };
            let cam = world.map(|p| self.camera.world_to_camera(&p));
            self.draw_camera_triangle(cam, layer, color);
        }
    }

    fn draw_camera_triangle(&mut self, tri: [Point3<f32>; 3], layer: Layer, color: Rgb) {
        let near = self.camera.near;
        let inside = |p: &Point3<f32>| -p.z >= near;
        let n_inside = tri.iter().filter(|p| inside(p)).count();
        if n_inside == 0 {
            return;
        }
        let mut poly: Vec<Point3<f32>> = Vec::with_capacity(4);
        if n_inside == 3 {
            poly.extend_from_slice(&tri);
        } else {
            for i in 0..3 {
                let a = tri[i];
                let b = tri[(i + 1) % 3];
                if inside(&a) {
                    poly.push(a);
                }
                if inside(&a) != inside(&b) {
                    // intersect with depth == near
                    let t = (-near - a.z) / (b.z - a.z);
                    let mut q = a + (b - a) * t;
                    q.z = -near; // exact, so projection never rejects it
                    poly.push(q);
                }
            }
        }
        let screen: Vec<ScreenVertex> = poly
            .iter()
            .filter_map(|p| self.camera.project(p))
            .map(|(x, y, d)| ScreenVertex {
                x,
                y,
                inv_depth: 1.0 / d,
            })
            .collect();
        if screen.len() < 3 {
            return;
        }
        for i in 1..screen.len() - 1 {
            self.fill(screen[0], screen[i], screen[i + 1], layer, color);
        }
    }

    fn fill(&mut self, v0: ScreenVertex, mut v1: ScreenVertex, mut v2: ScreenVertex, layer: Layer, color: Rgb) {
        let mut area = edge(&v0, &v1, v2.x, v2.y);
        if area.abs() < 1e-12 {
            return;
        }
        if area < 0.0 {
            std::mem::swap(&mut v1, &mut v2);
            area = -area;
        }
        let w = self.frame.width as i64;
        let h = self.frame.height as i64;
        let min_x = v0.x.min(v1.x).min(v2.x);
        let max_x = v0.x.max(v1.x).max(v2.x);
        let min_y = v0.y.min(v1.y).min(v2.y);
        let max_y = v0.y.max(v1.y).max(v2.y);
        let x0 = ((min_x - 0.5).ceil() as i64).max(0);
        let x1 = ((max_x - 0.5).floor() as i64).min(w - 1);
        let y0 = ((min_y - 0.5).ceil() as i64).max(0);
        let y1 = ((max_y - 0.5).floor() as i64).min(h - 1);
        if x0 > x1 || y0 > y1 {
            return;
        }
        let inv_area = 1.0 / area;
        for py in y0..=y1 {
            let sy = py as f32 + 0.5;
            let row = py as usize * w as usize;
            for px in x0..=x1 {
                let sx = px as f32 + 0.5;
                let w0 = edge(&v1, &v2, sx, sy);
                let w1 = edge(&v2, &v0, sx, sy);
                let w2 = edge(&v0, &v1, sx, sy);
                if w0 < 0.0 || w1 < 0.0 || w2 < 0.0 {
                    continue;
                }
                let iz = (w0 * v0.inv_depth + w1 * v1.inv_depth + w2 * v2.inv_depth) * inv_area;
                let i = row + px as usize;
                if iz > self.frame.inv_depth[i] {
                    self.frame.inv_depth[i] = iz;
                    self.frame.layer[i] = layer;
                    if let Some(c) = self.frame.color.as_mut() {
                        c[i] = color;
                    }
                }
            }
        }
    }
}

#[inline]
fn edge(a: &ScreenVertex, b: &ScreenVertex, px: f32, py: f32) -> f32 {
    (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x)
}
