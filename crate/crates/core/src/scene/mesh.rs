//! Triangle meshes, primitive builders, and the plain-text mesh format.
//!
//! Text format, one directive per line, `#` starts a comment:
//!
//! ```text
//! v <x> <y> <z>     vertex position
//! c <r> <g> <b>     color for the faces that follow, components in [0, 1]
//! f <i> <j> <k>     triangle over 1-based vertex indices
//! ```
//!
//! Faces before the first `c` line are light gray. Objects face +Z, +Y is up,
//! and +X is the object's left side.

use std::f32::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Isometry3, Point3, Rotation3, Unit, Vector3};

pub type Rgb = [f32; 3];

const DEFAULT_FACE_COLOR: Rgb = [0.7, 0.7, 0.7];

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("mesh has no triangles")]
    Empty,
    #[error("failed to read mesh: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mesh {
    pub positions: Vec<Point3<f32>>,
    pub triangles: Vec<[u32; 3]>,
    /// One color per triangle.
    pub colors: Vec<Rgb>,
}

impl Mesh {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle(&self, i: usize) -> [Point3<f32>; 3] {
        let [a, b, c] = self.triangles[i];
        [
            self.positions[a as usize],
            self.positions[b as usize],
            self.positions[c as usize],
        ]
    }

    pub fn push_triangle(&mut self, a: Point3<f32>, b: Point3<f32>, c: Point3<f32>, color: Rgb) {
        let base = self.positions.len() as u32;
        self.positions.extend([a, b, c]);
        self.triangles.push([base, base + 1, base + 2]);
        self.colors.push(color);
    }

    pub fn push_quad(&mut self, corners: [Point3<f32>; 4], color: Rgb) {
        let base = self.positions.len() as u32;
        self.positions.extend(corners);
        self.triangles.push([base, base + 1, base + 2]);
        self.triangles.push([base, base + 2, base + 3]);
        self.colors.extend([color, color]);
    }

    pub fn append(&mut self, other: &Mesh) {
        let base = self.positions.len() as u32;
        self.positions.extend_from_slice(&other.positions);
        self.triangles
            .extend(other.triangles.iter().map(|t| t.map(|i| i + base)));
        self.colors.extend_from_slice(&other.colors);
    }

    pub fn transformed(mut self, iso: &Isometry3<f32>) -> Self {
        for p in &mut self.positions {
            *p = iso * *p;
        }
        self
    }

    pub fn translated(mut self, offset: Vector3<f32>) -> Self {
        for p in &mut self.positions {
            *p += offset;
        }
        self
    }

    pub fn scaled(mut self, factor: f32) -> Self {
        for p in &mut self.positions {
            p.coords *= factor;
        }
        self
    }

    /// Axis-aligned bounds `(min, max)`.
    pub fn bounds(&self) -> Option<(Point3<f32>, Point3<f32>)> {
        let first = *self.positions.first()?;
        Some(self.positions.iter().fold((first, first), |(lo, hi), p| {
            (lo.inf(p), hi.sup(p))
        }))
    }

    /// Scales the mesh so its bounding-box half-diagonal is `radius`, then
    /// moves it to rest on the `y = 0` plane centered over the origin.
    pub fn normalized(self, radius: f32) -> Self {
        let Some((lo, hi)) = self.bounds() else {
            return self;
        };
        let half_diag = (hi - lo).norm() * 0.5;
        let scale = if half_diag > 0.0 { radius / half_diag } else { 1.0 };
        let center = nalgebra::center(&lo, &hi);
        let offset = Vector3::new(-center.x, -lo.y, -center.z);
        self.translated(offset).scaled(scale)
    }

    pub fn parse_text(text: &str) -> Result<Self, MeshError> {
        let mut mesh = Mesh::new();
        let mut color = DEFAULT_FACE_COLOR;
        let mut vertices: Vec<Point3<f32>> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let tag = parts.next().unwrap_or("");
            let rest: Vec<&str> = parts.collect();
            let syntax = |message: String| MeshError::Syntax {
                line: line_no,
                message,
            };
            if rest.len() != 3 {
                return Err(syntax(format!("`{tag}` expects 3 values, got {}", rest.len())));
            }
            match tag {
                "v" => {
                    let v = parse_floats(&rest).map_err(syntax)?;
                    vertices.push(Point3::new(v[0], v[1], v[2]));
                }
                "c" => {
                    let c = parse_floats(&rest).map_err(syntax)?;
                    if c.iter().any(|x| !(0.0..=1.0).contains(x)) {
                        return Err(syntax("color components must lie in [0, 1]".into()));
                    }
                    color = c;
                }
                "f" => {
                    let mut idx = [0u32; 3];
                    for (slot, s) in idx.iter_mut().zip(&rest) {
                        let i: usize = s
                            .parse()
                            .map_err(|_| syntax(format!("bad vertex index `{s}`")))?;
                        if i == 0 || i > vertices.len() {
                            return Err(syntax(format!(
                                "vertex index {i} out of range 1..={}",
                                vertices.len()
                            )));
                        }
                        *slot = (i - 1) as u32;
                    }
                    mesh.triangles.push(idx);
                    mesh.colors.push(color);
                }
                other => return Err(syntax(format!("unknown directive `{other}`"))),
            }
        }
        if mesh.triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        mesh.positions = vertices;
        Ok(mesh)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MeshError> {
        Self::parse_text(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.positions {
            let _ = writeln!(out, "v {} {} {}", p.x, p.y, p.z);
        }
        let mut current: Option<Rgb> = None;
        for (t, c) in self.triangles.iter().zip(&self.colors) {
            if current != Some(*c) {
                let _ = writeln!(out, "c {} {} {}", c[0], c[1], c[2]);
                current = Some(*c);
            }
            let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        out
    }
}

fn parse_floats(parts: &[&str]) -> Result<[f32; 3], String> {
    let mut out = [0.0f32; 3];
    for (slot, s) in out.iter_mut().zip(parts) {
        let v: f32 = s.parse().map_err(|_| format!("bad number `{s}`"))?;
        if !v.is_finite() {
            return Err(format!("non-finite number `{s}`"));
        }
        *slot = v;
    }
    Ok(out)
}

/// Axis-aligned box.
pub fn cuboid(center: Point3<f32>, half: Vector3<f32>, color: Rgb) -> Mesh {
    hexahedron(
        [
            center + Vector3::new(-half.x, -half.y, -half.z),
            center + Vector3::new(half.x, -half.y, -half.z),
            center + Vector3::new(half.x, half.y, -half.z),
            center + Vector3::new(-half.x, half.y, -half.z),
            center + Vector3::new(-half.x, -half.y, half.z),
            center + Vector3::new(half.x, -half.y, half.z),
            center + Vector3::new(half.x, half.y, half.z),
            center + Vector3::new(-half.x, half.y, half.z),
        ],
        color,
    )
}

/// Six-faced solid from eight corners: `c[0..4]` is one face and `c[4..8]`
/// the opposite face, in matching order.
pub fn hexahedron(c: [Point3<f32>; 8], color: Rgb) -> Mesh {
    let mut m = Mesh::new();
    let faces = [
        [0, 3, 2, 1],
        [4, 5, 6, 7],
        [0, 1, 5, 4],
        [3, 7, 6, 2],
        [0, 4, 7, 3],
        [1, 2, 6, 5],
    ];
    for f in faces {
        m.push_quad(f.map(|i| c[i]), color);
    }
    m
}

/// Capped frustum from `base` to `tip` with the given end radii.
pub fn frustum(
    base: Point3<f32>,
    tip: Point3<f32>,
    base_radius: f32,
    tip_radius: f32,
    segments: usize,
    color: Rgb,
) -> Mesh {
    let axis = tip - base;
    let len = axis.norm();
    let rot = rotation_from_y(axis);
    let mut m = Mesh::new();
    let ring = |r: f32, y: f32, i: usize| {
        let a = TAU * i as f32 / segments as f32;
        base + rot * Vector3::new(r * a.cos(), y, r * a.sin())
    };
    let bottom_center = base;
    let top_center = tip;
    for i in 0..segments {
        let j = (i + 1) % segments;
        let b0 = ring(base_radius, 0.0, i);
        let b1 = ring(base_radius, 0.0, j);
        let t0 = ring(tip_radius, len, i);
        let t1 = ring(tip_radius, len, j);
        m.push_quad([b0, b1, t1, t0], color);
        if base_radius > 0.0 {
            m.push_triangle(bottom_center, b1, b0, color);
        }
        if tip_radius > 0.0 {
            m.push_triangle(top_center, t0, t1, color);
        }
    }
    m
}

pub fn cylinder(base: Point3<f32>, tip: Point3<f32>, radius: f32, segments: usize, color: Rgb) -> Mesh {
    frustum(base, tip, radius, radius, segments, color)
}

/// Ellipsoid with semi-axes `radii` along the local axes of `rotation`.
pub fn ellipsoid(
    center: Point3<f32>,
    radii: Vector3<f32>,
    rotation: Rotation3<f32>,
    segments: usize,
    color: Rgb,
) -> Mesh {
    let rings = segments.max(4) / 2;
    let point = |ring: usize, seg: usize| {
        let theta = PI * ring as f32 / rings as f32;
        let phi = TAU * seg as f32 / segments as f32;
        let local = Vector3::new(
            radii.x * theta.sin() * phi.cos(),
            radii.y * theta.cos(),
            radii.z * theta.sin() * phi.sin(),
        );
        center + rotation * local
    };
    let mut m = Mesh::new();
    for r in 0..rings {
        for s in 0..segments {
            let s1 = (s + 1) % segments;
            let a = point(r, s);
            let b = point(r, s1);
            let c = point(r + 1, s1);
            let d = point(r + 1, s);
            if r == 0 {
                m.push_triangle(a, c, d, color);
            } else if r + 1 == rings {
                m.push_triangle(a, b, d, color);
            } else {
                m.push_quad([a, b, c, d], color);
            }
        }
    }
    m
}

pub fn sphere(center: Point3<f32>, radius: f32, segments: usize, color: Rgb) -> Mesh {
    ellipsoid(center, Vector3::repeat(radius), Rotation3::identity(), segments, color)
}

/// Flat disc-shaped wheel whose axle runs along X.
pub fn wheel(center: Point3<f32>, radius: f32, width: f32, color: Rgb) -> Mesh {
    let half = Vector3::new(width * 0.5, 0.0, 0.0);
    cylinder(center - half, center + half, radius, 16, color)
}

/// Rotation taking +Y onto `dir`.
fn rotation_from_y(dir: Vector3<f32>) -> Rotation3<f32> {
    let y = Vector3::y();
    let Some(d) = Unit::try_new(dir, 1e-9) else {
        return Rotation3::identity();
    };
    Rotation3::rotation_between(&y, &d).unwrap_or_else(|| {
        // antiparallel
        Rotation3::from_axis_angle(&Vector3::x_axis(), PI)
    })
}
