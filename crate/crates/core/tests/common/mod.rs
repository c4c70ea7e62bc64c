//! Independent oracles shared by the integration and acceptance tests.
//! Nothing here calls into the library's projection or rasterization code.

#![allow(dead_code)]

use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shiftbench::scene::camera::{CameraSpec, Orientation, View};
use shiftbench::scene::mesh::Mesh;
use shiftbench::scene::registry::{CategoryRegistry, MeshSource};
use shiftbench::scene::sample::{OccluderKind, OccluderPlacement};
use shiftbench::scene::{Backdrop, EnvironmentSpec, Season, SceneSpec, TimeOfDay, Weather};
use shiftbench::taxonomy::DomainCombination;

pub const QUAD_CATEGORY: &str = "panel";

type P2 = (f64, f64);

/// Shoelace area of a simple polygon.
pub fn polygon_area(poly: &[P2]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        let (x0, y0) = poly[i];
        let (x1, y1) = poly[(i + 1) % n];
        s += x0 * y1 - x1 * y0;
    }
    (s * 0.5).abs()
}

pub fn polygon_perimeter(poly: &[P2]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (x0, y0) = poly[i];
            let (x1, y1) = poly[(i + 1) % n];
            ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt()
        })
        .sum()
}

/// Sutherland-Hodgman clip of a convex polygon to an axis-aligned rectangle.
pub fn clip_to_rect(poly: &[P2], [x0, y0, x1, y1]: [f64; 4]) -> Vec<P2> {
    let planes: [(usize, f64, bool); 4] = [(0, x0, true), (0, x1, false), (1, y0, true), (1, y1, false)];
    let mut out = poly.to_vec();
    for (axis, bound, keep_above) in planes {
        let coord = |p: &P2| if axis == 0 { p.0 } else { p.1 };
        let inside = |p: &P2| if keep_above { coord(p) >= bound } else { coord(p) <= bound };
        let input = std::mem::take(&mut out);
        for i in 0..input.len() {
            let a = input[i];
            let b = input[(i + 1) % input.len()];
            if inside(&a) {
                out.push(a);
            }
            if inside(&a) != inside(&b) {
                let t = (bound - coord(&a)) / (coord(&b) - coord(&a));
                out.push((a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t));
            }
        }
        if out.is_empty() {
            break;
        }
    }
    out
}

type M3 = [[f64; 3]; 3];

fn mul(a: &M3, b: &M3) -> M3 {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

fn rot_y(deg: f64) -> M3 {
    let (s, c) = deg.to_radians().sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

fn rot_x(deg: f64) -> M3 {
    let (s, c) = deg.to_radians().sin_cos();
    [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
}

fn rot_z(deg: f64) -> M3 {
    let (s, c) = deg.to_radians().sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

/// Pinhole projection of world points for an orbit camera, in f64.
pub struct OraclePinhole {
    rot: M3,
    pos: [f64; 3],
    focal: f64,
    w: f64,
    h: f64,
}

impl OraclePinhole {
    pub fn new(spec: &CameraSpec, width: u32, height: u32) -> Self {
        let o = spec.orientation();
        let rot = mul(&mul(&rot_y(o.yaw as f64), &rot_x(o.pitch as f64)), &rot_z(o.roll as f64));
        let d = spec.distance as f64;
        let la = spec.look_at.map(|v| v as f64);
        let pos = [0, 1, 2].map(|i| la[i] + rot[i][2] * d);
        let focal = height as f64 * 0.5 / (spec.vfov_deg as f64 * 0.5).to_radians().tan();
        Self {
            rot,
            pos,
            focal,
            w: width as f64,
            h: height as f64,
        }
    }

    /// Screen position and depth.
    pub fn project(&self, p: [f64; 3]) -> (P2, f64) {
        let d = [0, 1, 2].map(|i| p[i] - self.pos[i]);
        // camera space = R^T · d
        let c = [0, 1, 2].map(|j| (0..3).map(|i| self.rot[i][j] * d[i]).sum::<f64>());
        let depth = -c[2];
        (
            (self.w * 0.5 + self.focal * c[0] / depth, self.h * 0.5 - self.focal * c[1] / depth),
            depth,
        )
    }
}

/// A seeded scene whose target is a single planar quad and whose occluder is
/// one screen-space rectangle, plus the analytic expectations.
pub struct QuadScene {
    pub spec: SceneSpec,
    pub registry: CategoryRegistry,
    /// Projected target polygon clipped to the frame.
    pub target_px: Vec<P2>,
    pub expected_ratio: f64,
    /// Pixel tolerance on the ratio: 2 · perimeter / area.
    pub tolerance: f64,
}

pub fn quad_scene(seed: u64, size: u32) -> QuadScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // rectangle in its local XY plane, tilted so its projection is a
    // general quadrilateral
    let hw = rng.random_range(0.5f32..1.0);
    let hh = rng.random_range(0.5f32..1.0);
    let tilt = nalgebra::Rotation3::from_euler_angles(
        rng.random_range(-0.5f32..0.5),
        rng.random_range(-0.5f32..0.5),
        rng.random_range(-0.3f32..0.3),
    );
    let corners = [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)]
        .map(|(x, y)| Point3::from(tilt * Vector3::new(x, y, 0.0)));
    let mut quad = Mesh::new();
    quad.push_quad(corners, [0.8, 0.2, 0.2]);

    let mut registry = CategoryRegistry::builtin();
    registry.add_variant(QUAD_CATEGORY, MeshSource::File { path: "panel.mesh".into() }, quad);
    let stored = registry.mesh(QUAD_CATEGORY, 0).unwrap().clone();
    let (lo, hi) = stored.bounds().unwrap();
    let look_at = nalgebra::center(&lo, &hi);

    let camera = CameraSpec {
        view: View::Front,
        base_orientation: Orientation::new(0.0, 0.0, 0.0),
        jitter: Orientation::new(
            rng.random_range(-20.0..20.0),
            rng.random_range(-15.0..15.0),
            rng.random_range(-10.0..10.0),
        ),
        distance: rng.random_range(3.5..4.5),
        vfov_deg: 40.0,
        look_at: look_at.into(),
    };
    let pin = OraclePinhole::new(&camera, size, size);
    let s = size as f64;
    let projected: Vec<P2> = stored.positions[..4]
        .iter()
        .map(|p| pin.project([p.x as f64, p.y as f64, p.z as f64]).0)
        .collect();
    let target_px = clip_to_rect(&projected, [0.0, 0.0, s, s]);
    let area = polygon_area(&target_px);

    // an occluder rect overlapping the target's bounding box somewhere
    let (bx0, bx1) = target_px.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (by0, by1) = target_px.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let cx = rng.random_range(bx0..bx1);
    let cy = rng.random_range(by0..by1);
    let rw = rng.random_range(0.1..0.8) * (bx1 - bx0);
    let rh = rng.random_range(0.1..0.8) * (by1 - by0);
    let rect = [cx - rw / 2.0, cy - rh / 2.0, cx + rw / 2.0, cy + rh / 2.0];
    let occluded = polygon_area(&clip_to_rect(&target_px, rect));

    let mut env_rng = ChaCha8Rng::seed_from_u64(seed);
    let environment =
        EnvironmentSpec::derive(TimeOfDay::Day, Season::SpringSummer, Weather::Clear, &mut env_rng).unwrap();
    let spec = SceneSpec {
        seed,
        category: QUAD_CATEGORY.into(),
        mesh_variant: 0,
        scene_background: Backdrop::Meadow,
        camera,
        environment,
        occluders: vec![OccluderPlacement {
            kind: OccluderKind::VerticalBand,
            screen_rect: rect.map(|v| v as f32),
            depth: (1.0, 2.0),
            color: [0.3, 0.3, 0.3],
        }],
        target_combination: DomainCombination::new(),
        width: size,
        height: size,
    };
    QuadScene {
        spec,
        registry,
        expected_ratio: occluded / area,
        tolerance: 2.0 * polygon_perimeter(&target_px) / area,
        target_px,
    }
}
