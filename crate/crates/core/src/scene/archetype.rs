//! Procedural meshes for the default categories, composed from boxes,
//! frusta, and ellipsoids. Every category has [`VARIANTS_PER_CATEGORY`]
//! variants that differ in proportions, parts, and colors.
//!
//! Models face +Z with +Y up and rest on `y = 0`.

use nalgebra::{Point3, Rotation3, Vector3};

use super::mesh::{cuboid, ellipsoid, frustum, wheel, Mesh, Rgb};

pub const DEFAULT_CATEGORIES: [&str; 14] = [
    "car",
    "airplane",
    "bike",
    "motorcycle",
    "cat",
    "dog",
    "bear",
    "horse",
    "cow",
    "sheep",
    "bird",
    "human",
    "bus",
    "truck",
];

pub const VARIANTS_PER_CATEGORY: usize = 3;

const SEGMENTS: usize = 14;

/// Builds variant `variant` of a default category, or `None` if the
/// category is not a built-in archetype.
pub fn build(category: &str, variant: usize) -> Option<Mesh> {
    let v = variant % VARIANTS_PER_CATEGORY;
    let mesh = match category {
        "car" => car(v),
        "airplane" => airplane(v),
        "bike" => bike(v),
        "motorcycle" => motorcycle(v),
        "cat" => quadruped(&CAT[v]),
        "dog" => quadruped(&DOG[v]),
        "bear" => quadruped(&BEAR[v]),
        "horse" => quadruped(&HORSE[v]),
        "cow" => quadruped(&COW[v]),
        "sheep" => quadruped(&SHEEP[v]),
        "bird" => bird(v),
        "human" => human(v),
        "bus" => bus(v),
        "truck" => truck(v),
        _ => return None,
    };
    Some(mesh)
}

fn p(x: f32, y: f32, z: f32) -> Point3<f32> {
    Point3::new(x, y, z)
}

fn v3(x: f32, y: f32, z: f32) -> Vector3<f32> {
    Vector3::new(x, y, z)
}

#[derive(Default)]
struct Parts {
    mesh: Mesh,
}

impl Parts {
    fn block(&mut self, c: Point3<f32>, half: Vector3<f32>, color: Rgb) -> &mut Self {
        self.mesh.append(&cuboid(c, half, color));
        self
    }

    fn blob(&mut self, c: Point3<f32>, radii: Vector3<f32>, color: Rgb) -> &mut Self {
        self.mesh
            .append(&ellipsoid(c, radii, Rotation3::identity(), SEGMENTS, color));
        self
    }

    fn tilted_blob(&mut self, c: Point3<f32>, radii: Vector3<f32>, pitch: f32, color: Rgb) -> &mut Self {
        let rot = Rotation3::from_axis_angle(&Vector3::x_axis(), pitch);
        self.mesh.append(&ellipsoid(c, radii, rot, SEGMENTS, color));
        self
    }

    fn rod(&mut self, a: Point3<f32>, b: Point3<f32>, r: f32, color: Rgb) -> &mut Self {
        self.mesh.append(&frustum(a, b, r, r, 8, color));
        self
    }

    fn cone(&mut self, a: Point3<f32>, b: Point3<f32>, r0: f32, r1: f32, color: Rgb) -> &mut Self {
        self.mesh.append(&frustum(a, b, r0, r1, 10, color));
        self
    }

    fn wheel(&mut self, c: Point3<f32>, r: f32, width: f32, color: Rgb) -> &mut Self {
        self.mesh.append(&wheel(c, r, width, color));
        self
    }

    fn finish(&mut self) -> Mesh {
        std::mem::take(&mut self.mesh)
    }
}

const TIRE: Rgb = [0.08, 0.08, 0.09];
const GLASS: Rgb = [0.15, 0.2, 0.28];
const CHROME: Rgb = [0.72, 0.74, 0.78];

#[derive(Clone, Copy)]
enum Ears {
    Pointed,
    Floppy,
    Round,
    None,
}

struct QuadrupedParams {
    body_len: f32,
    body_height: f32,
    body_width: f32,
    leg_len: f32,
    leg_radius: f32,
    neck_len: f32,
    /// Angle of the neck above horizontal, radians.
    neck_rise: f32,
    head: [f32; 3],
    snout: f32,
    tail_len: f32,
    tail_radius: f32,
    ears: Ears,
    horns: bool,
    coat: Rgb,
    accent: Rgb,
}

const CAT: [QuadrupedParams; 3] = [
    QuadrupedParams { body_len: 1.0, body_height: 0.2, body_width: 0.18, leg_len: 0.32, leg_radius: 0.045, neck_len: 0.12, neck_rise: 0.9, head: [0.14, 0.13, 0.14], snout: 0.04, tail_len: 0.6, tail_radius: 0.03, ears: Ears::Pointed, horns: false, coat: [0.86, 0.55, 0.24], accent: [0.95, 0.9, 0.85] },
    QuadrupedParams { body_len: 0.95, body_height: 0.19, body_width: 0.17, leg_len: 0.3, leg_radius: 0.04, neck_len: 0.1, neck_rise: 1.0, head: [0.13, 0.12, 0.13], snout: 0.035, tail_len: 0.65, tail_radius: 0.028, ears: Ears::Pointed, horns: false, coat: [0.1, 0.1, 0.11], accent: [0.2, 0.2, 0.2] },
    QuadrupedParams { body_len: 1.1, body_height: 0.23, body_width: 0.21, leg_len: 0.28, leg_radius: 0.05, neck_len: 0.1, neck_rise: 0.8, head: [0.16, 0.14, 0.15], snout: 0.03, tail_len: 0.5, tail_radius: 0.045, ears: Ears::Pointed, horns: false, coat: [0.56, 0.56, 0.6], accent: [0.85, 0.85, 0.88] },
];

const DOG: [QuadrupedParams; 3] = [
    // retriever
    QuadrupedParams { body_len: 1.2, body_height: 0.26, body_width: 0.22, leg_len: 0.5, leg_radius: 0.06, neck_len: 0.22, neck_rise: 0.8, head: [0.16, 0.16, 0.2], snout: 0.14, tail_len: 0.45, tail_radius: 0.04, ears: Ears::Floppy, horns: false, coat: [0.86, 0.7, 0.44], accent: [0.25, 0.18, 0.12] },
    // doberman
    QuadrupedParams { body_len: 1.15, body_height: 0.24, body_width: 0.18, leg_len: 0.62, leg_radius: 0.05, neck_len: 0.3, neck_rise: 1.0, head: [0.13, 0.14, 0.2], snout: 0.18, tail_len: 0.2, tail_radius: 0.03, ears: Ears::Pointed, horns: false, coat: [0.12, 0.08, 0.06], accent: [0.6, 0.36, 0.16] },
    // husky
    QuadrupedParams { body_len: 1.15, body_height: 0.27, body_width: 0.23, leg_len: 0.5, leg_radius: 0.06, neck_len: 0.2, neck_rise: 0.85, head: [0.16, 0.16, 0.18], snout: 0.12, tail_len: 0.5, tail_radius: 0.06, ears: Ears::Pointed, horns: false, coat: [0.45, 0.46, 0.5], accent: [0.93, 0.93, 0.95] },
];

const BEAR: [QuadrupedParams; 3] = [
    QuadrupedParams { body_len: 1.8, body_height: 0.55, body_width: 0.5, leg_len: 0.5, leg_radius: 0.16, neck_len: 0.2, neck_rise: 0.3, head: [0.28, 0.26, 0.3], snout: 0.16, tail_len: 0.1, tail_radius: 0.07, ears: Ears::Round, horns: false, coat: [0.36, 0.23, 0.13], accent: [0.25, 0.16, 0.09] },
    QuadrupedParams { body_len: 1.6, body_height: 0.5, body_width: 0.45, leg_len: 0.45, leg_radius: 0.14, neck_len: 0.18, neck_rise: 0.35, head: [0.25, 0.24, 0.28], snout: 0.15, tail_len: 0.08, tail_radius: 0.06, ears: Ears::Round, horns: false, coat: [0.08, 0.07, 0.07], accent: [0.55, 0.45, 0.35] },
    QuadrupedParams { body_len: 2.0, body_height: 0.58, body_width: 0.52, leg_len: 0.55, leg_radius: 0.17, neck_len: 0.3, neck_rise: 0.25, head: [0.26, 0.25, 0.34], snout: 0.18, tail_len: 0.08, tail_radius: 0.07, ears: Ears::Round, horns: false, coat: [0.9, 0.88, 0.8], accent: [0.1, 0.1, 0.1] },
];

const HORSE: [QuadrupedParams; 3] = [
    QuadrupedParams { body_len: 1.9, body_height: 0.4, body_width: 0.3, leg_len: 1.1, leg_radius: 0.07, neck_len: 0.75, neck_rise: 1.0, head: [0.13, 0.16, 0.36], snout: 0.1, tail_len: 0.8, tail_radius: 0.07, ears: Ears::Pointed, horns: false, coat: [0.45, 0.26, 0.13], accent: [0.1, 0.07, 0.05] },
    QuadrupedParams { body_len: 1.8, body_height: 0.38, body_width: 0.28, leg_len: 1.05, leg_radius: 0.065, neck_len: 0.7, neck_rise: 1.05, head: [0.12, 0.15, 0.34], snout: 0.1, tail_len: 0.85, tail_radius: 0.06, ears: Ears::Pointed, horns: false, coat: [0.07, 0.06, 0.06], accent: [0.12, 0.1, 0.1] },
    QuadrupedParams { body_len: 2.0, body_height: 0.45, body_width: 0.34, leg_len: 1.0, leg_radius: 0.09, neck_len: 0.7, neck_rise: 0.9, head: [0.14, 0.17, 0.38], snout: 0.1, tail_len: 0.75, tail_radius: 0.08, ears: Ears::Pointed, horns: false, coat: [0.85, 0.84, 0.82], accent: [0.6, 0.58, 0.55] },
];

const COW: [QuadrupedParams; 3] = [
    QuadrupedParams { body_len: 2.1, body_height: 0.55, body_width: 0.45, leg_len: 0.75, leg_radius: 0.09, neck_len: 0.3, neck_rise: 0.3, head: [0.2, 0.22, 0.34], snout: 0.1, tail_len: 0.7, tail_radius: 0.035, ears: Ears::Floppy, horns: true, coat: [0.92, 0.92, 0.9], accent: [0.08, 0.08, 0.08] },
    QuadrupedParams { body_len: 2.0, body_height: 0.52, body_width: 0.42, leg_len: 0.7, leg_radius: 0.09, neck_len: 0.28, neck_rise: 0.35, head: [0.19, 0.21, 0.32], snout: 0.1, tail_len: 0.65, tail_radius: 0.035, ears: Ears::Floppy, horns: true, coat: [0.5, 0.28, 0.14], accent: [0.9, 0.88, 0.84] },
    QuadrupedParams { body_len: 2.2, body_height: 0.6, body_width: 0.5, leg_len: 0.7, leg_radius: 0.1, neck_len: 0.3, neck_rise: 0.25, head: [0.21, 0.23, 0.35], snout: 0.1, tail_len: 0.7, tail_radius: 0.04, ears: Ears::Floppy, horns: false, coat: [0.82, 0.66, 0.42], accent: [0.3, 0.2, 0.12] },
];

const SHEEP: [QuadrupedParams; 3] = [
    QuadrupedParams { body_len: 1.2, body_height: 0.42, body_width: 0.38, leg_len: 0.42, leg_radius: 0.05, neck_len: 0.12, neck_rise: 0.6, head: [0.12, 0.14, 0.2], snout: 0.05, tail_len: 0.12, tail_radius: 0.05, ears: Ears::Floppy, horns: false, coat: [0.93, 0.92, 0.86], accent: [0.92, 0.9, 0.86] },
    QuadrupedParams { body_len: 1.25, body_height: 0.44, body_width: 0.4, leg_len: 0.4, leg_radius: 0.05, neck_len: 0.12, neck_rise: 0.6, head: [0.12, 0.14, 0.2], snout: 0.05, tail_len: 0.12, tail_radius: 0.05, ears: Ears::Floppy, horns: false, coat: [0.9, 0.88, 0.82], accent: [0.08, 0.08, 0.08] },
    QuadrupedParams { body_len: 1.15, body_height: 0.4, body_width: 0.36, leg_len: 0.44, leg_radius: 0.05, neck_len: 0.14, neck_rise: 0.7, head: [0.13, 0.15, 0.2], snout: 0.05, tail_len: 0.15, tail_radius: 0.05, ears: Ears::None, horns: true, coat: [0.8, 0.74, 0.62], accent: [0.55, 0.45, 0.35] },
];

fn quadruped(q: &QuadrupedParams) -> Mesh {
    let mut b = Parts::default();
    let half_len = q.body_len * 0.5;
    let body_y = q.leg_len + q.body_height * 0.6;
    b.blob(p(0.0, body_y, 0.0), v3(q.body_width, q.body_height, half_len), q.coat);

    for &x in &[-1.0f32, 1.0] {
        for &z in &[-1.0f32, 1.0] {
            let top = p(x * q.body_width * 0.55, body_y, z * half_len * 0.62);
            let foot = p(top.x, 0.0, top.z);
            b.rod(foot, top, q.leg_radius, q.coat);
            b.block(
                p(foot.x, q.leg_radius * 0.5, foot.z + q.leg_radius * 0.3),
                v3(q.leg_radius * 1.1, q.leg_radius * 0.5, q.leg_radius * 1.4),
                q.accent,
            );
        }
    }

    let neck_base = p(0.0, body_y + q.body_height * 0.35, half_len * 0.8);
    let neck_dir = v3(0.0, q.neck_rise.sin(), q.neck_rise.cos());
    let head_c = neck_base + neck_dir * (q.neck_len + q.head[1] * 0.6);
    b.rod(neck_base, neck_base + neck_dir * q.neck_len, q.head[0] * 0.75, q.coat);
    b.blob(head_c, v3(q.head[0], q.head[1], q.head[2]), q.coat);
    if q.snout > 0.0 {
        let snout_c = head_c + v3(0.0, -q.head[1] * 0.3, q.head[2] * 0.8 + q.snout * 0.5);
        b.blob(snout_c, v3(q.head[0] * 0.6, q.head[1] * 0.5, q.snout * 0.7 + 0.02), q.accent);
    }
    // eyes
    for &x in &[-1.0f32, 1.0] {
        let eye = head_c + v3(x * q.head[0] * 0.6, q.head[1] * 0.3, q.head[2] * 0.7);
        b.blob(eye, Vector3::repeat(q.head[0] * 0.18), [0.03, 0.03, 0.03]);
    }
    for &x in &[-1.0f32, 1.0] {
        let base = head_c + v3(x * q.head[0] * 0.55, q.head[1] * 0.8, -q.head[2] * 0.2);
        match q.ears {
            Ears::Pointed => {
                b.cone(base, base + v3(x * 0.02, q.head[1] * 0.8, 0.0), q.head[0] * 0.3, 0.0, q.accent);
            }
            Ears::Floppy => {
                b.tilted_blob(
                    base + v3(x * q.head[0] * 0.45, -q.head[1] * 0.6, 0.0),
                    v3(q.head[0] * 0.18, q.head[1] * 0.6, q.head[0] * 0.35),
                    0.2,
                    q.accent,
                );
            }
            Ears::Round => {
                b.blob(base, Vector3::repeat(q.head[0] * 0.28), q.coat);
            }
            Ears::None => {}
        }
        if q.horns {
            let root = head_c + v3(x * q.head[0] * 0.7, q.head[1] * 0.75, 0.0);
            b.cone(root, root + v3(x * q.head[0] * 0.9, q.head[1] * 0.6, 0.05), q.head[0] * 0.16, 0.01, [0.88, 0.84, 0.7]);
        }
    }

    if q.tail_len > 0.0 {
        let root = p(0.0, body_y + q.body_height * 0.3, -half_len * 0.95);
        let tip = root + v3(0.0, -q.tail_len * 0.55, -q.tail_len * 0.8);
        b.cone(root, tip, q.tail_radius, q.tail_radius * 0.4, q.accent);
    }
    b.finish()
}

fn car(v: usize) -> Mesh {
    let (paint, len, width, body_h, cabin_h, cabin_len, cabin_z) = match v {
        0 => ([0.75, 0.08, 0.08], 2.1, 0.9, 0.34, 0.3, 1.0, -0.1),
        1 => ([0.1, 0.22, 0.62], 1.8, 0.85, 0.36, 0.33, 0.95, -0.25),
        _ => ([0.68, 0.7, 0.72], 2.2, 0.95, 0.5, 0.36, 1.3, -0.15),
    };
    let wheel_r = 0.22;
    let mut b = Parts::default();
    let body_y = wheel_r + body_h * 0.5;
    b.block(p(0.0, body_y, 0.0), v3(width * 0.5, body_h * 0.5, len * 0.5), paint);
    b.block(
        p(0.0, body_y + body_h * 0.5 + cabin_h * 0.5, cabin_z),
        v3(width * 0.45, cabin_h * 0.5, cabin_len * 0.5),
        paint,
    );
    // windows inset on the cabin
    b.block(
        p(0.0, body_y + body_h * 0.5 + cabin_h * 0.55, cabin_z),
        v3(width * 0.46, cabin_h * 0.32, cabin_len * 0.46),
        GLASS,
    );
    for &z in &[-len * 0.32, len * 0.32] {
        for &x in &[-width * 0.5, width * 0.5] {
            b.wheel(p(x, wheel_r, z), wheel_r, 0.16, TIRE);
        }
    }
    for &x in &[-width * 0.32, width * 0.32] {
        b.block(p(x, body_y + body_h * 0.15, len * 0.5), v3(0.1, 0.05, 0.02), [0.95, 0.92, 0.7]);
        b.block(p(x, body_y + body_h * 0.15, -len * 0.5), v3(0.09, 0.04, 0.02), [0.7, 0.05, 0.05]);
    }
    b.finish()
}

fn bus(v: usize) -> Mesh {
    let (paint, len, height, decks) = match v {
        0 => ([0.95, 0.72, 0.08], 4.2, 1.3, 1),
        1 => ([0.78, 0.07, 0.07], 4.0, 2.2, 2),
        _ => ([0.92, 0.93, 0.95], 4.6, 1.45, 1),
    };
    let width = 1.05;
    let wheel_r = 0.28;
    let mut b = Parts::default();
    let base = wheel_r * 0.9;
    b.block(p(0.0, base + height * 0.5, 0.0), v3(width * 0.5, height * 0.5, len * 0.5), paint);
    let deck_h = height / decks as f32;
    for d in 0..decks {
        let y = base + deck_h * (d as f32 + 0.62);
        b.block(p(0.0, y, -0.1), v3(width * 0.505, deck_h * 0.18, len * 0.44), GLASS);
    }
    // windshield
    b.block(p(0.0, base + deck_h * 0.62, len * 0.5), v3(width * 0.42, deck_h * 0.22, 0.01), GLASS);
    for &z in &[-len * 0.33, len * 0.33] {
        for &x in &[-width * 0.5, width * 0.5] {
            b.wheel(p(x, wheel_r, z), wheel_r, 0.18, TIRE);
        }
    }
    b.finish()
}

fn truck(v: usize) -> Mesh {
    let wheel_r = 0.3;
    let width = 1.1;
    let mut b = Parts::default();
    let (cab_paint, cab_len) = match v {
        0 => ([0.12, 0.35, 0.6], 0.9),
        1 => ([0.2, 0.2, 0.22], 1.2),
        _ => ([0.85, 0.45, 0.1], 0.9),
    };
    let frame_y = wheel_r + 0.1;
    let cab_z = 1.3;
    b.block(p(0.0, frame_y + 0.5, cab_z), v3(width * 0.5, 0.5, cab_len * 0.5), cab_paint);
    b.block(p(0.0, frame_y + 0.68, cab_z + cab_len * 0.5), v3(width * 0.42, 0.2, 0.01), GLASS);
    b.block(p(0.0, frame_y, -0.2), v3(width * 0.4, 0.08, 1.9), [0.15, 0.15, 0.15]);
    match v {
        0 => {
            b.block(p(0.0, frame_y + 0.75, -0.55), v3(width * 0.52, 0.75, 1.25), [0.9, 0.9, 0.88]);
        }
        1 => {
            // open bed
            b.block(p(0.0, frame_y + 0.12, -0.35), v3(width * 0.5, 0.05, 1.05), [0.2, 0.2, 0.22]);
            for &x in &[-width * 0.5, width * 0.5] {
                b.block(p(x, frame_y + 0.32, -0.35), v3(0.03, 0.22, 1.05), cab_paint);
            }
            b.block(p(0.0, frame_y + 0.32, -1.4), v3(width * 0.5, 0.22, 0.03), cab_paint);
        }
        _ => {
            b.rod(p(0.0, frame_y + 0.6, -1.75), p(0.0, frame_y + 0.6, 0.65), 0.55, CHROME);
        }
    }
    for &z in &[cab_z, -0.6, -1.4] {
        for &x in &[-width * 0.5, width * 0.5] {
            b.wheel(p(x, wheel_r, z), wheel_r, 0.2, TIRE);
        }
    }
    b.finish()
}

fn motorcycle(v: usize) -> Mesh {
    let (paint, wheel_r, tank) = match v {
        0 => ([0.8, 0.06, 0.06], 0.32, [0.16, 0.14, 0.32]),
        1 => ([0.06, 0.06, 0.07], 0.34, [0.18, 0.15, 0.36]),
        _ => ([0.95, 0.5, 0.05], 0.36, [0.13, 0.12, 0.26]),
    };
    let mut b = Parts::default();
    let wheelbase = 0.72;
    b.wheel(p(0.0, wheel_r, wheelbase), wheel_r, 0.12, TIRE);
    b.wheel(p(0.0, wheel_r, -wheelbase), wheel_r, 0.13, TIRE);
    b.blob(p(0.0, wheel_r + 0.38, 0.15), v3(tank[0], tank[1], tank[2]), paint);
    b.block(p(0.0, wheel_r + 0.18, 0.0), v3(0.11, 0.13, 0.3), [0.3, 0.3, 0.32]);
    b.block(p(0.0, wheel_r + 0.36, -0.35), v3(0.12, 0.05, 0.28), [0.05, 0.05, 0.05]);
    b.rod(p(0.0, wheel_r, wheelbase), p(0.0, wheel_r + 0.62, wheelbase - 0.22), 0.03, CHROME);
    b.rod(p(-0.3, wheel_r + 0.62, wheelbase - 0.24), p(0.3, wheel_r + 0.62, wheelbase - 0.24), 0.02, CHROME);
    b.rod(p(0.0, wheel_r, -wheelbase), p(0.0, wheel_r + 0.25, -0.2), 0.035, CHROME);
    b.block(p(0.0, wheel_r + 0.5, wheelbase - 0.15), v3(0.08, 0.06, 0.04), [0.95, 0.92, 0.7]);
    b.rod(p(0.12, wheel_r - 0.05, 0.05), p(0.14, wheel_r + 0.05, -0.75), 0.035, CHROME);
    b.finish()
}

fn bike(v: usize) -> Mesh {
    let (paint, wheel_r, tube) = match v {
        0 => ([0.1, 0.45, 0.75], 0.36, 0.022),
        1 => ([0.2, 0.6, 0.2], 0.33, 0.03),
        _ => ([0.85, 0.85, 0.85], 0.35, 0.02),
    };
    let mut b = Parts::default();
    let front = p(0.0, wheel_r, 0.55);
    let rear = p(0.0, wheel_r, -0.5);
    b.wheel(front, wheel_r, 0.045, TIRE);
    b.wheel(rear, wheel_r, 0.045, TIRE);
    b.wheel(front, wheel_r * 0.15, 0.06, CHROME);
    b.wheel(rear, wheel_r * 0.15, 0.06, CHROME);
    let crank = p(0.0, wheel_r - 0.02, 0.0);
    let seat = p(0.0, wheel_r + 0.5, -0.14);
    let head = p(0.0, wheel_r + 0.48, 0.42);
    b.rod(crank, seat, tube, paint)
        .rod(crank, head, tube, paint)
        .rod(seat, head, tube, paint)
        .rod(rear, crank, tube * 0.8, paint)
        .rod(rear, seat, tube * 0.8, paint)
        .rod(front, head, tube, paint);
    b.blob(seat + v3(0.0, 0.05, 0.0), v3(0.06, 0.03, 0.13), [0.05, 0.05, 0.05]);
    let bar = head + v3(0.0, 0.14, -0.03);
    b.rod(head, bar, tube, paint);
    b.rod(bar + v3(-0.24, 0.0, 0.0), bar + v3(0.24, 0.0, 0.0), tube, [0.1, 0.1, 0.1]);
    b.wheel(crank, 0.09, 0.03, CHROME);
    b.finish()
}

fn airplane(v: usize) -> Mesh {
    let mut b = Parts::default();
    match v {
        0 => {
            // airliner
            let body: Rgb = [0.94, 0.95, 0.97];
            let trim: Rgb = [0.1, 0.25, 0.6];
            b.blob(p(0.0, 0.55, 0.0), v3(0.32, 0.34, 2.4), body);
            b.block(p(0.0, 0.45, 0.1), v3(1.9, 0.04, 0.35), body);
            b.block(p(0.0, 0.95, -2.0), v3(0.03, 0.4, 0.25), trim);
            b.block(p(0.0, 0.65, -2.05), v3(0.7, 0.03, 0.18), body);
            for &x in &[-0.8f32, 0.8] {
                b.rod(p(x, 0.3, -0.1), p(x, 0.3, 0.55), 0.13, CHROME);
            }
            b.block(p(0.0, 0.7, 2.05), v3(0.2, 0.06, 0.12), GLASS);
            for &z in &[1.5f32, -0.1] {
                b.rod(p(0.0, 0.05, z), p(0.0, 0.3, z), 0.03, CHROME);
                b.wheel(p(0.0, 0.08, z), 0.08, 0.1, TIRE);
            }
        }
        1 => {
            // high-wing propeller plane
            let body: Rgb = [0.85, 0.1, 0.1];
            b.blob(p(0.0, 0.6, 0.0), v3(0.22, 0.25, 1.3), body);
            b.block(p(0.0, 0.88, 0.25), v3(1.6, 0.03, 0.25), [0.95, 0.95, 0.95]);
            b.block(p(0.0, 0.85, -1.1), v3(0.02, 0.25, 0.15), body);
            b.block(p(0.0, 0.65, -1.15), v3(0.5, 0.02, 0.12), [0.95, 0.95, 0.95]);
            b.block(p(0.0, 0.6, 1.32), v3(0.05, 0.32, 0.02), [0.1, 0.1, 0.1]);
            b.block(p(0.0, 0.75, 0.75), v3(0.18, 0.08, 0.15), GLASS);
            for &x in &[-0.28f32, 0.28] {
                b.rod(p(x, 0.08, 0.45), p(x * 0.5, 0.45, 0.45), 0.02, CHROME);
                b.wheel(p(x, 0.08, 0.45), 0.08, 0.06, TIRE);
            }
        }
        _ => {
            // jet with swept wings
            let body: Rgb = [0.5, 0.53, 0.56];
            b.blob(p(0.0, 0.55, 0.0), v3(0.25, 0.25, 2.0), body);
            b.cone(p(0.0, 0.55, 1.9), p(0.0, 0.55, 2.5), 0.15, 0.0, body);
            for &x in &[-1.0f32, 1.0] {
                let rot = Rotation3::from_axis_angle(&Vector3::y_axis(), x * 0.5);
                let wing = cuboid(p(0.0, 0.0, 0.0), v3(0.9, 0.03, 0.3), body);
                let mut wing = wing;
                for q in &mut wing.positions {
                    *q = rot * *q + v3(x * 0.85, 0.5, -0.3);
                }
                b.mesh.append(&wing);
            }
            b.block(p(0.0, 0.95, -1.6), v3(0.03, 0.38, 0.3), body);
            b.block(p(0.0, 0.72, 1.1), v3(0.14, 0.09, 0.35), GLASS);
            b.rod(p(0.0, 0.55, -2.1), p(0.0, 0.55, -1.85), 0.17, [0.2, 0.2, 0.2]);
            for &z in &[1.2f32, -0.5] {
                b.rod(p(0.0, 0.06, z), p(0.0, 0.35, z), 0.03, CHROME);
                b.wheel(p(0.0, 0.07, z), 0.07, 0.08, TIRE);
            }
        }
    }
    b.finish()
}

fn bird(v: usize) -> Mesh {
    let (plumage, breast, beak, wing_span) = match v {
        0 => ([0.45, 0.32, 0.2], [0.78, 0.68, 0.52], [0.3, 0.25, 0.2], 0.18),
        1 => ([0.06, 0.06, 0.08], [0.1, 0.1, 0.12], [0.08, 0.08, 0.08], 0.22),
        _ => ([0.8, 0.08, 0.1], [0.85, 0.2, 0.15], [0.95, 0.6, 0.1], 0.16),
    };
    let mut b = Parts::default();
    let body_c = p(0.0, 0.32, 0.0);
    b.tilted_blob(body_c, v3(0.14, 0.15, 0.26), -0.35, plumage);
    b.tilted_blob(body_c + v3(0.0, -0.03, 0.08), v3(0.11, 0.12, 0.16), -0.35, breast);
    let head = body_c + v3(0.0, 0.2, 0.2);
    b.blob(head, Vector3::repeat(0.1), plumage);
    b.cone(head + v3(0.0, -0.01, 0.08), head + v3(0.0, -0.02, 0.2), 0.035, 0.0, beak);
    for &x in &[-1.0f32, 1.0] {
        b.tilted_blob(body_c + v3(x * 0.13, 0.03, -0.04), v3(0.03, wing_span * 0.5, 0.22), -0.45, plumage);
        b.blob(head + v3(x * 0.07, 0.03, 0.05), Vector3::repeat(0.018), [0.02, 0.02, 0.02]);
        b.rod(p(x * 0.05, 0.0, 0.02), p(x * 0.05, 0.2, 0.0), 0.012, [0.6, 0.45, 0.25]);
    }
    b.tilted_blob(body_c + v3(0.0, -0.04, -0.32), v3(0.07, 0.02, 0.15), 0.5, plumage);
    b.finish()
}

fn human(v: usize) -> Mesh {
    let (shirt, pants, skin, height) = match v {
        0 => ([0.15, 0.35, 0.7], [0.15, 0.15, 0.2], [0.87, 0.7, 0.55], 1.75),
        1 => ([0.75, 0.15, 0.2], [0.35, 0.3, 0.25], [0.55, 0.38, 0.26], 1.65),
        _ => ([0.9, 0.75, 0.2], [0.1, 0.25, 0.2], [0.95, 0.8, 0.68], 1.85),
    };
    let s = height / 1.75;
    let mut b = Parts::default();
    let hip = 0.9 * s;
    for &x in &[-0.1f32, 0.1] {
        b.rod(p(x * s, 0.05, 0.0), p(x * s, hip, 0.0), 0.07 * s, pants);
        b.block(p(x * s, 0.04, 0.05 * s), v3(0.055 * s, 0.04, 0.12 * s), [0.1, 0.08, 0.06]);
    }
    b.cone(p(0.0, hip - 0.05, 0.0), p(0.0, 1.45 * s, 0.0), 0.17 * s, 0.21 * s, shirt);
    for &x in &[-1.0f32, 1.0] {
        let shoulder = p(x * 0.25 * s, 1.4 * s, 0.0);
        let hand = p(x * 0.3 * s, 0.85 * s, 0.05 * s);
        b.rod(shoulder, hand, 0.055 * s, shirt);
        b.blob(hand, Vector3::repeat(0.05 * s), skin);
    }
    b.rod(p(0.0, 1.45 * s, 0.0), p(0.0, 1.53 * s, 0.0), 0.05 * s, skin);
    let head = p(0.0, 1.63 * s, 0.0);
    b.blob(head, v3(0.1 * s, 0.12 * s, 0.11 * s), skin);
    b.blob(head + v3(0.0, 0.05 * s, -0.02 * s), v3(0.105 * s, 0.08 * s, 0.1 * s), [0.15, 0.1, 0.06]);
    b.blob(head + v3(0.0, -0.01 * s, 0.1 * s), Vector3::repeat(0.02 * s), skin);
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_category_builds_distinct_variants() {
        for category in DEFAULT_CATEGORIES {
            let meshes: Vec<Mesh> = (0..VARIANTS_PER_CATEGORY)
                .map(|v| build(category, v).unwrap())
                .collect();
            for (i, m) in meshes.iter().enumerate() {
                assert!(m.triangle_count() > 20, "{category}/{i}");
                assert_eq!(m.colors.len(), m.triangle_count());
                let (lo, _) = m.bounds().unwrap();
                assert!(lo.y > -0.05, "{category}/{i} sinks below ground: {}", lo.y);
                for p in &m.positions {
                    assert!(p.coords.iter().all(|c| c.is_finite()));
                }
            }
            for i in 0..meshes.len() {
                for j in i + 1..meshes.len() {
                    assert_ne!(meshes[i], meshes[j], "{category} variants {i} and {j} identical");
                }
            }
        }
        assert!(build("platypus", 0).is_none());
    }
}
