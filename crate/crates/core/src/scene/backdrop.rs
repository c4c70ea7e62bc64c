//! Ground plane and background props.
//!
//! Props are scattered on the far side of the target as seen from the
//! camera, outside a clear radius, so they can sit behind the object but
//! never between it and the camera.

use nalgebra::{Point3, Rotation3, Vector3};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::environment::{EnvironmentSpec, Season};
use super::mesh::{cuboid, cylinder, ellipsoid, frustum, Mesh, Rgb};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backdrop {
    Meadow,
    Roadside,
    Park,
    Farmland,
}

impl Backdrop {
    pub const ALL: [Backdrop; 4] = [Backdrop::Meadow, Backdrop::Roadside, Backdrop::Park, Backdrop::Farmland];
}

pub const GROUND_HALF_EXTENT: f32 = 60.0;
/// Slightly below y=0 so resting objects never tie with the ground.
pub const GROUND_Y: f32 = -0.002;
const CLEAR_RADIUS: f32 = 7.0;
const PROP_RADIUS: f32 = 22.0;

pub fn ground(env: &EnvironmentSpec) -> Mesh {
    let e = GROUND_HALF_EXTENT;
    let mut m = Mesh::new();
    m.push_quad(
        [
            Point3::new(-e, GROUND_Y, -e),
            Point3::new(e, GROUND_Y, -e),
            Point3::new(e, GROUND_Y, e),
            Point3::new(-e, GROUND_Y, e),
        ],
        env.ground_color,
    );
    m
}

/// Props for `backdrop`; `away` is the horizontal direction from the camera
/// toward the target.
pub fn props(backdrop: Backdrop, env: &EnvironmentSpec, away: Vector3<f32>, seed: u64) -> Mesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = away.z.atan2(away.x);
    let mut m = Mesh::new();

    let spot = |rng: &mut ChaCha8Rng, min_r: f32| {
        let a = base + rng.random_range(-1.2f32..1.2);
        let r = rng.random_range(min_r..PROP_RADIUS);
        Point3::new(r * a.cos(), 0.0, r * a.sin())
    };

    if backdrop == Backdrop::Roadside {
        // asphalt strip crossing behind the target
        let dir = Vector3::new(-away.z, 0.0, away.x);
        let mid = Point3::origin() + away * (CLEAR_RADIUS + 2.0);
        let w = away * 2.0;
        let l = dir * GROUND_HALF_EXTENT;
        let y = Vector3::y() * 0.004;
        m.push_quad(
            [mid - l - w + y, mid + l - w + y, mid + l + w + y, mid - l + w + y],
            [0.22, 0.22, 0.24],
        );
    }

    let (trees, rocks, buildings, fences) = match backdrop {
        Backdrop::Meadow => (rng.random_range(3..7), rng.random_range(2..5), 0, 0),
        Backdrop::Roadside => (rng.random_range(1..4), 0, rng.random_range(3..6), 0),
        Backdrop::Park => (rng.random_range(7..12), rng.random_range(0..3), 0, 0),
        Backdrop::Farmland => (rng.random_range(1..4), 0, rng.random_range(1..3), rng.random_range(6..12)),
    };

    for _ in 0..trees {
        let p = spot(&mut rng, CLEAR_RADIUS);
        m.append(&tree(p, env, &mut rng));
    }
    for _ in 0..rocks {
        let p = spot(&mut rng, CLEAR_RADIUS);
        let r = rng.random_range(0.3f32..0.9);
        let gray = rng.random_range(0.4f32..0.6);
        m.append(&ellipsoid(
            p + Vector3::y() * r * 0.3,
            Vector3::new(r, r * 0.6, r * 0.8),
            Rotation3::from_axis_angle(&Vector3::y_axis(), rng.random_range(0.0..3.0)),
            8,
            [gray, gray * 0.97, gray * 0.92],
        ));
    }
    const FACADES: [Rgb; 5] = [
        [0.72, 0.66, 0.58],
        [0.6, 0.32, 0.26],
        [0.8, 0.78, 0.72],
        [0.45, 0.5, 0.55],
        [0.68, 0.56, 0.4],
    ];
    for _ in 0..buildings {
        let p = spot(&mut rng, CLEAR_RADIUS + 4.0);
        let half = Vector3::new(
            rng.random_range(1.5f32..3.5),
            rng.random_range(1.5f32..4.5),
            rng.random_range(1.5f32..3.5),
        );
        let color = *FACADES.choose(&mut rng).expect("non-empty");
        m.append(&cuboid(p + Vector3::y() * half.y, half, color));
        // roof
        m.append(&cuboid(
            p + Vector3::y() * (half.y * 2.0 + 0.1),
            Vector3::new(half.x + 0.2, 0.1, half.z + 0.2),
            [0.3, 0.26, 0.24],
        ));
    }
    if fences > 0 {
        // one straight run of posts and rails
        let dir = Vector3::new(-away.z, 0.0, away.x);
        let start = Point3::origin() + away * (CLEAR_RADIUS + rng.random_range(0.0f32..3.0)) - dir * (fences as f32);
        let wood = [0.45, 0.33, 0.2];
        for i in 0..=fences {
            let p = start + dir * (2.0 * i as f32);
            m.append(&cuboid(p + Vector3::y() * 0.5, Vector3::new(0.06, 0.5, 0.06), wood));
        }
        let end = start + dir * (2.0 * fences as f32);
        for h in [0.45f32, 0.85] {
            let mid = nalgebra::center(&start, &end) + Vector3::y() * h;
            let half = (end - start) * 0.5;
            let mut rail = cuboid(Point3::origin(), Vector3::new(half.norm(), 0.04, 0.03), wood);
            let rot = Rotation3::rotation_between(&Vector3::x(), &half).unwrap_or_else(Rotation3::identity);
            rail = rail.transformed(&nalgebra::Isometry3::from_parts(
                nalgebra::Translation3::from(mid.coords),
                rot.into(),
            ));
            m.append(&rail);
        }
    }
    m
}

fn tree(at: Point3<f32>, env: &EnvironmentSpec, rng: &mut ChaCha8Rng) -> Mesh {
    let trunk_h = rng.random_range(1.2f32..2.4);
    let bark = [0.33, 0.24, 0.16];
    let mut m = cylinder(at, at + Vector3::y() * trunk_h, 0.12, 6, bark);
    let conifer = rng.random_bool(0.3);
    let top = at + Vector3::y() * trunk_h;
    if conifer {
        // evergreen: keeps its needles in every season
        let green = [0.12, 0.3, 0.16];
        let c = if env.snow_cover > 0.0 {
            super::environment::lerp(green, [0.93, 0.94, 0.97], env.snow_cover * 0.4)
        } else {
            green
        };
        m.append(&frustum(top - Vector3::y() * 0.6, top + Vector3::y() * 2.2, 1.0, 0.0, 8, c));
    } else if env.season == Season::Winter {
        // bare branches
        for k in 0..4 {
            let a = k as f32 * std::f32::consts::FRAC_PI_2 + rng.random_range(0.0f32..0.6);
            let tip = top + Vector3::new(a.cos() * 0.8, 0.9, a.sin() * 0.8);
            m.append(&cylinder(top - Vector3::y() * 0.2, tip, 0.05, 4, bark));
        }
    } else {
        let r = rng.random_range(0.9f32..1.5);
        m.append(&ellipsoid(
            top + Vector3::y() * r * 0.7,
            Vector3::new(r, r * 0.9, r),
            Rotation3::identity(),
            10,
            env.foliage_color,
        ));
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::environment::{TimeOfDay, Weather};

    fn env() -> EnvironmentSpec {
        EnvironmentSpec::derive(TimeOfDay::Day, Season::Autumn, Weather::Clear, &mut ChaCha8Rng::seed_from_u64(0)).unwrap()
    }

    #[test]
    fn props_stay_out_of_the_clear_radius() {
        let away = Vector3::new(0.0, 0.0, -1.0);
        for b in Backdrop::ALL {
            for seed in 0..8 {
                let m = props(b, &env(), away, seed);
                for p in &m.positions {
                    let r = (p.x * p.x + p.z * p.z).sqrt();
                    // canopies and roofs may overhang slightly
                    assert!(r > CLEAR_RADIUS - 4.0, "{b:?} seed {seed}: r={r}");
                    // nothing sits on the camera side
                    assert!(p.z < 2.5, "{b:?} seed {seed}: z={}", p.z);
                }
            }
        }
    }

    #[test]
    fn props_are_seeded() {
        let away = Vector3::new(1.0, 0.0, 0.0);
        let a = props(Backdrop::Park, &env(), away, 5);
        let b = props(Backdrop::Park, &env(), away, 5);
        assert_eq!(a.positions, b.positions);
    }
}
