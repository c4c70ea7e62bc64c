//! Time, season, and weather domains and the shading parameters derived
//! from them.

use nalgebra::Vector3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mesh::Rgb;
use super::raster::FrameBuffer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeOfDay {
    Day,
    Night,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Season {
    SpringSummer,
    Autumn,
    Winter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weather {
    Clear,
    Sandstorm,
    Foggy,
    Rainy,
    Snowy,
}

impl TimeOfDay {
    pub fn from_domain(name: &str) -> Option<Self> {
        match name {
            "day" => Some(Self::Day),
            "night" => Some(Self::Night),
            _ => None,
        }
    }
}

impl Season {
    pub fn from_domain(name: &str) -> Option<Self> {
        match name {
            "spring-summer" => Some(Self::SpringSummer),
            "autumn" => Some(Self::Autumn),
            "winter" => Some(Self::Winter),
            _ => None,
        }
    }
}

impl Weather {
    pub fn from_domain(name: &str) -> Option<Self> {
        match name {
            "clear" => Some(Self::Clear),
            "sandstorm" => Some(Self::Sandstorm),
            "foggy" => Some(Self::Foggy),
            "rainy" => Some(Self::Rainy),
            "snowy" => Some(Self::Snowy),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("snowy weather requires the winter season, got {0:?}")]
pub struct SnowOutOfSeason(pub Season);

/// Exponential distance fog: `visibility = exp(-density · depth)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fog {
    pub density: f32,
    pub color: Rgb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParticleKind {
    Rain,
    Snow,
}

/// Screen-space precipitation drawn after fog.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particles {
    pub kind: ParticleKind,
    /// Count at 512×512; scaled with frame area.
    pub count: u32,
    pub color: Rgb,
    pub opacity: f32,
    /// Horizontal drift per unit of fall.
    pub slant: f32,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    pub time: TimeOfDay,
    pub season: Season,
    pub weather: Weather,
    /// Unit vector pointing toward the key light.
    pub light_direction: [f32; 3],
    pub light_color: Rgb,
    pub light_intensity: f32,
    pub ambient_color: Rgb,
    pub ambient_intensity: f32,
    pub sky_zenith: Rgb,
    pub sky_horizon: Rgb,
    pub fog: Option<Fog>,
    pub particles: Option<Particles>,
    pub ground_color: Rgb,
    pub foliage_color: Rgb,
    /// 0 for bare ground, 1 for full snow cover.
    pub snow_cover: f32,
}

const SNOW: Rgb = [0.93, 0.94, 0.97];

impl EnvironmentSpec {
    pub fn derive<R: Rng>(
        time: TimeOfDay,
        season: Season,
        weather: Weather,
        rng: &mut R,
    ) -> Result<Self, SnowOutOfSeason> {
        if weather == Weather::Snowy && season != Season::Winter {
            return Err(SnowOutOfSeason(season));
        }

        let elevation = rng.random_range(30.0f32..65.0).to_radians();
        let azimuth = rng.random_range(0.0f32..360.0).to_radians();
        let light_direction = [
            elevation.cos() * azimuth.cos(),
            elevation.sin(),
            elevation.cos() * azimuth.sin(),
        ];

        let (mut ground, mut foliage) = match season {
            Season::SpringSummer => ([0.33, 0.55, 0.2], [0.18, 0.48, 0.14]),
            Season::Autumn => ([0.52, 0.42, 0.2], [0.85, 0.42, 0.1]),
            Season::Winter => ([0.6, 0.58, 0.52], [0.42, 0.34, 0.26]),
        };
        for c in ground.iter_mut().chain(foliage.iter_mut()) {
            *c = (*c * rng.random_range(0.94f32..1.06)).min(1.0);
        }

        let mut env = EnvironmentSpec {
            time,
            season,
            weather,
            light_direction,
            light_color: [1.0, 0.97, 0.9],
            light_intensity: rng.random_range(0.95f32..1.05),
            ambient_color: [0.85, 0.9, 1.0],
            ambient_intensity: 0.35,
            sky_zenith: [0.3, 0.5, 0.88],
            sky_horizon: [0.62, 0.76, 0.95],
            fog: None,
            particles: None,
            ground_color: ground,
            foliage_color: foliage,
            snow_cover: 0.0,
        };

        match weather {
            Weather::Clear => {}
            Weather::Sandstorm => {
                let color = [0.74, 0.58, 0.36];
                env.light_color = [1.0, 0.8, 0.55];
                env.light_intensity *= 0.6;
                env.ambient_color = [1.0, 0.85, 0.65];
                env.ambient_intensity = 0.4;
                env.fog = Some(Fog {
                    density: rng.random_range(0.16..0.24),
                    color,
                });
                env.sky_zenith = color;
                env.sky_horizon = color;
            }
            Weather::Foggy => {
                let color = [0.78, 0.8, 0.82];
                env.light_intensity *= 0.55;
                env.ambient_intensity = 0.45;
                env.fog = Some(Fog {
                    density: rng.random_range(0.12..0.2),
                    color,
                });
                env.sky_zenith = color;
                env.sky_horizon = color;
            }
            Weather::Rainy => {
                env.light_intensity *= 0.5;
                env.ambient_color = [0.8, 0.85, 0.92];
                env.sky_zenith = [0.4, 0.43, 0.48];
                env.sky_horizon = [0.55, 0.58, 0.62];
                env.fog = Some(Fog {
                    density: 0.03,
                    color: [0.55, 0.58, 0.62],
                });
                env.particles = Some(Particles {
                    kind: ParticleKind::Rain,
                    count: rng.random_range(700..1000),
                    color: [0.78, 0.8, 0.86],
                    opacity: 0.4,
                    slant: rng.random_range(0.1..0.3),
                    seed: rng.random(),
                });
                for c in &mut env.ground_color {
                    *c *= 0.7;
                }
            }
            Weather::Snowy => {
                env.light_intensity *= 0.75;
                env.ambient_intensity = 0.45;
                env.sky_zenith = [0.7, 0.73, 0.78];
                env.sky_horizon = [0.85, 0.87, 0.9];
                env.fog = Some(Fog {
                    density: 0.04,
                    color: [0.86, 0.88, 0.91],
                });
                env.particles = Some(Particles {
                    kind: ParticleKind::Snow,
                    count: rng.random_range(500..900),
                    color: [1.0, 1.0, 1.0],
                    opacity: 0.9,
                    slant: rng.random_range(-0.15..0.15),
                    seed: rng.random(),
                });
                env.snow_cover = rng.random_range(0.8..0.95);
                env.ground_color = lerp(env.ground_color, SNOW, env.snow_cover);
                env.foliage_color = lerp(env.foliage_color, SNOW, env.snow_cover * 0.5);
            }
        }

        if time == TimeOfDay::Night {
            // moonlight: dim and blue-shifted
            env.light_color = [0.55, 0.65, 1.0];
            env.light_intensity *= 0.22;
            env.ambient_color = [0.45, 0.55, 1.0];
            env.ambient_intensity *= 0.3;
            env.sky_zenith = scale(env.sky_zenith, 0.1);
            env.sky_horizon = scale(env.sky_horizon, 0.18);
            if let Some(fog) = env.fog.as_mut() {
                fog.color = scale(fog.color, 0.22);
            }
            if let Some(p) = env.particles.as_mut() {
                p.color = scale(p.color, 0.5);
            }
        }
        Ok(env)
    }

    /// Flat Lambert shading of one face.
    pub fn shade(&self, normal: &Vector3<f32>, albedo: Rgb) -> Rgb {
        let l = Vector3::from(self.light_direction);
        let diffuse = normal.dot(&l).max(0.0) * self.light_intensity;
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = albedo[i]
                * (self.ambient_color[i] * self.ambient_intensity + self.light_color[i] * diffuse);
        }
        out
    }

    pub fn sky_at(&self, row_fraction: f32) -> Rgb {
        lerp(self.sky_zenith, self.sky_horizon, row_fraction.clamp(0.0, 1.0))
    }

    /// Fills empty pixels with sky and applies distance fog in place.
    pub fn apply_atmosphere(&self, frame: &FrameBuffer, color: &mut [Rgb]) {
        let w = frame.width as usize;
        let h = frame.height as usize;
        for y in 0..h {
            let sky = self.sky_at(y as f32 / h.max(1) as f32);
            for x in 0..w {
                let i = y * w + x;
                match frame.depth_at(i) {
                    None => color[i] = sky,
                    Some(depth) => {
                        if let Some(fog) = &self.fog {
                            let visibility = (-fog.density * depth).exp();
                            color[i] = lerp(fog.color, color[i], visibility);
                        }
                    }
                }
            }
        }
    }

    /// Draws rain streaks or snow flakes over the frame.
    pub fn apply_particles(&self, width: u32, height: u32, color: &mut [Rgb]) {
        use rand::SeedableRng;
        let Some(p) = &self.particles else {
            return;
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(p.seed);
        let scale_px = height as f32 / 512.0;
        let area = (width as f32 * height as f32) / (512.0 * 512.0);
        let count = (p.count as f32 * area).round() as u32;
        let w = width as i64;
        let h = height as i64;
        let mut blend = |x: i64, y: i64, a: f32| {
            if x >= 0 && y >= 0 && x < w && y < h {
                let i = (y * w + x) as usize;
                color[i] = lerp(color[i], p.color, a);
            }
        };
        for _ in 0..count {
            let x0 = rng.random_range(0.0..width as f32);
            let y0 = rng.random_range(-0.05 * height as f32..height as f32);
            match p.kind {
                ParticleKind::Rain => {
                    let len = rng.random_range(10.0f32..24.0) * scale_px;
                    let steps = len.ceil().max(1.0) as usize;
                    let norm = (1.0 + p.slant * p.slant).sqrt();
                    for s in 0..steps {
                        let t = s as f32;
                        blend(
                            (x0 + t * p.slant / norm) as i64,
                            (y0 + t / norm) as i64,
                            p.opacity,
                        );
                    }
                }
                ParticleKind::Snow => {
                    let r = rng.random_range(0.8f32..2.2) * scale_px;
                    let ri = r.ceil() as i64;
                    for dy in -ri..=ri {
                        for dx in -ri..=ri {
                            let d2 = (dx * dx + dy * dy) as f32;
                            if d2 <= r * r {
                                blend(x0 as i64 + dx, y0 as i64 + dy, p.opacity);
                            }
                        }
                    }
                }
            }
        }
    }
}

pub fn lerp(a: Rgb, b: Rgb, t: f32) -> Rgb {
    [
        a[0] + (b[0] - a[0]) * t,
        a[1] + (b[1] - a[1]) * t,
        a[2] + (b[2] - a[2]) * t,
    ]
}

fn scale(c: Rgb, k: f32) -> Rgb {
    c.map(|x| x * k)
}
