//! Scene sampling: from a domain combination and a seed to a complete,
//! self-describing [`SceneSpec`].

use nalgebra::Vector3;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::backdrop::Backdrop;
use super::camera::{Camera, CameraSpec, Orientation, View};
use super::environment::{EnvironmentSpec, Season, SnowOutOfSeason, TimeOfDay, Weather};
use super::mesh::{hexahedron, Mesh, Rgb};
use super::occlusion::OcclusionBin;
use super::raster::{FrameBuffer, Rasterizer, LAYER_OCCLUDER, LAYER_TARGET};
use super::registry::{CategoryRegistry, RegistryError, OBJECT_RADIUS};
use crate::taxonomy::{DomainCombination, Taxonomy, TaxonomyError, Verdict};

pub const WEATHER_SHIFT: &str = "weathers";
pub const VIEW_SHIFT: &str = "views";
pub const TIME_SHIFT: &str = "time";
pub const SEASON_SHIFT: &str = "seasons";
pub const OCCLUSION_SHIFT: &str = "occlusion";

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error("combination is not valid: {0}")]
    InvalidCombination(Verdict),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("the renderer has no model for domain `{domain}` of shift `{shift}`")]
    UnsupportedDomain { shift: String, domain: String },
    #[error(transparent)]
    Environment(#[from] SnowOutOfSeason),
    #[error("bin unreachable: no occluder placement hit `{bin}` within {attempts} attempts")]
    BinUnreachable { bin: OcclusionBin, attempts: usize },
    #[error("object not visible")]
    ObjectNotVisible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneOptions {
    pub width: u32,
    pub height: u32,
    /// Bound on each jitter axis, in degrees.
    pub jitter_deg: f32,
    pub occluder_attempts: usize,
    pub vfov_deg: f32,
    pub distance: (f32, f32),
}

impl Default for SceneOptions {
    fn default() -> Self {
        Self {
            width: 512,
            height: 512,
            jitter_deg: 5.0,
            occluder_attempts: 64,
            vfov_deg: 40.0,
            distance: (3.6, 4.4),
        }
    }
}

/// How an occluder enters the target's silhouette.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OccluderKind {
    FromLeft,
    FromRight,
    FromTop,
    FromBottom,
    VerticalBand,
    HorizontalBand,
}

impl OccluderKind {
    pub const ALL: [OccluderKind; 6] = [
        OccluderKind::FromLeft,
        OccluderKind::FromRight,
        OccluderKind::FromTop,
        OccluderKind::FromBottom,
        OccluderKind::VerticalBand,
        OccluderKind::HorizontalBand,
    ];
}

/// A camera-aligned slab: every point of `screen_rect` (pixels, `[x0, y0,
/// x1, y1]`) is covered between depths `depth.0` and `depth.1`, so its
/// projected footprint is exactly the rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccluderPlacement {
    pub kind: OccluderKind,
    pub screen_rect: [f32; 4],
    pub depth: (f32, f32),
    pub color: Rgb,
}

impl OccluderPlacement {
    pub fn mesh(&self, camera: &Camera) -> Mesh {
        let [x0, y0, x1, y1] = self.screen_rect;
        let face = |d: f32| {
            [(x0, y0), (x1, y0), (x1, y1), (x0, y1)].map(|(x, y)| camera.camera_to_world(&camera.unproject(x, y, d)))
        };
        let n = face(self.depth.0);
        let f = face(self.depth.1);
        hexahedron([n[0], n[1], n[2], n[3], f[0], f[1], f[2], f[3]], self.color)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub seed: u64,
    pub category: String,
    pub mesh_variant: usize,
    pub scene_background: Backdrop,
    pub camera: CameraSpec,
    pub environment: EnvironmentSpec,
    pub occluders: Vec<OccluderPlacement>,
    pub target_combination: DomainCombination,
    pub width: u32,
    pub height: u32,
}

impl SceneSpec {
    pub fn camera(&self) -> Camera {
        Camera::from_spec(&self.camera, self.width, self.height)
    }

    /// Seed for backdrop prop placement, independent of the sampling stream.
    pub fn backdrop_seed(&self) -> u64 {
        self.seed ^ 0x9e37_79b9_7f4a_7c15
    }
}

/// Scene-relevant domains of a combination. Shifts the taxonomy does not
/// define fall back to clear / spring-summer / day / front / no occlusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneDomains {
    pub weather: Weather,
    pub season: Season,
    pub time: TimeOfDay,
    pub view: View,
    pub occlusion: OcclusionBin,
}

impl SceneDomains {
    pub fn from_combination(taxonomy: &Taxonomy, c: &DomainCombination) -> Result<Self, SceneError> {
        fn pick<T>(
            taxonomy: &Taxonomy,
            c: &DomainCombination,
            shift: &str,
            default: T,
            parse: fn(&str) -> Option<T>,
        ) -> Result<T, SceneError> {
            if taxonomy.shift(shift).is_none() {
                return Ok(default);
            }
            let domain = c.get(shift).unwrap_or_default();
            parse(domain).ok_or_else(|| SceneError::UnsupportedDomain {
                shift: shift.to_string(),
                domain: domain.to_string(),
            })
        }
        Ok(Self {
            weather: pick(taxonomy, c, WEATHER_SHIFT, Weather::Clear, Weather::from_domain)?,
            season: pick(taxonomy, c, SEASON_SHIFT, Season::SpringSummer, Season::from_domain)?,
            time: pick(taxonomy, c, TIME_SHIFT, TimeOfDay::Day, TimeOfDay::from_domain)?,
            view: pick(taxonomy, c, VIEW_SHIFT, View::Front, View::from_domain)?,
            occlusion: pick(taxonomy, c, OCCLUSION_SHIFT, OcclusionBin::None, OcclusionBin::from_domain)?,
        })
    }
}

pub fn sample_scene(
    taxonomy: &Taxonomy,
    registry: &CategoryRegistry,
    combination: &DomainCombination,
    category: &str,
    seed: u64,
    options: &SceneOptions,
) -> Result<SceneSpec, SceneError> {
    let (mut spec, bin, mut rng) = prepare(taxonomy, registry, combination, category, seed, options)?;
    if bin != OcclusionBin::None {
        let mesh = registry.mesh(category, spec.mesh_variant)?;
        let occluder = search_occluder(&spec, mesh, bin, options.occluder_attempts, &mut rng)?;
        spec.occluders.push(occluder);
    }
    Ok(spec)
}

/// Everything [`sample_scene`] decides before the occluder search; used to
/// dump the scene when the search fails.
pub fn sample_unoccluded(
    taxonomy: &Taxonomy,
    registry: &CategoryRegistry,
    combination: &DomainCombination,
    category: &str,
    seed: u64,
    options: &SceneOptions,
) -> Result<SceneSpec, SceneError> {
    prepare(taxonomy, registry, combination, category, seed, options).map(|(spec, _, _)| spec)
}

fn prepare(
    taxonomy: &Taxonomy,
    registry: &CategoryRegistry,
    combination: &DomainCombination,
    category: &str,
    seed: u64,
    options: &SceneOptions,
) -> Result<(SceneSpec, OcclusionBin, ChaCha8Rng), SceneError> {
    let verdict = taxonomy.validate_combination(combination)?;
    if !verdict.is_valid() {
        return Err(SceneError::InvalidCombination(verdict));
    }
    let domains = SceneDomains::from_combination(taxonomy, combination)?;
    let variants = registry.get(category)?.variants.len();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mesh_variant = rng.random_range(0..variants);
    let mesh = registry.mesh(category, mesh_variant)?;
    let scene_background = *Backdrop::ALL.choose(&mut rng).expect("non-empty");

    let (lo, hi) = mesh.bounds().ok_or(SceneError::ObjectNotVisible)?;
    let look_at = nalgebra::center(&lo, &hi);
    let j = options.jitter_deg;
    let mut jitter = || if j > 0.0 { rng.random_range(-j..=j) } else { 0.0 };
    let jitter = Orientation::new(jitter(), jitter(), jitter());
    let camera = CameraSpec {
        view: domains.view,
        base_orientation: domains.view.base_orientation(),
        jitter,
        distance: rng.random_range(options.distance.0..=options.distance.1),
        vfov_deg: options.vfov_deg,
        look_at: look_at.into(),
    };
    let environment = EnvironmentSpec::derive(domains.time, domains.season, domains.weather, &mut rng)?;

    let spec = SceneSpec {
        seed,
        category: category.to_string(),
        mesh_variant,
        scene_background,
        camera,
        environment,
        occluders: Vec::new(),
        target_combination: combination.clone(),
        width: options.width,
        height: options.height,
    };
    Ok((spec, domains.occlusion, rng))
}

/// Ratio band aimed at inside each bin, away from the boundaries so pixel
/// quantization cannot push a hit into a neighbor.
fn aim(bin: OcclusionBin) -> (f64, f64) {
    match bin {
        OcclusionBin::None => (0.0, 0.0),
        OcclusionBin::Light => (0.03, 0.17),
        OcclusionBin::Partial => (0.22, 0.38),
        OcclusionBin::Moderate => (0.42, 0.58),
        OcclusionBin::Heavy => (0.62, 0.78),
    }
}

/// Target-only mask pass.
pub(crate) fn target_pass(camera: &Camera, mesh: &Mesh) -> FrameBuffer {
    let mut r = Rasterizer::new(camera, false);
    r.draw(mesh, LAYER_TARGET, |_, c| c);
    r.into_frame()
}

/// Target plus occluders mask pass.
pub(crate) fn occluded_pass(camera: &Camera, mesh: &Mesh, occluders: &[OccluderPlacement]) -> FrameBuffer {
    let mut r = Rasterizer::new(camera, false);
    r.draw(mesh, LAYER_TARGET, |_, c| c);
    for o in occluders {
        r.draw(&o.mesh(camera), LAYER_OCCLUDER, |_, c| c);
    }
    r.into_frame()
}

const OCCLUDER_COLORS: [Rgb; 5] = [
    [0.5, 0.5, 0.48],  // concrete
    [0.46, 0.34, 0.22], // timber
    [0.2, 0.38, 0.18], // hedge
    [0.62, 0.2, 0.16], // brick
    [0.25, 0.3, 0.4],  // painted panel
];

fn search_occluder(
    spec: &SceneSpec,
    mesh: &Mesh,
    bin: OcclusionBin,
    attempts: usize,
    rng: &mut ChaCha8Rng,
) -> Result<OccluderPlacement, SceneError> {
    let camera = spec.camera();
    let full = target_pass(&camera, mesh);
    let w = full.width as usize;
    let h = full.height as usize;
    let mut cols = vec![0usize; w];
    let mut rows = vec![0usize; h];
    for (i, _) in full.layer.iter().enumerate().filter(|(_, &l)| l == LAYER_TARGET) {
        cols[i % w] += 1;
        rows[i / w] += 1;
    }
    let total: usize = cols.iter().sum();
    if total == 0 {
        return Err(SceneError::ObjectNotVisible);
    }
    let span = |v: &[usize]| {
        let first = v.iter().position(|&c| c > 0).unwrap_or(0);
        let last = v.iter().rposition(|&c| c > 0).unwrap_or(0);
        (first, last + 1)
    };
    let (bx0, bx1) = span(&cols);
    let (by0, by1) = span(&rows);

    // occluders stay clear of the target's bounding sphere
    let max_depth = spec.camera.distance - OBJECT_RADIUS - 0.1;
    let (lo, hi) = aim(bin);
    for _ in 0..attempts {
        let kind = *OccluderKind::ALL.choose(rng).expect("non-empty");
        let goal = rng.random_range(lo..=hi);
        let need = (goal * total as f64).round() as usize;
        let margin_a = rng.random_range(4.0f32..40.0);
        let margin_b = rng.random_range(4.0f32..40.0);
        let (horizontal, counts, ortho) = match kind {
            OccluderKind::FromLeft | OccluderKind::FromRight | OccluderKind::VerticalBand => {
                (true, &cols, (by0 as f32 - margin_a, by1 as f32 + margin_b))
            }
            _ => (false, &rows, (bx0 as f32 - margin_a, bx1 as f32 + margin_b)),
        };
        let (a, b) = match kind {
            OccluderKind::FromLeft | OccluderKind::FromTop => (0, cut_forward(counts, 0, need)),
            OccluderKind::FromRight | OccluderKind::FromBottom => (cut_backward(counts, counts.len(), need), counts.len()),
            OccluderKind::VerticalBand | OccluderKind::HorizontalBand => {
                let (first, last) = if horizontal { (bx0, bx1) } else { (by0, by1) };
                let start = rng.random_range(first..last);
                let end = cut_forward(counts, start, need);
                if counts[start..end].iter().sum::<usize>() < need {
                    continue;
                }
                (start, end)
            }
        };
        // edges sit on pixel boundaries, half a pixel from any sample point;
        // open ends run past the frame edge
        let a = if a == 0 { -8.0 } else { a as f32 };
        let b = if b == counts.len() { counts.len() as f32 + 8.0 } else { b as f32 };
        let screen_rect = if horizontal {
            [a, ortho.0.floor(), b, ortho.1.ceil()]
        } else {
            [ortho.0.floor(), a, ortho.1.ceil(), b]
        };
        let near = rng.random_range(1.0f32..1.6);
        let far = (near + rng.random_range(0.2f32..0.5)).min(max_depth);
        let placement = OccluderPlacement {
            kind,
            screen_rect,
            depth: (near, far),
            color: *OCCLUDER_COLORS.choose(rng).expect("non-empty"),
        };
        let with = occluded_pass(&camera, mesh, std::slice::from_ref(&placement)).count(LAYER_TARGET);
        let ratio = 1.0 - with as f64 / total as f64;
        if bin.contains(ratio) {
            return Ok(placement);
        }
    }
    Err(SceneError::BinUnreachable { bin, attempts })
}

/// Smallest `end ≥ start` with `sum(counts[start..end]) ≥ need`.
fn cut_forward(counts: &[usize], start: usize, need: usize) -> usize {
    let mut acc = 0;
    for (i, &c) in counts.iter().enumerate().skip(start) {
        if acc >= need {
            return i;
        }
        acc += c;
    }
    counts.len()
}

/// Largest `begin ≤ end` with `sum(counts[begin..end]) ≥ need`.
fn cut_backward(counts: &[usize], end: usize, need: usize) -> usize {
    let mut acc = 0;
    for i in (0..end).rev() {
        if acc >= need {
            return i + 1;
        }
        acc += counts[i];
    }
    0
}

/// Horizontal unit vector from the camera toward its look-at point, or the
/// camera's own forward axis projected when looking straight down.
pub(crate) fn away_direction(camera: &Camera) -> Vector3<f32> {
    let f = camera.forward();
    let flat = Vector3::new(f.x, 0.0, f.z);
    flat.try_normalize(1e-3).unwrap_or_else(|| {
        let up = camera.rotation * Vector3::y();
        Vector3::new(up.x, 0.0, up.z).try_normalize(1e-6).unwrap_or(-Vector3::z())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::occlusion::{occlusion_bin, BinOutcome};

    fn combo(w: &str, v: &str, t: &str, s: &str, o: &str) -> DomainCombination {
        DomainCombination::new()
            .with("weathers", w)
            .with("views", v)
            .with("time", t)
            .with("seasons", s)
            .with("occlusion", o)
    }

    fn setup() -> (Taxonomy, CategoryRegistry, SceneOptions) {
        let opts = SceneOptions {
            width: 128,
            height: 128,
            ..SceneOptions::default()
        };
        (Taxonomy::builtin(), CategoryRegistry::builtin(), opts)
    }

    #[test]
    fn cuts() {
        let c = [0, 2, 3, 0, 5];
        assert_eq!(cut_forward(&c, 0, 0), 0);
        assert_eq!(cut_forward(&c, 0, 2), 2);
        assert_eq!(cut_forward(&c, 0, 3), 3);
        assert_eq!(cut_forward(&c, 2, 4), 5);
        assert_eq!(cut_backward(&c, 5, 5), 4);
        assert_eq!(cut_backward(&c, 5, 6), 2);
        assert_eq!(cut_backward(&c, 5, 100), 0);
    }

    #[test]
    fn top_view_camera_pitch() {
        let (t, r, o) = setup();
        let s = sample_scene(&t, &r, &combo("clear", "top", "day", "winter", "no occlusion"), "dog", 3, &o).unwrap();
        assert_eq!(s.camera.view, View::Top);
        assert!((s.camera.orientation().pitch + 90.0).abs() <= 5.0);
        assert!(s.occluders.is_empty());
    }

    #[test]
    fn jitter_is_bounded() {
        let (t, r, o) = setup();
        for seed in 0..50 {
            let s = sample_scene(&t, &r, &combo("clear", "side", "day", "autumn", "no occlusion"), "car", seed, &o).unwrap();
            let j = s.camera.jitter;
            assert!(j.yaw.abs() <= 5.0 && j.pitch.abs() <= 5.0 && j.roll.abs() <= 5.0);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let (t, r, o) = setup();
        let c = combo("rainy", "front", "night", "autumn", "moderate occlusion");
        let a = sample_scene(&t, &r, &c, "horse", 11, &o).unwrap();
        let b = sample_scene(&t, &r, &c, "horse", 11, &o).unwrap();
        assert_eq!(a, b);
        let other = sample_scene(&t, &r, &c, "horse", 12, &o).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn search_hits_every_bin() {
        let (t, r, o) = setup();
        for bin in &OcclusionBin::ALL[1..] {
            for (seed, cat) in ["dog", "airplane", "bike", "human"].iter().enumerate() {
                let c = combo("clear", "front", "day", "spring-summer", bin.domain_name());
                let s = sample_scene(&t, &r, &c, cat, seed as u64, &o).unwrap();
                assert_eq!(s.occluders.len(), 1);
                let camera = s.camera();
                let mesh = r.mesh(cat, s.mesh_variant).unwrap();
                let full = target_pass(&camera, mesh).count(LAYER_TARGET);
                let vis = occluded_pass(&camera, mesh, &s.occluders).count(LAYER_TARGET);
                let ratio = 1.0 - vis as f64 / full as f64;
                assert_eq!(occlusion_bin(ratio), Ok(BinOutcome::Bin(*bin)), "{cat} {bin}");
            }
        }
    }

    #[test]
    fn invalid_inputs() {
        let (t, r, o) = setup();
        let snowy_autumn = combo("snowy", "front", "day", "autumn", "no occlusion");
        assert!(matches!(
            sample_scene(&t, &r, &snowy_autumn, "dog", 0, &o),
            Err(SceneError::InvalidCombination(_))
        ));
        let ok = combo("clear", "front", "day", "autumn", "no occlusion");
        assert!(matches!(sample_scene(&t, &r, &ok, "penguin", 0, &o), Err(SceneError::Registry(_))));
        let partial = DomainCombination::new().with("weathers", "clear");
        assert!(sample_scene(&t, &r, &partial, "dog", 0, &o).is_err());
    }

    #[test]
    fn unreachable_bin_is_named() {
        let (t, r, mut o) = setup();
        o.occluder_attempts = 0;
        let c = combo("clear", "front", "day", "autumn", "heavy occlusion");
        let err = sample_scene(&t, &r, &c, "dog", 0, &o).unwrap_err();
        assert!(err.to_string().contains("bin unreachable") && err.to_string().contains("heavy occlusion"), "{err}");
    }

    #[test]
    fn away_direction_is_horizontal_unit() {
        for view in [View::Front, View::Side, View::Top] {
            let spec = CameraSpec {
                view,
                base_orientation: view.base_orientation(),
                jitter: Orientation::default(),
                distance: 4.0,
                vfov_deg: 40.0,
                look_at: [0.0, 0.5, 0.0],
            };
            let d = away_direction(&Camera::from_spec(&spec, 32, 32));
            assert!(d.y == 0.0 && (d.norm() - 1.0).abs() < 1e-5);
        }
    }
}
