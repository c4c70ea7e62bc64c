//! Scene rendering: one shaded color pass plus two mask passes.

use image::{GrayImage, Luma, Rgb as Pixel, RgbImage};
use nalgebra::Vector3;

use super::backdrop;
use super::environment::lerp;
use super::mesh::Rgb;
use super::raster::{Rasterizer, LAYER_BACKDROP, LAYER_GROUND, LAYER_OCCLUDER, LAYER_TARGET};
use super::registry::CategoryRegistry;
use super::sample::{away_direction, occluded_pass, target_pass, SceneError, SceneSpec};

#[derive(Debug, Clone)]
pub struct RenderOutput {
    pub image: RgbImage,
    /// Target pixels still visible with occluders in place.
    pub mask_with_occluders: GrayImage,
    /// Target pixels with occluders removed.
    pub mask_without_occluders: GrayImage,
    pub visible_pixels: usize,
    pub full_pixels: usize,
    pub occlusion_ratio: f64,
}

pub const MASK_ON: u8 = 255;

/// Deterministic: the same spec always yields bit-identical output.
pub fn render(spec: &SceneSpec, registry: &CategoryRegistry) -> Result<RenderOutput, SceneError> {
    let mesh = registry.mesh(&spec.category, spec.mesh_variant)?;
    let camera = spec.camera();
    let env = &spec.environment;

    let full = target_pass(&camera, mesh);
    let full_pixels = full.count(LAYER_TARGET);
    if full_pixels == 0 {
        return Err(SceneError::ObjectNotVisible);
    }
    let with = occluded_pass(&camera, mesh, &spec.occluders);
    let visible_pixels = with.count(LAYER_TARGET);
    let occlusion_ratio = if spec.occluders.is_empty() {
        0.0
    } else {
        1.0 - visible_pixels as f64 / full_pixels as f64
    };

    let mut r = Rasterizer::new(&camera, true);
    let lit = |n: &Vector3<f32>, c: Rgb| env.shade(n, c);
    let snowy = |n: &Vector3<f32>, c: Rgb| {
        // snow settles on upward-facing surfaces
        let c = if env.snow_cover > 0.0 && n.y > 0.6 {
            lerp(c, [0.93, 0.94, 0.97], env.snow_cover * 0.7)
        } else {
            c
        };
        env.shade(n, c)
    };
    r.draw(&backdrop::ground(env), LAYER_GROUND, lit);
    r.draw(
        &backdrop::props(spec.scene_background, env, away_direction(&camera), spec.backdrop_seed()),
        LAYER_BACKDROP,
        snowy,
    );
    r.draw(mesh, LAYER_TARGET, snowy);
    for o in &spec.occluders {
        r.draw(&o.mesh(&camera), LAYER_OCCLUDER, snowy);
    }
    let frame = r.into_frame();
    let mut color = frame.color.clone().expect("color pass");
    env.apply_atmosphere(&frame, &mut color);
    env.apply_particles(frame.width, frame.height, &mut color);

    Ok(RenderOutput {
        image: to_rgb(frame.width, frame.height, &color),
        mask_with_occluders: to_mask(with.width, with.height, &with.mask(LAYER_TARGET)),
        mask_without_occluders: to_mask(full.width, full.height, &full.mask(LAYER_TARGET)),
        visible_pixels,
        full_pixels,
        occlusion_ratio,
    })
}

fn to_rgb(w: u32, h: u32, color: &[Rgb]) -> RgbImage {
    RgbImage::from_fn(w, h, |x, y| {
        let c = color[(y * w + x) as usize];
        Pixel(c.map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8))
    })
}

fn to_mask(w: u32, h: u32, mask: &[bool]) -> GrayImage {
    GrayImage::from_fn(w, h, |x, y| Luma([if mask[(y * w + x) as usize] { MASK_ON } else { 0 }]))
}

/// Measured ratio straight from two mask images.
pub fn ratio_from_masks(with: &GrayImage, without: &GrayImage) -> Option<f64> {
    let on = |m: &GrayImage| m.pixels().filter(|p| p.0[0] != 0).count();
    let full = on(without);
    (full > 0).then(|| 1.0 - on(with) as f64 / full as f64)
}

/// Whether every lit pixel of `with` is also lit in `without`.
pub fn mask_subset(with: &GrayImage, without: &GrayImage) -> bool {
    with.pixels().zip(without.pixels()).all(|(a, b)| a.0[0] == 0 || b.0[0] != 0)
}
