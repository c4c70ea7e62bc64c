mod common;

use common::{clip_to_rect, polygon_area, polygon_perimeter, quad_scene};
use shiftbench::scene::render;
use shiftbench::scene::render::ratio_from_masks;

#[test]
fn polygon_helpers() {
    let sq = [(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0)];
    assert_eq!(polygon_area(&sq), 16.0);
    assert_eq!(polygon_perimeter(&sq), 16.0);
    let c = clip_to_rect(&sq, [2.0, 1.0, 10.0, 3.0]);
    assert_eq!(polygon_area(&c), 4.0);
    assert!(clip_to_rect(&sq, [5.0, 5.0, 6.0, 6.0]).is_empty());
    let tri = [(0.0, 0.0), (4.0, 0.0), (0.0, 4.0)];
    assert_eq!(polygon_area(&clip_to_rect(&tri, [0.0, 0.0, 2.0, 2.0])), 4.0);
}

#[test]
fn measured_ratio_matches_geometry() {
    for seed in 0..24 {
        let scene = quad_scene(seed, 256);
        let out = render(&scene.spec, &scene.registry).unwrap();
        let err = (out.occlusion_ratio - scene.expected_ratio).abs();
        assert!(
            err <= scene.tolerance,
            "seed {seed}: measured {} expected {} tol {}",
            out.occlusion_ratio,
            scene.expected_ratio,
            scene.tolerance
        );
        let area = polygon_area(&scene.target_px);
        let perim = polygon_perimeter(&scene.target_px);
        assert!((out.full_pixels as f64 - area).abs() <= perim, "seed {seed}: coverage");
        let from_masks = ratio_from_masks(&out.mask_with_occluders, &out.mask_without_occluders).unwrap();
        assert_eq!(from_masks, out.occlusion_ratio);
    }
}

#[test]
fn oracle_scenes_span_bins() {
    let ratios: Vec<f64> = (0..24).map(|s| quad_scene(s, 256).expected_ratio).collect();
    assert!(ratios.iter().any(|&r| r < 0.2));
    assert!(ratios.iter().any(|&r| r > 0.4));
}
