//! Parametric scene sampling and software rendering.

pub mod archetype;
pub mod backdrop;
pub mod camera;
pub mod environment;
pub mod generate;
pub mod mesh;
pub mod occlusion;
pub mod raster;
pub mod registry;
pub mod render;
pub mod sample;

pub use backdrop::Backdrop;
pub use camera::{Camera, CameraSpec, Orientation, View};
pub use environment::{EnvironmentSpec, Season, TimeOfDay, Weather};
pub use mesh::Mesh;
pub use occlusion::{occlusion_bin, BinOutcome, OcclusionBin};
pub use registry::CategoryRegistry;
pub use render::{render, RenderOutput};
pub use sample::{sample_scene, sample_unoccluded, OccluderPlacement, SceneError, SceneOptions, SceneSpec};
pub use generate::{generate_dataset, GenerationPlan, GenerationSummary};
