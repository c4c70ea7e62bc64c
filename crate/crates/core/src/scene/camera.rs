//! Pinhole camera and the view/jitter description stored in scene specs.
//!
//! Camera space is right-handed: +X right, +Y up, the camera looks down -Z.
//! Pixel `(i, j)` covers `[i, i+1) × [j, j+1)` with rows growing downward;
//! a camera-space point `(x, y, z)` at depth `d = -z` lands at
//! `(W/2 + f·x/d, H/2 − f·y/d)` with `f = (H/2) / tan(vfov/2)`.

use nalgebra::{Point3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum View {
    /// Camera on the object's +Z (forward) axis.
    Front,
    /// Camera on the object's +X (left) axis.
    Side,
    /// Camera above the object looking straight down.
    Top,
}

impl View {
    /// Front and side cameras look slightly down so jitter never drops
    /// them below the ground plane.
    pub const ELEVATION: f32 = -10.0;

    pub fn from_domain(name: &str) -> Option<Self> {
        match name {
            "front" => Some(View::Front),
            "side" => Some(View::Side),
            "top" => Some(View::Top),
            _ => None,
        }
    }

    pub fn base_orientation(self) -> Orientation {
        match self {
            View::Front => Orientation::new(0.0, Self::ELEVATION, 0.0),
            View::Side => Orientation::new(90.0, Self::ELEVATION, 0.0),
            View::Top => Orientation::new(0.0, -90.0, 0.0),
        }
    }
}

/// Euler angles in degrees, applied as yaw about +Y, then pitch about +X,
/// then roll about +Z.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Orientation {
    pub yaw: f32,
    pub pitch: f32,
    pub roll: f32,
}

impl Orientation {
    pub fn new(yaw: f32, pitch: f32, roll: f32) -> Self {
        Self { yaw, pitch, roll }
    }

    pub fn offset(self, jitter: Orientation) -> Self {
        Self::new(
            self.yaw + jitter.yaw,
            self.pitch + jitter.pitch,
            self.roll + jitter.roll,
        )
    }

    pub fn rotation(self) -> Rotation3<f32> {
        Rotation3::from_axis_angle(&Vector3::y_axis(), self.yaw.to_radians())
            * Rotation3::from_axis_angle(&Vector3::x_axis(), self.pitch.to_radians())
            * Rotation3::from_axis_angle(&Vector3::z_axis(), self.roll.to_radians())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    pub view: View,
    pub base_orientation: Orientation,
    pub jitter: Orientation,
    /// Distance from the camera to `look_at`.
    pub distance: f32,
    pub vfov_deg: f32,
    pub look_at: [f32; 3],
}

impl CameraSpec {
    pub fn orientation(&self) -> Orientation {
        self.base_orientation.offset(self.jitter)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    pub position: Point3<f32>,
    /// Camera-to-world rotation.
    pub rotation: Rotation3<f32>,
    pub vfov_deg: f32,
    pub width: u32,
    pub height: u32,
    pub near: f32,
}

impl Camera {
    pub const DEFAULT_NEAR: f32 = 0.05;

    pub fn new(position: Point3<f32>, rotation: Rotation3<f32>, vfov_deg: f32, width: u32, height: u32) -> Self {
        Self {
            position,
            rotation,
            vfov_deg,
            width,
            height,
            near: Self::DEFAULT_NEAR,
        }
    }

    /// Orbit camera: oriented by base + jitter, placed `distance` back from
    /// `look_at` along its own viewing axis so the target stays centered.
    pub fn from_spec(spec: &CameraSpec, width: u32, height: u32) -> Self {
        let rotation = spec.orientation().rotation();
        let target = Point3::from(spec.look_at);
        let position = target + rotation * Vector3::z() * spec.distance;
        Self::new(position, rotation, spec.vfov_deg, width, height)
    }

    pub fn focal_px(&self) -> f32 {
        (self.height as f32 * 0.5) / (self.vfov_deg.to_radians() * 0.5).tan()
    }

    pub fn forward(&self) -> Vector3<f32> {
        self.rotation * -Vector3::z()
    }

    pub fn world_to_camera(&self, p: &Point3<f32>) -> Point3<f32> {
        Point3::from(self.rotation.inverse() * (p - self.position))
    }

    pub fn camera_to_world(&self, p: &Point3<f32>) -> Point3<f32> {
        self.position + self.rotation * p.coords
    }

    /// Screen position and depth of a camera-space point; `None` behind the
    /// near plane.
    pub fn project(&self, p: &Point3<f32>) -> Option<(f32, f32, f32)> {
        let depth = -p.z;
        if depth < self.near {
            return None;
        }
        let f = self.focal_px();
        Some((
            self.width as f32 * 0.5 + f * p.x / depth,
            self.height as f32 * 0.5 - f * p.y / depth,
            depth,
        ))
    }

    /// Camera-space point at `depth` on the ray through screen position
    /// `(sx, sy)`.
    pub fn unproject(&self, sx: f32, sy: f32, depth: f32) -> Point3<f32> {
        let f = self.focal_px();
        Point3::new(
            (sx - self.width as f32 * 0.5) * depth / f,
            -(sy - self.height as f32 * 0.5) * depth / f,
            -depth,
        )
    }
}
