//! Synthetic stand-in for the onboard neural detector.
//!
//! The enemy is projected into the ego camera, and a box is synthesized whose
//! area is chosen so that the fitted depth law reads back the true depth.
//! Detection probability falls linearly with range, and nothing is reported
//! past the detection range, outside the field of view, or where the depth
//! law cannot represent the target.

use crate::camera::{position_from_detection, BoundingBox, CameraModel, GeometryError, TargetEstimate};
use crate::frame::Ned;
use crate::vehicle::VehicleState;
use serde::{Deserialize, Serialize};

/// Depth at which the first depth-law branch reaches zero area.
pub const MAX_LAW_DEPTH: f64 = 7.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorModel {
    pub camera: CameraModel,
    pub max_range_m: f64,
    pub p_near: f64,
    pub p_far: f64,
    /// Round box edges to whole pixels.
    pub quantize_px: bool,
    /// Depth below which the second branch of the law is inverted.
    pub z_split_m: f64,
    pub rng_seed: u64,
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self {
            camera: CameraModel::default(),
            max_range_m: 12.0,
            p_near: 0.95,
            p_far: 0.70,
            quantize_px: false,
            z_split_m: 2.2,
            rng_seed: 0,
        }
    }
}

impl DetectorModel {
    pub fn validate(&self) -> Result<(), GeometryError> {
        self.camera.validate()?;
        if !(0.0 < self.p_far && self.p_far <= self.p_near && self.p_near <= 1.0) {
            return Err(GeometryError::InvalidCamera(
                "detector probabilities must satisfy 0 < p_far <= p_near <= 1",
            ));
        }
        if !(self.max_range_m > 0.0) {
            return Err(GeometryError::InvalidCamera("max_range_m must be positive"));
        }
        if !(self.z_split_m > 0.0 && self.z_split_m < MAX_LAW_DEPTH) {
            return Err(GeometryError::InvalidCamera("z_split_m must be in (0, 7.2)"));
        }
        Ok(())
    }

    /// Detection probability at `range` metres.
    pub fn probability_at(&self, range: f64) -> f64 {
        let frac = (range / self.max_range_m).clamp(0.0, 1.0);
        self.p_near + (self.p_far - self.p_near) * frac
    }
}

/// Ground-truth target position in the ego camera frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeTarget {
    /// Rightward (m).
    pub x: f64,
    /// Upward (m).
    pub y: f64,
    /// Forward (m).
    pub z: f64,
}

impl RelativeTarget {
    pub fn range(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Projects the enemy into the ego camera frame. The camera looks along the
/// ego heading with no pitch or roll.
pub fn relative_in_camera(ego: &VehicleState, enemy: &Ned) -> RelativeTarget {
    let delta = *enemy - ego.position;
    let phi = ego.heading_deg.to_radians();
    let (s, c) = phi.sin_cos();
    RelativeTarget {
        x: -s * delta.n + c * delta.e,
        y: -delta.d,
        z: c * delta.n + s * delta.e,
    }
}

/// Area fraction that the depth law maps back to `z`, or `None` if `z` is
/// outside `(0, 7.2)`.
///
/// Depths at or above `z_split` invert the first branch. Shallower depths
/// invert the second branch, clamped just inside `(0.04, 0.4)` so that box
/// rounding cannot carry the size across a branch edge; the third branch is
/// never produced.
pub fn size_from_depth(z: f64, model: &DetectorModel) -> Option<f64> {
    if !(z > 0.0 && z < MAX_LAW_DEPTH) {
        return None;
    }
    if z >= model.z_split_m {
        Some((MAX_LAW_DEPTH - z) / 120.0)
    } else {
        let s = (2.2 - z) / 3.42;
        Some(s.clamp(0.04 * (1.0 + BRANCH_MARGIN), 0.4 * (1.0 - BRANCH_MARGIN)))
    }
}

const BRANCH_MARGIN: f64 = 1e-9;

/// Synthesizes the detector output for one frame.
pub fn synth_detection(rel: &RelativeTarget, model: &DetectorModel) -> Option<(BoundingBox, f64)> {
    if !(rel.z > 0.0) {
        return None;
    }
    let range = rel.range();
    if range > model.max_range_m {
        return None;
    }
    let cam = &model.camera;
    let ax = (rel.x / rel.z).atan().to_degrees();
    let ay = (rel.y / rel.z).atan().to_degrees();
    if ax.abs() > cam.half_fov_x_deg || ay.abs() > cam.half_fov_y_deg {
        return None;
    }
    let size = size_from_depth(rel.z, model)?;
    let xp = ax / cam.half_fov_x_deg;
    let yp = ay / cam.half_fov_y_deg;
    let cx = cam.width / 2.0 * (1.0 + xp);
    let cy = cam.height / 2.0 * (1.0 - yp);
    let half_w = cam.width * size.sqrt() / 2.0;
    let half_h = cam.height * size.sqrt() / 2.0;
    let mut edges = [
        (cx - half_w).max(0.0),
        (cy - half_h).max(0.0),
        (cx + half_w).min(cam.width),
        (cy + half_h).min(cam.height),
    ];
    if model.quantize_px {
        for e in &mut edges {
            *e = e.round();
        }
    }
    let bbox = BoundingBox::new(edges[0], edges[1], edges[2], edges[3]).ok()?;
    Some((bbox, model.probability_at(range)))
}

/// Runs one frame of the onboard detection chain: projection, synthetic
/// detector, then positioning with the probability `threshold`.
pub fn observe(
    ego: &VehicleState,
    enemy: &Ned,
    model: &DetectorModel,
    threshold: f64,
) -> Option<TargetEstimate> {
    let rel = relative_in_camera(ego, enemy);
    let (bbox, prob) = synth_detection(&rel, model)?;
    position_from_detection(&bbox, &model.camera, prob, threshold)
        .ok()
        .flatten()
}
