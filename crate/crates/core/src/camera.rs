//! Target positioning from a single detection bounding box.
//!
//! A detection box is reduced to two numbers: its centre, normalized to
//! `[-1, 1]²`, and its area as a fraction of the frame. The area fraction is
//! mapped to depth with a piecewise-linear law fitted for the UAV class, and
//! the normalized centre is turned into lateral and vertical offsets through
//! the camera half field of view.
//!
//! Frame conventions: pixel origin top-left, `x` rightward, `y` downward. The
//! metric outputs are `x_d` rightward, `y_d` upward and `z_d` along the
//! optical axis.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Boxes covering this fraction of the frame or more produce no estimate.
pub const SIZE_GATE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate bounding box ({x_min}, {y_min}, {x_max}, {y_max})")]
    DegenerateBox {
        x_min: f64,
        y_min: f64,
        x_max: f64,
        y_max: f64,
    },
    #[error("bounding box extends outside the {width}x{height} frame")]
    OutOfFrame { width: f64, height: f64 },
    #[error("invalid camera model: {0}")]
    InvalidCamera(&'static str),
    #[error("area fraction {0} is outside the depth law's domain (0, 0.5)")]
    OutOfGate(f64),
}

/// Detector output box in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self, GeometryError> {
        let b = Self {
            x_min,
            y_min,
            x_max,
            y_max,
        };
        b.check_shape()?;
        Ok(b)
    }

    fn check_shape(&self) -> Result<(), GeometryError> {
        let finite = [self.x_min, self.y_min, self.x_max, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(GeometryError::DegenerateBox {
                x_min: self.x_min,
                y_min: self.y_min,
                x_max: self.x_max,
                y_max: self.y_max,
            });
        }
        Ok(())
    }

    /// Checks shape and containment in the camera frame.
    pub fn validate(&self, cam: &CameraModel) -> Result<(), GeometryError> {
        self.check_shape()?;
        if self.x_min < 0.0 || self.y_min < 0.0 || self.x_max > cam.width || self.y_max > cam.height
        {
            return Err(GeometryError::OutOfFrame {
                width: cam.width,
                height: cam.height,
            });
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    /// Box centre in pixels.
    pub fn centre(&self) -> (f64, f64) {
        (
            self.x_min + (self.x_max - self.x_min) / 2.0,
            self.y_min + (self.y_max - self.y_min) / 2.0,
        )
    }
}

/// Frame size and half field-of-view angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraModel {
    #[serde(rename = "width_px")]
    pub width: f64,
    #[serde(rename = "height_px")]
    pub height: f64,
    pub half_fov_x_deg: f64,
    pub half_fov_y_deg: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            width: 640.0,
            height: 480.0,
            half_fov_x_deg: 31.1,
            half_fov_y_deg: 24.4,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(GeometryError::InvalidCamera("width must be positive"));
        }
        if !(self.height > 0.0 && self.height.is_finite()) {
            return Err(GeometryError::InvalidCamera("height must be positive"));
        }
        if !(self.half_fov_x_deg > 0.0 && self.half_fov_x_deg < 90.0) {
            return Err(GeometryError::InvalidCamera("half_fov_x must be in (0, 90) degrees"));
        }
        if !(self.half_fov_y_deg > 0.0 && self.half_fov_y_deg < 90.0) {
            return Err(GeometryError::InvalidCamera("half_fov_y must be in (0, 90) degrees"));
        }
        Ok(())
    }

    /// Normalized centre of a target seen at the given metric offsets,
    /// i.e. the inverse of the angular step in [`position_from_detection`].
    /// Returns `None` for targets on or behind the image plane.
    pub fn centre_of(&self, x_d: f64, y_d: f64, z_d: f64) -> Option<NormalizedCentre> {
        if !(z_d > 0.0) {
            return None;
        }
        Some(NormalizedCentre {
            x: (x_d / z_d).atan().to_degrees() / self.half_fov_x_deg,
            y: (y_d / z_d).atan().to_degrees() / self.half_fov_y_deg,
        })
    }
}

/// Box centre scaled to `[-1, 1]²`; `x` rightward, `y` upward.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NormalizedCentre {
    pub x: f64,
    pub y: f64,
}

/// Metric target position in the camera frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetEstimate {
    /// Rightward offset (m).
    pub x_d: f64,
    /// Upward offset (m).
    pub y_d: f64,
    /// Depth along the optical axis (m).
    pub z_d: f64,
    /// Box area over frame area.
    pub size: f64,
    pub centre: NormalizedCentre,
    pub probability: f64,
}

pub fn normalize_centre(
    bbox: &BoundingBox,
    cam: &CameraModel,
) -> Result<NormalizedCentre, GeometryError> {
    bbox.validate(cam)?;
    let (cx, cy) = bbox.centre();
    Ok(NormalizedCentre {
        x: 2.0 / cam.width * (cx - cam.width / 2.0),
        y: 2.0 / cam.height * (cam.height / 2.0 - cy),
    })
}

pub fn size_ratio(bbox: &BoundingBox, cam: &CameraModel) -> Result<f64, GeometryError> {
    bbox.validate(cam)?;
    Ok(bbox.width() * bbox.height() / (cam.width * cam.height))
}

/// Fitted stadiametric depth law for the UAV class.
///
/// Evaluated exactly as fitted, including the jumps at 0.04 (2.4 -> 2.0632)
/// and 0.4 (0.832 -> -0.8). The last branch is negative over its whole
/// domain.
pub fn depth_from_size(size: f64) -> Result<f64, GeometryError> {
    if !(size > 0.0 && size < SIZE_GATE) {
        return Err(GeometryError::OutOfGate(size));
    }
    let z = if size <= 0.04 {
        -120.0 * size + 7.2
    } else if size <= 0.4 {
        -3.42 * size + 2.2
    } else {
        -3.25 * size + 0.5
    };
    Ok(z)
}

/// Full positioning step for one detection.
///
/// Returns `Ok(None)` when the detection is below `threshold` or the box
/// covers half the frame or more.
pub fn position_from_detection(
    bbox: &BoundingBox,
    cam: &CameraModel,
    probability: f64,
    threshold: f64,
) -> Result<Option<TargetEstimate>, GeometryError> {
    if !(probability >= threshold) {
        return Ok(None);
    }
    let centre = normalize_centre(bbox, cam)?;
    let size = size_ratio(bbox, cam)?;
    if size >= SIZE_GATE {
        return Ok(None);
    }
    let z_d = depth_from_size(size)?;
    let x_d = (centre.x * cam.half_fov_x_deg * std::f64::consts::PI / 180.0).tan() * z_d;
    let y_d = (centre.y * cam.half_fov_y_deg * std::f64::consts::PI / 180.0).tan() * z_d;
    Ok(Some(TargetEstimate {
        x_d,
        y_d,
        z_d,
        size,
        centre,
        probability,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cam() -> CameraModel {
        CameraModel::default()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn centred_box_normalizes_to_origin() {
        for (w, h) in [(640.0, 480.0), (100.0, 300.0), (1.0, 1.0)] {
            let c = CameraModel {
                width: w,
                height: h,
                ..cam()
            };
            let b = BoundingBox::new(w * 0.25, h * 0.25, w * 0.75, h * 0.75).unwrap();
            let n = normalize_centre(&b, &c).unwrap();
            assert_eq!((n.x, n.y), (0.0, 0.0));
        }
    }

    #[test]
    fn corner_centre_normalizes_to_top_left() {
        // A box centred on the corner pixel cannot lie inside the frame, so go
        // through the formula directly with a zero-size-ish box at the origin.
        let b = BoundingBox::new(0.0, 0.0, 1e-9, 1e-9).unwrap();
        let n = normalize_centre(&b, &cam()).unwrap();
        assert!((n.x + 1.0).abs() < 1e-9 && (n.y - 1.0).abs() < 1e-9);
    }

    #[test]
    fn quarter_offset_centre() {
        let b = BoundingBox::new(470.0, 110.0, 490.0, 130.0).unwrap();
        let n = normalize_centre(&b, &cam()).unwrap();
        assert!(close(n.x, 0.5) && close(n.y, 0.5));
    }

    #[test]
    fn size_ratio_examples() {
        let full = BoundingBox::new(0.0, 0.0, 640.0, 480.0).unwrap();
        assert_eq!(size_ratio(&full, &cam()).unwrap(), 1.0);
        let small = BoundingBox::new(288.0, 216.0, 352.0, 264.0).unwrap();
        assert!(close(size_ratio(&small, &cam()).unwrap(), 0.01));
        let mid = BoundingBox::new(0.0, 0.0, 128.0, 120.0).unwrap();
        assert!(close(size_ratio(&mid, &cam()).unwrap(), 0.05));
    }

    #[test]
    fn degenerate_and_out_of_frame_boxes_rejected() {
        assert!(matches!(
            BoundingBox::new(10.0, 10.0, 10.0, 20.0),
            Err(GeometryError::DegenerateBox { .. })
        ));
        assert!(BoundingBox::new(10.0, 30.0, 20.0, 20.0).is_err());
        assert!(BoundingBox::new(f64::NAN, 0.0, 1.0, 1.0).is_err());
        let b = BoundingBox::new(600.0, 0.0, 700.0, 10.0).unwrap();
        assert!(matches!(
            size_ratio(&b, &cam()),
            Err(GeometryError::OutOfFrame { .. })
        ));
        assert!(normalize_centre(&b, &cam()).is_err());
    }

    #[test]
    fn depth_law_values() {
        assert!(close(depth_from_size(0.04).unwrap(), 2.4));
        assert!(close(depth_from_size(0.2).unwrap(), 1.516));
        assert!(close(depth_from_size(0.45).unwrap(), -0.9625));
        assert!(close(depth_from_size(0.01).unwrap(), 6.0));
    }

    #[test]
    fn depth_law_boundaries_bind_to_earlier_branch() {
        assert!(close(depth_from_size(0.4).unwrap(), -3.42 * 0.4 + 2.2));
        let above = depth_from_size(0.04 + 1e-12).unwrap();
        assert!((above - 2.0632).abs() < 1e-9);
        let above = depth_from_size(0.4 + 1e-12).unwrap();
        assert!((above + 0.8).abs() < 1e-9);
    }

    #[test]
    fn depth_law_gate() {
        for s in [0.0, -0.1, 0.5, 0.7, 1.0, f64::NAN] {
            assert!(matches!(depth_from_size(s), Err(GeometryError::OutOfGate(_))));
        }
    }

    #[test]
    fn centred_small_box_gives_six_metres_ahead() {
        let b = BoundingBox::new(288.0, 216.0, 352.0, 264.0).unwrap();
        let est = position_from_detection(&b, &cam(), 0.9, 0.7)
            .unwrap()
            .unwrap();
        assert_eq!((est.x_d, est.y_d), (0.0, 0.0));
        assert!(close(est.z_d, 6.0));
        assert!(close(est.size, 0.01));
        assert_eq!(est.probability, 0.9);
    }

    #[test]
    fn low_probability_gives_nothing() {
        let b = BoundingBox::new(288.0, 216.0, 352.0, 264.0).unwrap();
        assert_eq!(position_from_detection(&b, &cam(), 0.5, 0.7).unwrap(), None);
        // equal to the threshold is accepted
        assert!(position_from_detection(&b, &cam(), 0.7, 0.7)
            .unwrap()
            .is_some());
    }

    #[test]
    fn large_boxes_give_nothing() {
        let full = BoundingBox::new(0.0, 0.0, 640.0, 480.0).unwrap();
        assert_eq!(position_from_detection(&full, &cam(), 0.99, 0.7).unwrap(), None);
        let half = BoundingBox::new(0.0, 0.0, 320.0, 480.0).unwrap();
        assert_eq!(position_from_detection(&half, &cam(), 0.99, 0.7).unwrap(), None);
    }

    #[test]
    fn centre_of_inverts_angular_step() {
        let c = cam();
        let n = c.centre_of(-1.2, 0.4, 6.0).unwrap();
        let x = (n.x * c.half_fov_x_deg * std::f64::consts::PI / 180.0).tan() * 6.0;
        let y = (n.y * c.half_fov_y_deg * std::f64::consts::PI / 180.0).tan() * 6.0;
        assert!((x + 1.2).abs() < 1e-12 && (y - 0.4).abs() < 1e-12);
        assert!(c.centre_of(1.0, 1.0, 0.0).is_none());
    }
}
