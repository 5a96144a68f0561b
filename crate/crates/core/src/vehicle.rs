//! Point-mass vehicle with first-order velocity tracking, and the
//! waypoint follower that stands in for the ground-segment mission.

use crate::frame::Ned;
use crate::guidance::VelocitySetpointNed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VehicleError {
    #[error("mission has no waypoints")]
    EmptyMission,
    #[error("invalid mission: {0}")]
    InvalidMission(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub position: Ned,
    pub velocity: Ned,
    /// Degrees from north, clockwise, in `[0, 360)`.
    pub heading_deg: f64,
}

impl VehicleState {
    pub fn at(position: Ned, heading_deg: f64) -> Self {
        Self {
            position,
            velocity: Ned::ZERO,
            heading_deg: normalize_heading(heading_deg),
        }
    }
}

pub fn normalize_heading(deg: f64) -> f64 {
    let h = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if h >= 360.0 {
        0.0
    } else {
        h
    }
}

/// Advances the vehicle by `dt` under a constant velocity command.
///
/// The velocity error decays as `exp(-dt / tau)`; position uses the
/// trapezoid of the start and end velocities.
pub fn step_dynamics(
    state: &VehicleState,
    v_cmd: &VelocitySetpointNed,
    heading_cmd_deg: Option<f64>,
    dt: f64,
    tau: f64,
) -> VehicleState {
    debug_assert!(dt > 0.0 && tau > 0.0);
    let cmd = Ned::from(*v_cmd);
    let decay = (-dt / tau).exp();
    let velocity = cmd + (state.velocity - cmd) * decay;
    let position = state.position + (state.velocity + velocity) * (0.5 * dt);
    VehicleState {
        position,
        velocity,
        heading_deg: heading_cmd_deg
            .map(normalize_heading)
            .unwrap_or(state.heading_deg),
    }
}

/// Heading that points along a horizontal command, if it is fast enough to
/// define one.
pub fn heading_along(cmd: &VelocitySetpointNed, min_speed: f64) -> Option<f64> {
    (cmd.n.hypot(cmd.e) > min_speed).then(|| cmd.e.atan2(cmd.n).to_degrees())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mission {
    #[serde(rename = "waypoints_ned_m")]
    pub waypoints: Vec<Ned>,
    #[serde(rename = "acceptance_radius_m")]
    pub acceptance_radius: f64,
    #[serde(rename = "cruise_speed_mps")]
    pub cruise_speed: f64,
}

impl Mission {
    pub fn validate(&self) -> Result<(), VehicleError> {
        if self.waypoints.is_empty() {
            return Err(VehicleError::EmptyMission);
        }
        if !(self.acceptance_radius > 0.0) {
            return Err(VehicleError::InvalidMission("acceptance radius must be positive"));
        }
        if !(self.cruise_speed >= 0.0 && self.cruise_speed.is_finite()) {
            return Err(VehicleError::InvalidMission("cruise speed must be non-negative"));
        }
        if !self.waypoints.iter().all(Ned::is_finite) {
            return Err(VehicleError::InvalidMission("waypoints must be finite"));
        }
        Ok(())
    }
}

/// Guided-mode velocity toward the active waypoint.
///
/// Returns the command and the (possibly advanced) active index. An index
/// equal to the number of waypoints means the mission is complete.
pub fn waypoint_velocity(
    state: &VehicleState,
    mission: &Mission,
    active: usize,
) -> (VelocitySetpointNed, usize) {
    let mut idx = active;
    while let Some(wp) = mission.waypoints.get(idx) {
        let to_wp = *wp - state.position;
        let dist = to_wp.norm();
        if dist <= mission.acceptance_radius {
            idx += 1;
            continue;
        }
        return ((to_wp * (mission.cruise_speed / dist)).into(), idx);
    }
    (VelocitySetpointNed::ZERO, idx)
}
