//! Scenario files.
//!
//! Scenarios are TOML. Every quantity carries its unit in the key name and
//! unknown keys are rejected, so a typo fails loudly instead of silently
//! falling back to a default.

use crate::detector::DetectorModel;
use crate::frame::Ned;
use crate::guidance::GuidanceConfig;
use crate::vehicle::{Mission, VehicleState};
use serde::{Deserialize, Serialize};
use std::path::Path;

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    /// Detector and guidance in one deterministic loop.
    #[default]
    Inproc,
    /// Detector in a child process, connected over the UDP link.
    Split,
}

impl std::str::FromStr for RunMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inproc" => Ok(RunMode::Inproc),
            "split" => Ok(RunMode::Split),
            other => Err(format!("unknown run mode `{other}` (expected inproc or split)")),
        }
    }
}

/// Where the ego camera points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadingPolicy {
    /// Yaw follows the horizontal velocity command in guided mode and is
    /// held while offboard setpoints are flown.
    #[default]
    GuidedOnly,
    /// Yaw follows every horizontal velocity command, offboard included.
    FollowCommand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoSpec {
    pub position_ned_m: Ned,
    #[serde(default)]
    pub velocity_ned_mps: Ned,
    #[serde(default)]
    pub heading_deg: f64,
}

impl EgoSpec {
    pub fn initial_state(&self) -> VehicleState {
        let mut s = VehicleState::at(self.position_ned_m, self.heading_deg);
        s.velocity = self.velocity_ned_mps;
        s
    }
}

/// Kinematic enemy: flies its waypoints in order at constant speed and stops
/// at the last one. A single waypoint is a fixed position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnemySpec {
    pub waypoints_ned_m: Vec<Ned>,
    #[serde(default)]
    pub speed_mps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsSpec {
    pub capture_radius_m: f64,
    pub capture_hold_s: f64,
}

impl Default for MetricsSpec {
    fn default() -> Self {
        Self {
            capture_radius_m: 1.0,
            capture_hold_s: 1.0,
        }
    }
}

fn default_dt() -> f64 {
    0.02
}

fn default_tau() -> f64 {
    0.3
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub duration_s: f64,
    #[serde(default = "default_dt")]
    pub dt_s: f64,
    /// Velocity-tracking time constant of the vehicle.
    #[serde(default = "default_tau")]
    pub tau_s: f64,
    #[serde(default)]
    pub run_mode: RunMode,
    /// When false the detector still runs but guidance never sees it.
    #[serde(default = "default_true")]
    pub guidance_enabled: bool,
    #[serde(default)]
    pub heading_policy: HeadingPolicy,
    pub ego: EgoSpec,
    pub mission: Mission,
    pub enemy: EnemySpec,
    #[serde(default)]
    pub guidance: GuidanceConfig,
    #[serde(default)]
    pub detector: DetectorModel,
    #[serde(default)]
    pub metrics: MetricsSpec,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, SimError> {
        let s: Scenario =
            toml::from_str(text).map_err(|e| SimError::InvalidScenario(vec![e.message().to_string()]))?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Checks every field and reports all offending ones at once.
    pub fn validate(&self) -> Result<(), SimError> {
        let mut bad = Vec::new();
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            bad.push("duration_s: must be positive".to_string());
        }
        if !(self.dt_s > 0.0 && self.dt_s.is_finite()) {
            bad.push("dt_s: must be positive".to_string());
        }
        if !(self.tau_s > 0.0 && self.tau_s.is_finite()) {
            bad.push("tau_s: must be positive".to_string());
        }
        if !(self.ego.position_ned_m.is_finite()
            && self.ego.velocity_ned_mps.is_finite()
            && self.ego.heading_deg.is_finite())
        {
            bad.push("ego: state must be finite".to_string());
        }
        if let Err(e) = self.mission.validate() {
            bad.push(format!("mission: {e}"));
        }
        if self.enemy.waypoints_ned_m.is_empty() {
            bad.push("enemy.waypoints_ned_m: at least one waypoint required".to_string());
        }
        if !self.enemy.waypoints_ned_m.iter().all(Ned::is_finite) {
            bad.push("enemy.waypoints_ned_m: must be finite".to_string());
        }
        if !(self.enemy.speed_mps >= 0.0 && self.enemy.speed_mps.is_finite()) {
            bad.push("enemy.speed_mps: must be non-negative".to_string());
        }
        if let Err(e) = self.guidance.validate() {
            bad.push(format!("guidance: {e}"));
        }
        if let Err(e) = self.detector.validate() {
            bad.push(format!("detector: {e}"));
        }
        if !(self.metrics.capture_radius_m > 0.0) {
            bad.push("metrics.capture_radius_m: must be positive".to_string());
        }
        if !(self.metrics.capture_hold_s >= 0.0) {
            bad.push("metrics.capture_hold_s: must be non-negative".to_string());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(SimError::InvalidScenario(bad))
        }
    }

    /// Number of logged steps.
    pub fn steps(&self) -> u64 {
        (self.duration_s / self.dt_s).round() as u64
    }

    /// Steps between detector frames.
    pub fn detection_stride(&self) -> u64 {
        ((self.guidance.detection_period_s / self.dt_s).round() as u64).max(1)
    }
}

/// Enemy position along its waypoint track.
#[derive(Debug, Clone)]
pub struct EnemyTrack {
    waypoints: Vec<Ned>,
    speed: f64,
    next: usize,
    position: Ned,
}

impl EnemyTrack {
    pub fn new(spec: &EnemySpec) -> Self {
        Self {
            waypoints: spec.waypoints_ned_m.clone(),
            speed: spec.speed_mps,
            next: 1,
            position: spec.waypoints_ned_m[0],
        }
    }

    pub fn position(&self) -> Ned {
        self.position
    }

    pub fn step(&mut self, dt: f64) {
        let mut budget = self.speed * dt;
        while budget > 0.0 {
            let Some(target) = self.waypoints.get(self.next) else {
                return;
            };
            let to = *target - self.position;
            let dist = to.norm();
            if dist <= budget {
                self.position = *target;
                self.next += 1;
                budget -= dist;
            } else {
                self.position += to * (budget / dist);
                budget = 0.0;
            }
        }
    }
}
