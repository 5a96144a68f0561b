//! Avoidance and net-tracking velocity setpoints, and the guided/offboard
//! mode machine that decides when they override the mission.
//!
//! The manoeuvre laws act on the body-frame target `(x_b, y_b, z_b)`, a
//! permutation of the camera estimate, and produce a north-east-down
//! velocity. Without a net the ego moves away from the target; with a net
//! it moves toward it, except inside a central dead-band of the image
//! where no lateral (resp. vertical) correction is commanded.

use crate::camera::{NormalizedCentre, TargetEstimate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GuidanceError {
    #[error("clock went backwards: {now} < {previous}")]
    NonMonotoneClock { previous: f64, now: f64 },
    #[error("invalid guidance config: {0}")]
    InvalidConfig(&'static str),
}

/// Target position in the body frame: forward, rightward, upward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyTarget {
    pub x_b: f64,
    pub y_b: f64,
    pub z_b: f64,
}

/// `(x_b, y_b, z_b) = (z_d, x_d, y_d)`.
pub fn body_from_estimate(est: &TargetEstimate) -> BodyTarget {
    BodyTarget {
        x_b: est.z_d,
        y_b: est.x_d,
        z_b: est.y_d,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VelocitySetpointNed {
    pub n: f64,
    pub e: f64,
    pub d: f64,
}

impl VelocitySetpointNed {
    pub const ZERO: Self = Self {
        n: 0.0,
        e: 0.0,
        d: 0.0,
    };

    pub fn new(n: f64, e: f64, d: f64) -> Self {
        Self { n, e, d }
    }

    pub fn norm(&self) -> f64 {
        (self.n * self.n + self.e * self.e + self.d * self.d).sqrt()
    }

    /// Uniformly rescales the vector so its magnitude does not exceed `cap`.
    pub fn clamped(self, cap: f64) -> Self {
        let m = self.norm();
        if m > cap && m > 0.0 {
            let k = cap / m;
            Self::new(self.n * k, self.e * k, self.d * k)
        } else {
            self
        }
    }
}

impl From<VelocitySetpointNed> for crate::frame::Ned {
    fn from(v: VelocitySetpointNed) -> Self {
        crate::frame::Ned::new(v.n, v.e, v.d)
    }
}

impl From<crate::frame::Ned> for VelocitySetpointNed {
    fn from(v: crate::frame::Ned) -> Self {
        Self::new(v.n, v.e, v.d)
    }
}

/// How the horizontal body offsets are mapped into north/east.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rotation {
    /// `n ∝ sin φ · x_b`, `e ∝ cos φ · y_b`: the fitted manoeuvre law as flown.
    #[default]
    Verbatim,
    /// Proper yaw rotation of `(x_b, y_b)` into north/east.
    Standard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GuidanceConfig {
    pub k1: f64,
    pub k2: f64,
    pub k_net: f64,
    /// Dead-band half-width in normalized centre units.
    pub deadband: f64,
    pub has_net: bool,
    /// Minimum detection probability acted upon.
    pub threshold: f64,
    /// Minimum spacing between detections handed to guidance.
    pub detection_period_s: f64,
    /// Offboard falls back to guided after this long without a command.
    pub refresh_timeout_s: f64,
    pub v_cap_mps: f64,
    pub rotation: Rotation,
    /// Multiplies the vertical command; `+1` keeps `d = k · z_b`.
    pub d_sign: f64,
}

impl Default for GuidanceConfig {
    fn default() -> Self {
        Self {
            k1: 1.0,
            k2: 0.5,
            k_net: 0.5,
            deadband: 0.4,
            has_net: false,
            threshold: 0.7,
            detection_period_s: 0.5,
            refresh_timeout_s: 0.5,
            v_cap_mps: 3.0,
            rotation: Rotation::Verbatim,
            d_sign: 1.0,
        }
    }
}

impl GuidanceConfig {
    pub fn validate(&self) -> Result<(), GuidanceError> {
        use GuidanceError::InvalidConfig as E;
        if !(self.k1 > 0.0 && self.k2 > 0.0 && self.k_net > 0.0) {
            return Err(E("gains k1, k2, k_net must be positive"));
        }
        if !(self.deadband > 0.0 && self.deadband < 1.0) {
            return Err(E("deadband must be in (0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(E("threshold must be in [0, 1]"));
        }
        if !(self.detection_period_s > 0.0 && self.detection_period_s.is_finite()) {
            return Err(E("detection_period_s must be positive"));
        }
        if !(self.refresh_timeout_s > 0.0 && self.refresh_timeout_s.is_finite()) {
            return Err(E("refresh_timeout_s must be positive"));
        }
        if !(self.v_cap_mps > 0.0) {
            return Err(E("v_cap_mps must be positive"));
        }
        if self.d_sign != 1.0 && self.d_sign != -1.0 {
            return Err(E("d_sign must be +1 or -1"));
        }
        Ok(())
    }
}

/// Horizontal pursuit direction: the north/east velocity that moves toward
/// the target, before the avoid/track sign is applied.
fn toward(body: &BodyTarget, heading_deg: f64, k1: f64, rotation: Rotation) -> (f64, f64) {
    let phi = heading_deg * std::f64::consts::PI / 180.0;
    match rotation {
        // avoidance is (+k1 sin φ x_b, -k1 cos φ y_b); tracking its negation
        Rotation::Verbatim => (-k1 * phi.sin() * body.x_b, k1 * phi.cos() * body.y_b),
        Rotation::Standard => (
            k1 * (phi.cos() * body.x_b - phi.sin() * body.y_b),
            k1 * (phi.sin() * body.x_b + phi.cos() * body.y_b),
        ),
    }
}

/// Collision avoidance without a net.
pub fn avoidance_setpoint(
    body: &BodyTarget,
    heading_deg: f64,
    cfg: &GuidanceConfig,
) -> VelocitySetpointNed {
    let (n, e) = toward(body, heading_deg, cfg.k1, cfg.rotation);
    VelocitySetpointNed::new(-n, -e, cfg.d_sign * cfg.k2 * body.z_b).clamped(cfg.v_cap_mps)
}

/// Net tracking with the central dead-band.
pub fn tracking_setpoint(
    body: &BodyTarget,
    centre: &NormalizedCentre,
    heading_deg: f64,
    cfg: &GuidanceConfig,
) -> VelocitySetpointNed {
    let out_x = centre.x.abs() > cfg.deadband;
    let out_y = centre.y.abs() > cfg.deadband;
    let vertical = cfg.d_sign * cfg.k_net * body.z_b;
    let sp = if !out_x {
        VelocitySetpointNed::new(0.0, 0.0, vertical)
    } else {
        let (n, e) = toward(body, heading_deg, cfg.k1, cfg.rotation);
        VelocitySetpointNed::new(n, e, if out_y { vertical } else { 0.0 })
    };
    sp.clamped(cfg.v_cap_mps)
}

/// Manoeuvre for the configured payload state.
pub fn manoeuvre_setpoint(
    est: &TargetEstimate,
    heading_deg: f64,
    cfg: &GuidanceConfig,
) -> VelocitySetpointNed {
    let body = body_from_estimate(est);
    if cfg.has_net {
        tracking_setpoint(&body, &est.centre, heading_deg, cfg)
    } else {
        avoidance_setpoint(&body, heading_deg, cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FlightMode {
    /// Mission commands from the ground segment are flown.
    #[default]
    Guided,
    /// Onboard setpoints override the mission.
    Offboard,
}

impl FlightMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FlightMode::Guided => "Guided",
            FlightMode::Offboard => "Offboard",
        }
    }
}

/// Mode machine state. Owned by a single stepping loop.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModeState {
    pub mode: FlightMode,
    pub offboard_since: Option<f64>,
    pub last_command: Option<f64>,
    last_step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepOutput {
    /// The zero setpoint that opens offboard control was sent this step.
    pub zero_setpoint_emitted: bool,
    pub setpoint: Option<VelocitySetpointNed>,
}

/// Advances the mode machine by one tick.
///
/// Detections below the configured threshold are ignored. The caller is
/// responsible for spacing detections at least `detection_period_s` apart.
pub fn guidance_step(
    detection: Option<&TargetEstimate>,
    heading_deg: f64,
    now: f64,
    state: &ModeState,
    cfg: &GuidanceConfig,
) -> Result<(ModeState, StepOutput), GuidanceError> {
    if let Some(prev) = state.last_step {
        if !(now >= prev) {
            return Err(GuidanceError::NonMonotoneClock {
                previous: prev,
                now,
            });
        }
    }
    let mut next = *state;
    next.last_step = Some(now);
    let mut out = StepOutput::default();
    let detection = detection.filter(|d| d.probability >= cfg.threshold);

    match (state.mode, detection) {
        (FlightMode::Guided, Some(est)) => {
            out.zero_setpoint_emitted = true;
            out.setpoint = Some(manoeuvre_setpoint(est, heading_deg, cfg));
            next.mode = FlightMode::Offboard;
            next.offboard_since = Some(now);
            next.last_command = Some(now);
        }
        (FlightMode::Offboard, Some(est)) => {
            out.setpoint = Some(manoeuvre_setpoint(est, heading_deg, cfg));
            next.last_command = Some(now);
        }
        (FlightMode::Offboard, None) => {
            let last = state.last_command.unwrap_or(f64::NEG_INFINITY);
            if now - last > cfg.refresh_timeout_s {
                next.mode = FlightMode::Guided;
                next.offboard_since = None;
            }
        }
        (FlightMode::Guided, None) => {}
    }
    Ok((next, out))
}

/// Convenience wrapper that owns a [`ModeState`].
#[derive(Debug, Clone)]
pub struct ModeMachine {
    cfg: GuidanceConfig,
    state: ModeState,
}

impl ModeMachine {
    pub fn new(cfg: GuidanceConfig) -> Result<Self, GuidanceError> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            state: ModeState::default(),
        })
    }

    pub fn step(
        &mut self,
        detection: Option<&TargetEstimate>,
        heading_deg: f64,
        now: f64,
    ) -> Result<StepOutput, GuidanceError> {
        let (state, out) = guidance_step(detection, heading_deg, now, &self.state, &self.cfg)?;
        self.state = state;
        Ok(out)
    }

    pub fn mode(&self) -> FlightMode {
        self.state.mode
    }

    pub fn state(&self) -> &ModeState {
        &self.state
    }

    pub fn config(&self) -> &GuidanceConfig {
        &self.cfg
    }
}
