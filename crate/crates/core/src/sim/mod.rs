//! Closed-loop scenario runner.
//!
//! Each step the detector (every `detection_period_s`), the mode machine and
//! the vehicle are advanced in that order. Offboard setpoints override the
//! mission exactly while the machine is in offboard mode.

pub mod log;
pub mod report;
pub mod scenario;
pub mod split;

use crate::camera::TargetEstimate;
use crate::detector;
use crate::frame::Ned;
use crate::guidance::{FlightMode, GuidanceError, ModeMachine, VelocitySetpointNed};
use crate::link::LinkError;
use crate::vehicle::{heading_along, step_dynamics, waypoint_velocity, VehicleState};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub use log::{DetRecord, LogRow};
pub use report::{MetricParams, RunReport};
pub use scenario::{HeadingPolicy, RunMode, Scenario};

/// Horizontal speed below which a command does not define a heading.
pub const HEADING_MIN_SPEED: f64 = 0.1;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {}", .0.join("; "))]
    InvalidScenario(Vec<String>),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("bad log: {0}")]
    BadLog(String),
    #[error(transparent)]
    Guidance(#[from] GuidanceError),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error("detection node: {0}")]
    Node(String),
}

impl SimError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Stable machine-readable failure category.
    pub fn kind(&self) -> &'static str {
        match self {
            SimError::InvalidScenario(_) => "invalid_scenario",
            SimError::Io { .. } => "io",
            SimError::Csv(_) => "csv",
            SimError::BadLog(_) => "bad_log",
            SimError::Guidance(_) => "guidance",
            SimError::Link(_) => "link",
            SimError::Node(_) => "detection_node",
        }
    }
}

/// Produces detections for the loop. Called only on detector frames.
pub trait DetectionSource {
    fn detect(
        &mut self,
        t_s: f64,
        ego: &VehicleState,
        enemy: &Ned,
    ) -> Result<Option<(u64, TargetEstimate)>, SimError>;
}

/// Detector running in the same process as guidance.
#[derive(Debug, Clone)]
pub struct InProcessDetector {
    model: detector::DetectorModel,
    threshold: f64,
    next_seq: u64,
}

impl InProcessDetector {
    pub fn new(scenario: &Scenario) -> Self {
        Self {
            model: scenario.detector.clone(),
            threshold: scenario.guidance.threshold,
            next_seq: 0,
        }
    }
}

impl DetectionSource for InProcessDetector {
    fn detect(
        &mut self,
        _t_s: f64,
        ego: &VehicleState,
        enemy: &Ned,
    ) -> Result<Option<(u64, TargetEstimate)>, SimError> {
        Ok(detector::observe(ego, enemy, &self.model, self.threshold).map(|est| {
            let seq = self.next_seq;
            self.next_seq += 1;
            (seq, est)
        }))
    }
}

/// Result of one closed-loop run.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub rows: Vec<LogRow>,
    /// Active mission waypoint on each row.
    pub active_waypoint: Vec<usize>,
    pub report: RunReport,
}

impl SimRun {
    pub fn csv(&self) -> String {
        log::to_csv_string(&self.rows)
    }

    /// Writes `trajectory.csv`, `report.txt` and `report.json` into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<(), SimError> {
        std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
        log::write_csv_file(&self.rows, &dir.join("trajectory.csv"))?;
        let txt = dir.join("report.txt");
        std::fs::write(&txt, self.report.to_string()).map_err(|e| SimError::io(&txt, e))?;
        let json = dir.join("report.json");
        std::fs::write(&json, self.report.to_json()).map_err(|e| SimError::io(&json, e))?;
        Ok(())
    }
}

/// Runs the scenario with the in-process detector.
///
/// `seed` overrides the detector seed when given. The loop itself has no
/// stochastic element, so identical inputs give byte-identical logs.
pub fn run_scenario(scenario: &Scenario, seed: Option<u64>) -> Result<SimRun, SimError> {
    let mut source = InProcessDetector::new(scenario);
    run_with_source(scenario, seed, &mut source)
}

pub fn run_with_source(
    scenario: &Scenario,
    seed: Option<u64>,
    source: &mut dyn DetectionSource,
) -> Result<SimRun, SimError> {
    scenario.validate()?;
    let dt = scenario.dt_s;
    let stride = scenario.detection_stride();
    let mut machine = ModeMachine::new(scenario.guidance.clone())?;
    let mut ego = scenario.ego.initial_state();
    let mut enemy = scenario::EnemyTrack::new(&scenario.enemy);
    let mut active = 0usize;
    let mut offboard_cmd = VelocitySetpointNed::ZERO;

    let steps = scenario.steps();
    let mut rows = Vec::with_capacity(steps as usize);
    let mut active_log = Vec::with_capacity(steps as usize);

    for k in 0..steps {
        let t = k as f64 * dt;
        let enemy_pos = enemy.position();
        let det = if k % stride == 0 {
            source.detect(t, &ego, &enemy_pos)?
        } else {
            None
        };
        let seen = det
            .as_ref()
            .filter(|_| scenario.guidance_enabled)
            .map(|(_, est)| est);
        let out = machine.step(seen, ego.heading_deg, t)?;
        if let Some(sp) = out.setpoint {
            offboard_cmd = sp;
        }

        let (cmd, heading_cmd) = match machine.mode() {
            FlightMode::Offboard => {
                let heading = match scenario.heading_policy {
                    HeadingPolicy::GuidedOnly => None,
                    HeadingPolicy::FollowCommand => heading_along(&offboard_cmd, HEADING_MIN_SPEED),
                };
                (offboard_cmd, heading)
            }
            FlightMode::Guided => {
                let (v, idx) = waypoint_velocity(&ego, &scenario.mission, active);
                active = idx;
                (v, heading_along(&v, HEADING_MIN_SPEED))
            }
        };

        rows.push(LogRow {
            t_s: t,
            ego: ego.position.into(),
            ego_heading_deg: ego.heading_deg,
            enemy: enemy_pos.into(),
            mode: machine.mode(),
            det: det.map(|(seq, est)| DetRecord {
                seq,
                x_d: est.x_d,
                y_d: est.y_d,
                z_d: est.z_d,
                prob: est.probability,
            }),
            cmd: [cmd.n, cmd.e, cmd.d],
        });
        active_log.push(active);

        ego = step_dynamics(&ego, &cmd, heading_cmd, dt, scenario.tau_s);
        enemy.step(dt);
    }

    let params = MetricParams {
        dt_s: dt,
        capture_radius_m: scenario.metrics.capture_radius_m,
        capture_hold_s: scenario.metrics.capture_hold_s,
        deadband: scenario.guidance.deadband,
        camera: scenario.detector.camera,
    };
    let mut report = RunReport::from_rows(&rows, &params);
    report.scenario = scenario.name.clone();
    report.seed = Some(seed.unwrap_or(scenario.detector.rng_seed));
    report.mission_complete = Some(active >= scenario.mission.waypoints.len());
    Ok(SimRun {
        rows,
        active_waypoint: active_log,
        report,
    })
}
