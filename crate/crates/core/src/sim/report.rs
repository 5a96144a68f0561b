//! Run metrics computed from a trajectory log.

use crate::camera::CameraModel;
use crate::guidance::FlightMode;
use serde::{Deserialize, Serialize};
use std::fmt;

use super::log::LogRow;

/// Parameters the metrics need beyond the log itself.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricParams {
    pub dt_s: f64,
    pub capture_radius_m: f64,
    pub capture_hold_s: f64,
    pub deadband: f64,
    pub camera: CameraModel,
}

impl MetricParams {
    /// Defaults for a log whose scenario is unknown; `dt` is read from the
    /// first two rows.
    pub fn for_log(rows: &[LogRow]) -> Self {
        let dt_s = match rows {
            [a, b, ..] => b.t_s - a.t_s,
            _ => 0.02,
        };
        Self {
            dt_s,
            capture_radius_m: 1.0,
            capture_hold_s: 1.0,
            deadband: 0.4,
            camera: CameraModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub seed: Option<u64>,
    pub steps: usize,
    pub duration_s: f64,
    pub min_separation_m: f64,
    pub min_separation_t_s: f64,
    pub time_in_offboard_s: f64,
    pub capture: bool,
    pub capture_t_s: Option<f64>,
    pub detections_emitted: usize,
    pub mean_detection_cadence_s: Option<f64>,
    /// Unknown when the report is rebuilt from a log alone.
    pub mission_complete: Option<bool>,
}

impl RunReport {
    pub fn from_rows(rows: &[LogRow], params: &MetricParams) -> Self {
        let mut min_sep = f64::INFINITY;
        let mut min_sep_t = 0.0;
        let mut offboard_steps = 0usize;
        let mut det_times = Vec::new();
        let mut last_centre_in_band = false;
        let mut held = 0.0;
        let mut capture_t = None;

        for row in rows {
            let sep = row.separation();
            if sep < min_sep {
                min_sep = sep;
                min_sep_t = row.t_s;
            }
            if row.mode == FlightMode::Offboard {
                offboard_steps += 1;
            }
            if let Some(det) = &row.det {
                det_times.push(row.t_s);
                last_centre_in_band = params
                    .camera
                    .centre_of(det.x_d, det.y_d, det.z_d)
                    .is_some_and(|c| c.x.abs() <= params.deadband && c.y.abs() <= params.deadband);
            }
            let holding = row.mode == FlightMode::Offboard
                && last_centre_in_band
                && sep <= params.capture_radius_m;
            if holding {
                held += params.dt_s;
                if capture_t.is_none() && held + 1e-9 >= params.capture_hold_s {
                    capture_t = Some(row.t_s);
                }
            } else {
                held = 0.0;
            }
        }

        let cadence = (det_times.len() >= 2).then(|| {
            (det_times[det_times.len() - 1] - det_times[0]) / (det_times.len() - 1) as f64
        });
        let duration = rows.len() as f64 * params.dt_s;
        RunReport {
            scenario: String::new(),
            seed: None,
            steps: rows.len(),
            duration_s: duration,
            min_separation_m: if rows.is_empty() { 0.0 } else { min_sep },
            min_separation_t_s: min_sep_t,
            time_in_offboard_s: offboard_steps as f64 * params.dt_s,
            capture: capture_t.is_some(),
            capture_t_s: capture_t,
            detections_emitted: det_times.len(),
            mean_detection_cadence_s: cadence,
            mission_complete: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.3} s"));
        if !self.scenario.is_empty() {
            writeln!(f, "scenario            {}", self.scenario)?;
        }
        if let Some(seed) = self.seed {
            writeln!(f, "seed                {seed}")?;
        }
        writeln!(f, "steps               {} ({:.3} s)", self.steps, self.duration_s)?;
        writeln!(
            f,
            "min separation      {:.3} m at t = {:.3} s",
            self.min_separation_m, self.min_separation_t_s
        )?;
        writeln!(f, "time in offboard    {:.3} s", self.time_in_offboard_s)?;
        writeln!(
            f,
            "capture             {}{}",
            if self.capture { "yes" } else { "no" },
            self.capture_t_s
                .map_or(String::new(), |t| format!(" at t = {t:.3} s"))
        )?;
        writeln!(f, "detections          {}", self.detections_emitted)?;
        writeln!(f, "detection cadence   {}", opt(self.mean_detection_cadence_s))?;
        match self.mission_complete {
            Some(done) => writeln!(f, "mission complete    {}", if done { "yes" } else { "no" }),
            None => writeln!(f, "mission complete    unknown"),
        }
    }
}
