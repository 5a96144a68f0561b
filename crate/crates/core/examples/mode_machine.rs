//! Guided/offboard switching: a detection takes control, and control returns
//! to the mission once commands go stale.

use stadia::camera::{NormalizedCentre, TargetEstimate};
use stadia::guidance::{GuidanceConfig, ModeMachine};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut machine = ModeMachine::new(GuidanceConfig::default())?;
    let seen = TargetEstimate {
        x_d: 0.4,
        y_d: 0.0,
        z_d: 4.0,
        size: 0.027,
        centre: NormalizedCentre { x: 0.18, y: 0.0 },
        probability: 0.9,
    };

    // detections at 0.0 and 0.5 s, then nothing
    for k in 0..=12 {
        let t = k as f64 * 0.1;
        let det = (k == 0 || k == 5).then_some(&seen);
        let out = machine.step(det, 0.0, t)?;
        println!(
            "t={t:.1}  {:<8} {:<9} {}{}",
            if det.is_some() { "detect" } else { "" },
            machine.mode().as_str(),
            out.setpoint
                .map(|s| format!("cmd ({:.2}, {:.2}, {:.2})", s.n, s.e, s.d))
                .unwrap_or_default(),
            if out.zero_setpoint_emitted { "  [zero setpoint first]" } else { "" },
        );
    }

    // time may not run backwards
    assert!(machine.step(None, 0.0, 0.5).is_err());
    Ok(())
}
