//! Builds a head-on encounter in code and compares the closest approach with
//! avoidance on and off.

use stadia::frame::Ned;
use stadia::sim::{run_scenario, Scenario};

const SCENARIO: &str = r#"
name = "head_on_inline"
duration_s = 20.0

[ego]
position_ned_m = [0.0, 0.0, -10.0]

[mission]
waypoints_ned_m = [[60.0, 0.0, -10.0]]
acceptance_radius_m = 1.0
cruise_speed_mps = 2.0

[enemy]
waypoints_ned_m = [[30.0, 0.5, -10.0], [-30.0, 0.5, -10.0]]
speed_mps = 2.0

[detector]
quantize_px = true
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let on = Scenario::from_toml_str(SCENARIO)?;
    let off = Scenario {
        guidance_enabled: false,
        ..on.clone()
    };
    for (label, s) in [("avoidance on", &on), ("avoidance off", &off)] {
        let run = run_scenario(s, None)?;
        let r = &run.report;
        println!(
            "{label:<14} min separation {:.3} m at t = {:.2} s, {:.2} s offboard",
            r.min_separation_m, r.min_separation_t_s, r.time_in_offboard_s
        );
        let closest = run
            .rows
            .iter()
            .min_by(|a, b| a.separation().total_cmp(&b.separation()))
            .unwrap();
        let lateral = Ned::from(closest.ego).e - Ned::from(closest.enemy).e;
        println!("{:<14} lateral offset at closest approach {lateral:.3} m", "");
    }
    Ok(())
}
