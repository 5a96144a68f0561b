//! Avoidance velocity setpoints for an intruder seen at several bearings and
//! ego headings.

use stadia::guidance::{avoidance_setpoint, BodyTarget, GuidanceConfig, Rotation};

fn main() {
    let verbatim = GuidanceConfig::default();
    let standard = GuidanceConfig {
        rotation: Rotation::Standard,
        ..GuidanceConfig::default()
    };

    let targets = [
        ("dead ahead, 4 m", BodyTarget { x_b: 4.0, y_b: 0.0, z_b: 0.0 }),
        ("ahead-right", BodyTarget { x_b: 3.0, y_b: 1.0, z_b: 0.0 }),
        ("ahead, below", BodyTarget { x_b: 3.0, y_b: 0.0, z_b: 0.8 }),
    ];
    for heading in [0.0, 90.0, 225.0] {
        println!("heading {heading:>5.1} deg");
        for (label, body) in &targets {
            let a = avoidance_setpoint(body, heading, &verbatim);
            let b = avoidance_setpoint(body, heading, &standard);
            println!(
                "  {label:<16} verbatim ({:>6.3}, {:>6.3}, {:>6.3})   standard ({:>6.3}, {:>6.3}, {:>6.3})",
                a.n, a.e, a.d, b.n, b.e, b.d
            );
        }
    }
}
