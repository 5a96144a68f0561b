//! Net-tracking setpoints across the image: inside the central band only the
//! vertical channel acts, outside it the lateral terms steer toward the target.

use stadia::camera::NormalizedCentre;
use stadia::guidance::{tracking_setpoint, BodyTarget, GuidanceConfig};

fn main() {
    let cfg = GuidanceConfig {
        has_net: true,
        ..GuidanceConfig::default()
    };
    let z = 5.0;
    for y in [0.6, 0.0, -0.6] {
        let mut line = String::new();
        for x in [-0.8, -0.4, 0.0, 0.4, 0.8] {
            let centre = NormalizedCentre { x, y };
            let body = BodyTarget {
                x_b: z,
                y_b: (x * 31.1f64).to_radians().tan() * z,
                z_b: (y * 24.4f64).to_radians().tan() * z,
            };
            let sp = tracking_setpoint(&body, &centre, 0.0, &cfg);
            line.push_str(&format!("({:>5.2},{:>5.2},{:>5.2}) ", sp.n, sp.e, sp.d));
        }
        println!("y'={y:>4.1}  {line}");
    }
    println!("columns: x' = -0.8, -0.4, 0.0, 0.4, 0.8 (band edge {} is inside)", cfg.deadband);
}
