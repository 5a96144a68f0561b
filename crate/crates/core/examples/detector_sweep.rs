//! Sweeps an intruder straight ahead of the camera and compares the estimated
//! depth with the truth, with and without pixel quantization.

use stadia::camera::position_from_detection;
use stadia::detector::{synth_detection, DetectorModel, RelativeTarget};

fn main() {
    let exact = DetectorModel::default();
    let pixels = DetectorModel {
        quantize_px: true,
        ..DetectorModel::default()
    };
    println!("{:>5}  {:>6}  {:>8}  {:>8}", "z", "prob", "z exact", "z pixel");
    let mut z = 0.5;
    while z <= 12.5 {
        let rel = RelativeTarget { x: 0.0, y: 0.0, z };
        let est = |m: &DetectorModel| {
            synth_detection(&rel, m).and_then(|(b, p)| {
                position_from_detection(&b, &m.camera, p, 0.7).ok().flatten().map(|e| (p, e.z_d))
            })
        };
        match (est(&exact), est(&pixels)) {
            (Some((p, a)), Some((_, b))) => println!("{z:>5.2}  {p:>6.3}  {a:>8.3}  {b:>8.3}"),
            _ => println!("{z:>5.2}  no detection"),
        }
        z += 0.5;
    }
}
