//! Turns detector bounding boxes into camera-frame positions.
//!
//! ```text
//! cargo run --example depth_estimation
//! ```

use stadia::camera::{position_from_detection, size_ratio, BoundingBox, CameraModel};

fn main() {
    let cam = CameraModel::default();
    println!("{:>24}  {:>7}  {:>7}  {:>7}  {:>7}", "box", "size", "x_D", "y_D", "z_D");
    let boxes = [
        (304.0, 228.0, 336.0, 252.0),
        (260.0, 195.0, 380.0, 285.0),
        (100.0, 100.0, 180.0, 160.0),
        (400.0, 300.0, 560.0, 420.0),
        (160.0, 120.0, 480.0, 360.0),
    ];
    for (x0, y0, x1, y1) in boxes {
        let b = BoundingBox::new(x0, y0, x1, y1).expect("well-formed box");
        let size = size_ratio(&b, &cam).unwrap();
        match position_from_detection(&b, &cam, 0.9, 0.7) {
            Ok(Some(e)) => println!(
                "{:>24}  {size:>7.4}  {:>7.3}  {:>7.3}  {:>7.3}",
                format!("({x0},{y0})-({x1},{y1})"),
                e.x_d,
                e.y_d,
                e.z_d
            ),
            Ok(None) => println!("below threshold"),
            Err(err) => println!("{:>24}  {size:>7.4}  rejected: {err}", format!("({x0},{y0})-({x1},{y1})")),
        }
    }

    // low-confidence detections are dropped, not errors
    let b = BoundingBox::new(300.0, 220.0, 340.0, 260.0).unwrap();
    assert!(position_from_detection(&b, &cam, 0.5, 0.7).unwrap().is_none());
}
