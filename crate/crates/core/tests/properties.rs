use proptest::prelude::*;
use stadia::camera::{
    depth_from_size, normalize_centre, position_from_detection, BoundingBox, CameraModel,
    NormalizedCentre, TargetEstimate,
};
use stadia::detector::{synth_detection, DetectorModel, RelativeTarget};
use stadia::guidance::{
    avoidance_setpoint, guidance_step, tracking_setpoint, BodyTarget, FlightMode, GuidanceConfig,
    ModeState, Rotation,
};
use stadia::link::{decode_detection, encode_detection, DetectionDatagram, Mailbox};
use stadia::vehicle::{step_dynamics, waypoint_velocity, Mission, VehicleState};
use stadia::{Ned, VelocitySetpointNed};
use std::sync::Arc;

fn cam() -> CameraModel {
    CameraModel::default()
}

prop_compose! {
    fn in_frame_box()(x0 in 0.0..639.0f64, y0 in 0.0..479.0f64, fw in 0.0..1.0f64, fh in 0.0..1.0f64)
        -> BoundingBox {
        let x1 = x0 + (640.0 - x0) * fw.max(1e-6);
        let y1 = y0 + (480.0 - y0) * fh.max(1e-6);
        BoundingBox::new(x0, y0, x1.min(640.0), y1.min(480.0)).unwrap()
    }
}

prop_compose! {
    fn body()(x in 0.0..8.0f64, y in -5.0..5.0f64, z in -5.0..5.0f64) -> BodyTarget {
        BodyTarget { x_b: x, y_b: y, z_b: z }
    }
}

fn target_box_fits(rel: &RelativeTarget, model: &DetectorModel) -> bool {
    // box must not touch the frame edges, or clipping changes its centre
    let Some((b, _)) = synth_detection(rel, model) else {
        return false;
    };
    b.x_min > 1.0 && b.y_min > 1.0 && b.x_max < model.camera.width - 1.0 && b.y_max < model.camera.height - 1.0
}

proptest! {
    #[test]
    fn centre_is_in_unit_square(b in in_frame_box()) {
        let c = normalize_centre(&b, &cam()).unwrap();
        prop_assert!((-1.0..=1.0).contains(&c.x) && (-1.0..=1.0).contains(&c.y));
    }

    #[test]
    fn centre_is_affine_in_box_position(b in in_frame_box(), dx in -50.0..50.0f64, dy in -50.0..50.0f64) {
        let moved = BoundingBox::new(b.x_min + dx, b.y_min + dy, b.x_max + dx, b.y_max + dy).unwrap();
        prop_assume!(moved.validate(&cam()).is_ok());
        let c0 = normalize_centre(&b, &cam()).unwrap();
        let c1 = normalize_centre(&moved, &cam()).unwrap();
        prop_assert!((c1.x - c0.x - 2.0 * dx / 640.0).abs() < 1e-9);
        prop_assert!((c1.y - c0.y + 2.0 * dy / 480.0).abs() < 1e-9);
    }

    #[test]
    fn depth_law_decreases_within_branches(a in 1e-6..0.4999f64, b in 1e-6..0.4999f64) {
        let branch = |s: f64| if s <= 0.04 { 0 } else if s <= 0.4 { 1 } else { 2 };
        prop_assume!(a < b && branch(a) == branch(b));
        prop_assert!(depth_from_size(a).unwrap() > depth_from_size(b).unwrap());
    }

    #[test]
    fn mirrored_box_negates_lateral_offset(b in in_frame_box()) {
        let m = BoundingBox::new(640.0 - b.x_max, b.y_min, 640.0 - b.x_min, b.y_max).unwrap();
        let e0 = position_from_detection(&b, &cam(), 0.9, 0.7).unwrap();
        let e1 = position_from_detection(&m, &cam(), 0.9, 0.7).unwrap();
        prop_assert_eq!(e0.is_some(), e1.is_some());
        if let (Some(e0), Some(e1)) = (e0, e1) {
            prop_assert!((e0.x_d + e1.x_d).abs() <= 1e-9 * (1.0 + e0.x_d.abs()));
            prop_assert!((e0.z_d - e1.z_d).abs() <= 1e-12);
            prop_assert!((e0.y_d - e1.y_d).abs() <= 1e-12);
        }
    }

    #[test]
    fn centred_box_has_no_offset(half_w in 1u32..226) {
        // exact halves keep the box centre exactly on the principal point
        let hw = f64::from(half_w);
        let hh = hw * 0.75;
        let b = BoundingBox::new(320.0 - hw, 240.0 - hh, 320.0 + hw, 240.0 + hh).unwrap();
        let e = position_from_detection(&b, &cam(), 0.9, 0.7).unwrap().unwrap();
        prop_assert_eq!((e.x_d, e.y_d), (0.0, 0.0));
    }

    #[test]
    fn loop_closure_is_exact_without_quantization(
        z in prop_oneof![0.9..=2.0632f64, 2.4..=7.0f64],
        ax in -1.0..1.0f64,
        ay in -1.0..1.0f64,
    ) {
        let model = DetectorModel::default();
        let rel = RelativeTarget { x: ax * 0.5 * z, y: ay * 0.4 * z, z };
        prop_assume!(target_box_fits(&rel, &model));
        let (b, p) = synth_detection(&rel, &model).unwrap();
        let e = position_from_detection(&b, &model.camera, p, 0.7).unwrap().unwrap();
        prop_assert!((e.x_d - rel.x).abs() < 1e-6, "{} vs {}", e.x_d, rel.x);
        prop_assert!((e.y_d - rel.y).abs() < 1e-6);
        prop_assert!((e.z_d - rel.z).abs() < 1e-6);
    }

    #[test]
    fn loop_closure_with_quantization(
        z in prop_oneof![0.9..=2.0f64, 2.45..=5.0f64],
        ax in -1.0..1.0f64,
        ay in -1.0..1.0f64,
    ) {
        let model = DetectorModel { quantize_px: true, ..Default::default() };
        let rel = RelativeTarget { x: ax * 0.5 * z, y: ay * 0.4 * z, z };
        prop_assume!(target_box_fits(&rel, &model));
        let (b, p) = synth_detection(&rel, &model).unwrap();
        let e = position_from_detection(&b, &model.camera, p, 0.7).unwrap().unwrap();
        let err = ((e.x_d - rel.x).powi(2) + (e.y_d - rel.y).powi(2) + (e.z_d - rel.z).powi(2)).sqrt();
        prop_assert!(err < 0.15, "error {err} at {rel:?}");
    }

    #[test]
    fn dead_zone_error_is_bounded(z in 2.0632..2.4f64) {
        let model = DetectorModel::default();
        let rel = RelativeTarget { x: 0.0, y: 0.0, z };
        let (b, p) = synth_detection(&rel, &model).unwrap();
        let e = position_from_detection(&b, &model.camera, p, 0.7).unwrap().unwrap();
        prop_assert!((e.z_d - z).abs() <= 0.35);
    }

    #[test]
    fn probability_within_bounds_and_monotone(r1 in 0.0..12.0f64, r2 in 0.0..12.0f64) {
        let m = DetectorModel::default();
        let (p1, p2) = (m.probability_at(r1), m.probability_at(r2));
        prop_assert!(p1 >= m.p_far && p1 <= m.p_near);
        if r1 <= r2 {
            prop_assert!(p1 >= p2);
        }
    }

    #[test]
    fn setpoints_respect_the_cap(b in body(), heading in 0.0..360.0f64, cx in -1.0..1.0f64, cy in -1.0..1.0f64,
                                 cap in 0.1..5.0f64, standard in any::<bool>()) {
        let cfg = GuidanceConfig {
            v_cap_mps: cap,
            rotation: if standard { Rotation::Standard } else { Rotation::Verbatim },
            ..Default::default()
        };
        let a = avoidance_setpoint(&b, heading, &cfg);
        let t = tracking_setpoint(&b, &NormalizedCentre { x: cx, y: cy }, heading, &cfg);
        prop_assert!(a.norm() <= cap * (1.0 + 1e-12));
        prop_assert!(t.norm() <= cap * (1.0 + 1e-12));
    }

    #[test]
    fn vertical_deadband(b in body(), heading in 0.0..360.0f64, cx in -1.0..1.0f64, cy in -0.4..=0.4f64) {
        let cfg = GuidanceConfig { has_net: true, ..Default::default() };
        let t = tracking_setpoint(&b, &NormalizedCentre { x: cx, y: cy }, heading, &cfg);
        if cx.abs() > cfg.deadband {
            prop_assert_eq!(t.d, 0.0);
        } else {
            prop_assert_eq!((t.n, t.e), (0.0, 0.0));
        }
    }

    #[test]
    fn mode_machine_safety(events in proptest::collection::vec((any::<bool>(), 0.0..0.3f64), 1..80)) {
        let cfg = GuidanceConfig::default();
        let est = TargetEstimate {
            x_d: 0.5, y_d: 0.0, z_d: 5.0, size: 0.02,
            centre: NormalizedCentre { x: 0.1, y: 0.0 }, probability: 0.9,
        };
        let mut state = ModeState::default();
        let mut now = 0.0;
        let mut trace = Vec::new();
        for (detected, gap) in &events {
            now += gap;
            let (next, out) = guidance_step(detected.then_some(&est), 0.0, now, &state, &cfg).unwrap();
            if out.setpoint.is_some() {
                prop_assert_eq!(next.mode, FlightMode::Offboard);
            }
            prop_assert_eq!(out.zero_setpoint_emitted, state.mode == FlightMode::Guided && next.mode == FlightMode::Offboard);
            if next.mode == FlightMode::Offboard {
                prop_assert!(now - next.last_command.unwrap() <= cfg.refresh_timeout_s);
            }
            trace.push((next, out));
            state = next;
        }
        // same inputs, same outputs
        let mut state = ModeState::default();
        let mut now = 0.0;
        for ((detected, gap), expected) in events.iter().zip(&trace) {
            now += gap;
            let got = guidance_step(detected.then_some(&est), 0.0, now, &state, &cfg).unwrap();
            prop_assert_eq!(&got, expected);
            state = got.0;
        }
    }

    #[test]
    fn velocity_error_decays_exponentially(
        v in prop::array::uniform3(-5.0..5.0f64),
        c in prop::array::uniform3(-5.0..5.0f64),
        dt in 0.001..0.5f64,
        tau in 0.05..2.0f64,
    ) {
        let mut s = VehicleState::at(Ned::ZERO, 0.0);
        s.velocity = v.into();
        let cmd = VelocitySetpointNed::new(c[0], c[1], c[2]);
        let next = step_dynamics(&s, &cmd, None, dt, tau);
        let before = (s.velocity - Ned::from(cmd)).norm();
        let after = (next.velocity - Ned::from(cmd)).norm();
        prop_assert!((after - before * (-dt / tau).exp()).abs() <= 1e-12 * (1.0 + before));
    }

    #[test]
    fn converged_waypoint_flight_closes_distance(
        wp in prop::array::uniform3(-50.0..50.0f64),
        cruise in 0.5..5.0f64,
        slip in prop::array::uniform3(-0.03..0.03f64),
    ) {
        let mission = Mission { waypoints: vec![wp.into()], acceptance_radius: 1.0, cruise_speed: cruise };
        let mut s = VehicleState::at(Ned::ZERO, 0.0);
        let (cmd, _) = waypoint_velocity(&s, &mission, 0);
        prop_assume!(cmd.norm() > 0.0);
        s.velocity = Ned::from(cmd) + Ned::from(slip) * cruise;
        let before = (Ned::from(wp) - s.position).norm();
        let next = step_dynamics(&s, &cmd, None, 0.02, 0.3);
        prop_assert!((Ned::from(wp) - next.position).norm() < before);
    }

    #[test]
    fn codec_round_trip(
        seq in any::<u64>(), t_ms in any::<u64>(), class_id in any::<u32>(),
        prob in 0.0..=1.0f64,
        x in -1e6..1e6f64, y in -1e6..1e6f64, z in -1e6..1e6f64,
    ) {
        let d = DetectionDatagram { seq, t_ms, class_id, prob, x_d: x, y_d: y, z_d: z };
        let bytes = encode_detection(&d).unwrap();
        let back = decode_detection(&bytes).unwrap();
        prop_assert_eq!((back.seq, back.t_ms, back.class_id), (seq, t_ms, class_id));
        for (a, b) in [(back.prob, prob), (back.x_d, x), (back.y_d, y), (back.z_d, z)] {
            prop_assert!((a - b).abs() <= 5e-7 + 1e-10 * b.abs());
        }
        prop_assert_eq!(encode_detection(&back).unwrap(), bytes);
    }

    #[test]
    fn decoder_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..700)) {
        let _ = decode_detection(&bytes);
    }

    #[test]
    fn decoder_never_panics_on_near_misses(tail in "[0-9.,eE+-]{0,60}") {
        let line = format!("DET,{tail}");
        if let Ok(d) = decode_detection(line.as_bytes()) {
            prop_assert!((0.0..=1.0).contains(&d.prob));
        }
    }
}

#[test]
fn consumer_sees_increasing_sequence_numbers() {
    let mailbox = Arc::new(Mailbox::new());
    let producer = {
        let mailbox = mailbox.clone();
        std::thread::spawn(move || {
            // interleave fresh and stale datagrams
            for s in 0..20_000u64 {
                let seq = if s % 3 == 0 { s / 2 } else { s };
                mailbox.offer(DetectionDatagram {
                    seq,
                    t_ms: s,
                    class_id: 0,
                    prob: 0.8,
                    x_d: 0.0,
                    y_d: 0.0,
                    z_d: 5.0,
                });
            }
        })
    };
    let mut last = None;
    let mut seen = 0;
    while !producer.is_finished() || mailbox.peek().is_some() {
        if let Some(d) = mailbox.take() {
            if let Some(prev) = last {
                assert!(d.seq > prev, "{} after {prev}", d.seq);
            }
            last = Some(d.seq);
            seen += 1;
        }
    }
    producer.join().unwrap();
    assert!(seen > 0);
}
