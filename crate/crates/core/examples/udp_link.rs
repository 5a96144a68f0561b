//! Detection datagrams over UDP: a sender streams detections, a background
//! server keeps only the newest one in a mailbox.

use stadia::link::{
    decode_detection, encode_detection, DetectionClient, DetectionDatagram, DetectionServer, Mailbox,
};
use std::sync::Arc;
use std::time::Duration;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let server = DetectionServer::bind(0, Arc::new(Mailbox::new()))?;
    println!("listening on {}", server.local_addr());
    let client = DetectionClient::connect(server.local_addr())?;

    for seq in 0..5u64 {
        let d = DetectionDatagram {
            seq,
            t_ms: seq * 500,
            class_id: 0,
            prob: 0.9 - 0.01 * seq as f64,
            x_d: 0.1 * seq as f64,
            y_d: 0.0,
            z_d: 6.0 - seq as f64,
        };
        println!("send {}", String::from_utf8(encode_detection(&d)?)?);
        client.send(&d)?;
    }
    client.send_raw(b"DET,not,a,detection")?;
    // a stale sequence number is dropped
    client.send(&DetectionDatagram {
        seq: 1,
        t_ms: 0,
        class_id: 0,
        prob: 0.9,
        x_d: 0.0,
        y_d: 0.0,
        z_d: 5.0,
    })?;

    let latest = server
        .mailbox()
        .take_at_least(4, Duration::from_secs(1))
        .expect("datagram delivered");
    println!("latest seq {} at z = {:.3} m", latest.seq, latest.z_d);
    std::thread::sleep(Duration::from_millis(100));
    let (received, accepted, malformed, stale) = server.stats().snapshot();
    println!("received {received}, accepted {accepted}, malformed {malformed}, stale {stale}");

    assert!(decode_detection(b"DET,1,2,0,1.5,0,0,1").is_err());
    server.shutdown();
    Ok(())
}
