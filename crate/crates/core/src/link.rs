//! UDP link between the detection process (client) and the guidance
//! process (server).
//!
//! Each datagram is one ASCII line without a terminator:
//!
//! ```text
//! DET,<seq>,<t_ms>,<class_id>,<prob>,<x_D>,<y_D>,<z_D>
//! ```
//!
//! The four real fields are written with six decimals. The server keeps only
//! the newest datagram: a fresh one replaces whatever the guidance loop has
//! not consumed yet, and anything with a sequence number at or below the last
//! accepted one is dropped.

use crate::camera::{CameraModel, TargetEstimate};
use std::io;
use std::net::{SocketAddr, ToSocketAddrs, UdpSocket};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};
use thiserror::Error;
use tracing::{debug, warn};

pub const DEFAULT_DET_PORT: u16 = 4560;
pub const DET_PORT_ENV: &str = "STADIA_DET_PORT";
pub const MAX_DATAGRAM_LEN: usize = 512;
/// Largest coordinate magnitude that fits the line budget with margin.
pub const MAX_COORD_M: f64 = 1.0e9;
pub const CLASS_UAV: u32 = 0;

const TAG: &str = "DET";

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("malformed datagram: {0}")]
    MalformedDatagram(String),
    #[error("invalid datagram: {0}")]
    InvalidDatagram(&'static str),
    #[error("failed to bind detection port {port}: {source}")]
    Bind { port: u16, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionDatagram {
    pub seq: u64,
    pub t_ms: u64,
    pub class_id: u32,
    pub prob: f64,
    pub x_d: f64,
    pub y_d: f64,
    pub z_d: f64,
}

impl DetectionDatagram {
    pub fn from_estimate(seq: u64, t_ms: u64, est: &TargetEstimate) -> Self {
        Self {
            seq,
            t_ms,
            class_id: CLASS_UAV,
            prob: est.probability,
            x_d: est.x_d,
            y_d: est.y_d,
            z_d: est.z_d,
        }
    }

    pub fn validate(&self) -> Result<(), LinkError> {
        if !(0.0..=1.0).contains(&self.prob) {
            return Err(LinkError::InvalidDatagram("probability outside [0, 1]"));
        }
        for v in [self.x_d, self.y_d, self.z_d] {
            if !(v.is_finite() && v.abs() <= MAX_COORD_M) {
                return Err(LinkError::InvalidDatagram("coordinate not finite or too large"));
            }
        }
        Ok(())
    }

    /// Rebuilds a target estimate on the receiving side. The normalized
    /// centre is recovered from the angular offsets and the area fraction
    /// from the branch of the depth law that produced `z_d`.
    pub fn to_estimate(&self, cam: &CameraModel) -> Option<TargetEstimate> {
        let centre = cam.centre_of(self.x_d, self.y_d, self.z_d)?;
        Some(TargetEstimate {
            x_d: self.x_d,
            y_d: self.y_d,
            z_d: self.z_d,
            size: area_for_depth(self.z_d),
            centre,
            probability: self.prob,
        })
    }
}

/// Inverse of the depth law on its image, choosing the branch whose range
/// contains `z`.
fn area_for_depth(z: f64) -> f64 {
    if z >= 2.4 {
        (7.2 - z) / 120.0
    } else if z >= 0.832 {
        (2.2 - z) / 3.42
    } else {
        (0.5 - z) / 3.25
    }
}

pub fn encode_detection(d: &DetectionDatagram) -> Result<Vec<u8>, LinkError> {
    d.validate()?;
    let line = format!(
        "{TAG},{},{},{},{:.6},{:.6},{:.6},{:.6}",
        d.seq, d.t_ms, d.class_id, d.prob, d.x_d, d.y_d, d.z_d
    );
    debug_assert!(line.len() <= MAX_DATAGRAM_LEN);
    Ok(line.into_bytes())
}

pub fn decode_detection(bytes: &[u8]) -> Result<DetectionDatagram, LinkError> {
    let malformed = |what: &str| LinkError::MalformedDatagram(what.to_string());
    if bytes.len() > MAX_DATAGRAM_LEN {
        return Err(malformed("datagram too long"));
    }
    let text = std::str::from_utf8(bytes).map_err(|_| malformed("not UTF-8"))?;
    let fields: Vec<&str> = text.split(',').collect();
    if fields.len() != 8 {
        return Err(LinkError::MalformedDatagram(format!(
            "expected 8 fields, got {}",
            fields.len()
        )));
    }
    if fields[0] != TAG {
        return Err(malformed("wrong tag"));
    }
    let int = |s: &str, name: &str| -> Result<u64, LinkError> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(LinkError::MalformedDatagram(format!("bad {name}")));
        }
        s.parse::<u64>()
            .map_err(|_| LinkError::MalformedDatagram(format!("bad {name}")))
    };
    let real = |s: &str, name: &str| -> Result<f64, LinkError> {
        let ok = !s.is_empty()
            && s.bytes()
                .all(|b| b.is_ascii_digit() || b == b'.' || b == b'-');
        let v = if ok { s.parse::<f64>().ok() } else { None };
        match v {
            Some(v) if v.is_finite() && v.abs() <= MAX_COORD_M => Ok(v),
            _ => Err(LinkError::MalformedDatagram(format!("bad {name}"))),
        }
    };
    let class_id = u32::try_from(int(fields[3], "class_id")?)
        .map_err(|_| malformed("class_id out of range"))?;
    let d = DetectionDatagram {
        seq: int(fields[1], "seq")?,
        t_ms: int(fields[2], "t_ms")?,
        class_id,
        prob: real(fields[4], "prob")?,
        x_d: real(fields[5], "x_D")?,
        y_d: real(fields[6], "y_D")?,
        z_d: real(fields[7], "z_D")?,
    };
    if !(0.0..=1.0).contains(&d.prob) {
        return Err(malformed("probability outside [0, 1]"));
    }
    Ok(d)
}

/// Detection port from the environment, falling back to the default.
pub fn port_from_env() -> u16 {
    std::env::var(DET_PORT_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_DET_PORT)
}

#[derive(Debug, Default)]
struct Slot {
    latest: Option<DetectionDatagram>,
    last_seq: Option<u64>,
}

/// Latest-value mailbox shared between the intake thread and the guidance
/// loop.
#[derive(Debug, Default)]
pub struct Mailbox {
    slot: Mutex<Slot>,
    ready: Condvar,
}

impl Mailbox {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores `d` unless its sequence number is not newer than the last
    /// accepted one. Returns whether it was stored.
    pub fn offer(&self, d: DetectionDatagram) -> bool {
        let mut slot = self.slot.lock().unwrap_or_else(|e| e.into_inner());
        if slot.last_seq.is_some_and(|last| d.seq <= last) {
            return false;
        }
        slot.last_seq = Some(d.seq);
        slot.latest = Some(d);
        self.ready.notify_all();
        true
    }

    /// Removes and returns the newest unconsumed datagram.
    pub fn take(&self) -> Option<DetectionDatagram> {
        self.slot
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .latest
            .take()
    }

    pub fn peek(&self) -> Option<DetectionDatagram> {
        self.slot.lock().unwrap_or_else(|e| e.into_inner()).latest
    }

    pub fn last_seq(&self) -> Option<u64> {
        self.slot.lock().unwrap_or_else(|e| e.into_inner()).last_seq
    }

    /// Waits until a datagram with sequence number at least `seq` has been
    /// accepted, then takes the newest one.
    pub fn take_at_least(&self, seq: u64, timeout: Duration) -> Option<DetectionDatagram> {
        let deadline = Instant::now() + timeout;
        let mut slot = self.slot.lock().unwrap_or_else(|e| e.into_inner());
        loop {
            if slot.last_seq.is_some_and(|last| last >= seq) {
                return slot.latest.take();
            }
            let now = Instant::now();
            if now >= deadline {
                return None;
            }
            slot = self
                .ready
                .wait_timeout(slot, deadline - now)
                .unwrap_or_else(|e| e.into_inner())
                .0;
        }
    }
}

#[derive(Debug, Default)]
pub struct IntakeStats {
    pub received: AtomicU64,
    pub accepted: AtomicU64,
    pub malformed: AtomicU64,
    pub stale: AtomicU64,
}

impl IntakeStats {
    fn bump(counter: &AtomicU64) {
        counter.fetch_add(1, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> (u64, u64, u64, u64) {
        (
            self.received.load(Ordering::Relaxed),
            self.accepted.load(Ordering::Relaxed),
            self.malformed.load(Ordering::Relaxed),
            self.stale.load(Ordering::Relaxed),
        )
    }
}

/// Feeds one raw datagram into the mailbox. Never fails; bad input is
/// counted and dropped.
pub fn ingest(bytes: &[u8], mailbox: &Mailbox, stats: &IntakeStats) {
    IntakeStats::bump(&stats.received);
    match decode_detection(bytes) {
        Ok(d) => {
            if mailbox.offer(d) {
                IntakeStats::bump(&stats.accepted);
            } else {
                debug!(seq = d.seq, "dropping out-of-order detection");
                IntakeStats::bump(&stats.stale);
            }
        }
        Err(e) => {
            warn!("{e}");
            IntakeStats::bump(&stats.malformed);
        }
    }
}

/// Background UDP intake bound to a local port.
pub struct DetectionServer {
    addr: SocketAddr,
    mailbox: Arc<Mailbox>,
    stats: Arc<IntakeStats>,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl DetectionServer {
    /// Binds `127.0.0.1:port` (port 0 picks a free one) and starts the
    /// intake thread.
    pub fn bind(port: u16, mailbox: Arc<Mailbox>) -> Result<Self, LinkError> {
        let socket =
            UdpSocket::bind(("127.0.0.1", port)).map_err(|source| LinkError::Bind { port, source })?;
        Self::from_socket(socket, mailbox)
    }

    pub fn from_socket(socket: UdpSocket, mailbox: Arc<Mailbox>) -> Result<Self, LinkError> {
        socket.set_read_timeout(Some(Duration::from_millis(50)))?;
        let addr = socket.local_addr()?;
        let stats = Arc::new(IntakeStats::default());
        let stop = Arc::new(AtomicBool::new(false));
        let handle = {
            let (mailbox, stats, stop) = (mailbox.clone(), stats.clone(), stop.clone());
            std::thread::Builder::new()
                .name("det-intake".into())
                .spawn(move || serve_detections(socket, &mailbox, &stats, &stop))?
        };
        Ok(Self {
            addr,
            mailbox,
            stats,
            stop,
            handle: Some(handle),
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn mailbox(&self) -> &Arc<Mailbox> {
        &self.mailbox
    }

    pub fn stats(&self) -> &IntakeStats {
        &self.stats
    }

    pub fn is_running(&self) -> bool {
        self.handle.as_ref().is_some_and(|h| !h.is_finished())
    }

    pub fn shutdown(mut self) {
        self.stop_thread();
    }

    fn stop_thread(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

impl Drop for DetectionServer {
    fn drop(&mut self) {
        self.stop_thread();
    }
}

/// Receive loop. Runs until `stop` is set.
pub fn serve_detections(socket: UdpSocket, mailbox: &Mailbox, stats: &IntakeStats, stop: &AtomicBool) {
    // one byte past the limit so oversize datagrams are detected, not truncated
    let mut buf = [0u8; MAX_DATAGRAM_LEN + 1];
    while !stop.load(Ordering::Relaxed) {
        match socket.recv_from(&mut buf) {
            Ok((n, _)) => ingest(&buf[..n], mailbox, stats),
            Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => {}
            Err(e) => {
                // e.g. ICMP port-unreachable reported on some platforms
                debug!("detection socket error: {e}");
            }
        }
    }
}

/// Sending side of the link.
pub struct DetectionClient {
    socket: UdpSocket,
}

impl DetectionClient {
    pub fn connect(server: impl ToSocketAddrs) -> Result<Self, LinkError> {
        let socket = UdpSocket::bind("127.0.0.1:0")?;
        socket.connect(server)?;
        Ok(Self { socket })
    }

    pub fn send(&self, d: &DetectionDatagram) -> Result<(), LinkError> {
        self.socket.send(&encode_detection(d)?)?;
        Ok(())
    }

    pub fn send_raw(&self, bytes: &[u8]) -> Result<(), LinkError> {
        self.socket.send(bytes)?;
        Ok(())
    }
}
