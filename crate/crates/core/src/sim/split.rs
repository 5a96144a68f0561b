//! Split-process run: the detector lives in a child process and reports over
//! the UDP link, while this process runs guidance, the vehicle and metrics.
//!
//! The child is driven in lockstep over its stdin/stdout so the simulation
//! clock stays shared:
//!
//! ```text
//! parent -> child   CONFIG <json>                    once, first line
//! parent -> child   FRAME <t_ms> <ego n e d heading> <enemy n e d>
//! child  -> parent  SENT <seq> | NONE
//! ```
//!
//! After `SENT` the parent waits for that sequence number to reach its
//! mailbox. Detection payloads only ever travel over UDP.

use super::{run_with_source, DetectionSource, Scenario, SimError, SimRun};
use crate::camera::{CameraModel, TargetEstimate};
use crate::detector::{self, DetectorModel};
use crate::frame::Ned;
use crate::link::{DetectionClient, DetectionDatagram, DetectionServer, Mailbox};
use crate::vehicle::VehicleState;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Arc;
use std::time::Duration;
use tracing::warn;

/// How long the parent waits for an announced datagram.
pub const DELIVERY_TIMEOUT: Duration = Duration::from_secs(2);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeConfig {
    pub detector: DetectorModel,
    pub threshold: f64,
}

/// Detection side of the link. Reads frames from `input`, sends datagrams to
/// `server`, and acknowledges each frame on `output`.
pub fn run_detection_node<R: BufRead, W: Write>(
    input: R,
    mut output: W,
    server: SocketAddr,
) -> Result<u64, SimError> {
    let client = DetectionClient::connect(server)?;
    let mut lines = input.lines();
    let node_err = |m: String| SimError::Node(m);

    let first = lines
        .next()
        .ok_or_else(|| node_err("missing CONFIG line".into()))?
        .map_err(|e| node_err(e.to_string()))?;
    let json = first
        .strip_prefix("CONFIG ")
        .ok_or_else(|| node_err(format!("expected CONFIG, got `{first}`")))?;
    let cfg: NodeConfig = serde_json::from_str(json).map_err(|e| node_err(e.to_string()))?;

    let mut seq = 0u64;
    for line in lines {
        let line = line.map_err(|e| node_err(e.to_string()))?;
        if line == "EXIT" {
            break;
        }
        let (t_ms, ego, enemy) = parse_frame(&line).map_err(node_err)?;
        let reply = match detector::observe(&ego, &enemy, &cfg.detector, cfg.threshold) {
            Some(est) => {
                let d = DetectionDatagram::from_estimate(seq, t_ms, &est);
                client.send(&d)?;
                seq += 1;
                format!("SENT {}", d.seq)
            }
            None => "NONE".to_string(),
        };
        writeln!(output, "{reply}").map_err(|e| node_err(e.to_string()))?;
        output.flush().map_err(|e| node_err(e.to_string()))?;
    }
    Ok(seq)
}

fn format_frame(t_ms: u64, ego: &VehicleState, enemy: &Ned) -> String {
    // {:?} prints the shortest representation that parses back exactly
    format!(
        "FRAME {t_ms} {:?} {:?} {:?} {:?} {:?} {:?} {:?}",
        ego.position.n, ego.position.e, ego.position.d, ego.heading_deg, enemy.n, enemy.e, enemy.d
    )
}

fn parse_frame(line: &str) -> Result<(u64, VehicleState, Ned), String> {
    let mut parts = line.split_ascii_whitespace();
    if parts.next() != Some("FRAME") {
        return Err(format!("expected FRAME, got `{line}`"));
    }
    let t_ms = parts
        .next()
        .and_then(|s| s.parse::<u64>().ok())
        .ok_or_else(|| format!("bad frame time in `{line}`"))?;
    let v: Vec<f64> = parts
        .map(|s| s.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("bad frame value in `{line}`: {e}"))?;
    if v.len() != 7 {
        return Err(format!("expected 7 frame values, got {}", v.len()));
    }
    let ego = VehicleState::at(Ned::new(v[0], v[1], v[2]), v[3]);
    Ok((t_ms, ego, Ned::new(v[4], v[5], v[6])))
}

/// Parent-side detection source backed by a child process and the UDP
/// server.
pub struct SplitDetector {
    child: Child,
    stdin: BufWriter<ChildStdin>,
    stdout: BufReader<ChildStdout>,
    server: DetectionServer,
    camera: CameraModel,
    lost: u64,
}

impl SplitDetector {
    /// Binds the server on `port` (0 for any free port) and spawns `node`
    /// with `--server <addr>` appended.
    pub fn spawn(scenario: &Scenario, mut node: Command, port: u16) -> Result<Self, SimError> {
        let server = DetectionServer::bind(port, Arc::new(Mailbox::new()))?;
        let mut child = node
            .arg("--server")
            .arg(server.local_addr().to_string())
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| SimError::Node(format!("failed to spawn detection node: {e}")))?;
        let stdin = BufWriter::new(child.stdin.take().expect("piped stdin"));
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        let mut this = Self {
            child,
            stdin,
            stdout,
            server,
            camera: scenario.detector.camera,
            lost: 0,
        };
        let cfg = NodeConfig {
            detector: scenario.detector.clone(),
            threshold: scenario.guidance.threshold,
        };
        let json = serde_json::to_string(&cfg).expect("config serializes");
        this.send_line(&format!("CONFIG {json}"))?;
        Ok(this)
    }

    fn send_line(&mut self, line: &str) -> Result<(), SimError> {
        writeln!(self.stdin, "{line}")
            .and_then(|_| self.stdin.flush())
            .map_err(|e| SimError::Node(format!("detection node stdin: {e}")))
    }

    /// Datagrams announced by the child that never arrived.
    pub fn lost(&self) -> u64 {
        self.lost
    }

    pub fn server(&self) -> &DetectionServer {
        &self.server
    }

    pub fn finish(mut self) -> Result<(), SimError> {
        let _ = self.send_line("EXIT");
        let status = self
            .child
            .wait()
            .map_err(|e| SimError::Node(format!("waiting for detection node: {e}")))?;
        if !status.success() {
            return Err(SimError::Node(format!("detection node exited with {status}")));
        }
        Ok(())
    }
}

impl DetectionSource for SplitDetector {
    fn detect(
        &mut self,
        t_s: f64,
        ego: &VehicleState,
        enemy: &Ned,
    ) -> Result<Option<(u64, TargetEstimate)>, SimError> {
        let t_ms = (t_s * 1000.0).round() as u64;
        self.send_line(&format_frame(t_ms, ego, enemy))?;
        let mut reply = String::new();
        self.stdout
            .read_line(&mut reply)
            .map_err(|e| SimError::Node(format!("detection node stdout: {e}")))?;
        let reply = reply.trim();
        if reply == "NONE" {
            return Ok(None);
        }
        let seq: u64 = reply
            .strip_prefix("SENT ")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| SimError::Node(format!("unexpected reply `{reply}`")))?;
        match self.server.mailbox().take_at_least(seq, DELIVERY_TIMEOUT) {
            Some(d) if d.seq == seq => Ok(d.to_estimate(&self.camera).map(|est| (d.seq, est))),
            other => {
                self.lost += 1;
                warn!(seq, got = ?other.map(|d| d.seq), "announced detection not delivered");
                Ok(None)
            }
        }
    }
}

impl Drop for SplitDetector {
    fn drop(&mut self) {
        if matches!(self.child.try_wait(), Ok(None)) {
            let _ = self.child.kill();
            let _ = self.child.wait();
        }
    }
}

/// Runs the scenario with the detector in a separate process.
///
/// `node_exe` must accept `detect-node --server <addr>`; the `stadia` binary
/// does.
pub fn run_scenario_split(
    scenario: &Scenario,
    seed: Option<u64>,
    node_exe: impl Into<PathBuf>,
    port: u16,
) -> Result<SimRun, SimError> {
    let mut cmd = Command::new(node_exe.into());
    cmd.arg("detect-node");
    let mut source = SplitDetector::spawn(scenario, cmd, port)?;
    let run = run_with_source(scenario, seed, &mut source)?;
    if source.lost() > 0 {
        warn!(lost = source.lost(), "detections lost on the link");
    }
    source.finish()?;
    Ok(run)
}
