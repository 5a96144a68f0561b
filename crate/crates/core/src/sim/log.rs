//! Trajectory log: one CSV row per simulation step.

use crate::guidance::FlightMode;
use serde::Deserialize;
use std::io::{Read, Write};
use std::path::Path;

use super::SimError;

pub const COLUMNS: [&str; 17] = [
    "t_s",
    "ego_n",
    "ego_e",
    "ego_d",
    "ego_heading_deg",
    "enemy_n",
    "enemy_e",
    "enemy_d",
    "mode",
    "det_seq",
    "x_d",
    "y_d",
    "z_d",
    "prob",
    "cmd_n",
    "cmd_e",
    "cmd_d",
];

/// Detection reported on a row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetRecord {
    pub seq: u64,
    pub x_d: f64,
    pub y_d: f64,
    pub z_d: f64,
    pub prob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub t_s: f64,
    pub ego: [f64; 3],
    pub ego_heading_deg: f64,
    pub enemy: [f64; 3],
    pub mode: FlightMode,
    pub det: Option<DetRecord>,
    pub cmd: [f64; 3],
}

impl LogRow {
    pub fn separation(&self) -> f64 {
        let d: Vec<f64> = (0..3).map(|i| self.ego[i] - self.enemy[i]).collect();
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    fn fields(&self) -> Vec<String> {
        let f = |v: f64| format!("{v:.6}");
        let mut out = vec![f(self.t_s)];
        out.extend(self.ego.iter().map(|&v| f(v)));
        out.push(f(self.ego_heading_deg));
        out.extend(self.enemy.iter().map(|&v| f(v)));
        out.push(self.mode.as_str().to_string());
        match &self.det {
            Some(d) => {
                out.push(d.seq.to_string());
                out.extend([d.x_d, d.y_d, d.z_d, d.prob].iter().map(|&v| f(v)));
            }
            None => out.extend(std::iter::repeat_n(String::new(), 5)),
        }
        out.extend(self.cmd.iter().map(|&v| f(v)));
        out
    }
}

#[derive(Deserialize)]
struct RawRow {
    t_s: f64,
    ego_n: f64,
    ego_e: f64,
    ego_d: f64,
    ego_heading_deg: f64,
    enemy_n: f64,
    enemy_e: f64,
    enemy_d: f64,
    mode: FlightMode,
    det_seq: Option<u64>,
    x_d: Option<f64>,
    y_d: Option<f64>,
    z_d: Option<f64>,
    prob: Option<f64>,
    cmd_n: f64,
    cmd_e: f64,
    cmd_d: f64,
}

impl TryFrom<RawRow> for LogRow {
    type Error = String;

    fn try_from(r: RawRow) -> Result<Self, String> {
        let det = match (r.det_seq, r.x_d, r.y_d, r.z_d, r.prob) {
            (Some(seq), Some(x_d), Some(y_d), Some(z_d), Some(prob)) => Some(DetRecord {
                seq,
                x_d,
                y_d,
                z_d,
                prob,
            }),
            (None, None, None, None, None) => None,
            _ => return Err(format!("partial detection fields at t = {}", r.t_s)),
        };
        Ok(LogRow {
            t_s: r.t_s,
            ego: [r.ego_n, r.ego_e, r.ego_d],
            ego_heading_deg: r.ego_heading_deg,
            enemy: [r.enemy_n, r.enemy_e, r.enemy_d],
            mode: r.mode,
            det,
            cmd: [r.cmd_n, r.cmd_e, r.cmd_d],
        })
    }
}

pub fn write_csv<W: Write>(rows: &[LogRow], out: W) -> Result<(), SimError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(COLUMNS)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush().map_err(|e| SimError::io(Path::new("<log>"), e))?;
    Ok(())
}

pub fn write_csv_file(rows: &[LogRow], path: &Path) -> Result<(), SimError> {
    let file = std::fs::File::create(path).map_err(|e| SimError::io(path, e))?;
    write_csv(rows, std::io::BufWriter::new(file))
}

pub fn to_csv_string(rows: &[LogRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("log is ASCII")
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<LogRow>, SimError> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().ne(COLUMNS.iter().copied()) {
        return Err(SimError::BadLog(format!(
            "unexpected header: {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.deserialize::<RawRow>()
        .map(|raw| LogRow::try_from(raw?).map_err(SimError::BadLog))
        .collect()
}

pub fn read_csv_file(path: &Path) -> Result<Vec<LogRow>, SimError> {
    let file = std::fs::File::open(path).map_err(|e| SimError::io(path, e))?;
    read_csv(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64, det: Option<DetRecord>) -> LogRow {
        LogRow {
            t_s: t,
            ego: [0.0, 0.0, -10.0],
            ego_heading_deg: 0.0,
            enemy: [6.0, 0.0, -10.0],
            mode: if det.is_some() {
                FlightMode::Offboard
            } else {
                FlightMode::Guided
            },
            det,
            cmd: [1.0, 0.0, 0.0],
        }
    }

    #[test]
    fn empty_log_is_header_only() {
        assert_eq!(to_csv_string(&[]), format!("{}\n", COLUMNS.join(",")));
        assert_eq!(read_csv(to_csv_string(&[]).as_bytes()).unwrap(), vec![]);
    }

    #[test]
    fn rows_round_trip() {
        let det = DetRecord {
            seq: 3,
            x_d: -1.2,
            y_d: 0.4,
            z_d: 6.0,
            prob: 0.825,
        };
        let rows = vec![row(0.0, None), row(0.02, Some(det))];
        let text = to_csv_string(&rows);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "0.000000,0.000000,0.000000,-10.000000,0.000000,6.000000,0.000000,-10.000000,Guided,,,,,,1.000000,0.000000,0.000000");
        assert!(lines[2].contains(",Offboard,3,-1.200000,0.400000,6.000000,0.825000,"));
        assert_eq!(read_csv(text.as_bytes()).unwrap(), rows);
    }

    #[test]
    fn bad_header_rejected() {
        assert!(matches!(read_csv("a,b\n1,2\n".as_bytes()), Err(SimError::BadLog(_))));
    }

    #[test]
    fn partial_detection_rejected() {
        let mut text = to_csv_string(&[row(0.0, None)]);
        text = text.replace("Guided,,", "Guided,4,");
        assert!(read_csv(text.as_bytes()).is_err());
    }
}
