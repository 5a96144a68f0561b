use clap::{Parser, Subcommand};
use stadia::link;
use stadia::sim::{self, log, split, MetricParams, RunMode, RunReport, Scenario, SimError};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "stadia", version, about = "Detection, avoidance and tracking simulator")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario file and write trajectory.csv, report.txt and report.json.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Overrides the scenario's run_mode (inproc or split).
        #[arg(long)]
        mode: Option<RunMode>,
        /// UDP port of the detection link in split mode; 0 picks a free port.
        #[arg(long, env = link::DET_PORT_ENV, default_value_t = link::DEFAULT_DET_PORT)]
        det_port: u16,
    },
    /// Recompute the report of an existing trajectory log.
    Report {
        log: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Detection process for split runs (driven over stdin/stdout).
    #[command(hide = true)]
    DetectNode {
        #[arg(long)]
        server: SocketAddr,
    },
}

fn run(cli: Cli) -> Result<(), SimError> {
    match cli.command {
        Cmd::Run {
            scenario,
            seed,
            out,
            mode,
            det_port,
        } => {
            let s = Scenario::from_path(&scenario)?;
            let run = match mode.unwrap_or(s.run_mode) {
                RunMode::Inproc => sim::run_scenario(&s, seed)?,
                RunMode::Split => {
                    let exe = std::env::current_exe().map_err(|e| SimError::io(&scenario, e))?;
                    split::run_scenario_split(&s, seed, exe, det_port)?
                }
            };
            run.write_outputs(&out)?;
            print!("{}", run.report);
        }
        Cmd::Report { log: path, json } => {
            let rows = log::read_csv_file(&path)?;
            let report = RunReport::from_rows(&rows, &MetricParams::for_log(&rows));
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{report}");
            }
        }
        Cmd::DetectNode { server } => {
            let stdin = std::io::stdin().lock();
            let stdout = std::io::stdout().lock();
            split::run_detection_node(stdin, stdout, server)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let failure = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{failure}");
            ExitCode::from(2)
        }
    }
}
