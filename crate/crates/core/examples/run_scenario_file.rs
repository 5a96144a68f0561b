//! Runs a scenario file and writes the trajectory log and reports.
//!
//! ```text
//! cargo run --example run_scenario_file -- crates/core/scenarios/dropout.toml out/dropout
//! cargo run --example run_scenario_file -- crates/core/scenarios/head_on.toml out/head_on split
//! ```
//!
//! Split mode runs the detector in a child `stadia` process and delivers
//! detections over UDP; build the binary first with `cargo build`.

use stadia::sim::{run_scenario, split::run_scenario_split, Scenario};
use std::path::{Path, PathBuf};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| manifest.join("scenarios/dropout.toml"));
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| "out".into());
    let split = args.next().as_deref() == Some("split");

    let scenario = Scenario::from_path(&path)?;
    let run = if split {
        let exe = std::env::current_exe()?
            .parent()
            .and_then(Path::parent)
            .map(|dir| dir.join("stadia"))
            .ok_or("cannot locate the stadia binary")?;
        run_scenario_split(&scenario, None, exe, 0)?
    } else {
        run_scenario(&scenario, None)?
    };
    run.write_outputs(&out)?;
    print!("{}", run.report);
    println!("wrote {}", out.display());
    Ok(())
}
