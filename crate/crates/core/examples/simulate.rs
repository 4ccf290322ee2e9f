//! Write a synthetic acquisition to disk: one signal file per station, a
//! text sidecar for each, and the ground-truth manifest.
//!
//! ```text
//! cargo run --release --example simulate -- /tmp/acq
//! ```

use std::path::PathBuf;

use leakscope::commands;
use leakscope::io::{config, signal_file};
use leakscope::synth::{Disturbance, Scenario};

fn main() -> leakscope::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("leakscope-simulate"));

    let mut scenario = Scenario::reference(2024).with_leak(150.0, 31.65, 4.0, 10.0, 40.0)?;
    scenario.duration_s = 50.0;
    // A truck filling at E halfway through the spill.
    scenario.disturbances.push(Disturbance {
        station_id: "E".into(),
        start_s: 20.0,
        stop_s: 30.0,
        flow_step_m3_h: 40.0,
    });

    let written = commands::simulate(&scenario, &out)?;
    std::fs::write(out.join("scenario.txt"), config::write_scenario(&scenario))
        .expect("output directory is writable");

    for path in &written.signal_files {
        let header = signal_file::Header::of(&signal_file::read(path)?);
        println!("{}: {} samples x {} channels", path.display(), header.sample_count, header.channels.len());
    }
    println!("{}", written.manifest.display());
    println!("scenario.txt reproduces the run: leakscope simulate {}/scenario.txt --out <dir>", out.display());
    Ok(())
}
