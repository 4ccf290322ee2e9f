//! Round-trip a record through the binary signal format and turn a
//! directory of recordings into a feature table.

use leakscope::commands::{self, ExtractOptions};
use leakscope::dsp::{Band, BatchingPolicy};
use leakscope::io::{signal_file, table};
use leakscope::synth::Scenario;

fn main() -> leakscope::Result<()> {
    let dir = std::env::temp_dir().join("leakscope-signal-files");
    let mut s = Scenario::reference(8).with_leak(294.0, 12.56, 4.0, 2.0, 8.0)?;
    s.duration_s = 10.0;
    commands::simulate(&s, &dir)?;

    let d = dir.join("D.evpm");
    let record = signal_file::read(&d)?;
    let bytes = signal_file::encode(&record);
    assert_eq!(signal_file::decode(&bytes, &d)?, record);
    println!("{} bytes, sidecar:", bytes.len());
    print!("{}", std::fs::read_to_string(signal_file::sidecar_path(&d)).expect("sidecar written"));

    let options = ExtractOptions {
        policy: BatchingPolicy::default(),
        band: Band::LEAK,
        layout: None,
        manifest: None,
    };
    let csv = dir.join("features.csv");
    let rows = commands::extract_to(&dir, &csv, &options)?;
    println!("{} rows -> {}", rows.len(), csv.display());
    for row in rows.iter().filter(|r| r.station_id == "D").step_by(4) {
        println!(
            "D t={:>4.1}  p={:.2} bar  level={:>6.1} dB  label={:?}",
            row.window_start_s, row.static_pressure_mean_bar, row.leak_band_level_db, row.label
        );
    }
    assert_eq!(table::read(&csv)?, rows);
    Ok(())
}
