//! Calibrate on spills of known size, draw a detection domain around the
//! leak windows at D, then score a fresh run of each nozzle.
//!
//! ```text
//! cargo run --release --example detect_and_classify
//! ```

use leakscope::commands::{self, DEFAULT_FEATURES};
use leakscope::detect::{DetectionSettings, Score};
use leakscope::dsp::{Band, BatchingPolicy};
use leakscope::io::manifest::Manifest;
use leakscope::model::{FeatureBatch, LeakClass};
use leakscope::synth::{synthesize, Scenario};

const AREAS: [f64; 3] = [5.06, 12.56, 31.65];

fn run(seed: u64, area: f64) -> leakscope::Result<(Vec<FeatureBatch>, Manifest)> {
    let mut s = Scenario::reference(seed).with_leak(294.0, area, 4.0, 10.0, 30.0)?;
    s.duration_s = 40.0;
    s.line_pressure_bar = 5.0;
    let manifest = Manifest::from_scenario(&s, Vec::new())?;
    let records = synthesize(&s)?;
    let batches =
        commands::extract_records(&records, &BatchingPolicy::default(), Band::LEAK, Some(&s.layout), Some(&manifest))?;
    Ok((batches, manifest))
}

fn main() -> leakscope::Result<()> {
    let training: Vec<_> = AREAS.iter().zip(1..).map(|(&a, seed)| run(seed, a)).collect::<Result<_, _>>()?;
    let model = commands::fit_tables(&training)?;
    println!("SPL model: n = {:.3}, k = {:.3e}", model.n, model.k);

    let rows: Vec<FeatureBatch> = training.iter().flat_map(|(b, _)| b.iter().cloned()).collect();
    let domain = commands::train(&rows, DEFAULT_FEATURES, &Default::default(), Some("D"))?;
    println!("domain at D: {} vertices over ({}, {})", domain.polygon().len(), domain.feature_x(), domain.feature_y());

    let settings = DetectionSettings::default();
    let mut total = Score::default();
    for (&area, seed) in AREAS.iter().zip(100..) {
        let (batches, manifest) = run(seed, area)?;
        let det = commands::detect(&batches, &domain, &model, &settings, Some(&manifest))?;
        let (_, score) = det.scoring.expect("manifest supplied");
        let first = det.report.entries.iter().find(|v| v.leak_detected && v.station_id == "D");
        if let Some(v) = first {
            println!(
                "{area:>5} mm2: first alarm at D t = {:.1} s, estimated {:.2} mm2 ({})",
                v.window_start_s,
                v.estimated_area_mm2.unwrap_or(f64::NAN),
                v.class.as_str()
            );
        }
        total.merge(&score);
    }

    println!(
        "detected {}/{}, false alarms {}/{}",
        total.detected, total.leak_active_ok, total.false_alarms, total.no_leak_ok
    );
    let classes = [LeakClass::Small, LeakClass::Medium, LeakClass::Large];
    println!("true \\ est  small medium large");
    for t in classes {
        let row: Vec<String> =
            classes.iter().map(|e| format!("{:>6}", total.confusion.get(&(t, *e)).copied().unwrap_or(0))).collect();
        println!("{:<10} {}", t.as_str(), row.join(" "));
    }
    Ok(())
}
