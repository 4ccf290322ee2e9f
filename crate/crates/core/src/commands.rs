//! The pipeline stages as file-to-file operations:
//! simulate, extract, fit, train, detect and localize.
//!
//! Each function takes paths and options, writes its artifact and returns
//! the in-memory result. Outputs depend only on the inputs, so reruns are
//! byte-identical.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use crate::detect::{self, DetectionDomain, DetectionSettings, GatingThresholds, LocalizeOptions, Score};
use crate::dsp::{self, Band, BatchingPolicy};
use crate::error::{Error, Result};
use crate::hydraulics::{fit_spl_model, SplSample};
use crate::io::manifest::{self, Manifest};
use crate::io::{artifacts, config, report, signal_file, table};
use crate::model::{
    DetectionReport, FeatureBatch, FluidSpec, LeakClass, Localization, SensorKind, SignalRecord, SplModel,
    StationLayout,
};
use crate::synth::{self, Scenario};

/// Feature plane used when none is configured.
pub const DEFAULT_FEATURES: (&str, &str) = ("static_pressure_mean_bar", "leak_band_level_db");

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub signal_files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

/// Synthesizes every station and writes one signal file each, plus the
/// ground-truth manifest. Nothing is written if generation fails.
pub fn simulate(scenario: &Scenario, out_dir: &Path) -> Result<SimulateOutput> {
    let records = synth::synthesize(scenario)?;
    let names: Vec<String> = records
        .iter()
        .map(|r| format!("{}.{}", r.station_id(), signal_file::EXTENSION))
        .collect();
    let truth = Manifest::from_scenario(scenario, names.clone())?;
    create_dir(out_dir)?;
    let mut signal_files = Vec::with_capacity(records.len());
    for (record, name) in records.iter().zip(&names) {
        let path = out_dir.join(name);
        signal_file::write(&path, record)?;
        signal_files.push(path);
    }
    let manifest = out_dir.join(manifest::FILE_NAME);
    truth.write(&manifest)?;
    Ok(SimulateOutput {
        signal_files,
        manifest,
    })
}

pub fn simulate_file(scenario_path: &Path, seed: Option<u64>, out_dir: &Path) -> Result<SimulateOutput> {
    let scenario = config::read_scenario(scenario_path, seed)?;
    simulate(&scenario, out_dir)
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
pub struct ExtractOptions {
    pub policy: BatchingPolicy,
    pub band: Band,
    /// Station positions, used to lend flow readings to stations without a
    /// flowmeter. Falls back to the manifest's layout.
    pub layout: Option<StationLayout>,
    /// Ground truth for labeling rows. Defaults to `manifest.txt` in the
    /// signal directory when present.
    pub manifest: Option<PathBuf>,
}

/// Features of in-memory records, optionally labeled and with flow lent
/// from the nearest flowmeter station.
pub fn extract_records(
    records: &[SignalRecord],
    policy: &BatchingPolicy,
    band: Band,
    layout: Option<&StationLayout>,
    truth: Option<&Manifest>,
) -> Result<Vec<FeatureBatch>> {
    let mut seen = BTreeSet::new();
    for r in records {
        if !seen.insert(r.station_id()) {
            return Err(Error::invalid(format!("station {} appears twice", r.station_id())));
        }
    }
    let per_station = records
        .iter()
        .map(|r| dsp::batch(r, policy, band))
        .collect::<Result<Vec<_>>>()?;

    // Flow by (station, window index) for stations that measure it.
    let measured: BTreeMap<&str, Vec<Option<f64>>> = per_station
        .iter()
        .filter_map(|bs| {
            let id = bs.first()?.station_id.as_str();
            bs.iter()
                .any(|b| b.flow_mean_m3_h.is_some())
                .then(|| (id, bs.iter().map(|b| b.flow_mean_m3_h).collect()))
        })
        .collect();

    let mut out = Vec::new();
    for bs in &per_station {
        let donor = layout.and_then(|l| {
            let id = &bs.first()?.station_id;
            if measured.contains_key(id.as_str()) {
                return None;
            }
            let pos = l.station(id)?.position_m;
            let mut candidates: Vec<_> = l
                .stations()
                .iter()
                .filter(|s| s.sensors.contains(SensorKind::Flowmeter) && measured.contains_key(s.id.as_str()))
                .collect();
            candidates.sort_by(|a, b| (a.position_m - pos).abs().total_cmp(&(b.position_m - pos).abs()));
            candidates.first().map(|s| &measured[s.id.as_str()])
        });
        for (i, b) in bs.iter().enumerate() {
            let mut b = b.clone();
            if b.flow_mean_m3_h.is_none() {
                b.flow_mean_m3_h = donor.and_then(|d| d.get(i).copied().flatten());
            }
            b.label = truth.and_then(|m| m.label(&b.station_id, b.window_start_s, b.window_len_s));
            out.push(b);
        }
    }
    Ok(out)
}

/// Reads every signal file in `signal_dir` and computes the feature table.
pub fn extract(signal_dir: &Path, options: &ExtractOptions) -> Result<Vec<FeatureBatch>> {
    let files = signal_file::list(signal_dir)?;
    if files.is_empty() {
        return Err(Error::invalid(format!("no signal files in {}", signal_dir.display())));
    }
    let records = files.iter().map(|f| signal_file::read(f)).collect::<Result<Vec<_>>>()?;
    let manifest_path = options.manifest.clone().or_else(|| {
        let p = signal_dir.join(manifest::FILE_NAME);
        p.is_file().then_some(p)
    });
    let truth = manifest_path.as_deref().map(Manifest::read).transpose()?;
    let layout = options.layout.as_ref().or(truth.as_ref().map(|m| &m.layout));
    extract_records(&records, &options.policy, options.band, layout, truth.as_ref())
}

pub fn extract_to(signal_dir: &Path, out: &Path, options: &ExtractOptions) -> Result<Vec<FeatureBatch>> {
    let batches = extract(signal_dir, options)?;
    table::write(out, &batches)?;
    Ok(batches)
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

/// Source-level samples from one labeled table and its manifest.
///
/// Uses the leak-labeled rows of the station nearest the leak. The median
/// no-leak band energy of that station is removed, and the remaining level
/// is carried back to the source with the manifest's attenuation.
pub fn spl_samples(batches: &[FeatureBatch], truth: &Manifest) -> Result<Vec<SplSample>> {
    let leak = truth
        .leak
        .as_ref()
        .ok_or_else(|| Error::invalid("manifest describes no leak; nothing to fit"))?;
    let nearest = truth
        .nearest_station()
        .ok_or_else(|| Error::invalid("manifest has no per-station truth"))?;
    let rows: Vec<_> = batches.iter().filter(|b| b.station_id == nearest.station_id).collect();
    let background = median(
        rows.iter()
            .filter(|b| b.label == Some(LeakClass::None))
            .map(|b| b.leak_band_energy_kpa2)
            .collect(),
    )
    .unwrap_or(0.0);
    let gain = (truth.attenuation_np_per_m * nearest.distance_m).exp();
    rows.iter()
        .filter(|b| matches!(b.label, Some(c) if c != LeakClass::None))
        .filter_map(|b| {
            let excess = b.leak_band_energy_kpa2 - background;
            (excess > 0.0).then(|| SplSample::new(leak.delta_p_bar, leak.area_mm2, excess.sqrt() * gain))
        })
        .collect()
}

/// Fits the SPL law over several (table, manifest) pairs.
pub fn fit_tables(pairs: &[(Vec<FeatureBatch>, Manifest)]) -> Result<SplModel> {
    let mut samples = Vec::new();
    for (batches, truth) in pairs {
        samples.extend(spl_samples(batches, truth)?);
    }
    if samples.is_empty() {
        return Err(Error::RankDeficient("no leak-labeled rows above the background".into()));
    }
    fit_spl_model(&samples)
}

pub fn fit_files(pairs: &[(PathBuf, PathBuf)], out: &Path) -> Result<SplModel> {
    let loaded = pairs
        .iter()
        .map(|(t, m)| Ok((table::read(t)?, Manifest::read(m)?)))
        .collect::<Result<Vec<_>>>()?;
    let model = fit_tables(&loaded)?;
    artifacts::write_model(out, &model)?;
    Ok(model)
}

pub fn fit_sample_file(samples: &Path, out: &Path) -> Result<SplModel> {
    let model = fit_spl_model(&table::read_samples(samples)?)?;
    artifacts::write_model(out, &model)?;
    Ok(model)
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

/// Detection domain from the leak-labeled rows that pass the pressure
/// gates, optionally from one station only.
pub fn train(
    batches: &[FeatureBatch],
    features: (&str, &str),
    gating: &GatingThresholds,
    station: Option<&str>,
) -> Result<DetectionDomain> {
    let usable: Vec<FeatureBatch> = batches
        .iter()
        .filter(|b| station.is_none_or(|s| b.station_id == s))
        .filter(|b| {
            b.static_pressure_mean_bar >= gating.min_pressure_bar
                && b.static_pressure_std_bar <= gating.max_pressure_std_bar
        })
        .cloned()
        .collect();
    let domain = detect::train_domain(&usable, features.0, features.1)?;
    Ok(match station {
        Some(s) => domain.for_station(s),
        None => domain,
    })
}

pub fn train_files(
    tables: &[PathBuf],
    features: (&str, &str),
    gating: &GatingThresholds,
    station: Option<&str>,
    out: &Path,
) -> Result<DetectionDomain> {
    let mut batches = Vec::new();
    for t in tables {
        batches.extend(table::read(t)?);
    }
    let domain = train(&batches, features, gating, station)?;
    artifacts::write_domain(out, &domain)?;
    Ok(domain)
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Detection {
    pub report: DetectionReport,
    /// Per-entry truth and the tally, when a manifest was given.
    pub scoring: Option<(Vec<Option<LeakClass>>, Score)>,
}

/// Runs detection over the batches the domain applies to.
pub fn detect(
    batches: &[FeatureBatch],
    domain: &DetectionDomain,
    model: &SplModel,
    settings: &DetectionSettings,
    truth: Option<&Manifest>,
) -> Result<Detection> {
    let batches: Vec<FeatureBatch> = batches.iter().filter(|b| domain.applies_to(b)).cloned().collect();
    let batches = &batches[..];
    let report = detect::evaluate(batches, domain, model, settings)?;
    let scoring = truth.map(|m| {
        let labels: Vec<_> = batches
            .iter()
            .map(|b| m.label(&b.station_id, b.window_start_s, b.window_len_s))
            .collect();
        let score = detect::score(&report.entries, &labels);
        (labels, score)
    });
    Ok(Detection { report, scoring })
}

pub struct DetectFiles<'a> {
    pub table: &'a Path,
    pub domain: &'a Path,
    pub model: &'a Path,
    pub manifest: Option<&'a Path>,
    pub out: &'a Path,
}

pub fn detect_files(files: &DetectFiles<'_>, settings: &DetectionSettings) -> Result<Detection> {
    let batches = table::read(files.table)?;
    let domain = artifacts::read_domain(files.domain)?;
    let model = artifacts::read_model(files.model)?;
    let truth = files.manifest.map(Manifest::read).transpose()?;
    let d = detect(&batches, &domain, &model, settings, truth.as_ref())?;
    let scoring = d.scoring.as_ref().map(|(l, s)| (l.as_slice(), s));
    report::write(files.out, &d.report, scoring)?;
    Ok(d)
}

// ---------------------------------------------------------------------------
// localize
// ---------------------------------------------------------------------------

pub fn localize_files(
    signal_a: &Path,
    signal_b: &Path,
    layout: &StationLayout,
    fluid: &FluidSpec,
    options: &LocalizeOptions,
    out: Option<&Path>,
) -> Result<Localization> {
    let a = signal_file::read(signal_a)?;
    let b = signal_file::read(signal_b)?;
    let loc = detect::localize(&a, &b, layout, fluid, options)?;
    if let Some(out) = out {
        std::fs::write(out, artifacts::localization_to_text(&loc)).map_err(|e| Error::io(out, e))?;
    }
    Ok(loc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    use crate::model::ChannelKind;

    fn record(id: &str, flow: Option<f32>) -> SignalRecord {
        let n = 8192 * 3;
        let mut ch = BTreeMap::new();
        ch.insert(ChannelKind::StaticPressure, vec![4.0f32; n]);
        ch.insert(ChannelKind::DynamicPressure, (0..n).map(|i| ((i % 7) as f32) * 0.01).collect());
        if let Some(f) = flow {
            ch.insert(ChannelKind::Flow, vec![f; n]);
        }
        SignalRecord::new(id, 8192.0, 0.0, ch).unwrap()
    }

    #[test]
    fn flow_is_lent_from_nearest_flowmeter() {
        let layout = StationLayout::reference_line();
        let recs = [record("A", None), record("B", Some(150.0)), record("D", None), record("E", Some(120.0))];
        let rows = extract_records(&recs, &BatchingPolicy::default(), Band::LEAK, Some(&layout), None).unwrap();
        let flow_of = |id: &str| rows.iter().find(|b| b.station_id == id).unwrap().flow_mean_m3_h;
        assert_eq!(flow_of("A"), Some(150.0));
        assert_eq!(flow_of("D"), Some(120.0));
        let bare = extract_records(&recs, &BatchingPolicy::default(), Band::LEAK, None, None).unwrap();
        assert_eq!(bare.iter().find(|b| b.station_id == "A").unwrap().flow_mean_m3_h, None);
        assert!(rows.iter().all(|b| b.label.is_none()));
    }

    #[test]
    fn duplicate_stations_are_rejected() {
        let recs = [record("A", None), record("A", None)];
        assert!(extract_records(&recs, &BatchingPolicy::default(), Band::LEAK, None, None).is_err());
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(vec![]), None);
    }
}
