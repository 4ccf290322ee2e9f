use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use leakscope::commands::{self, DetectFiles, ExtractOptions, DEFAULT_FEATURES};
use leakscope::dsp::{Band, BatchingPolicy};
use leakscope::io::config::{self, RunConfig};
use leakscope::io::manifest::{self, Manifest};
use leakscope::{Error, Result};

#[derive(Parser)]
#[command(name = "leakscope", version, about = "Acoustic leak detection for liquid pipelines")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (key = value); a scenario file also works.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for simulate, overriding the scenario file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Window length in seconds.
    #[arg(long, global = true)]
    window: Option<f64>,
    /// Window overlap fraction in [0, 0.9].
    #[arg(long, global = true)]
    overlap: Option<f64>,
    /// Frequency band as lo:hi in Hz.
    #[arg(long, global = true)]
    band: Option<Band>,
    /// Feature plane as x,y column names.
    #[arg(long, global = true)]
    features: Option<String>,
    /// Output file, or output directory for simulate.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize one signal file per station plus a ground-truth manifest.
    Simulate { scenario: PathBuf },
    /// Compute the feature table of a directory of signal files.
    Extract {
        signal_dir: PathBuf,
        /// Ground truth for labeling; defaults to manifest.txt in the directory.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Fit the SPL law from labeled tables and their manifests.
    Fit {
        /// Alternating feature-table and manifest paths.
        pairs: Vec<PathBuf>,
        /// Fit raw delta_p_bar,area_mm2,spl_kpa samples instead.
        #[arg(long, conflicts_with = "pairs")]
        samples: Option<PathBuf>,
    },
    /// Build a detection domain from leak-labeled feature tables.
    Train {
        #[arg(required = true)]
        tables: Vec<PathBuf>,
        /// Train on, and restrict the domain to, one station.
        #[arg(long)]
        station: Option<String>,
    },
    /// Detect and classify leaks batch by batch.
    Detect {
        table: PathBuf,
        domain: PathBuf,
        model: PathBuf,
        /// Ground truth for scoring.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Locate a leak between two stations.
    Localize { signal_a: PathBuf, signal_b: PathBuf },
}

fn require_out(out: &Option<PathBuf>) -> Result<&Path> {
    out.as_deref()
        .ok_or_else(|| Error::InvalidInput("--out is required for this command".into()))
}

fn run_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => config::read_run_config(p)?,
        None => RunConfig::default(),
    };
    if common.window.is_some() || common.overlap.is_some() {
        cfg.policy = BatchingPolicy::new(
            common.window.unwrap_or(cfg.policy.window_len_s),
            common.overlap.unwrap_or(cfg.policy.overlap_fraction),
        )?;
    }
    if let Some(band) = common.band {
        cfg.band = band;
        cfg.localize.band = band;
    }
    if let Some(f) = &common.features {
        cfg.features = Some(config::parse_features(f)?);
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let common = &cli.common;
    match cli.command {
        Command::Simulate { scenario } => {
            let seed = common.seed.or(match &common.config {
                Some(p) => config::read_run_config(p)?.seed,
                None => None,
            });
            let out = commands::simulate_file(&scenario, seed, require_out(&common.out)?)?;
            for f in &out.signal_files {
                println!("{}", f.display());
            }
            println!("{}", out.manifest.display());
        }
        Command::Extract { signal_dir, manifest } => {
            let cfg = run_config(common)?;
            let options = ExtractOptions {
                policy: cfg.policy,
                band: cfg.band,
                layout: cfg.layout,
                manifest,
            };
            let rows = commands::extract_to(&signal_dir, require_out(&common.out)?, &options)?;
            println!("rows = {}", rows.len());
        }
        Command::Fit { pairs, samples } => {
            let out = require_out(&common.out)?;
            let model = match samples {
                Some(s) => commands::fit_sample_file(&s, out)?,
                None => {
                    if pairs.is_empty() || pairs.len() % 2 != 0 {
                        return Err(Error::InvalidInput(
                            "fit needs <table> <manifest> pairs or --samples".into(),
                        ));
                    }
                    let pairs: Vec<_> = pairs.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect();
                    commands::fit_files(&pairs, out)?
                }
            };
            println!("n = {}", model.n);
            println!("k = {}", model.k);
            println!("fit_residual_rms = {}", model.fit_residual_rms);
            println!("sample_count = {}", model.sample_count);
        }
        Command::Train { tables, station } => {
            let cfg = run_config(common)?;
            let (fx, fy) = cfg
                .features
                .clone()
                .unwrap_or((DEFAULT_FEATURES.0.into(), DEFAULT_FEATURES.1.into()));
            let domain = commands::train_files(
                &tables,
                (&fx, &fy),
                &cfg.detection.gating,
                station.as_deref(),
                require_out(&common.out)?,
            )?;
            println!("vertices = {}", domain.polygon().len());
        }
        Command::Detect {
            table,
            domain,
            model,
            manifest,
        } => {
            let cfg = run_config(common)?;
            let files = DetectFiles {
                table: &table,
                domain: &domain,
                model: &model,
                manifest: manifest.as_deref(),
                out: require_out(&common.out)?,
            };
            let d = commands::detect_files(&files, &cfg.detection)?;
            let detections = d.report.entries.iter().filter(|e| e.leak_detected).count();
            println!("batches = {}", d.report.entries.len());
            println!("detections = {detections}");
            if let Some((_, s)) = &d.scoring {
                println!("detected = {}/{}", s.detected, s.leak_active_ok);
                println!("false_alarms = {}", s.false_alarms);
            }
        }
        Command::Localize { signal_a, signal_b } => {
            let cfg = run_config(common)?;
            let (layout, fluid) = match cfg.layout {
                Some(l) => (l, cfg.fluid),
                None => {
                    let dir = signal_a.parent().unwrap_or(Path::new("."));
                    let m = Manifest::read(&dir.join(manifest::FILE_NAME)).map_err(|_| {
                        Error::InvalidInput(
                            "no station layout: pass --config or keep manifest.txt next to the signals".into(),
                        )
                    })?;
                    (m.layout, m.fluid)
                }
            };
            let loc = commands::localize_files(
                &signal_a,
                &signal_b,
                &layout,
                &fluid,
                &cfg.localize,
                common.out.as_deref(),
            )?;
            println!("position_m = {}", loc.position_m);
            println!("delay_s = {}", loc.delay_s);
            println!("peak_correlation = {}", loc.peak_correlation);
            if loc.clamped {
                println!("clamped = true");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            println!("error: {e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
