//! Scenario files and run configuration.
//!
//! Both are flat key-value text. Stations are listed one per line as
//! `station = <id>,<position_m>,<sensor|sensor|...>`. A scenario file is
//! also accepted as a run configuration, so one file can drive a whole
//! simulate-to-detect run.

use std::path::Path;

use crate::detect::{DetectionSettings, GatingThresholds, LocalizeOptions};
use crate::dsp::{Band, BatchingPolicy};
use crate::error::{Error, Result};
use crate::io::kv::{KvFile, KvWriter};
use crate::model::{FluidSpec, NozzleShape, NozzleSpec, SensorSet, SplModel, Station, StationLayout};
use crate::synth::{
    Disturbance, HydraulicResponse, LeakSpec, NoiseLevels, PressureDip, PumpSource, RngKind,
    Scenario,
};

const LAYOUT_KEYS: &[&str] = &["station", "pipe_inner_diameter_m"];
const FLUID_KEYS: &[&str] = &["density_kg_m3", "sound_speed_m_s"];
const SCENARIO_KEYS: &[&str] = &[
    "seed",
    "rng",
    "duration_s",
    "sample_rate_hz",
    "condition",
    "line_pressure_bar",
    "attenuation_np_per_m",
    "spl_n",
    "spl_k",
    "pump",
    "disturbance",
    "dip",
    "leak_position_m",
    "leak_area_mm2",
    "leak_shape",
    "leak_orifice_diameter_m",
    "leak_discharge_coefficient",
    "leak_delta_p_bar",
    "leak_start_s",
    "leak_stop_s",
    "sensor_floor_kpa",
    "static_noise_bar",
    "drift_bar",
    "flow_noise_m3_h",
    "accel_floor_m_s2",
    "accel_background_gain",
    "accel_leak_gain",
    "pump_corner_hz",
    "pump_decay_np_per_m",
    "standstill_pressure_bar",
    "transfer_flow_m3_h",
    "leak_drop_bar_per_m3_h",
    "disturbance_drop_bar_per_m3_h",
];
const RUN_KEYS: &[&str] = &[
    "window_s",
    "overlap",
    "band",
    "features",
    "min_pressure_bar",
    "max_pressure_std_bar",
    "ambient_pressure_bar",
    "min_peak_correlation",
];
const REPEATABLE: &[&str] = &["station", "pump", "disturbance", "dip"];

fn keys(groups: &[&[&'static str]]) -> Vec<&'static str> {
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}

/// Reads the `station` lines and pipe bore. `None` when no station is listed.
pub fn parse_layout(kv: &KvFile) -> Result<Option<StationLayout>> {
    let mut stations = Vec::new();
    let mut first_line = 0;
    for e in kv.all("station") {
        if first_line == 0 {
            first_line = e.line;
        }
        let f = kv.fields(e, 3)?;
        let position: f64 = kv.parse_field(e, "position", f[1])?;
        let sensors: SensorSet = kv.at_line(e.line, f[2].parse())?;
        stations.push(Station::new(f[0], position, sensors));
    }
    if stations.is_empty() {
        return Ok(None);
    }
    let diameter = kv.get_or("pipe_inner_diameter_m", crate::model::SIXTEEN_INCH_ID_M)?;
    kv.at_line(first_line, StationLayout::new(stations, diameter)).map(Some)
}

pub fn parse_fluid(kv: &KvFile) -> Result<FluidSpec> {
    let fuel = FluidSpec::fuel();
    let rho = kv.get_or("density_kg_m3", fuel.density_kg_m3)?;
    let c = kv.get_or("sound_speed_m_s", fuel.sound_speed_m_s)?;
    kv.at_line(0, FluidSpec::new(rho, c))
}

pub fn write_layout(w: &mut KvWriter, layout: &StationLayout) {
    w.put("pipe_inner_diameter_m", layout.pipe_inner_diameter_m());
    for s in layout.stations() {
        w.put("station", format!("{},{},{}", s.id, s.position_m, s.sensors));
    }
}

/// Parses a scenario. `seed_override` replaces the file's seed; one of the
/// two must be present.
pub fn parse_scenario(kv: &KvFile, seed_override: Option<u64>) -> Result<Scenario> {
    kv.check_keys(&keys(&[LAYOUT_KEYS, FLUID_KEYS, SCENARIO_KEYS]), REPEATABLE)?;
    let layout = parse_layout(kv)?
        .ok_or_else(|| kv.error(0, "no 'station' lines; a scenario needs its station table"))?;
    let fluid = parse_fluid(kv)?;
    let seed = match seed_override {
        Some(s) => s,
        None => kv
            .get("seed")?
            .ok_or_else(|| kv.error(0, "missing required key 'seed' (or pass --seed)"))?,
    };
    let mut s = Scenario::new(layout, fluid, seed);
    s.rng = kv.require::<RngKind>("rng")?;
    s.duration_s = kv.require("duration_s")?;
    s.sample_rate_hz = kv.get_or("sample_rate_hz", s.sample_rate_hz)?;
    s.condition = kv.get_or("condition", s.condition)?;
    s.line_pressure_bar = kv.get_or("line_pressure_bar", s.line_pressure_bar)?;
    s.attenuation_np_per_m = kv.get_or("attenuation_np_per_m", s.attenuation_np_per_m)?;
    let n = kv.get_or("spl_n", s.spl_model.n)?;
    let k = kv.get_or("spl_k", s.spl_model.k)?;
    s.spl_model = kv.at_line(0, SplModel::new(n, k))?;

    for e in kv.all("pump") {
        let f = kv.fields(e, 2)?;
        s.pumps.push(PumpSource {
            station_id: f[0].to_string(),
            amplitude_kpa: kv.parse_field(e, "pump amplitude", f[1])?,
        });
    }
    for e in kv.all("disturbance") {
        let f = kv.fields(e, 4)?;
        s.disturbances.push(Disturbance {
            station_id: f[0].to_string(),
            start_s: kv.parse_field(e, "start", f[1])?,
            stop_s: kv.parse_field(e, "stop", f[2])?,
            flow_step_m3_h: kv.parse_field(e, "flow step", f[3])?,
        });
    }
    for e in kv.all("dip") {
        let f = kv.fields(e, 3)?;
        s.dips.push(PressureDip {
            start_s: kv.parse_field(e, "start", f[0])?,
            stop_s: kv.parse_field(e, "stop", f[1])?,
            level_bar: kv.parse_field(e, "level", f[2])?,
        });
    }

    let leak_keys = [
        "leak_position_m",
        "leak_area_mm2",
        "leak_shape",
        "leak_orifice_diameter_m",
        "leak_discharge_coefficient",
        "leak_delta_p_bar",
        "leak_start_s",
        "leak_stop_s",
    ];
    if leak_keys.iter().any(|k| kv.has(k)) {
        let area: f64 = kv.require("leak_area_mm2")?;
        let shape: NozzleShape = kv.get_or("leak_shape", NozzleShape::Circular)?;
        let diameter: Option<f64> = kv.get("leak_orifice_diameter_m")?;
        let c_d = kv.get_or("leak_discharge_coefficient", crate::model::DEFAULT_DISCHARGE_COEFFICIENT)?;
        let nozzle = match (shape, diameter) {
            (NozzleShape::Circular, None) => NozzleSpec::circular(area).and_then(|n| n.with_discharge_coefficient(c_d)),
            (shape, d) => NozzleSpec::new(area, shape, d, c_d),
        };
        s.leak = Some(LeakSpec {
            position_m: kv.require("leak_position_m")?,
            nozzle: kv.at_line(0, nozzle)?,
            delta_p_bar: kv.require("leak_delta_p_bar")?,
            start_s: kv.require("leak_start_s")?,
            stop_s: kv.require("leak_stop_s")?,
        });
    }

    let d = NoiseLevels::default();
    s.noise = NoiseLevels {
        sensor_floor_kpa: kv.get_or("sensor_floor_kpa", d.sensor_floor_kpa)?,
        static_noise_bar: kv.get_or("static_noise_bar", d.static_noise_bar)?,
        drift_bar: kv.get_or("drift_bar", d.drift_bar)?,
        flow_noise_m3_h: kv.get_or("flow_noise_m3_h", d.flow_noise_m3_h)?,
        accel_floor_m_s2: kv.get_or("accel_floor_m_s2", d.accel_floor_m_s2)?,
        accel_background_gain: kv.get_or("accel_background_gain", d.accel_background_gain)?,
        accel_leak_gain: kv.get_or("accel_leak_gain", d.accel_leak_gain)?,
        pump_corner_hz: kv.get_or("pump_corner_hz", d.pump_corner_hz)?,
        pump_decay_np_per_m: kv.get_or("pump_decay_np_per_m", d.pump_decay_np_per_m)?,
    };
    let r = HydraulicResponse::default();
    s.response = HydraulicResponse {
        standstill_pressure_bar: kv.get_or("standstill_pressure_bar", r.standstill_pressure_bar)?,
        transfer_flow_m3_h: kv.get_or("transfer_flow_m3_h", r.transfer_flow_m3_h)?,
        leak_drop_bar_per_m3_h: kv.get_or("leak_drop_bar_per_m3_h", r.leak_drop_bar_per_m3_h)?,
        disturbance_drop_bar_per_m3_h: kv.get_or("disturbance_drop_bar_per_m3_h", r.disturbance_drop_bar_per_m3_h)?,
    };
    kv.at_line(0, s.validate())?;
    Ok(s)
}

pub fn read_scenario(path: &Path, seed_override: Option<u64>) -> Result<Scenario> {
    parse_scenario(&KvFile::read(path)?, seed_override)
}

/// Serializes every field, so parsing the text gives the scenario back.
pub fn write_scenario(s: &Scenario) -> String {
    let mut w = KvWriter::new();
    w.comment("leak scenario");
    w.put("seed", s.seed)
        .put("rng", s.rng.as_str())
        .put("duration_s", s.duration_s)
        .put("sample_rate_hz", s.sample_rate_hz)
        .put("condition", s.condition.as_str())
        .put("line_pressure_bar", s.line_pressure_bar)
        .put("density_kg_m3", s.fluid.density_kg_m3)
        .put("sound_speed_m_s", s.fluid.sound_speed_m_s)
        .put("attenuation_np_per_m", s.attenuation_np_per_m)
        .put("spl_n", s.spl_model.n)
        .put("spl_k", s.spl_model.k);
    w.blank();
    write_layout(&mut w, &s.layout);
    for p in &s.pumps {
        w.put("pump", format!("{},{}", p.station_id, p.amplitude_kpa));
    }
    for d in &s.disturbances {
        w.put(
            "disturbance",
            format!("{},{},{},{}", d.station_id, d.start_s, d.stop_s, d.flow_step_m3_h),
        );
    }
    for d in &s.dips {
        w.put("dip", format!("{},{},{}", d.start_s, d.stop_s, d.level_bar));
    }
    if let Some(leak) = &s.leak {
        w.blank();
        w.put("leak_position_m", leak.position_m)
            .put("leak_area_mm2", leak.nozzle.area_mm2)
            .put("leak_shape", leak.nozzle.shape.as_str());
        if let Some(d) = leak.nozzle.orifice_diameter_m {
            w.put("leak_orifice_diameter_m", d);
        }
        w.put("leak_discharge_coefficient", leak.nozzle.discharge_coefficient)
            .put("leak_delta_p_bar", leak.delta_p_bar)
            .put("leak_start_s", leak.start_s)
            .put("leak_stop_s", leak.stop_s);
    }
    let n = &s.noise;
    let r = &s.response;
    w.blank();
    w.put("sensor_floor_kpa", n.sensor_floor_kpa)
        .put("static_noise_bar", n.static_noise_bar)
        .put("drift_bar", n.drift_bar)
        .put("flow_noise_m3_h", n.flow_noise_m3_h)
        .put("accel_floor_m_s2", n.accel_floor_m_s2)
        .put("accel_background_gain", n.accel_background_gain)
        .put("accel_leak_gain", n.accel_leak_gain)
        .put("pump_corner_hz", n.pump_corner_hz)
        .put("pump_decay_np_per_m", n.pump_decay_np_per_m)
        .put("standstill_pressure_bar", r.standstill_pressure_bar)
        .put("transfer_flow_m3_h", r.transfer_flow_m3_h)
        .put("leak_drop_bar_per_m3_h", r.leak_drop_bar_per_m3_h)
        .put("disturbance_drop_bar_per_m3_h", r.disturbance_drop_bar_per_m3_h);
    w.finish()
}

/// Settings shared by the analysis commands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub layout: Option<StationLayout>,
    pub fluid: FluidSpec,
    pub policy: BatchingPolicy,
    pub band: Band,
    pub features: Option<(String, String)>,
    pub detection: DetectionSettings,
    pub localize: LocalizeOptions,
    pub seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            layout: None,
            fluid: FluidSpec::fuel(),
            policy: BatchingPolicy::default(),
            band: Band::LEAK,
            features: None,
            detection: DetectionSettings::default(),
            localize: LocalizeOptions::default(),
            seed: None,
        }
    }
}

/// Parses `x,y` into two feature names.
pub fn parse_features(s: &str) -> Result<(String, String)> {
    match s.split(',').map(str::trim).collect::<Vec<_>>()[..] {
        [x, y] if !x.is_empty() && !y.is_empty() => Ok((x.to_string(), y.to_string())),
        _ => Err(Error::invalid(format!("features must be 'x,y', got '{s}'"))),
    }
}

pub fn parse_run_config(kv: &KvFile) -> Result<RunConfig> {
    kv.check_keys(&keys(&[LAYOUT_KEYS, FLUID_KEYS, SCENARIO_KEYS, RUN_KEYS]), REPEATABLE)?;
    let d = RunConfig::default();
    let window = kv.get_or("window_s", d.policy.window_len_s)?;
    let overlap = kv.get_or("overlap", d.policy.overlap_fraction)?;
    let band: Band = kv.get_or("band", d.band)?;
    let features = match kv.all("features").last() {
        Some(e) => Some(kv.at_line(e.line, parse_features(&e.value))?),
        None => None,
    };
    let g = GatingThresholds::default();
    Ok(RunConfig {
        layout: parse_layout(kv)?,
        fluid: parse_fluid(kv)?,
        policy: kv.at_line(0, BatchingPolicy::new(window, overlap))?,
        band,
        features,
        detection: DetectionSettings {
            gating: GatingThresholds {
                min_pressure_bar: kv.get_or("min_pressure_bar", g.min_pressure_bar)?,
                max_pressure_std_bar: kv.get_or("max_pressure_std_bar", g.max_pressure_std_bar)?,
            },
            ambient_pressure_bar: kv.get_or("ambient_pressure_bar", d.detection.ambient_pressure_bar)?,
        },
        localize: LocalizeOptions {
            band,
            min_peak_correlation: kv.get_or("min_peak_correlation", d.localize.min_peak_correlation)?,
        },
        seed: kv.get("seed")?,
    })
}

pub fn read_run_config(path: &Path) -> Result<RunConfig> {
    parse_run_config(&KvFile::read(path)?)
}
