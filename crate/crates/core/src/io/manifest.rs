//! Ground truth written next to simulated signal files.

use std::path::Path;

use crate::dsp::Band;
use crate::error::{Error, Result};
use crate::io::config::{parse_fluid, parse_layout, write_layout};
use crate::io::kv::{KvFile, KvWriter};
use crate::model::{FluidSpec, LeakClass, StationLayout};
use crate::synth::{Disturbance, PipelineCondition, Scenario, RAMP_S};

pub const FILE_NAME: &str = "manifest.txt";

/// Expected SNR from which a station counts as hearing the leak. At -3 dB
/// the leak still lifts the band energy by 1.8 dB.
pub const LEAK_ACTIVE_MIN_SNR_DB: f64 = -3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LeakTruth {
    pub position_m: f64,
    pub area_mm2: f64,
    pub class: LeakClass,
    pub delta_p_bar: f64,
    pub start_s: f64,
    pub stop_s: f64,
}

/// What the leak looks like from one station.
#[derive(Debug, Clone, PartialEq)]
pub struct StationTruth {
    pub station_id: String,
    pub distance_m: f64,
    pub arrival_delay_s: f64,
    /// Expected leak-band SNR while the leak is fully on.
    pub expected_snr_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub seed: u64,
    pub rng: String,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub condition: PipelineCondition,
    pub line_pressure_bar: f64,
    pub attenuation_np_per_m: f64,
    pub ramp_s: f64,
    pub layout: StationLayout,
    pub fluid: FluidSpec,
    pub leak: Option<LeakTruth>,
    pub stations: Vec<StationTruth>,
    pub disturbances: Vec<Disturbance>,
    pub signal_files: Vec<String>,
}

impl Manifest {
    pub fn from_scenario(s: &Scenario, signal_files: Vec<String>) -> Result<Self> {
        let mut stations = Vec::new();
        if s.leak.is_some() {
            for (i, st) in s.layout.stations().iter().enumerate() {
                stations.push(StationTruth {
                    station_id: st.id.clone(),
                    distance_m: s.leak_distance_m(i).expect("leak present"),
                    arrival_delay_s: s.arrival_delay_s(i).expect("leak present"),
                    expected_snr_db: s.expected_snr_db(i, Band::LEAK)?.expect("leak present"),
                });
            }
        }
        Ok(Manifest {
            seed: s.seed,
            rng: s.rng.as_str().to_string(),
            duration_s: s.duration_s,
            sample_rate_hz: s.sample_rate_hz,
            condition: s.condition,
            line_pressure_bar: s.line_pressure_bar,
            attenuation_np_per_m: s.attenuation_np_per_m,
            ramp_s: RAMP_S,
            layout: s.layout.clone(),
            fluid: s.fluid,
            leak: s.leak.as_ref().map(|l| LeakTruth {
                position_m: l.position_m,
                area_mm2: l.nozzle.area_mm2,
                class: l.class(),
                delta_p_bar: l.delta_p_bar,
                start_s: l.start_s,
                stop_s: l.stop_s,
            }),
            stations,
            disturbances: s.disturbances.clone(),
            signal_files,
        })
    }

    pub fn station(&self, id: &str) -> Option<&StationTruth> {
        self.stations.iter().find(|s| s.station_id == id)
    }

    /// The station closest to the leak.
    pub fn nearest_station(&self) -> Option<&StationTruth> {
        self.stations
            .iter()
            .min_by(|a, b| a.distance_m.total_cmp(&b.distance_m))
    }

    /// Ground-truth label of a window at a station.
    ///
    /// A window lying wholly inside the arrival-shifted leak interval is
    /// labeled with the hole class when the expected SNR there is at least
    /// [`LEAK_ACTIVE_MIN_SNR_DB`]. A window clear of the leak and its on/off ramps is `none`.
    /// Anything else is unknown (`None`).
    pub fn label(&self, station_id: &str, window_start_s: f64, window_len_s: f64) -> Option<LeakClass> {
        let Some(leak) = &self.leak else {
            return Some(LeakClass::None);
        };
        let truth = self.station(station_id)?;
        let (w0, w1) = (window_start_s, window_start_s + window_len_s);
        let tau = truth.arrival_delay_s;
        if w0 >= leak.start_s + tau && w1 <= leak.stop_s + tau {
            return (truth.expected_snr_db >= LEAK_ACTIVE_MIN_SNR_DB).then_some(leak.class);
        }
        let (r0, r1) = (leak.start_s - self.ramp_s + tau, leak.stop_s + self.ramp_s + tau);
        if w1 <= r0 || w0 >= r1 {
            return Some(LeakClass::None);
        }
        None
    }

    pub fn to_text(&self) -> String {
        let mut w = KvWriter::new();
        w.comment("ground truth for a simulated acquisition");
        w.put("seed", self.seed)
            .put("rng", &self.rng)
            .put("duration_s", self.duration_s)
            .put("sample_rate_hz", self.sample_rate_hz)
            .put("condition", self.condition.as_str())
            .put("line_pressure_bar", self.line_pressure_bar)
            .put("density_kg_m3", self.fluid.density_kg_m3)
            .put("sound_speed_m_s", self.fluid.sound_speed_m_s)
            .put("attenuation_np_per_m", self.attenuation_np_per_m)
            .put("ramp_s", self.ramp_s);
        w.blank();
        write_layout(&mut w, &self.layout);
        for f in &self.signal_files {
            w.put("signal", f);
        }
        for d in &self.disturbances {
            w.put(
                "disturbance",
                format!("{},{},{},{}", d.station_id, d.start_s, d.stop_s, d.flow_step_m3_h),
            );
        }
        w.blank();
        match &self.leak {
            None => {
                w.put("leak", false);
            }
            Some(l) => {
                w.put("leak", true)
                    .put("leak_position_m", l.position_m)
                    .put("leak_area_mm2", l.area_mm2)
                    .put("leak_class", l.class)
                    .put("leak_delta_p_bar", l.delta_p_bar)
                    .put("leak_start_s", l.start_s)
                    .put("leak_stop_s", l.stop_s);
                w.comment("truth = station,distance_m,arrival_delay_s,expected_snr_db");
                for s in &self.stations {
                    w.put(
                        "truth",
                        format!(
                            "{},{},{},{}",
                            s.station_id, s.distance_m, s.arrival_delay_s, s.expected_snr_db
                        ),
                    );
                }
            }
        }
        w.finish()
    }

    pub fn parse(kv: &KvFile) -> Result<Self> {
        kv.check_keys(
            &[
                "seed",
                "rng",
                "duration_s",
                "sample_rate_hz",
                "condition",
                "line_pressure_bar",
                "density_kg_m3",
                "sound_speed_m_s",
                "attenuation_np_per_m",
                "ramp_s",
                "pipe_inner_diameter_m",
                "station",
                "signal",
                "disturbance",
                "leak",
                "leak_position_m",
                "leak_area_mm2",
                "leak_class",
                "leak_delta_p_bar",
                "leak_start_s",
                "leak_stop_s",
                "truth",
            ],
            &["station", "signal", "disturbance", "truth"],
        )?;
        let layout = parse_layout(kv)?.ok_or_else(|| kv.error(0, "manifest lists no stations"))?;
        let leak = if kv.require::<bool>("leak")? {
            Some(LeakTruth {
                position_m: kv.require("leak_position_m")?,
                area_mm2: kv.require("leak_area_mm2")?,
                class: kv.require("leak_class")?,
                delta_p_bar: kv.require("leak_delta_p_bar")?,
                start_s: kv.require("leak_start_s")?,
                stop_s: kv.require("leak_stop_s")?,
            })
        } else {
            None
        };
        let mut stations = Vec::new();
        for e in kv.all("truth") {
            let f = kv.fields(e, 4)?;
            if layout.station(f[0]).is_none() {
                return Err(kv.error(e.line, format!("truth for unknown station '{}'", f[0])));
            }
            stations.push(StationTruth {
                station_id: f[0].to_string(),
                distance_m: kv.parse_field(e, "distance", f[1])?,
                arrival_delay_s: kv.parse_field(e, "arrival delay", f[2])?,
                expected_snr_db: kv.parse_field(e, "expected SNR", f[3])?,
            });
        }
        let mut disturbances = Vec::new();
        for e in kv.all("disturbance") {
            let f = kv.fields(e, 4)?;
            disturbances.push(Disturbance {
                station_id: f[0].to_string(),
                start_s: kv.parse_field(e, "start", f[1])?,
                stop_s: kv.parse_field(e, "stop", f[2])?,
                flow_step_m3_h: kv.parse_field(e, "flow step", f[3])?,
            });
        }
        Ok(Manifest {
            seed: kv.require("seed")?,
            rng: kv.require("rng")?,
            duration_s: kv.require("duration_s")?,
            sample_rate_hz: kv.require("sample_rate_hz")?,
            condition: kv.require("condition")?,
            line_pressure_bar: kv.require("line_pressure_bar")?,
            attenuation_np_per_m: kv.require("attenuation_np_per_m")?,
            ramp_s: kv.get_or("ramp_s", RAMP_S)?,
            fluid: parse_fluid(kv)?,
            layout,
            leak,
            stations,
            disturbances,
            signal_files: kv.all("signal").map(|e| e.value.clone()).collect(),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&KvFile::read(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}
