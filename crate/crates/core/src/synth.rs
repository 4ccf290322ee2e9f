//! Seeded multi-station signal synthesizer.
//!
//! Each station record is the sum of independent sources:
//!
//! * static pressure: operating level, slow line-wide drift, sensor noise,
//!   optional dips, and step-downs while a leak or a truck filling draws
//!   fluid from the line;
//! * pump noise: low-frequency coloured noise (second-order roll-off),
//!   present only while transferring, decaying away from the pump stations;
//! * sensor floor: white noise on every dynamic channel;
//! * leak jet noise: Gaussian noise flat over 500–4000 Hz whose RMS at the
//!   hole equals the SPL law, attenuated as `exp(-α·d)` and delayed by
//!   `d / c` on its way to each station;
//! * flow: zero at standstill, the transfer flow otherwise, plus filling
//!   steps.
//!
//! Sources draw from separate random substreams keyed by `(seed, station
//! id, source)`, so switching the leak on or off leaves every other source
//! bit-identical. Fractional propagation delays are applied exactly as
//! phase ramps in the frequency domain.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::dsp::Band;
use crate::error::{Error, Result};
use crate::hydraulics::{leak_flow, spl_forward};
use crate::model::{
    ChannelKind, FluidSpec, LeakClass, NozzleSpec, SensorKind, SignalRecord, SplModel,
    StationLayout, MIN_SAMPLE_RATE_HZ,
};

/// Source-level law used by default: `n = 1.5`, with `k` set so the large
/// hole at 4 bar stops being visible over the default pump noise about
/// 60 m from the hole.
pub const DEFAULT_SPL_N: f64 = 1.5;
pub const DEFAULT_SPL_K: f64 = 1.5e-3;

/// Band occupied by the synthetic jet noise.
pub const JET_NOISE_BAND: Band = Band {
    lo_hz: 500.0,
    hi_hz: 4000.0,
};

/// Duration of the raised-cosine ramps on every switched source.
pub const RAMP_S: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PipelineCondition {
    /// Pumps off, ~0.6 bar.
    Standstill,
    Transferring,
}

impl PipelineCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            PipelineCondition::Standstill => "standstill",
            PipelineCondition::Transferring => "transferring",
        }
    }
}

impl std::str::FromStr for PipelineCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standstill" => Ok(PipelineCondition::Standstill),
            "transferring" => Ok(PipelineCondition::Transferring),
            other => Err(Error::invalid(format!("unknown condition '{other}'"))),
        }
    }
}

/// Portable generator families accepted in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RngKind {
    ChaCha8,
    ChaCha20,
}

impl RngKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RngKind::ChaCha8 => "chacha8",
            RngKind::ChaCha20 => "chacha20",
        }
    }
}

impl std::str::FromStr for RngKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chacha8" => Ok(RngKind::ChaCha8),
            "chacha20" => Ok(RngKind::ChaCha20),
            other => Err(Error::invalid(format!(
                "unknown generator '{other}' (expected chacha8 or chacha20)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PumpSource {
    pub station_id: String,
    /// RMS of the pump noise at the pump itself.
    pub amplitude_kpa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeakSpec {
    pub position_m: f64,
    pub nozzle: NozzleSpec,
    pub delta_p_bar: f64,
    pub start_s: f64,
    pub stop_s: f64,
}

impl LeakSpec {
    /// Ground-truth class of the nozzle.
    pub fn class(&self) -> LeakClass {
        LeakClass::nearest(self.nozzle.area_mm2)
    }
}

/// Truck filling: a flow step at a station while it lasts.
#[derive(Debug, Clone, PartialEq)]
pub struct Disturbance {
    pub station_id: String,
    pub start_s: f64,
    pub stop_s: f64,
    pub flow_step_m3_h: f64,
}

/// Transient fall of the line pressure to `level_bar`.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureDip {
    pub start_s: f64,
    pub stop_s: f64,
    pub level_bar: f64,
}

/// Noise levels and sensor responses.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseLevels {
    /// White floor on the hydrophones, kPa RMS.
    pub sensor_floor_kpa: f64,
    pub static_noise_bar: f64,
    /// Amplitude of the slow line-wide static-pressure drift.
    pub drift_bar: f64,
    pub flow_noise_m3_h: f64,
    pub accel_floor_m_s2: f64,
    /// Accelerometer response to background dynamic pressure, (m/s²)/kPa.
    pub accel_background_gain: f64,
    /// Accelerometer response to jet noise, (m/s²)/kPa.
    pub accel_leak_gain: f64,
    /// Corner of the pump-noise roll-off.
    pub pump_corner_hz: f64,
    /// Amplitude decay of pump noise with distance, Np/m.
    pub pump_decay_np_per_m: f64,
}

impl Default for NoiseLevels {
    fn default() -> Self {
        NoiseLevels {
            sensor_floor_kpa: 0.01,
            static_noise_bar: 0.002,
            drift_bar: 0.01,
            flow_noise_m3_h: 0.5,
            accel_floor_m_s2: 0.001,
            accel_background_gain: 0.02,
            accel_leak_gain: 0.04,
            pump_corner_hz: 150.0,
            pump_decay_np_per_m: 0.002,
        }
    }
}

/// Hydraulic operating point and the static response to fluid withdrawal.
#[derive(Debug, Clone, PartialEq)]
pub struct HydraulicResponse {
    pub standstill_pressure_bar: f64,
    pub transfer_flow_m3_h: f64,
    /// Static-pressure drop per m³/h of leak flow.
    pub leak_drop_bar_per_m3_h: f64,
    /// Static-pressure drop per m³/h of filling flow.
    pub disturbance_drop_bar_per_m3_h: f64,
}

impl Default for HydraulicResponse {
    fn default() -> Self {
        HydraulicResponse {
            standstill_pressure_bar: 0.6,
            transfer_flow_m3_h: 150.0,
            leak_drop_bar_per_m3_h: 0.02,
            disturbance_drop_bar_per_m3_h: 0.004,
        }
    }
}

/// Everything needed to generate one synthetic acquisition.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub layout: StationLayout,
    pub fluid: FluidSpec,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub condition: PipelineCondition,
    /// Absolute line pressure while transferring.
    pub line_pressure_bar: f64,
    pub pumps: Vec<PumpSource>,
    pub leak: Option<LeakSpec>,
    pub disturbances: Vec<Disturbance>,
    pub dips: Vec<PressureDip>,
    /// Amplitude attenuation of jet noise along the line, Np/m.
    pub attenuation_np_per_m: f64,
    pub spl_model: SplModel,
    pub seed: u64,
    pub rng: RngKind,
    pub noise: NoiseLevels,
    pub response: HydraulicResponse,
}

impl Scenario {
    /// No leak, no pumps, default noise, 60 s at 8192 Hz.
    pub fn new(layout: StationLayout, fluid: FluidSpec, seed: u64) -> Self {
        Scenario {
            layout,
            fluid,
            duration_s: 60.0,
            sample_rate_hz: 8192.0,
            condition: PipelineCondition::Transferring,
            line_pressure_bar: 4.0,
            pumps: Vec::new(),
            leak: None,
            disturbances: Vec::new(),
            dips: Vec::new(),
            attenuation_np_per_m: 0.05,
            spl_model: SplModel::new(DEFAULT_SPL_N, DEFAULT_SPL_K).expect("default model is valid"),
            seed,
            rng: RngKind::ChaCha20,
            noise: NoiseLevels::default(),
            response: HydraulicResponse::default(),
        }
    }

    /// Six-station reference line, transferring at 4 bar with pumps at B
    /// and E.
    pub fn reference(seed: u64) -> Self {
        let mut s = Scenario::new(StationLayout::reference_line(), FluidSpec::fuel(), seed);
        s.pumps = ["B", "E"]
            .iter()
            .map(|id| PumpSource {
                station_id: id.to_string(),
                amplitude_kpa: 0.5,
            })
            .collect();
        s
    }

    /// Adds a circular-nozzle leak of `area_mm2` at `position_m`.
    pub fn with_leak(mut self, position_m: f64, area_mm2: f64, delta_p_bar: f64, start_s: f64, stop_s: f64) -> Result<Self> {
        self.leak = Some(LeakSpec {
            position_m,
            nozzle: NozzleSpec::circular(area_mm2)?,
            delta_p_bar,
            start_s,
            stop_s,
        });
        Ok(self)
    }

    pub fn sample_count(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize
    }

    /// Static pressure in the absence of dips and withdrawals.
    pub fn base_pressure_bar(&self) -> f64 {
        match self.condition {
            PipelineCondition::Standstill => self.response.standstill_pressure_bar,
            PipelineCondition::Transferring => self.line_pressure_bar,
        }
    }

    /// Distance from the leak to a station, if there is a leak.
    pub fn leak_distance_m(&self, station_index: usize) -> Option<f64> {
        let station = self.layout.stations().get(station_index)?;
        self.leak
            .as_ref()
            .map(|l| (station.position_m - l.position_m).abs())
    }

    /// Travel time of the jet noise from the hole to a station.
    pub fn arrival_delay_s(&self, station_index: usize) -> Option<f64> {
        self.leak_distance_m(station_index)
            .map(|d| d / self.fluid.sound_speed_m_s)
    }

    /// RMS of the jet noise at the hole, kPa.
    pub fn source_spl_kpa(&self) -> Result<Option<f64>> {
        self.leak
            .as_ref()
            .map(|l| spl_forward(l.delta_p_bar, l.nozzle.area_mm2, &self.spl_model))
            .transpose()
    }

    /// Leak flow through the nozzle, m³/h.
    pub fn leak_flow_m3_h(&self) -> Result<Option<f64>> {
        self.leak
            .as_ref()
            .map(|l| {
                leak_flow(
                    l.nozzle.discharge_coefficient,
                    l.nozzle.area_m2(),
                    l.delta_p_bar * 1e5,
                    self.fluid.density_kg_m3,
                )
                .map(|q| q * 3600.0)
            })
            .transpose()
    }

    /// RMS of pump noise at a station (0 at standstill).
    pub fn pump_amplitude_kpa(&self, station_index: usize) -> f64 {
        if self.condition == PipelineCondition::Standstill {
            return 0.0;
        }
        let x = self.layout.stations()[station_index].position_m;
        let power: f64 = self
            .pumps
            .iter()
            .filter_map(|p| {
                let at = self.layout.station(&p.station_id)?.position_m;
                let decay = (-self.noise.pump_decay_np_per_m * (x - at).abs()).exp();
                Some((p.amplitude_kpa * decay).powi(2))
            })
            .sum();
        power.sqrt()
    }

    /// Expected mean-square background (pump + sensor floor) in `band`.
    pub fn expected_background_energy(&self, station_index: usize, band: Band) -> f64 {
        let nyquist = self.sample_rate_hz / 2.0;
        let lo = band.lo_hz.min(nyquist);
        let hi = band.hi_hz.min(nyquist);
        let fc = self.noise.pump_corner_hz;
        // ∫ (1 + (f/fc)²)^-2 df in units of fc
        let shaped = |f: f64| {
            let u = f / fc;
            0.5 * (u / (1.0 + u * u) + u.atan())
        };
        let pump_fraction = (shaped(hi) - shaped(lo)) / shaped(nyquist);
        let floor_fraction = (hi - lo) / nyquist;
        self.pump_amplitude_kpa(station_index).powi(2) * pump_fraction
            + self.noise.sensor_floor_kpa.powi(2) * floor_fraction
    }

    /// Expected mean-square jet noise in `band` at a station while the leak
    /// is active.
    pub fn expected_leak_energy(&self, station_index: usize, band: Band) -> Result<Option<f64>> {
        let (Some(spl), Some(d)) = (self.source_spl_kpa()?, self.leak_distance_m(station_index))
        else {
            return Ok(None);
        };
        let overlap = (band.hi_hz.min(JET_NOISE_BAND.hi_hz) - band.lo_hz.max(JET_NOISE_BAND.lo_hz))
            .max(0.0);
        let fraction = overlap / (JET_NOISE_BAND.hi_hz - JET_NOISE_BAND.lo_hz);
        Ok(Some(
            spl * spl * (-2.0 * self.attenuation_np_per_m * d).exp() * fraction,
        ))
    }

    /// Expected leak-band SNR at a station, in dB.
    pub fn expected_snr_db(&self, station_index: usize, band: Band) -> Result<Option<f64>> {
        let noise = self.expected_background_energy(station_index, band);
        Ok(self
            .expected_leak_energy(station_index, band)?
            .map(|e| 10.0 * (e / noise).log10()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if !(self.duration_s > 0.0) || !self.duration_s.is_finite() {
            return bad(format!("duration must be > 0 s, got {}", self.duration_s));
        }
        if !(self.sample_rate_hz >= MIN_SAMPLE_RATE_HZ) || !self.sample_rate_hz.is_finite() {
            return bad(format!(
                "sample rate {} Hz cannot represent jet noise up to 4 kHz (need >= {MIN_SAMPLE_RATE_HZ} Hz)",
                self.sample_rate_hz
            ));
        }
        if !(self.line_pressure_bar > 0.0) {
            return bad(format!("line pressure must be > 0, got {}", self.line_pressure_bar));
        }
        if !(self.attenuation_np_per_m >= 0.0) {
            return bad(format!(
                "attenuation must be >= 0, got {}",
                self.attenuation_np_per_m
            ));
        }
        self.spl_model.validate()?;
        let interval = |what: &str, start: f64, stop: f64| {
            if !(0.0 <= start && start < stop && stop <= self.duration_s) {
                return bad(format!(
                    "{what} interval must satisfy 0 <= start < stop <= duration, got [{start}, {stop}]"
                ));
            }
            Ok(())
        };
        let station = |id: &str| {
            if self.layout.station(id).is_none() {
                return bad(format!("unknown station '{id}'"));
            }
            Ok(())
        };
        for p in &self.pumps {
            station(&p.station_id)?;
            if !(p.amplitude_kpa >= 0.0) {
                return bad(format!("pump amplitude must be >= 0, got {}", p.amplitude_kpa));
            }
        }
        if let Some(leak) = &self.leak {
            interval("leak", leak.start_s, leak.stop_s)?;
            if !(0.0..=self.layout.line_length_m()).contains(&leak.position_m) {
                return bad(format!(
                    "leak position {} m is outside the line [0, {}]",
                    leak.position_m,
                    self.layout.line_length_m()
                ));
            }
            if !(leak.delta_p_bar > 0.0) {
                return bad(format!("leak Δp must be > 0, got {}", leak.delta_p_bar));
            }
        }
        for d in &self.disturbances {
            station(&d.station_id)?;
            interval("disturbance", d.start_s, d.stop_s)?;
        }
        for d in &self.dips {
            interval("pressure dip", d.start_s, d.stop_s)?;
            if !(d.level_bar >= 0.0) {
                return bad(format!("dip level must be >= 0, got {}", d.level_bar));
            }
        }
        let n = self.noise.clone();
        for (name, v) in [
            ("sensor_floor_kpa", n.sensor_floor_kpa),
            ("static_noise_bar", n.static_noise_bar),
            ("drift_bar", n.drift_bar),
            ("flow_noise_m3_h", n.flow_noise_m3_h),
            ("accel_floor_m_s2", n.accel_floor_m_s2),
            ("accel_background_gain", n.accel_background_gain),
            ("accel_leak_gain", n.accel_leak_gain),
            ("pump_decay_np_per_m", n.pump_decay_np_per_m),
        ] {
            if !(v >= 0.0) {
                return bad(format!("{name} must be >= 0, got {v}"));
            }
        }
        if !(n.pump_corner_hz > 0.0) {
            return bad(format!("pump_corner_hz must be > 0, got {}", n.pump_corner_hz));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Random substreams
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum Source {
    Drift = 1,
    StaticNoise,
    Pump,
    Floor,
    AccelFloor,
    FlowNoise,
    Jet,
}

enum SourceRng {
    ChaCha8(ChaCha8Rng),
    ChaCha20(ChaCha20Rng),
}

impl RngCore for SourceRng {
    fn next_u32(&mut self) -> u32 {
        match self {
            SourceRng::ChaCha8(r) => r.next_u32(),
            SourceRng::ChaCha20(r) => r.next_u32(),
        }
    }

    fn next_u64(&mut self) -> u64 {
        match self {
            SourceRng::ChaCha8(r) => r.next_u64(),
            SourceRng::ChaCha20(r) => r.next_u64(),
        }
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        match self {
            SourceRng::ChaCha8(r) => r.fill_bytes(dst),
            SourceRng::ChaCha20(r) => r.fill_bytes(dst),
        }
    }
}

/// FNV-1a over the station id and source tag; stable across platforms and
/// toolchains.
fn stream_id(station_id: &str, source: Source) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    station_id
        .bytes()
        .chain([0xff, source as u8])
        .fold(OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

fn source_rng(scenario: &Scenario, station_id: &str, source: Source) -> SourceRng {
    let stream = stream_id(station_id, source);
    match scenario.rng {
        RngKind::ChaCha8 => {
            let mut r = ChaCha8Rng::seed_from_u64(scenario.seed);
            r.set_stream(stream);
            SourceRng::ChaCha8(r)
        }
        RngKind::ChaCha20 => {
            let mut r = ChaCha20Rng::seed_from_u64(scenario.seed);
            r.set_stream(stream);
            SourceRng::ChaCha20(r)
        }
    }
}

fn white(rng: &mut SourceRng, n: usize, sigma: f64) -> Vec<f64> {
    (0..n)
        .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

// ---------------------------------------------------------------------------
// Shaping helpers
// ---------------------------------------------------------------------------

/// Raised-cosine switch: 0 before `start - RAMP_S`, 1 on `[start, stop]`,
/// 0 after `stop + RAMP_S`.
fn gate(t: f64, start: f64, stop: f64) -> f64 {
    let rise = |x: f64| 0.5 - 0.5 * (PI * x.clamp(0.0, 1.0)).cos();
    if t < start {
        rise((t - (start - RAMP_S)) / RAMP_S)
    } else if t <= stop {
        1.0
    } else {
        rise(((stop + RAMP_S) - t) / RAMP_S)
    }
}

fn normalize_rms(x: &mut [f64]) {
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
    if rms > 0.0 {
        x.iter_mut().for_each(|v| *v /= rms);
    }
}

/// Signed frequency of bin `k` in an `n`-point transform.
fn bin_frequency(k: usize, n: usize, fs: f64) -> f64 {
    let k = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
    k * fs / n as f64
}

/// Unit-RMS pump noise: white noise through a second-order low-pass.
fn pump_noise(planner: &mut FftPlanner<f64>, rng: &mut SourceRng, n: usize, fs: f64, corner_hz: f64) -> Vec<f64> {
    let mut buf: Vec<Complex64> = white(rng, n, 1.0)
        .into_iter()
        .map(|x| Complex64::new(x, 0.0))
        .collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let u = bin_frequency(k, n, fs) / corner_hz;
        *c *= 1.0 / (1.0 + u * u);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let mut out: Vec<f64> = buf.iter().map(|c| c.re).collect();
    normalize_rms(&mut out);
    out
}

/// Spectrum of the gated jet noise at the hole, on an `m`-point grid.
///
/// The stationary noise is normalized to `spl_kpa` RMS before gating.
fn jet_source_spectrum(
    planner: &mut FftPlanner<f64>,
    rng: &mut SourceRng,
    m: usize,
    fs: f64,
    spl_kpa: f64,
    leak: &LeakSpec,
) -> Vec<Complex64> {
    let mut spec = vec![Complex64::new(0.0, 0.0); m];
    for k in 1..m.div_ceil(2) {
        if JET_NOISE_BAND.contains_bin(k, m, fs) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            spec[k] = Complex64::new(re, im);
            spec[m - k] = Complex64::new(re, -im);
        }
    }
    planner.plan_fft_inverse(m).process(&mut spec);
    let mut source: Vec<f64> = spec.iter().map(|c| c.re).collect();
    normalize_rms(&mut source);
    let mut gated: Vec<Complex64> = source
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let t = i as f64 / fs;
            Complex64::new(spl_kpa * x * gate(t, leak.start_s, leak.stop_s), 0.0)
        })
        .collect();
    planner.plan_fft_forward(m).process(&mut gated);
    gated
}

/// Jet noise seen at distance `distance_m`: delayed by `distance / c`,
/// attenuated by `exp(-α·distance)`, truncated to `n` samples.
fn propagate(
    planner: &mut FftPlanner<f64>,
    source: &[Complex64],
    n: usize,
    fs: f64,
    delay_s: f64,
    gain: f64,
) -> Vec<f64> {
    let m = source.len();
    let mut buf: Vec<Complex64> = source
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let phase = -2.0 * PI * bin_frequency(k, m, fs) * delay_s;
            c * Complex64::from_polar(gain, phase)
        })
        .collect();
    planner.plan_fft_inverse(m).process(&mut buf);
    buf[..n].iter().map(|c| c.re / m as f64).collect()
}

// ---------------------------------------------------------------------------
// Synthesis
// ---------------------------------------------------------------------------

/// Channels of one station split into background and leak contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct StationParts {
    pub station_id: String,
    pub background: BTreeMap<ChannelKind, Vec<f64>>,
    /// Same channels as `background`; all zeros when there is no leak.
    pub leak: BTreeMap<ChannelKind, Vec<f64>>,
}

impl StationParts {
    /// Background plus leak, sample by sample.
    pub fn total(&self, kind: ChannelKind) -> Option<Vec<f64>> {
        let bg = self.background.get(&kind)?;
        let lk = self.leak.get(&kind)?;
        Some(bg.iter().zip(lk).map(|(b, l)| b + l).collect())
    }

    pub fn into_record(self, sample_rate_hz: f64) -> Result<SignalRecord> {
        let channels = self
            .background
            .keys()
            .map(|k| (*k, self.total(*k).unwrap_or_default().iter().map(|&x| x as f32).collect()))
            .collect();
        SignalRecord::new(self.station_id, sample_rate_hz, 0.0, channels)
    }
}

/// Generates every station's record.
pub fn synthesize(scenario: &Scenario) -> Result<Vec<SignalRecord>> {
    let fs = scenario.sample_rate_hz;
    synthesize_parts(scenario)?
        .into_iter()
        .map(|p| p.into_record(fs))
        .collect()
}

/// Generates every station's channels with the leak contribution kept
/// separate from the background.
pub fn synthesize_parts(scenario: &Scenario) -> Result<Vec<StationParts>> {
    scenario.validate()?;
    let n = scenario.sample_count();
    let fs = scenario.sample_rate_hz;
    let times: Vec<f64> = (0..n).map(|i| i as f64 / fs).collect();
    let mut planner = FftPlanner::new();

    let static_level = line_static_pressure(scenario, &times);
    let flow_level = line_flow(scenario, &times);

    let jet = match (&scenario.leak, scenario.source_spl_kpa()?) {
        (Some(leak), Some(spl)) => {
            let max_delay = scenario.layout.line_length_m() / scenario.fluid.sound_speed_m_s;
            let m = (n + (max_delay * fs).ceil() as usize + 64).div_ceil(1024) * 1024;
            let mut rng = source_rng(scenario, "", Source::Jet);
            Some(jet_source_spectrum(&mut planner, &mut rng, m, fs, spl, leak))
        }
        _ => None,
    };
    let leak_drop_bar = scenario.leak_flow_m3_h()?.unwrap_or(0.0)
        * scenario.response.leak_drop_bar_per_m3_h;

    let mut out = Vec::with_capacity(scenario.layout.stations().len());
    for (idx, station) in scenario.layout.stations().iter().enumerate() {
        let id = station.id.as_str();
        let sensors = station.sensors;
        let mut background = BTreeMap::new();
        let mut leak = BTreeMap::new();

        let jet_here = match (&jet, &scenario.leak) {
            (Some(spec), Some(_)) => {
                let d = scenario.leak_distance_m(idx).unwrap_or(0.0);
                let delay = d / scenario.fluid.sound_speed_m_s;
                let gain = (-scenario.attenuation_np_per_m * d).exp();
                Some(propagate(&mut planner, spec, n, fs, delay, gain))
            }
            _ => None,
        };
        let zeros = || vec![0.0; n];

        if sensors.contains(SensorKind::StaticPressure) {
            let mut rng = source_rng(scenario, id, Source::StaticNoise);
            let noise = white(&mut rng, n, scenario.noise.static_noise_bar);
            background.insert(
                ChannelKind::StaticPressure,
                static_level.iter().zip(&noise).map(|(p, e)| p + e).collect(),
            );
            let drop = match (&scenario.leak, scenario.arrival_delay_s(idx)) {
                (Some(l), Some(delay)) => times
                    .iter()
                    .map(|t| -leak_drop_bar * gate(t - delay, l.start_s, l.stop_s))
                    .collect(),
                _ => zeros(),
            };
            leak.insert(ChannelKind::StaticPressure, drop);
        }

        let needs_dynamic =
            sensors.contains(SensorKind::Hydrophone) || sensors.contains(SensorKind::Accelerometer);
        let dynamic_bg = if needs_dynamic {
            let mut floor_rng = source_rng(scenario, id, Source::Floor);
            let mut bg = white(&mut floor_rng, n, scenario.noise.sensor_floor_kpa);
            let amp = scenario.pump_amplitude_kpa(idx);
            if amp > 0.0 {
                let mut pump_rng = source_rng(scenario, id, Source::Pump);
                let pump = pump_noise(&mut planner, &mut pump_rng, n, fs, scenario.noise.pump_corner_hz);
                bg.iter_mut().zip(&pump).for_each(|(b, p)| *b = amp * p + *b);
            }
            bg
        } else {
            Vec::new()
        };

        if sensors.contains(SensorKind::Hydrophone) {
            background.insert(ChannelKind::DynamicPressure, dynamic_bg.clone());
            leak.insert(ChannelKind::DynamicPressure, jet_here.clone().unwrap_or_else(zeros));
        }

        if sensors.contains(SensorKind::Accelerometer) {
            let mut rng = source_rng(scenario, id, Source::AccelFloor);
            let floor = white(&mut rng, n, scenario.noise.accel_floor_m_s2);
            let g = scenario.noise.accel_background_gain;
            background.insert(
                ChannelKind::Acceleration,
                dynamic_bg.iter().zip(&floor).map(|(d, f)| g * d + f).collect(),
            );
            let gl = scenario.noise.accel_leak_gain;
            leak.insert(
                ChannelKind::Acceleration,
                jet_here
                    .as_ref()
                    .map_or_else(zeros, |j| j.iter().map(|x| gl * x).collect()),
            );
        }

        if sensors.contains(SensorKind::Flowmeter) {
            let flow = if scenario.condition == PipelineCondition::Transferring {
                let mut rng = source_rng(scenario, id, Source::FlowNoise);
                let noise = white(&mut rng, n, scenario.noise.flow_noise_m3_h);
                flow_level.iter().zip(&noise).map(|(f, e)| f + e).collect()
            } else {
                flow_level.clone()
            };
            background.insert(ChannelKind::Flow, flow);
            leak.insert(ChannelKind::Flow, zeros());
        }

        out.push(StationParts {
            station_id: id.to_string(),
            background,
            leak,
        });
    }
    Ok(out)
}

/// Line-wide static pressure without sensor noise or leak drop.
fn line_static_pressure(scenario: &Scenario, times: &[f64]) -> Vec<f64> {
    let base = scenario.base_pressure_bar();
    let mut rng = source_rng(scenario, "", Source::Drift);
    let period_s = rng.random_range(40.0..120.0);
    let phase = rng.random_range(0.0..2.0 * PI);
    let transferring = scenario.condition == PipelineCondition::Transferring;
    times
        .iter()
        .map(|&t| {
            let mut p = base + scenario.noise.drift_bar * (2.0 * PI * t / period_s + phase).sin();
            if transferring {
                for dip in &scenario.dips {
                    p -= (base - dip.level_bar).max(0.0) * gate(t, dip.start_s, dip.stop_s);
                }
            }
            for d in &scenario.disturbances {
                p -= scenario.response.disturbance_drop_bar_per_m3_h
                    * d.flow_step_m3_h
                    * gate(t, d.start_s, d.stop_s);
            }
            p
        })
        .collect()
}

/// Line flow without meter noise.
fn line_flow(scenario: &Scenario, times: &[f64]) -> Vec<f64> {
    let base = match scenario.condition {
        PipelineCondition::Standstill => 0.0,
        PipelineCondition::Transferring => scenario.response.transfer_flow_m3_h,
    };
    times
        .iter()
        .map(|&t| {
            base + scenario
                .disturbances
                .iter()
                .map(|d| d.flow_step_m3_h * gate(t, d.start_s, d.stop_s))
                .sum::<f64>()
        })
        .collect()
}

/// Measured leak-band SNR at one station over `[from_s, to_s)`: band
/// energy of the isolated leak contribution over that of the background.
pub fn measured_snr_db(parts: &StationParts, sample_rate_hz: f64, band: Band, from_s: f64, to_s: f64) -> Result<f64> {
    let (Some(bg), Some(lk)) = (
        parts.background.get(&ChannelKind::DynamicPressure),
        parts.leak.get(&ChannelKind::DynamicPressure),
    ) else {
        return Err(Error::Missing(format!(
            "station {}: no dynamic pressure channel",
            parts.station_id
        )));
    };
    let lo = ((from_s * sample_rate_hz).round().max(0.0) as usize).min(bg.len());
    let hi = ((to_s * sample_rate_hz).round().max(0.0) as usize).min(bg.len());
    if hi <= lo {
        return Err(Error::invalid("empty SNR interval"));
    }
    let noise = crate::dsp::band_energy(&bg[lo..hi], sample_rate_hz, band)?;
    let signal = crate::dsp::band_energy(&lk[lo..hi], sample_rate_hz, band)?;
    Ok(10.0 * (signal / noise).log10())
}
