//! Domain types shared by every stage of the pipeline.
//!
//! Units are fixed per field and spelled out in the field name: static
//! pressure in bar, dynamic pressure in kPa, hole areas in mm², flow in m³/h.
//! Conversions happen inside the operations that need them, never in stored
//! data.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Discharge coefficient of a sharp-edged orifice.
pub const DEFAULT_DISCHARGE_COEFFICIENT: f64 = 0.62;

/// Inner diameter of a 16" ID line, in meters.
pub const SIXTEEN_INCH_ID_M: f64 = 0.4064;

/// Lowest sample rate able to carry jet noise up to 4 kHz.
pub const MIN_SAMPLE_RATE_HZ: f64 = 8000.0;

/// Longest station identifier that fits in a signal-file header.
pub const MAX_STATION_ID_LEN: usize = 16;

// ---------------------------------------------------------------------------
// Stations
// ---------------------------------------------------------------------------

/// Sensor fitted to a measurement station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SensorKind {
    StaticPressure,
    Hydrophone,
    Accelerometer,
    Flowmeter,
}

impl SensorKind {
    pub const ALL: [SensorKind; 4] = [
        SensorKind::StaticPressure,
        SensorKind::Hydrophone,
        SensorKind::Accelerometer,
        SensorKind::Flowmeter,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SensorKind::StaticPressure => "static_pressure",
            SensorKind::Hydrophone => "hydrophone",
            SensorKind::Accelerometer => "accelerometer",
            SensorKind::Flowmeter => "flowmeter",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }

    /// Channel recorded by this sensor.
    pub fn channel(self) -> ChannelKind {
        match self {
            SensorKind::StaticPressure => ChannelKind::StaticPressure,
            SensorKind::Hydrophone => ChannelKind::DynamicPressure,
            SensorKind::Accelerometer => ChannelKind::Acceleration,
            SensorKind::Flowmeter => ChannelKind::Flow,
        }
    }
}

impl FromStr for SensorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SensorKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown sensor kind '{s}'")))
    }
}

/// Set of sensors installed at one station.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct SensorSet(u8);

impl SensorSet {
    pub const fn empty() -> Self {
        SensorSet(0)
    }

    pub fn all() -> Self {
        SensorKind::ALL.into_iter().collect()
    }

    pub fn with(mut self, kind: SensorKind) -> Self {
        self.0 |= kind.bit();
        self
    }

    pub fn contains(self, kind: SensorKind) -> bool {
        self.0 & kind.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = SensorKind> {
        SensorKind::ALL.into_iter().filter(move |k| self.contains(*k))
    }
}

impl FromIterator<SensorKind> for SensorSet {
    fn from_iter<I: IntoIterator<Item = SensorKind>>(iter: I) -> Self {
        iter.into_iter().fold(SensorSet::empty(), SensorSet::with)
    }
}

impl fmt::Display for SensorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.iter().map(SensorKind::as_str).collect();
        f.write_str(&names.join("|"))
    }
}

impl FromStr for SensorSet {
    type Err = Error;

    /// Parses `static_pressure|hydrophone|...`.
    fn from_str(s: &str) -> Result<Self> {
        s.split('|')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(SensorKind::from_str)
            .collect()
    }
}

/// One measurement unit on the line.
#[derive(Debug, Clone, PartialEq)]
pub struct Station {
    pub id: String,
    /// Distance from the reference end of the line.
    pub position_m: f64,
    pub sensors: SensorSet,
}

impl Station {
    pub fn new(id: impl Into<String>, position_m: f64, sensors: SensorSet) -> Self {
        Station {
            id: id.into(),
            position_m,
            sensors,
        }
    }
}

/// Ordered set of stations along a pipeline, plus the pipe bore.
#[derive(Debug, Clone, PartialEq)]
pub struct StationLayout {
    stations: Vec<Station>,
    pipe_inner_diameter_m: f64,
}

impl StationLayout {
    /// Builds a layout, rejecting it if any invariant fails.
    pub fn new(stations: Vec<Station>, pipe_inner_diameter_m: f64) -> Result<Self> {
        validate_layout(StationLayout {
            stations,
            pipe_inner_diameter_m,
        })
    }

    /// The six-station fuel-deposit line: stations A to F over 341 m of
    /// 16" ID pipe. Every station carries static pressure, hydrophone and
    /// accelerometer; flowmeters sit at B and E.
    pub fn reference_line() -> Self {
        let base = SensorSet::empty()
            .with(SensorKind::StaticPressure)
            .with(SensorKind::Hydrophone)
            .with(SensorKind::Accelerometer);
        let flow = base.with(SensorKind::Flowmeter);
        let stations = vec![
            Station::new("A", 0.0, base),
            Station::new("B", 10.0, flow),
            Station::new("C", 63.0, base),
            Station::new("D", 294.0, base),
            Station::new("E", 337.0, flow),
            Station::new("F", 341.0, base),
        ];
        StationLayout::new(stations, SIXTEEN_INCH_ID_M).expect("reference layout is valid")
    }

    pub fn stations(&self) -> &[Station] {
        &self.stations
    }

    pub fn pipe_inner_diameter_m(&self) -> f64 {
        self.pipe_inner_diameter_m
    }

    pub fn station(&self, id: &str) -> Option<&Station> {
        self.stations.iter().find(|s| s.id == id)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.stations.iter().position(|s| s.id == id)
    }

    /// Position of the last station.
    pub fn line_length_m(&self) -> f64 {
        self.stations.last().map_or(0.0, |s| s.position_m)
    }

    /// Nearest station (by position) carrying `kind`, ties to the lower index.
    pub fn nearest_with(&self, position_m: f64, kind: SensorKind) -> Option<&Station> {
        self.stations
            .iter()
            .filter(|s| s.sensors.contains(kind))
            .fold(None, |best: Option<&Station>, s| match best {
                Some(b) if (b.position_m - position_m).abs() <= (s.position_m - position_m).abs() => {
                    Some(b)
                }
                _ => Some(s),
            })
    }
}

/// Checks every layout invariant and hands the layout back unchanged.
///
/// Reports the first violation found: fewer than two stations, a first
/// station away from 0 m, positions not strictly increasing, a bad pipe
/// diameter, or an unusable station identifier.
pub fn validate_layout(layout: StationLayout) -> Result<StationLayout> {
    let stations = &layout.stations;
    if stations.len() < 2 {
        return Err(Error::InvalidLayout(format!(
            "need at least 2 stations, got {}",
            stations.len()
        )));
    }
    if !(layout.pipe_inner_diameter_m > 0.0) || !layout.pipe_inner_diameter_m.is_finite() {
        return Err(Error::InvalidLayout(format!(
            "pipe inner diameter must be > 0, got {}",
            layout.pipe_inner_diameter_m
        )));
    }
    if stations[0].position_m != 0.0 {
        return Err(Error::InvalidLayout(format!(
            "first station must sit at 0 m, got {}",
            stations[0].position_m
        )));
    }
    for pair in stations.windows(2) {
        if !(pair[1].position_m > pair[0].position_m) || !pair[1].position_m.is_finite() {
            return Err(Error::InvalidLayout(format!(
                "positions must be strictly increasing: {} ({} m) then {} ({} m)",
                pair[0].id, pair[0].position_m, pair[1].id, pair[1].position_m
            )));
        }
    }
    for (i, s) in stations.iter().enumerate() {
        check_station_id(&s.id).map_err(Error::InvalidLayout)?;
        if stations[..i].iter().any(|o| o.id == s.id) {
            return Err(Error::InvalidLayout(format!("duplicate station id '{}'", s.id)));
        }
    }
    Ok(layout)
}

pub(crate) fn check_station_id(id: &str) -> std::result::Result<(), String> {
    if id.is_empty() || id.len() > MAX_STATION_ID_LEN {
        return Err(format!(
            "station id '{id}' must be 1..={MAX_STATION_ID_LEN} bytes"
        ));
    }
    if !id
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
    {
        return Err(format!(
            "station id '{id}' may only contain ASCII letters, digits, '_' and '-'"
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Nozzles and fluid
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NozzleShape {
    Circular,
    Slot,
}

impl NozzleShape {
    pub fn as_str(self) -> &'static str {
        match self {
            NozzleShape::Circular => "circular",
            NozzleShape::Slot => "slot",
        }
    }
}

impl FromStr for NozzleShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circular" => Ok(NozzleShape::Circular),
            "slot" => Ok(NozzleShape::Slot),
            other => Err(Error::invalid(format!("unknown nozzle shape '{other}'"))),
        }
    }
}

/// Calibrated hole through which the jet escapes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NozzleSpec {
    pub area_mm2: f64,
    pub shape: NozzleShape,
    pub orifice_diameter_m: Option<f64>,
    pub discharge_coefficient: f64,
}

impl NozzleSpec {
    pub fn new(
        area_mm2: f64,
        shape: NozzleShape,
        orifice_diameter_m: Option<f64>,
        discharge_coefficient: f64,
    ) -> Result<Self> {
        let nozzle = NozzleSpec {
            area_mm2,
            shape,
            orifice_diameter_m,
            discharge_coefficient,
        };
        nozzle.validate()?;
        Ok(nozzle)
    }

    /// Circular hole of the given area; the diameter is derived.
    pub fn circular(area_mm2: f64) -> Result<Self> {
        let d_m = 2.0 * (area_mm2 / std::f64::consts::PI).sqrt() * 1e-3;
        NozzleSpec::new(
            area_mm2,
            NozzleShape::Circular,
            Some(d_m),
            DEFAULT_DISCHARGE_COEFFICIENT,
        )
    }

    pub fn slot(area_mm2: f64) -> Result<Self> {
        NozzleSpec::new(area_mm2, NozzleShape::Slot, None, DEFAULT_DISCHARGE_COEFFICIENT)
    }

    pub fn with_discharge_coefficient(self, c_d: f64) -> Result<Self> {
        NozzleSpec::new(self.area_mm2, self.shape, self.orifice_diameter_m, c_d)
    }

    pub fn area_m2(&self) -> f64 {
        self.area_mm2 * 1e-6
    }

    fn validate(&self) -> Result<()> {
        if !(self.area_mm2 > 0.0) || !self.area_mm2.is_finite() {
            return Err(Error::invalid(format!(
                "nozzle area must be > 0 mm², got {}",
                self.area_mm2
            )));
        }
        if !(self.discharge_coefficient > 0.0 && self.discharge_coefficient <= 1.0) {
            return Err(Error::invalid(format!(
                "discharge coefficient must lie in (0, 1], got {}",
                self.discharge_coefficient
            )));
        }
        if let (NozzleShape::Circular, Some(d)) = (self.shape, self.orifice_diameter_m) {
            let geometric = std::f64::consts::PI * (d * 1e3 / 2.0).powi(2);
            if ((geometric - self.area_mm2) / self.area_mm2).abs() > 0.005 {
                return Err(Error::invalid(format!(
                    "circular nozzle of diameter {d} m has area {geometric:.4} mm², \
                     not {} mm²",
                    self.area_mm2
                )));
            }
        }
        Ok(())
    }
}

/// Properties of the transported liquid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidSpec {
    pub density_kg_m3: f64,
    /// Propagation speed of pressure transients in the fluid column.
    pub sound_speed_m_s: f64,
}

impl FluidSpec {
    pub fn new(density_kg_m3: f64, sound_speed_m_s: f64) -> Result<Self> {
        if !(density_kg_m3 > 0.0) || !density_kg_m3.is_finite() {
            return Err(Error::invalid(format!(
                "fluid density must be > 0, got {density_kg_m3}"
            )));
        }
        if !(sound_speed_m_s > 0.0) || !sound_speed_m_s.is_finite() {
            return Err(Error::invalid(format!(
                "sound speed must be > 0, got {sound_speed_m_s}"
            )));
        }
        Ok(FluidSpec {
            density_kg_m3,
            sound_speed_m_s,
        })
    }

    /// Light fuel oil.
    pub fn fuel() -> Self {
        FluidSpec {
            density_kg_m3: 800.0,
            sound_speed_m_s: 1200.0,
        }
    }
}

// ---------------------------------------------------------------------------
// Leak classes
// ---------------------------------------------------------------------------

/// Hole-size class. Ordered by area, with `None` (no leak) first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LeakClass {
    None,
    Small,
    Medium,
    Large,
}

impl LeakClass {
    /// The three calibrated hole sizes, smallest first.
    pub const HOLES: [LeakClass; 3] = [LeakClass::Small, LeakClass::Medium, LeakClass::Large];

    pub fn nominal_area_mm2(self) -> Option<f64> {
        match self {
            LeakClass::None => None,
            LeakClass::Small => Some(5.06),
            LeakClass::Medium => Some(12.56),
            LeakClass::Large => Some(31.65),
        }
    }

    /// The class whose nominal area is exactly `area_mm2`.
    pub fn from_nominal_area(area_mm2: f64) -> Result<Self> {
        LeakClass::HOLES
            .into_iter()
            .find(|c| c.nominal_area_mm2() == Some(area_mm2))
            .ok_or_else(|| {
                Error::invalid(format!(
                    "{area_mm2} mm² is not a nominal hole area (5.06, 12.56, 31.65)"
                ))
            })
    }

    /// Nearest hole class in log-area distance; equidistant areas go to the
    /// smaller class.
    pub fn nearest(area_mm2: f64) -> Self {
        let log_a = area_mm2.ln();
        let mut best = LeakClass::Small;
        let mut best_dist = f64::INFINITY;
        for class in LeakClass::HOLES {
            let nominal = class.nominal_area_mm2().unwrap_or(1.0);
            let dist = (log_a - nominal.ln()).abs();
            // Slack absorbs rounding in the geometric-mean tie.
            if dist < best_dist - 1e-12 {
                best = class;
                best_dist = dist;
            }
        }
        best
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LeakClass::None => "none",
            LeakClass::Small => "small",
            LeakClass::Medium => "medium",
            LeakClass::Large => "large",
        }
    }
}

impl fmt::Display for LeakClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LeakClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(LeakClass::None),
            "small" => Ok(LeakClass::Small),
            "medium" => Ok(LeakClass::Medium),
            "large" => Ok(LeakClass::Large),
            other => Err(Error::invalid(format!("unknown leak class '{other}'"))),
        }
    }
}

// ---------------------------------------------------------------------------
// Signals
// ---------------------------------------------------------------------------

/// Physical quantity carried by a channel. Units are fixed per kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChannelKind {
    /// Absolute static pressure, bar.
    StaticPressure,
    /// Hydrophone dynamic pressure, kPa.
    DynamicPressure,
    /// Pipe-shell acceleration, m/s².
    Acceleration,
    /// Volumetric flow, m³/h.
    Flow,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 4] = [
        ChannelKind::StaticPressure,
        ChannelKind::DynamicPressure,
        ChannelKind::Acceleration,
        ChannelKind::Flow,
    ];

    /// Code stored in signal-file headers.
    pub fn code(self) -> u8 {
        match self {
            ChannelKind::StaticPressure => 1,
            ChannelKind::DynamicPressure => 2,
            ChannelKind::Acceleration => 3,
            ChannelKind::Flow => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        ChannelKind::ALL.into_iter().find(|k| k.code() == code)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::StaticPressure => "static_pressure_bar",
            ChannelKind::DynamicPressure => "dynamic_pressure_kpa",
            ChannelKind::Acceleration => "acceleration_m_s2",
            ChannelKind::Flow => "flow_m3_h",
        }
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChannelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown channel kind '{s}'")))
    }
}

/// Uniformly sampled multi-channel recording from one station.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalRecord {
    station_id: String,
    sample_rate_hz: f64,
    start_time_s: f64,
    channels: BTreeMap<ChannelKind, Vec<f32>>,
}

impl SignalRecord {
    pub fn new(
        station_id: impl Into<String>,
        sample_rate_hz: f64,
        start_time_s: f64,
        channels: BTreeMap<ChannelKind, Vec<f32>>,
    ) -> Result<Self> {
        let station_id = station_id.into();
        check_station_id(&station_id).map_err(Error::InvalidInput)?;
        if !(sample_rate_hz >= MIN_SAMPLE_RATE_HZ) || !sample_rate_hz.is_finite() {
            return Err(Error::invalid(format!(
                "sample rate {sample_rate_hz} Hz is below {MIN_SAMPLE_RATE_HZ} Hz"
            )));
        }
        if !start_time_s.is_finite() {
            return Err(Error::invalid("start time must be finite"));
        }
        let mut lengths = channels.values().map(Vec::len);
        if let Some(first) = lengths.next() {
            if lengths.any(|l| l != first) {
                return Err(Error::invalid(format!(
                    "station {station_id}: channels have different lengths"
                )));
            }
        }
        Ok(SignalRecord {
            station_id,
            sample_rate_hz,
            start_time_s,
            channels,
        })
    }

    pub fn station_id(&self) -> &str {
        &self.station_id
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn start_time_s(&self) -> f64 {
        self.start_time_s
    }

    pub fn channels(&self) -> &BTreeMap<ChannelKind, Vec<f32>> {
        &self.channels
    }

    pub fn channel(&self, kind: ChannelKind) -> Option<&[f32]> {
        self.channels.get(&kind).map(Vec::as_slice)
    }

    /// Samples per channel (0 for a record with no channels).
    pub fn len(&self) -> usize {
        self.channels.values().next().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate_hz
    }

    /// Same record with every channel multiplied by `gain`.
    pub fn scaled(&self, gain: f32) -> SignalRecord {
        let channels = self
            .channels
            .iter()
            .map(|(k, v)| (*k, v.iter().map(|x| x * gain).collect()))
            .collect();
        SignalRecord {
            channels,
            ..self.clone()
        }
    }
}

// ---------------------------------------------------------------------------
// Features
// ---------------------------------------------------------------------------

/// Statistics of one analysis window at one station.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBatch {
    pub station_id: String,
    pub window_start_s: f64,
    pub window_len_s: f64,
    pub static_pressure_mean_bar: f64,
    pub static_pressure_std_bar: f64,
    pub dyn_pressure_std_kpa: f64,
    pub dyn_pressure_max_kpa: f64,
    /// Mean-square dynamic pressure inside the leak band.
    pub leak_band_energy_kpa2: f64,
    /// `leak_band_energy_kpa2` on a decibel scale (re 1 kPa²).
    pub leak_band_level_db: f64,
    pub accel_std_m_s2: Option<f64>,
    pub flow_mean_m3_h: Option<f64>,
    /// Ground truth when known; `None` means unknown.
    pub label: Option<LeakClass>,
}

impl FeatureBatch {
    /// Numeric feature columns addressable by name, in table order.
    pub const NUMERIC_FEATURES: [&'static str; 9] = [
        "static_pressure_mean_bar",
        "static_pressure_std_bar",
        "dyn_pressure_std_kpa",
        "dyn_pressure_max_kpa",
        "leak_band_energy_kpa2",
        "leak_band_level_db",
        "accel_std_m_s2",
        "flow_mean_m3_h",
        "window_start_s",
    ];

    /// Looks up a numeric feature by its column name.
    pub fn feature(&self, name: &str) -> Option<f64> {
        match name {
            "window_start_s" => Some(self.window_start_s),
            "static_pressure_mean_bar" => Some(self.static_pressure_mean_bar),
            "static_pressure_std_bar" => Some(self.static_pressure_std_bar),
            "dyn_pressure_std_kpa" => Some(self.dyn_pressure_std_kpa),
            "dyn_pressure_max_kpa" => Some(self.dyn_pressure_max_kpa),
            "leak_band_energy_kpa2" => Some(self.leak_band_energy_kpa2),
            "leak_band_level_db" => Some(self.leak_band_level_db),
            "accel_std_m_s2" => self.accel_std_m_s2,
            "flow_mean_m3_h" => self.flow_mean_m3_h,
            _ => None,
        }
    }

    pub fn is_known_feature(name: &str) -> bool {
        Self::NUMERIC_FEATURES.contains(&name)
    }

    /// Standard deviation of the band-passed dynamic pressure, kPa.
    pub fn leak_band_std_kpa(&self) -> f64 {
        self.leak_band_energy_kpa2.max(0.0).sqrt()
    }
}

/// Decibel level of a mean-square value, floored to stay finite.
pub fn energy_to_db(energy: f64) -> f64 {
    10.0 * energy.max(1e-30).log10()
}

// ---------------------------------------------------------------------------
// SPL model
// ---------------------------------------------------------------------------

/// Power law `SPL = Δp · A^n · k` with SPL in kPa, Δp in bar and A in mm².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplModel {
    pub n: f64,
    /// kPa / (bar · mm^n)
    pub k: f64,
    /// RMS of the log-domain fit residuals.
    pub fit_residual_rms: f64,
    pub sample_count: usize,
}

impl SplModel {
    pub const MIN_EXPONENT: f64 = 1.0;
    pub const MAX_EXPONENT: f64 = 3.0;

    /// A model given directly rather than fitted.
    pub fn new(n: f64, k: f64) -> Result<Self> {
        let model = SplModel {
            n,
            k,
            fit_residual_rms: 0.0,
            sample_count: 0,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0) || !self.k.is_finite() {
            return Err(Error::invalid(format!("SPL scale k must be > 0, got {}", self.k)));
        }
        if !(Self::MIN_EXPONENT..=Self::MAX_EXPONENT).contains(&self.n) {
            return Err(Error::ExponentOutOfEnvelope { n: self.n });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Detection results
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatingCondition {
    Standstill,
    Transferring,
    Indeterminate,
}

impl OperatingCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            OperatingCondition::Standstill => "standstill",
            OperatingCondition::Transferring => "transferring",
            OperatingCondition::Indeterminate => "indeterminate",
        }
    }
}

impl FromStr for OperatingCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standstill" => Ok(OperatingCondition::Standstill),
            "transferring" => Ok(OperatingCondition::Transferring),
            "indeterminate" => Ok(OperatingCondition::Indeterminate),
            other => Err(Error::invalid(format!("unknown operating condition '{other}'"))),
        }
    }
}

/// Why a verdict was or was not issued for a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gating {
    Ok,
    LowPressure,
    UnstablePressure,
    StandstillMasked,
}

impl Gating {
    pub fn as_str(self) -> &'static str {
        match self {
            Gating::Ok => "ok",
            Gating::LowPressure => "low_pressure",
            Gating::UnstablePressure => "unstable_pressure",
            Gating::StandstillMasked => "standstill_masked",
        }
    }
}

impl FromStr for Gating {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(Gating::Ok),
            "low_pressure" => Ok(Gating::LowPressure),
            "unstable_pressure" => Ok(Gating::UnstablePressure),
            "standstill_masked" => Ok(Gating::StandstillMasked),
            other => Err(Error::invalid(format!("unknown gating '{other}'"))),
        }
    }
}

/// Verdict for one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchVerdict {
    pub window_start_s: f64,
    pub station_id: String,
    pub condition: OperatingCondition,
    pub gating: Gating,
    pub leak_detected: bool,
    /// Present only when `leak_detected`.
    pub estimated_area_mm2: Option<f64>,
    pub class: LeakClass,
}

/// Two-station cross-correlation fix.
#[derive(Debug, Clone, PartialEq)]
pub struct Localization {
    pub position_m: f64,
    /// Arrival time at the first station minus arrival at the second.
    pub delay_s: f64,
    pub peak_correlation: f64,
    pub station_pair: (String, String),
    /// The raw estimate fell outside the station span and was clamped.
    pub clamped: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DetectionReport {
    pub entries: Vec<BatchVerdict>,
    pub localization: Option<Localization>,
}
