//! Operating-condition classification, polygon-domain leak detection,
//! hole-area classification and two-station localization.

use std::collections::BTreeMap;

use crate::dsp::{bandpass, estimate_delay, Band};
use crate::error::{Error, Result};
use crate::hydraulics::spl_invert_area;
use crate::model::{
    BatchVerdict, ChannelKind, DetectionReport, FeatureBatch, FluidSpec, Gating, LeakClass,
    Localization, OperatingCondition, SignalRecord, SplModel, StationLayout,
};

/// Flow below which the line counts as stopped, m³/h.
pub const STANDSTILL_MAX_FLOW_M3_H: f64 = 1.0;
/// Pressure at or below which a stopped line is at standstill, bar.
pub const STANDSTILL_MAX_PRESSURE_BAR: f64 = 0.7;
/// Flow above which the line is transferring, m³/h.
pub const TRANSFERRING_MIN_FLOW_M3_H: f64 = 100.0;

/// Classifies a batch from its mean flow and static pressure.
pub fn classify_condition(batch: &FeatureBatch) -> Result<OperatingCondition> {
    let flow = batch.flow_mean_m3_h.ok_or_else(|| {
        Error::Missing(format!(
            "station {} at {} s: no flow_mean_m3_h",
            batch.station_id, batch.window_start_s
        ))
    })?;
    let pressure = batch.static_pressure_mean_bar;
    Ok(
        if flow < STANDSTILL_MAX_FLOW_M3_H && pressure <= STANDSTILL_MAX_PRESSURE_BAR {
            OperatingCondition::Standstill
        } else if flow > TRANSFERRING_MIN_FLOW_M3_H {
            OperatingCondition::Transferring
        } else {
            OperatingCondition::Indeterminate
        },
    )
}

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

pub type Point = (f64, f64);

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull by monotone chain, counter-clockwise, without collinear
/// vertices. Returns fewer than 3 points for degenerate input.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in [&pts[..], &pts.iter().rev().copied().collect::<Vec<_>>()[..]] {
        let floor = hull.len();
        for &p in pass {
            while hull.len() >= floor + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn on_segment(p: Point, a: Point, b: Point) -> bool {
    cross(a, b, p) == 0.0
        && p.0 >= a.0.min(b.0)
        && p.0 <= a.0.max(b.0)
        && p.1 >= a.1.min(b.1)
        && p.1 <= a.1.max(b.1)
}

/// Point-in-polygon by crossing number; points on an edge or vertex count
/// as inside.
pub fn point_in_polygon(p: Point, polygon: &[Point]) -> bool {
    let n = polygon.len();
    let mut inside = false;
    for i in 0..n {
        let a = polygon[i];
        let b = polygon[(i + 1) % n];
        if on_segment(p, a, b) {
            return true;
        }
        if (a.1 > p.1) != (b.1 > p.1) {
            let x_cross = a.0 + (p.1 - a.1) * (b.0 - a.0) / (b.1 - a.1);
            if p.0 < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    on_segment(a, c, d) || on_segment(b, c, d) || on_segment(c, a, b) || on_segment(d, a, b)
}

fn is_simple(polygon: &[Point]) -> bool {
    let n = polygon.len();
    for i in 0..n {
        let (a, b) = (polygon[i], polygon[(i + 1) % n]);
        if a == b {
            return false;
        }
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_intersect(a, b, polygon[j], polygon[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Detection domain
// ---------------------------------------------------------------------------

/// Region of a two-feature cross plot that contains the leak batches.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionDomain {
    feature_x: String,
    feature_y: String,
    polygon: Vec<Point>,
    station_id: Option<String>,
}

impl DetectionDomain {
    pub fn new(feature_x: impl Into<String>, feature_y: impl Into<String>, polygon: Vec<Point>) -> Result<Self> {
        let feature_x = feature_x.into();
        let feature_y = feature_y.into();
        for f in [&feature_x, &feature_y] {
            if !FeatureBatch::is_known_feature(f) {
                return Err(Error::Missing(format!("unknown feature '{f}'")));
            }
        }
        if polygon.len() < 3 {
            return Err(Error::invalid(format!(
                "domain polygon needs at least 3 vertices, got {}",
                polygon.len()
            )));
        }
        if polygon.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::invalid("domain polygon has non-finite vertices"));
        }
        if !is_simple(&polygon) {
            return Err(Error::invalid("domain polygon is self-intersecting"));
        }
        Ok(DetectionDomain {
            feature_x,
            feature_y,
            polygon,
            station_id: None,
        })
    }

    /// Restricts the domain to one station's batches. Background levels
    /// differ between stations, so a domain is usually trained per station.
    pub fn for_station(mut self, station_id: impl Into<String>) -> Self {
        self.station_id = Some(station_id.into());
        self
    }

    pub fn station_id(&self) -> Option<&str> {
        self.station_id.as_deref()
    }

    /// True when the domain is meant for this batch's station.
    pub fn applies_to(&self, batch: &FeatureBatch) -> bool {
        self.station_id.as_ref().is_none_or(|s| *s == batch.station_id)
    }

    pub fn feature_x(&self) -> &str {
        &self.feature_x
    }

    pub fn feature_y(&self) -> &str {
        &self.feature_y
    }

    pub fn polygon(&self) -> &[Point] {
        &self.polygon
    }

    /// The batch's coordinates in this domain's feature plane.
    pub fn project(&self, batch: &FeatureBatch) -> Result<Point> {
        let get = |name: &str| {
            batch.feature(name).ok_or_else(|| {
                Error::Missing(format!(
                    "station {} at {} s has no '{name}'",
                    batch.station_id, batch.window_start_s
                ))
            })
        };
        Ok((get(&self.feature_x)?, get(&self.feature_y)?))
    }

    pub fn contains(&self, p: Point) -> bool {
        point_in_polygon(p, &self.polygon)
    }
}

/// Fraction of each feature's leak-point range by which the hull is grown.
pub const DOMAIN_MARGIN: f64 = 0.05;

fn is_leak(batch: &FeatureBatch) -> bool {
    matches!(batch.label, Some(c) if c != LeakClass::None)
}

/// Convex hull of the leak-labeled batches in the `(feature_x, feature_y)`
/// plane, grown outward by 5% of each feature's range.
///
/// The growth is the Minkowski sum with an axis-aligned box, so the result
/// stays convex and contains every training point.
pub fn train_domain(batches: &[FeatureBatch], feature_x: &str, feature_y: &str) -> Result<DetectionDomain> {
    let probe = DetectionDomain {
        feature_x: feature_x.to_string(),
        feature_y: feature_y.to_string(),
        polygon: Vec::new(),
        station_id: None,
    };
    for f in [feature_x, feature_y] {
        if !FeatureBatch::is_known_feature(f) {
            return Err(Error::Missing(format!("unknown feature '{f}'")));
        }
    }
    let points = batches
        .iter()
        .filter(|b| is_leak(b))
        .map(|b| probe.project(b))
        .collect::<Result<Vec<_>>>()?;
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "need at least 3 leak-labeled batches, got {}",
            points.len()
        )));
    }
    let hull = convex_hull(&points);
    if hull.len() < 3 {
        return Err(Error::invalid("leak points are collinear; no hull"));
    }
    let range = |sel: fn(&Point) -> f64| {
        let (lo, hi) = points
            .iter()
            .map(sel)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        hi - lo
    };
    let dx = DOMAIN_MARGIN * range(|p| p.0);
    let dy = DOMAIN_MARGIN * range(|p| p.1);
    let grown: Vec<Point> = hull
        .iter()
        .flat_map(|&(x, y)| [(x - dx, y - dy), (x + dx, y - dy), (x + dx, y + dy), (x - dx, y + dy)])
        .collect();
    DetectionDomain::new(feature_x, feature_y, convex_hull(&grown))
}

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

/// Hydraulic conditions under which a verdict is issued.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GatingThresholds {
    pub min_pressure_bar: f64,
    pub max_pressure_std_bar: f64,
}

impl Default for GatingThresholds {
    fn default() -> Self {
        GatingThresholds {
            min_pressure_bar: 3.0,
            max_pressure_std_bar: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeakVerdict {
    pub leak: bool,
    pub gating: Gating,
}

/// Gates the batch on static pressure, then tests its feature point
/// against the domain. Gated batches are never leaks.
pub fn detect_leak(batch: &FeatureBatch, domain: &DetectionDomain, thresholds: &GatingThresholds) -> Result<LeakVerdict> {
    let point = domain.project(batch)?;
    let gating = if batch.static_pressure_mean_bar < thresholds.min_pressure_bar {
        Gating::LowPressure
    } else if batch.static_pressure_std_bar > thresholds.max_pressure_std_bar {
        Gating::UnstablePressure
    } else {
        Gating::Ok
    };
    Ok(LeakVerdict {
        leak: gating == Gating::Ok && domain.contains(point),
        gating,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoleEstimate {
    pub estimated_area_mm2: f64,
    pub class: LeakClass,
}

/// Hole area from the batch's leak-band standard deviation, and its nearest
/// calibrated class.
pub fn classify_hole(batch: &FeatureBatch, delta_p_bar: f64, model: &SplModel) -> Result<HoleEstimate> {
    let area = spl_invert_area(batch.leak_band_std_kpa(), delta_p_bar, model)?;
    Ok(HoleEstimate {
        estimated_area_mm2: area,
        class: LeakClass::nearest(area),
    })
}

/// Settings for running detection over a feature table.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionSettings {
    pub gating: GatingThresholds,
    /// Pressure outside the pipe; Δp at the hole is the static pressure
    /// minus this.
    pub ambient_pressure_bar: f64,
}

impl Default for DetectionSettings {
    fn default() -> Self {
        DetectionSettings {
            gating: GatingThresholds::default(),
            ambient_pressure_bar: 1.0,
        }
    }
}

/// Verdict for every batch: condition, gating, detection and, for
/// detections, the hole estimate.
///
/// A batch that passes the pressure gates while the line is at standstill
/// is reported as `standstill_masked` and never as a leak.
pub fn evaluate(
    batches: &[FeatureBatch],
    domain: &DetectionDomain,
    model: &SplModel,
    settings: &DetectionSettings,
) -> Result<DetectionReport> {
    model.validate()?;
    let entries = batches
        .iter()
        .map(|b| {
            let condition = classify_condition(b).unwrap_or(OperatingCondition::Indeterminate);
            let mut verdict = detect_leak(b, domain, &settings.gating)?;
            if verdict.gating == Gating::Ok && condition == OperatingCondition::Standstill {
                verdict = LeakVerdict {
                    leak: false,
                    gating: Gating::StandstillMasked,
                };
            }
            let delta_p = b.static_pressure_mean_bar - settings.ambient_pressure_bar;
            let estimate = if verdict.leak && delta_p > 0.0 && b.leak_band_energy_kpa2 > 0.0 {
                Some(classify_hole(b, delta_p, model)?)
            } else {
                None
            };
            Ok(BatchVerdict {
                window_start_s: b.window_start_s,
                station_id: b.station_id.clone(),
                condition,
                gating: verdict.gating,
                leak_detected: verdict.leak,
                estimated_area_mm2: estimate.map(|e| e.estimated_area_mm2),
                class: estimate.map_or(LeakClass::None, |e| e.class),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DetectionReport {
        entries,
        localization: None,
    })
}

/// Verdicts tallied against ground-truth labels.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Score {
    /// Leak batches that passed the gates.
    pub leak_active_ok: usize,
    pub detected: usize,
    pub missed: usize,
    /// No-leak batches that passed the gates.
    pub no_leak_ok: usize,
    pub false_alarms: usize,
    pub gated: usize,
    /// Batches without a usable label.
    pub unknown: usize,
    /// Detected leak batches by (true class, estimated class).
    pub confusion: BTreeMap<(LeakClass, LeakClass), usize>,
}

impl Score {
    pub fn detection_rate(&self) -> Option<f64> {
        (self.leak_active_ok > 0).then(|| self.detected as f64 / self.leak_active_ok as f64)
    }

    /// Share of detected batches of `class` given the right class.
    pub fn class_accuracy(&self, class: LeakClass) -> Option<f64> {
        let (hit, total) = self
            .confusion
            .iter()
            .filter(|((truth, _), _)| *truth == class)
            .fold((0, 0), |(hit, total), ((_, est), n)| {
                (hit + if *est == class { *n } else { 0 }, total + n)
            });
        (total > 0).then(|| hit as f64 / total as f64)
    }

    pub fn merge(&mut self, other: &Score) {
        self.leak_active_ok += other.leak_active_ok;
        self.detected += other.detected;
        self.missed += other.missed;
        self.no_leak_ok += other.no_leak_ok;
        self.false_alarms += other.false_alarms;
        self.gated += other.gated;
        self.unknown += other.unknown;
        for (k, n) in &other.confusion {
            *self.confusion.entry(*k).or_default() += n;
        }
    }
}

/// Tallies verdicts against labels given in the same order.
pub fn score(entries: &[BatchVerdict], labels: &[Option<LeakClass>]) -> Score {
    let mut s = Score::default();
    for (v, label) in entries.iter().zip(labels) {
        if v.gating != Gating::Ok {
            s.gated += 1;
        }
        match label {
            None => s.unknown += 1,
            Some(LeakClass::None) => {
                if v.gating == Gating::Ok {
                    s.no_leak_ok += 1;
                }
                if v.leak_detected {
                    s.false_alarms += 1;
                }
            }
            Some(truth) => {
                if v.gating != Gating::Ok {
                    continue;
                }
                s.leak_active_ok += 1;
                if v.leak_detected {
                    s.detected += 1;
                    *s.confusion.entry((*truth, v.class)).or_default() += 1;
                } else {
                    s.missed += 1;
                }
            }
        }
    }
    s
}

// ---------------------------------------------------------------------------
// Localization
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizeOptions {
    pub band: Band,
    /// Minimum normalized correlation accepted as a coherent source.
    pub min_peak_correlation: f64,
}

impl Default for LocalizeOptions {
    fn default() -> Self {
        LocalizeOptions {
            band: Band::LEAK,
            min_peak_correlation: 0.1,
        }
    }
}

/// Locates a leak between two stations from the arrival-time difference of
/// the band-passed hydrophone signals.
///
/// The records may come in either order; the result refers to the pair in
/// increasing position. With `d1 < d2` and `τ` the arrival time at `d1`
/// minus that at `d2`, the position is `(d1 + d2)/2 + c·τ/2`, clamped to
/// `[d1, d2]`.
pub fn localize(
    rec_a: &SignalRecord,
    rec_b: &SignalRecord,
    layout: &StationLayout,
    fluid: &FluidSpec,
    options: &LocalizeOptions,
) -> Result<Localization> {
    let position = |r: &SignalRecord| {
        layout
            .station(r.station_id())
            .map(|s| s.position_m)
            .ok_or_else(|| Error::invalid(format!("station '{}' is not in the layout", r.station_id())))
    };
    let (pa, pb) = (position(rec_a)?, position(rec_b)?);
    if pa == pb {
        return Err(Error::invalid(format!(
            "stations {} and {} are not distinct",
            rec_a.station_id(),
            rec_b.station_id()
        )));
    }
    let (near, far, d1, d2) = if pa < pb {
        (rec_a, rec_b, pa, pb)
    } else {
        (rec_b, rec_a, pb, pa)
    };
    let fs = near.sample_rate_hz();
    if far.sample_rate_hz() != fs {
        return Err(Error::invalid(format!(
            "sample rates differ: {fs} Hz and {} Hz",
            far.sample_rate_hz()
        )));
    }
    if near.start_time_s() != far.start_time_s() || near.len() != far.len() {
        return Err(Error::invalid("records do not cover the same interval"));
    }
    let hydrophone = |r: &SignalRecord| -> Result<Vec<f64>> {
        let raw = r.channel(ChannelKind::DynamicPressure).ok_or_else(|| {
            Error::Missing(format!("station {}: no dynamic pressure channel", r.station_id()))
        })?;
        let x: Vec<f64> = raw.iter().map(|&v| f64::from(v)).collect();
        bandpass(&x, fs, options.band)
    };
    let a = hydrophone(near)?;
    let b = hydrophone(far)?;

    let c = fluid.sound_speed_m_s;
    let max_lag_s = (d2 - d1) / c + 2.0 / fs;
    let est = estimate_delay(&a, &b, fs, max_lag_s)?;
    if !(est.peak_correlation >= options.min_peak_correlation) {
        return Err(Error::NoCoherentSource {
            peak: est.peak_correlation,
            floor: options.min_peak_correlation,
        });
    }
    let tau = -est.delay_s;
    let raw = 0.5 * (d1 + d2) + 0.5 * c * tau;
    let position_m = raw.clamp(d1, d2);
    Ok(Localization {
        position_m,
        delay_s: tau,
        peak_correlation: est.peak_correlation,
        station_pair: (near.station_id().to_string(), far.station_id().to_string()),
        clamped: position_m != raw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn batch(pressure: f64, flow: Option<f64>) -> FeatureBatch {
        FeatureBatch {
            station_id: "D".into(),
            window_start_s: 0.0,
            window_len_s: 1.0,
            static_pressure_mean_bar: pressure,
            static_pressure_std_bar: 0.01,
            dyn_pressure_std_kpa: 1.0,
            dyn_pressure_max_kpa: 3.0,
            leak_band_energy_kpa2: 0.5,
            leak_band_level_db: crate::model::energy_to_db(0.5),
            accel_std_m_s2: None,
            flow_mean_m3_h: flow,
            label: None,
        }
    }

    fn at(x: f64, y: f64, label: LeakClass) -> FeatureBatch {
        let mut b = batch(x, Some(150.0));
        b.leak_band_level_db = y;
        b.label = Some(label);
        b
    }

    #[test]
    fn condition_examples() {
        use OperatingCondition::*;
        assert_eq!(classify_condition(&batch(0.5, Some(0.0))).unwrap(), Standstill);
        assert_eq!(classify_condition(&batch(4.0, Some(150.0))).unwrap(), Transferring);
        assert_eq!(classify_condition(&batch(2.0, Some(50.0))).unwrap(), Indeterminate);
        assert_eq!(classify_condition(&batch(0.9, Some(0.0))).unwrap(), Indeterminate);
        assert!(classify_condition(&batch(4.0, None)).is_err());
    }

    #[test]
    fn hull_absorbs_interior_point() {
        let hull = convex_hull(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.2, 0.2)]);
        assert_eq!(hull.len(), 3);
        assert!(!hull.contains(&(0.2, 0.2)));
    }

    #[test]
    fn hull_drops_collinear_points() {
        let hull = convex_hull(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (1.0, 1.0)]);
        assert_eq!(hull.len(), 3);
        assert_eq!(convex_hull(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]).len(), 2);
    }

    #[test]
    fn polygon_boundary_is_inside() {
        let square = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        assert!(point_in_polygon((0.5, 0.5), &square));
        assert!(point_in_polygon((0.0, 0.0), &square));
        assert!(point_in_polygon((1.0, 0.5), &square));
        assert!(point_in_polygon((0.5, 1.0), &square));
        assert!(!point_in_polygon((1.0001, 0.5), &square));
        assert!(!point_in_polygon((-0.5, 1.0), &square));
    }

    #[test]
    fn domain_rejects_bad_polygons() {
        let bowtie = vec![(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)];
        assert!(DetectionDomain::new("static_pressure_mean_bar", "leak_band_level_db", bowtie).is_err());
        let two = vec![(0.0, 0.0), (1.0, 1.0)];
        assert!(DetectionDomain::new("static_pressure_mean_bar", "leak_band_level_db", two).is_err());
        let tri = vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)];
        assert!(DetectionDomain::new("pressure", "leak_band_level_db", tri.clone()).is_err());
        assert!(DetectionDomain::new("static_pressure_mean_bar", "leak_band_level_db", tri).is_ok());
    }

    #[test]
    fn train_triangle_and_soundness() {
        let pts = [at(4.0, -10.0, LeakClass::Small), at(5.0, -5.0, LeakClass::Large), at(4.5, 0.0, LeakClass::Medium)];
        let domain = train_domain(&pts, "static_pressure_mean_bar", "leak_band_level_db").unwrap();
        for b in &pts {
            assert!(domain.contains(domain.project(b).unwrap()));
        }
        // 5% of the x range (1 bar) below the leftmost point is still inside.
        assert!(domain.contains((3.95, -10.0)));
        assert!(!domain.contains((3.9, -10.0)));
    }

    #[test]
    fn train_ignores_unlabeled_and_no_leak() {
        let mut pts = vec![at(4.0, -10.0, LeakClass::Small), at(5.0, -5.0, LeakClass::Large)];
        pts.push(at(9.0, 9.0, LeakClass::None));
        let mut unknown = at(7.0, 7.0, LeakClass::Small);
        unknown.label = None;
        pts.push(unknown);
        assert!(train_domain(&pts, "static_pressure_mean_bar", "leak_band_level_db").is_err());
    }

    #[test]
    fn train_rejects_collinear() {
        let pts = [at(4.0, 1.0, LeakClass::Small), at(5.0, 2.0, LeakClass::Small), at(6.0, 3.0, LeakClass::Large)];
        assert!(train_domain(&pts, "static_pressure_mean_bar", "leak_band_level_db").is_err());
    }

    fn unit_domain() -> DetectionDomain {
        DetectionDomain::new(
            "static_pressure_mean_bar",
            "leak_band_level_db",
            vec![(3.0, -10.0), (6.0, -10.0), (6.0, 10.0), (3.0, 10.0)],
        )
        .unwrap()
    }

    #[test]
    fn gating_dominates() {
        let domain = unit_domain();
        let g = GatingThresholds::default();
        let low = at(0.8, 0.0, LeakClass::Large);
        let v = detect_leak(&low, &domain, &g).unwrap();
        assert_eq!(v, LeakVerdict { leak: false, gating: Gating::LowPressure });

        let mut shaky = at(4.0, 0.0, LeakClass::Large);
        shaky.static_pressure_std_bar = 0.3;
        assert_eq!(detect_leak(&shaky, &domain, &g).unwrap().gating, Gating::UnstablePressure);
        assert!(!detect_leak(&shaky, &domain, &g).unwrap().leak);

        let inside = at(4.0, 0.0, LeakClass::Large);
        assert!(detect_leak(&inside, &domain, &g).unwrap().leak);
        let vertex = at(3.0, 10.0, LeakClass::Large);
        assert!(detect_leak(&vertex, &domain, &g).unwrap().leak);
        let outside = at(4.0, 11.0, LeakClass::Large);
        assert!(!detect_leak(&outside, &domain, &g).unwrap().leak);
    }

    #[test]
    fn detect_requires_domain_features() {
        let domain = DetectionDomain::new(
            "accel_std_m_s2",
            "leak_band_level_db",
            vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)],
        )
        .unwrap();
        assert!(matches!(
            detect_leak(&batch(4.0, None), &domain, &GatingThresholds::default()),
            Err(Error::Missing(_))
        ));
    }

    #[test]
    fn classify_hole_examples() {
        let model = SplModel::new(1.5, 1e-3).unwrap();
        let for_area = |area: f64| {
            let spl = crate::hydraulics::spl_forward(4.0, area, &model).unwrap();
            let mut b = batch(5.0, Some(150.0));
            b.leak_band_energy_kpa2 = spl * spl;
            classify_hole(&b, 4.0, &model).unwrap()
        };
        let est = for_area(12.0);
        assert!((est.estimated_area_mm2 - 12.0).abs() < 1e-9);
        assert_eq!(est.class, LeakClass::Medium);
        assert_eq!(for_area(5.06).class, LeakClass::Small);
        assert_eq!(for_area(31.65).class, LeakClass::Large);
        let mut b = batch(5.0, Some(150.0));
        b.leak_band_energy_kpa2 = 0.1;
        assert!(classify_hole(&b, 0.0, &model).is_err());
    }

    #[test]
    fn evaluate_masks_standstill_and_reports_area_only_on_detection() {
        let domain = DetectionDomain::new(
            "static_pressure_mean_bar",
            "leak_band_level_db",
            vec![(0.0, -10.0), (6.0, -10.0), (6.0, 10.0), (0.0, 10.0)],
        )
        .unwrap();
        let settings = DetectionSettings {
            gating: GatingThresholds {
                min_pressure_bar: 0.0,
                max_pressure_std_bar: 0.2,
            },
            ..DetectionSettings::default()
        };
        let model = SplModel::new(1.5, 1e-3).unwrap();
        let mut still = at(0.5, 0.0, LeakClass::None);
        still.flow_mean_m3_h = Some(0.0);
        let live = at(4.0, 0.0, LeakClass::Large);
        let quiet = at(4.0, 20.0, LeakClass::None);
        let report = evaluate(&[still, live, quiet], &domain, &model, &settings).unwrap();
        let e = &report.entries;
        assert_eq!(e[0].gating, Gating::StandstillMasked);
        assert!(!e[0].leak_detected && e[0].estimated_area_mm2.is_none());
        assert!(e[1].leak_detected && e[1].estimated_area_mm2.is_some());
        assert!(!e[2].leak_detected && e[2].estimated_area_mm2.is_none());
        assert_eq!(e[2].class, LeakClass::None);

        let labels = [Some(LeakClass::None), Some(LeakClass::Large), None];
        let sc = score(&report.entries, &labels);
        assert_eq!((sc.gated, sc.leak_active_ok, sc.detected, sc.unknown), (1, 1, 1, 1));
        assert_eq!((sc.no_leak_ok, sc.false_alarms), (0, 0));
        assert_eq!(sc.detection_rate(), Some(1.0));
        let est = e[1].class;
        assert_eq!(sc.confusion.get(&(LeakClass::Large, est)), Some(&1));
    }
}
