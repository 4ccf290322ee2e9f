//! Orifice hydraulics and the jet-noise SPL power law.
//!
//! The orifice relations are in SI units. The SPL law keeps the mixed
//! units it is calibrated in: SPL in kPa, Δp in bar, hole area in mm².

use crate::error::{Error, Result};
use crate::model::SplModel;

/// Jet velocity `sqrt(2 ΔP / ρ)` in m/s.
pub fn jet_velocity(delta_p_pa: f64, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::invalid(format!("density must be > 0, got {rho}")));
    }
    if !(delta_p_pa >= 0.0) {
        return Err(Error::invalid(format!(
            "pressure drop must be >= 0, got {delta_p_pa}"
        )));
    }
    Ok((2.0 * delta_p_pa / rho).sqrt())
}

/// Discharge coefficient computed from a measured flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DischargeCoefficient {
    pub value: f64,
    /// False when the value exceeds 1, which no real orifice produces.
    pub physical: bool,
}

/// `C_d = (Q / A_or) · sqrt(ρ / (2 ΔP))`.
pub fn discharge_coefficient(
    flow_m3_s: f64,
    area_m2: f64,
    rho: f64,
    delta_p_pa: f64,
) -> Result<DischargeCoefficient> {
    for (name, v) in [
        ("flow", flow_m3_s),
        ("orifice area", area_m2),
        ("density", rho),
        ("pressure drop", delta_p_pa),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
        }
    }
    let value = flow_m3_s / area_m2 * (rho / (2.0 * delta_p_pa)).sqrt();
    Ok(DischargeCoefficient {
        value,
        physical: value <= 1.0,
    })
}

/// Leak flow `Q = C_d · A_or · v_j` in m³/s.
pub fn leak_flow(c_d: f64, area_m2: f64, delta_p_pa: f64, rho: f64) -> Result<f64> {
    if !(c_d > 0.0 && c_d <= 1.0) {
        return Err(Error::invalid(format!(
            "discharge coefficient must lie in (0, 1], got {c_d}"
        )));
    }
    if !(area_m2 > 0.0) {
        return Err(Error::invalid(format!("orifice area must be > 0, got {area_m2}")));
    }
    Ok(c_d * area_m2 * jet_velocity(delta_p_pa, rho)?)
}

/// One observation for fitting the SPL law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplSample {
    pub delta_p_bar: f64,
    pub area_mm2: f64,
    pub spl_kpa: f64,
}

impl SplSample {
    pub fn new(delta_p_bar: f64, area_mm2: f64, spl_kpa: f64) -> Result<Self> {
        for (name, v) in [("Δp", delta_p_bar), ("area", area_mm2), ("SPL", spl_kpa)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(SplSample {
            delta_p_bar,
            area_mm2,
            spl_kpa,
        })
    }
}

/// `SPL = Δp · A^n · k`, in kPa.
pub fn spl_forward(delta_p_bar: f64, area_mm2: f64, model: &SplModel) -> Result<f64> {
    model.validate()?;
    if !(delta_p_bar > 0.0) || !(area_mm2 > 0.0) {
        return Err(Error::invalid(format!(
            "Δp and area must be > 0, got {delta_p_bar} bar, {area_mm2} mm²"
        )));
    }
    Ok(delta_p_bar * area_mm2.powf(model.n) * model.k)
}

/// Hole area in mm² that would produce `spl_kpa` at `delta_p_bar`.
pub fn spl_invert_area(spl_kpa: f64, delta_p_bar: f64, model: &SplModel) -> Result<f64> {
    model.validate()?;
    if !(spl_kpa > 0.0) || !(delta_p_bar > 0.0) {
        return Err(Error::invalid(format!(
            "SPL and Δp must be > 0, got {spl_kpa} kPa, {delta_p_bar} bar"
        )));
    }
    Ok((spl_kpa / (delta_p_bar * model.k)).powf(1.0 / model.n))
}

/// Ordinary least squares of `ln(SPL) − ln(Δp) = ln k + n · ln A`.
///
/// Needs at least two distinct areas. The fitted exponent must land in
/// `[1, 3]`; anything else is reported rather than clamped.
pub fn fit_spl_model(samples: &[SplSample]) -> Result<SplModel> {
    if samples.len() < 2 {
        return Err(Error::RankDeficient(format!(
            "need at least 2 samples, got {}",
            samples.len()
        )));
    }
    for s in samples {
        SplSample::new(s.delta_p_bar, s.area_mm2, s.spl_kpa)?;
    }
    let first_area = samples[0].area_mm2;
    if samples.iter().all(|s| s.area_mm2 == first_area) {
        return Err(Error::RankDeficient(format!(
            "all samples share the area {first_area} mm²"
        )));
    }

    let count = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.area_mm2.ln()).collect();
    let ys: Vec<f64> = samples
        .iter()
        .map(|s| s.spl_kpa.ln() - s.delta_p_bar.ln())
        .collect();
    let x_mean = xs.iter().sum::<f64>() / count;
    let y_mean = ys.iter().sum::<f64>() / count;
    let (sxx, sxy) = xs
        .iter()
        .zip(&ys)
        .fold((0.0, 0.0), |(sxx, sxy), (x, y)| {
            let dx = x - x_mean;
            (sxx + dx * dx, sxy + dx * (y - y_mean))
        });
    if sxx <= f64::EPSILON * x_mean.abs().max(1.0) * count {
        return Err(Error::RankDeficient("areas too close to separate".into()));
    }
    let n = sxy / sxx;
    let ln_k = y_mean - n * x_mean;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - ln_k - n * x).powi(2))
        .sum();

    let model = SplModel {
        n,
        k: ln_k.exp(),
        fit_residual_rms: (rss / count).sqrt(),
        sample_count: samples.len(),
    };
    model.validate()?;
    Ok(model)
}
