//! Windowed statistics, periodogram band energy and cross-correlation delay
//! estimation.
//!
//! All windows are rectangular. Band energies are absolute mean-square
//! values (Parseval-normalized), so they can be compared directly with the
//! source levels of the SPL law.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::model::{energy_to_db, ChannelKind, FeatureBatch, SignalRecord};

/// How a record is cut into analysis windows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchingPolicy {
    pub window_len_s: f64,
    /// Fraction of a window shared with the next one, in `[0, 0.9]`.
    pub overlap_fraction: f64,
}

impl BatchingPolicy {
    pub fn new(window_len_s: f64, overlap_fraction: f64) -> Result<Self> {
        if !(window_len_s > 0.0) || !window_len_s.is_finite() {
            return Err(Error::invalid(format!(
                "window length must be > 0 s, got {window_len_s}"
            )));
        }
        if !(0.0..=0.9).contains(&overlap_fraction) {
            return Err(Error::invalid(format!(
                "overlap must lie in [0, 0.9], got {overlap_fraction}"
            )));
        }
        Ok(BatchingPolicy {
            window_len_s,
            overlap_fraction,
        })
    }

    /// Window length and stride in samples at `sample_rate_hz`.
    pub fn samples(&self, sample_rate_hz: f64) -> (usize, usize) {
        let window = (self.window_len_s * sample_rate_hz).round() as usize;
        let stride =
            ((self.window_len_s * (1.0 - self.overlap_fraction) * sample_rate_hz).round() as usize)
                .max(1);
        (window, stride)
    }
}

impl Default for BatchingPolicy {
    fn default() -> Self {
        BatchingPolicy {
            window_len_s: 1.0,
            overlap_fraction: 0.25,
        }
    }
}

/// Frequency band `[lo_hz, hi_hz)`; the Nyquist bin is included when
/// `hi_hz` sits exactly at Nyquist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lo_hz: f64,
    pub hi_hz: f64,
}

impl Band {
    /// Leak band: jet noise dominates pump noise above 500 Hz and fades out
    /// by 4 kHz.
    pub const LEAK: Band = Band {
        lo_hz: 500.0,
        hi_hz: 4000.0,
    };

    pub fn new(lo_hz: f64, hi_hz: f64) -> Result<Self> {
        if !(lo_hz >= 0.0) || !(hi_hz > lo_hz) || !hi_hz.is_finite() {
            return Err(Error::invalid(format!(
                "band edges must satisfy 0 <= lo < hi, got {lo_hz}:{hi_hz}"
            )));
        }
        Ok(Band { lo_hz, hi_hz })
    }

    pub fn check_against(&self, sample_rate_hz: f64) -> Result<()> {
        if self.hi_hz > sample_rate_hz / 2.0 {
            return Err(Error::invalid(format!(
                "band edge {} Hz exceeds Nyquist ({} Hz)",
                self.hi_hz,
                sample_rate_hz / 2.0
            )));
        }
        Ok(())
    }

    /// Whether one-sided bin `k` of an `n`-point transform belongs to the band.
    pub fn contains_bin(&self, k: usize, n: usize, sample_rate_hz: f64) -> bool {
        let f = k as f64 * sample_rate_hz / n as f64;
        let nyquist = sample_rate_hz / 2.0;
        f >= self.lo_hz && (f < self.hi_hz || (self.hi_hz >= nyquist && f <= self.hi_hz))
    }
}

impl Default for Band {
    fn default() -> Self {
        Band::LEAK
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo_hz, self.hi_hz)
    }
}

impl FromStr for Band {
    type Err = Error;

    /// Parses `lo:hi` in Hz.
    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("band '{s}' is not of the form lo:hi")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("band edge '{v}' is not a number")))
        };
        Band::new(parse(lo)?, parse(hi)?)
    }
}

fn forward_fft(planner: &mut FftPlanner<f64>, samples: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|x| Complex64::new(*x, 0.0)).collect();
    planner.plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Mean-square content of `spectrum` (an unnormalized `n`-point DFT of a
/// real signal) inside `band`.
fn spectrum_band_energy(spectrum: &[Complex64], sample_rate_hz: f64, band: Band) -> f64 {
    let n = spectrum.len();
    let scale = 1.0 / (n as f64 * n as f64);
    (0..=n / 2)
        .filter(|&k| band.contains_bin(k, n, sample_rate_hz))
        .map(|k| {
            let one_sided = if k == 0 || (n % 2 == 0 && k == n / 2) {
                1.0
            } else {
                2.0
            };
            one_sided * spectrum[k].norm_sqr() * scale
        })
        .sum()
}

/// Periodogram energy of `samples` inside `band`, in channel-units².
///
/// Normalized so that the full band `[0, fs/2]` returns the mean square of
/// the signal.
pub fn band_energy(samples: &[f64], sample_rate_hz: f64, band: Band) -> Result<f64> {
    band.check_against(sample_rate_hz)?;
    if samples.is_empty() {
        return Err(Error::invalid("cannot take the band energy of an empty window"));
    }
    let mut planner = FftPlanner::new();
    let spectrum = forward_fft(&mut planner, samples);
    Ok(spectrum_band_energy(&spectrum, sample_rate_hz, band))
}

/// Ideal band-pass: zeroes every DFT bin outside `band`.
pub fn bandpass(samples: &[f64], sample_rate_hz: f64, band: Band) -> Result<Vec<f64>> {
    band.check_against(sample_rate_hz)?;
    let n = samples.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut planner = FftPlanner::new();
    let mut spectrum = forward_fft(&mut planner, samples);
    for k in 0..n {
        let mirrored = if k <= n / 2 { k } else { n - k };
        if !band.contains_bin(mirrored, n, sample_rate_hz) {
            spectrum[k] = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut spectrum);
    Ok(spectrum.iter().map(|c| c.re / n as f64).collect())
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn std_dev(x: &[f64], mean: f64) -> f64 {
    (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / x.len() as f64).sqrt()
}

/// Cuts a record into overlapping windows and computes the per-window
/// features.
///
/// The record needs static and dynamic pressure channels; acceleration and
/// flow are optional. The trailing partial window is dropped.
pub fn batch(record: &SignalRecord, policy: &BatchingPolicy, band: Band) -> Result<Vec<FeatureBatch>> {
    let fs = record.sample_rate_hz();
    band.check_against(fs)?;
    let channel = |kind: ChannelKind| -> Option<Vec<f64>> {
        record
            .channel(kind)
            .map(|c| c.iter().map(|&x| f64::from(x)).collect())
    };
    let static_p = channel(ChannelKind::StaticPressure).ok_or_else(|| {
        Error::Missing(format!("station {}: no static pressure channel", record.station_id()))
    })?;
    let dynamic_p = channel(ChannelKind::DynamicPressure).ok_or_else(|| {
        Error::Missing(format!("station {}: no dynamic pressure channel", record.station_id()))
    })?;
    let accel = channel(ChannelKind::Acceleration);
    let flow = channel(ChannelKind::Flow);

    let (window, stride) = policy.samples(fs);
    let len = record.len();
    if window == 0 || len < window {
        return Err(Error::invalid(format!(
            "station {}: record of {len} samples is shorter than one {window}-sample window",
            record.station_id()
        )));
    }
    let count = (len - window) / stride + 1;
    let fft = FftPlanner::new().plan_fft_forward(window);

    let batches = (0..count)
        .map(|i| {
            let range = i * stride..i * stride + window;
            let sp = &static_p[range.clone()];
            let dp = &dynamic_p[range.clone()];
            let sp_mean = mean(sp);
            let dp_mean = mean(dp);
            let energy = windowed_band_energy(&fft, dp, fs, band);
            FeatureBatch {
                station_id: record.station_id().to_string(),
                window_start_s: record.start_time_s() + (i * stride) as f64 / fs,
                window_len_s: window as f64 / fs,
                static_pressure_mean_bar: sp_mean,
                static_pressure_std_bar: std_dev(sp, sp_mean),
                dyn_pressure_std_kpa: std_dev(dp, dp_mean),
                dyn_pressure_max_kpa: dp.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                leak_band_energy_kpa2: energy,
                leak_band_level_db: energy_to_db(energy),
                accel_std_m_s2: accel.as_ref().map(|a| {
                    let a = &a[range.clone()];
                    std_dev(a, mean(a))
                }),
                flow_mean_m3_h: flow.as_ref().map(|f| mean(&f[range.clone()])),
                label: None,
            }
        })
        .collect();
    Ok(batches)
}

fn windowed_band_energy(fft: &Arc<dyn Fft<f64>>, samples: &[f64], fs: f64, band: Band) -> f64 {
    let mut buf: Vec<Complex64> = samples.iter().map(|x| Complex64::new(*x, 0.0)).collect();
    fft.process(&mut buf);
    spectrum_band_energy(&buf, fs, band)
}

// ---------------------------------------------------------------------------
// Cross-correlation
// ---------------------------------------------------------------------------

/// Normalized cross-correlation of `a` and `b` for lags `-max_lag..=max_lag`.
///
/// Entry `max_lag + l` holds
/// `Σ_n a'[n]·b'[n+l] / sqrt(Σ a'² · Σ b'²)` with `a'`, `b'` the
/// mean-removed inputs and the sum running over indices valid in both.
/// Computed by zero-padded FFT.
pub fn cross_correlation(a: &[f64], b: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "inputs must have equal length, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n == 0 || max_lag >= n {
        return Err(Error::invalid(format!(
            "max lag {max_lag} must be below the input length {n}"
        )));
    }
    let a_mean = mean(a);
    let b_mean = mean(b);
    let a_energy: f64 = a.iter().map(|x| (x - a_mean).powi(2)).sum();
    let b_energy: f64 = b.iter().map(|x| (x - b_mean).powi(2)).sum();
    if !(a_energy > 0.0) || !(b_energy > 0.0) {
        return Err(Error::invalid("zero-variance input has no correlation peak"));
    }
    let norm = (a_energy * b_energy).sqrt();

    let size = (n + max_lag).next_power_of_two();
    let padded = |x: &[f64], m: f64| {
        let mut buf = vec![Complex64::new(0.0, 0.0); size];
        for (dst, src) in buf.iter_mut().zip(x) {
            dst.re = src - m;
        }
        buf
    };
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(size);
    let mut fa = padded(a, a_mean);
    let mut fb = padded(b, b_mean);
    forward.process(&mut fa);
    forward.process(&mut fb);
    let mut cross: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x.conj() * y).collect();
    planner.plan_fft_inverse(size).process(&mut cross);

    let scale = 1.0 / (size as f64 * norm);
    Ok((0..=2 * max_lag)
        .map(|i| {
            let idx = if i >= max_lag { i - max_lag } else { size + i - max_lag };
            cross[idx].re * scale
        })
        .collect())
}

/// Delay of one signal relative to another.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayEstimate {
    /// Positive when `b` lags `a`.
    pub delay_s: f64,
    /// Normalized correlation at the integer-lag peak.
    pub peak_correlation: f64,
    /// Refined peak position in samples.
    pub lag_samples: f64,
}

/// Delay of `b` relative to `a` at the normalized cross-correlation
/// maximum, refined by a parabola through the peak and its neighbours.
pub fn estimate_delay(a: &[f64], b: &[f64], sample_rate_hz: f64, max_lag_s: f64) -> Result<DelayEstimate> {
    if !(sample_rate_hz > 0.0) || !(max_lag_s >= 0.0) {
        return Err(Error::invalid("sample rate must be > 0 and max lag >= 0"));
    }
    let max_lag = (max_lag_s * sample_rate_hz + 1e-9).floor() as usize;
    let r = cross_correlation(a, b, max_lag)?;
    let (peak_idx, peak) = r
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });

    let offset = if peak_idx > 0 && peak_idx + 1 < r.len() {
        parabolic_offset(r[peak_idx - 1], peak, r[peak_idx + 1])
    } else {
        0.0
    };
    let lag_samples = peak_idx as f64 - max_lag as f64 + offset;
    Ok(DelayEstimate {
        delay_s: lag_samples / sample_rate_hz,
        peak_correlation: peak.clamp(-1.0, 1.0),
        lag_samples,
    })
}

/// Vertex offset, in `(-0.5, 0.5)`, of the parabola through three equally
/// spaced samples around a maximum.
fn parabolic_offset(left: f64, centre: f64, right: f64) -> f64 {
    let curvature = left - 2.0 * centre + right;
    if curvature >= 0.0 {
        return 0.0;
    }
    (0.5 * (left - right) / curvature).clamp(-0.5, 0.5)
}
