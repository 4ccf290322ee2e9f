//! Comma-separated feature tables, one row per (station, window).

use std::path::Path;

use crate::error::{Error, Result};
use crate::hydraulics::SplSample;
use crate::model::{FeatureBatch, LeakClass};

pub const COLUMNS: [&str; 12] = [
    "station_id",
    "window_start_s",
    "window_len_s",
    "static_pressure_mean_bar",
    "static_pressure_std_bar",
    "dyn_pressure_std_kpa",
    "dyn_pressure_max_kpa",
    "leak_band_energy_kpa2",
    "leak_band_level_db",
    "accel_std_m_s2",
    "flow_mean_m3_h",
    "label",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: e.to_string(),
    }
}

/// Renders the table. Empty cells mean "not measured" or "unknown label".
pub fn to_csv(batches: &[FeatureBatch]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let wrap = |e: csv::Error| Error::invalid(format!("cannot render feature table: {e}"));
    w.write_record(COLUMNS).map_err(wrap)?;
    for b in batches {
        w.write_record([
            b.station_id.clone(),
            b.window_start_s.to_string(),
            b.window_len_s.to_string(),
            b.static_pressure_mean_bar.to_string(),
            b.static_pressure_std_bar.to_string(),
            b.dyn_pressure_std_kpa.to_string(),
            b.dyn_pressure_max_kpa.to_string(),
            b.leak_band_energy_kpa2.to_string(),
            b.leak_band_level_db.to_string(),
            opt(b.accel_std_m_s2),
            opt(b.flow_mean_m3_h),
            b.label.map(|c| c.as_str().to_string()).unwrap_or_default(),
        ])
        .map_err(wrap)?;
    }
    w.into_inner()
        .map_err(|e| Error::invalid(format!("cannot render feature table: {e}")))
}

pub fn from_csv(bytes: &[u8], path: &Path) -> Result<Vec<FeatureBatch>> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("expected columns {}", COLUMNS.join(",")),
        });
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let bad = |col: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: format!("column {}: {msg}", COLUMNS[col]),
        };
        let num = |col: usize| -> Result<f64> {
            rec[col]
                .parse::<f64>()
                .map_err(|e| bad(col, format!("'{}': {e}", &rec[col])))
        };
        let opt_num = |col: usize| -> Result<Option<f64>> {
            if rec[col].is_empty() {
                Ok(None)
            } else {
                num(col).map(Some)
            }
        };
        let label = match &rec[11] {
            "" => None,
            s => Some(s.parse::<LeakClass>().map_err(|e| bad(11, e.to_string()))?),
        };
        out.push(FeatureBatch {
            station_id: rec[0].to_string(),
            window_start_s: num(1)?,
            window_len_s: num(2)?,
            static_pressure_mean_bar: num(3)?,
            static_pressure_std_bar: num(4)?,
            dyn_pressure_std_kpa: num(5)?,
            dyn_pressure_max_kpa: num(6)?,
            leak_band_energy_kpa2: num(7)?,
            leak_band_level_db: num(8)?,
            accel_std_m_s2: opt_num(9)?,
            flow_mean_m3_h: opt_num(10)?,
            label,
        });
    }
    Ok(out)
}

pub fn write(path: &Path, batches: &[FeatureBatch]) -> Result<()> {
    std::fs::write(path, to_csv(batches)?).map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path) -> Result<Vec<FeatureBatch>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    from_csv(&bytes, path)
}

/// Columns of a raw SPL sample file.
pub const SAMPLE_COLUMNS: [&str; 3] = ["delta_p_bar", "area_mm2", "spl_kpa"];

pub fn samples_to_csv(samples: &[SplSample]) -> Vec<u8> {
    let mut out = SAMPLE_COLUMNS.join(",");
    out.push('\n');
    for s in samples {
        out.push_str(&format!("{},{},{}\n", s.delta_p_bar, s.area_mm2, s.spl_kpa));
    }
    out.into_bytes()
}

pub fn samples_from_csv(bytes: &[u8], path: &Path) -> Result<Vec<SplSample>> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(SAMPLE_COLUMNS.iter().copied()) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("expected columns {}", SAMPLE_COLUMNS.join(",")),
        });
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let bad = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut v = [0.0; 3];
        for (i, cell) in rec.iter().enumerate() {
            v[i] = cell.parse().map_err(|e| bad(format!("'{cell}': {e}")))?;
        }
        out.push(SplSample::new(v[0], v[1], v[2]).map_err(|e| bad(e.to_string()))?);
    }
    Ok(out)
}

pub fn read_samples(path: &Path) -> Result<Vec<SplSample>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    samples_from_csv(&bytes, path)
}
