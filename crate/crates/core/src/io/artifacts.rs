//! Model, domain and localization files.

use std::path::Path;

use crate::detect::{DetectionDomain, Point};
use crate::error::{Error, Result};
use crate::io::kv::{KvFile, KvWriter};
use crate::model::{Localization, SplModel};

fn write_text(path: &Path, text: String) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn model_to_text(m: &SplModel) -> String {
    let mut w = KvWriter::new();
    w.comment("SPL [kPa] = dp [bar] * A [mm2]^n * k");
    w.put("n", m.n)
        .put("k", m.k)
        .put("fit_residual_rms", m.fit_residual_rms)
        .put("sample_count", m.sample_count);
    w.finish()
}

pub fn parse_model(kv: &KvFile) -> Result<SplModel> {
    kv.check_keys(&["n", "k", "fit_residual_rms", "sample_count"], &[])?;
    let m = SplModel {
        n: kv.require("n")?,
        k: kv.require("k")?,
        fit_residual_rms: kv.get_or("fit_residual_rms", 0.0)?,
        sample_count: kv.get_or("sample_count", 0)?,
    };
    kv.at_line(0, m.validate())?;
    Ok(m)
}

pub fn write_model(path: &Path, m: &SplModel) -> Result<()> {
    write_text(path, model_to_text(m))
}

pub fn read_model(path: &Path) -> Result<SplModel> {
    parse_model(&KvFile::read(path)?)
}

pub fn domain_to_text(d: &DetectionDomain) -> String {
    let mut w = KvWriter::new();
    w.comment("detection domain, counter-clockwise");
    w.put("feature_x", d.feature_x()).put("feature_y", d.feature_y());
    if let Some(s) = d.station_id() {
        w.put("station", s);
    }
    for (x, y) in d.polygon() {
        w.put("vertex", format!("{x},{y}"));
    }
    w.finish()
}

pub fn parse_domain(kv: &KvFile) -> Result<DetectionDomain> {
    kv.check_keys(&["feature_x", "feature_y", "station", "vertex"], &["vertex"])?;
    let mut polygon: Vec<Point> = Vec::new();
    for e in kv.all("vertex") {
        let f = kv.fields(e, 2)?;
        polygon.push((kv.parse_field(e, "x", f[0])?, kv.parse_field(e, "y", f[1])?));
    }
    let fx: String = kv.require("feature_x")?;
    let fy: String = kv.require("feature_y")?;
    let domain = DetectionDomain::new(fx, fy, polygon).map_err(|e| match e {
        Error::Missing(_) => e,
        other => kv.error(0, other.to_string()),
    })?;
    Ok(match kv.get::<String>("station")? {
        Some(s) => domain.for_station(s),
        None => domain,
    })
}

pub fn write_domain(path: &Path, d: &DetectionDomain) -> Result<()> {
    write_text(path, domain_to_text(d))
}

pub fn read_domain(path: &Path) -> Result<DetectionDomain> {
    parse_domain(&KvFile::read(path)?)
}

pub fn localization_to_text(l: &Localization) -> String {
    let mut w = KvWriter::new();
    w.put("station_a", &l.station_pair.0)
        .put("station_b", &l.station_pair.1)
        .put("position_m", l.position_m)
        .put("delay_s", l.delay_s)
        .put("peak_correlation", l.peak_correlation)
        .put("clamped", l.clamped);
    w.finish()
}

pub fn parse_localization(kv: &KvFile) -> Result<Localization> {
    Ok(Localization {
        position_m: kv.require("position_m")?,
        delay_s: kv.require("delay_s")?,
        peak_correlation: kv.require("peak_correlation")?,
        station_pair: (kv.require("station_a")?, kv.require("station_b")?),
        clamped: kv.get_or("clamped", false)?,
    })
}
