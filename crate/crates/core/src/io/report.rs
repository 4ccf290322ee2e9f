//! Detection reports: `#` summary lines, then one CSV row per batch.

use std::path::Path;

use crate::detect::Score;
use crate::error::{Error, Result};
use crate::model::{DetectionReport, LeakClass};

pub const COLUMNS: [&str; 8] = [
    "window_start_s",
    "station_id",
    "condition",
    "gating",
    "leak_detected",
    "estimated_area_mm2",
    "class",
    "truth",
];

/// Renders the report. `truth` holds one label per entry when a manifest
/// was supplied, and enables the scoring lines.
pub fn render(report: &DetectionReport, truth: Option<(&[Option<LeakClass>], &Score)>) -> Result<Vec<u8>> {
    let mut out = String::new();
    let detections = report.entries.iter().filter(|e| e.leak_detected).count();
    out.push_str(&format!("# batches = {}\n", report.entries.len()));
    out.push_str(&format!("# detections = {detections}\n"));
    if let Some((_, s)) = truth {
        for (k, v) in [
            ("leak_active_ok", s.leak_active_ok),
            ("detected", s.detected),
            ("missed", s.missed),
            ("no_leak_ok", s.no_leak_ok),
            ("false_alarms", s.false_alarms),
            ("gated", s.gated),
            ("unlabeled", s.unknown),
        ] {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        for ((t, e), n) in &s.confusion {
            out.push_str(&format!("# confusion = {t},{e},{n}\n"));
        }
    }
    if let Some(l) = &report.localization {
        out.push_str(&format!(
            "# localization = {},{},{},{},{}\n",
            l.station_pair.0, l.station_pair.1, l.position_m, l.delay_s, l.peak_correlation
        ));
    }

    let mut w = csv::Writer::from_writer(out.into_bytes());
    let wrap = |e: csv::Error| Error::invalid(format!("cannot render report: {e}"));
    w.write_record(COLUMNS).map_err(wrap)?;
    for (i, e) in report.entries.iter().enumerate() {
        let label = truth
            .and_then(|(labels, _)| labels.get(i).copied().flatten())
            .map(|c| c.as_str().to_string())
            .unwrap_or_default();
        w.write_record([
            e.window_start_s.to_string(),
            e.station_id.clone(),
            e.condition.as_str().to_string(),
            e.gating.as_str().to_string(),
            e.leak_detected.to_string(),
            e.estimated_area_mm2.map(|a| a.to_string()).unwrap_or_default(),
            e.class.as_str().to_string(),
            label,
        ])
        .map_err(wrap)?;
    }
    w.into_inner()
        .map_err(|e| Error::invalid(format!("cannot render report: {e}")))
}

pub fn write(path: &Path, report: &DetectionReport, truth: Option<(&[Option<LeakClass>], &Score)>) -> Result<()> {
    std::fs::write(path, render(report, truth)?).map_err(|e| Error::io(path, e))
}

/// Summary value from a rendered report, e.g. `summary(text, "detected")`.
pub fn summary<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .filter_map(|l| l.strip_prefix("# "))
        .filter_map(|l| l.split_once(" = "))
        .find(|(k, _)| *k == key)
        .map(|(_, v)| v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BatchVerdict, Gating, OperatingCondition};

    #[test]
    fn renders_summary_then_rows() {
        let report = DetectionReport {
            entries: vec![BatchVerdict {
                window_start_s: 0.75,
                station_id: "D".into(),
                condition: OperatingCondition::Transferring,
                gating: Gating::Ok,
                leak_detected: true,
                estimated_area_mm2: Some(30.5),
                class: LeakClass::Large,
            }],
            localization: None,
        };
        let bare = String::from_utf8(render(&report, None).unwrap()).unwrap();
        assert_eq!(summary(&bare, "detections"), Some("1"));
        assert_eq!(summary(&bare, "detected"), None);
        assert!(bare.ends_with("0.75,D,transferring,ok,true,30.5,large,\n"));

        let labels = [Some(LeakClass::Large)];
        let s = crate::detect::score(&report.entries, &labels);
        let scored = String::from_utf8(render(&report, Some((&labels, &s))).unwrap()).unwrap();
        assert_eq!(summary(&scored, "detected"), Some("1"));
        assert_eq!(summary(&scored, "confusion"), Some("large,large,1"));
        assert!(scored.ends_with(",large,large\n"));
    }
}
