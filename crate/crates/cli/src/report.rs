//! Report records, their CSV/JSON files, and the console summary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const CSV_HEADER: [&str; 7] = ["test", "params", "metric", "value", "tolerance", "pass", "seconds"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub test: String,
    pub params: String,
    pub metric: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seconds: f64,
}

/// `k=v` pairs joined with `;`.
pub fn params(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

pub struct Recorder {
    records: Vec<ReportRecord>,
    timing: bool,
    last: Instant,
}

impl Recorder {
    pub fn new(timing: bool) -> Self {
        Self {
            records: Vec::new(),
            timing,
            last: Instant::now(),
        }
    }

    fn push(&mut self, test: &str, params: &str, metric: &str, value: f64, tolerance: f64, pass: bool) {
        let now = Instant::now();
        let seconds = if self.timing {
            (now - self.last).as_secs_f64()
        } else {
            0.0
        };
        self.last = now;
        self.records.push(ReportRecord {
            test: test.into(),
            params: params.into(),
            metric: metric.into(),
            value,
            tolerance,
            pass,
            seconds,
        });
    }

    /// Residual-type metric: passes when `value <= tolerance`.
    pub fn upper(&mut self, test: &str, params: &str, metric: &str, value: f64, tolerance: f64) -> bool {
        let pass = value <= tolerance;
        self.push(test, params, metric, value, tolerance, pass);
        pass
    }

    /// Separation-type metric: passes when `value > tolerance`.
    pub fn lower(&mut self, test: &str, params: &str, metric: &str, value: f64, tolerance: f64) -> bool {
        let pass = value > tolerance;
        self.push(test, params, metric, value, tolerance, pass);
        pass
    }

    /// Yes/no outcome stored as a mismatch count (0 passes).
    pub fn flag(&mut self, test: &str, params: &str, metric: &str, ok: bool) -> bool {
        self.upper(test, params, metric, if ok { 0.0 } else { 1.0 }, 0.0)
    }

    pub fn records(&self) -> &[ReportRecord] {
        &self.records
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }
}

pub fn write_csv(path: &Path, records: &[ReportRecord]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, records: &[ReportRecord]) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(records)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Writes `<dir>/<stem>.csv` and `<dir>/<stem>.json`.
pub fn write_reports(dir: &Path, stem: &str, records: &[ReportRecord]) -> Result<(PathBuf, PathBuf), CliError> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    write_csv(&csv_path, records)?;
    write_json(&json_path, records)?;
    Ok((csv_path, json_path))
}

pub fn summary(records: &[ReportRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&format!(
            "{} {} [{}] {} = {:.4e} (tol {:.1e})\n",
            if r.pass { "PASS" } else { "FAIL" },
            r.test,
            r.params,
            r.metric,
            r.value,
            r.tolerance
        ));
    }
    let failed = records.iter().filter(|r| !r.pass).count();
    out.push_str(&format!("{} records, {} failed\n", records.len(), failed));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flags_follow_direction() {
        let mut r = Recorder::new(false);
        assert!(r.upper("t", "", "m", 1e-4, 1e-3));
        assert!(!r.upper("t", "", "m", f64::NAN, 1e-3));
        assert!(r.lower("t", "", "m", 0.2, 0.1));
        assert!(!r.flag("t", "", "m", false));
        assert_eq!(r.records()[3].value, 1.0);
        assert!(!r.all_pass());
        assert!(r.records().iter().all(|x| x.seconds == 0.0));
    }

    #[test]
    fn csv_and_json_mirror_each_other() {
        let dir = std::env::temp_dir().join(format!("roe-lab-report-{}", std::process::id()));
        let mut r = Recorder::new(false);
        r.upper("a", &params(&[("n", "3".into()), ("t", "0.5".into())]), "err", 1.25e-7, 1e-6);
        r.lower("b", "", "gap", 0.3, 0.1);
        let (c, j) = write_reports(&dir, "x", r.records()).unwrap();
        let text = std::fs::read_to_string(&c).unwrap();
        assert!(text.starts_with("test,params,metric,value,tolerance,pass,seconds\n"));
        let mut rd = csv::Reader::from_path(&c).unwrap();
        let from_csv: Vec<ReportRecord> = rd.deserialize().collect::<Result<_, _>>().unwrap();
        let from_json: Vec<ReportRecord> = serde_json::from_str(&std::fs::read_to_string(&j).unwrap()).unwrap();
        assert_eq!(from_csv, r.records());
        assert_eq!(from_json, r.records());
        std::fs::remove_dir_all(dir).unwrap();
    }
}
