//! CSV rows for per-trial results and per-setting summaries.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bench::ExperimentReport;
use crate::error::Result;
use crate::scalar::Scalar;

/// Header: `experiment,setting,method,trial,E_i,C,kappa,tightness,status`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub experiment: String,
    pub setting: f64,
    pub method: String,
    /// Zero-based trial index.
    pub trial: usize,
    #[serde(rename = "E_i")]
    pub error: Option<f64>,
    #[serde(rename = "C")]
    pub connectivity: Option<f64>,
    pub kappa: Option<f64>,
    pub tightness: Option<f64>,
    pub status: String,
}

/// Header: `experiment,setting,method,rmse,median,q1,q3,n_outliers,n_failed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub setting: f64,
    pub method: String,
    pub rmse: Option<f64>,
    pub median: Option<f64>,
    pub q1: Option<f64>,
    pub q3: Option<f64>,
    pub n_outliers: usize,
    pub n_failed: usize,
}

pub const TRIAL_HEADER: &str = "experiment,setting,method,trial,E_i,C,kappa,tightness,status";
pub const SUMMARY_HEADER: &str = "experiment,setting,method,rmse,median,q1,q3,n_outliers,n_failed";

pub fn trial_rows<T: Scalar>(report: &ExperimentReport<T>) -> Vec<TrialRow> {
    let f = |v: Option<T>| v.map(Scalar::as_f64);
    report
        .rows
        .iter()
        .flat_map(|row| {
            row.trials.iter().map(move |t| TrialRow {
                experiment: report.name.clone(),
                setting: row.setting.as_f64(),
                method: row.method.to_string(),
                trial: t.trial,
                error: f(t.error),
                connectivity: f(t.connectivity),
                kappa: f(t.kappa),
                tightness: f(t.tightness),
                status: t.status.to_string(),
            })
        })
        .collect()
}

pub fn summary_rows<T: Scalar>(report: &ExperimentReport<T>) -> Vec<SummaryRow> {
    report
        .rows
        .iter()
        .map(|row| SummaryRow {
            experiment: report.name.clone(),
            setting: row.setting.as_f64(),
            method: row.method.to_string(),
            rmse: row.rmse.map(Scalar::as_f64),
            median: row.stats.as_ref().map(|s| s.median.as_f64()),
            q1: row.stats.as_ref().map(|s| s.q1.as_f64()),
            q3: row.stats.as_ref().map(|s| s.q3.as_f64()),
            n_outliers: row.stats.as_ref().map_or(0, |s| s.outliers.len()),
            n_failed: row.n_failed,
        })
        .collect()
}

/// Writes rows with a header line.
pub fn write_csv<R: Serialize, W: Write>(rows: &[R], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: DeserializeOwned, I: Read>(input: I) -> Result<Vec<R>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{run_experiment, ExperimentConfig, SweptParameter};

    #[test]
    fn headers_and_round_trip() {
        let mut cfg = ExperimentConfig::<f64>::preset(SweptParameter::SigmaDb);
        cfg.n = 4;
        cfg.m = 3;
        cfg.trials = 2;
        cfg.sweep_values = vec![1.0, 3.5];
        let report = run_experiment(&cfg).unwrap();

        let trials = trial_rows(&report);
        let mut buf = Vec::new();
        write_csv(&trials, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), TRIAL_HEADER);
        assert_eq!(text.lines().count(), 1 + 2 * 2 * 2);
        assert_eq!(read_csv::<TrialRow, _>(&buf[..]).unwrap(), trials);

        let summary = summary_rows(&report);
        let mut buf = Vec::new();
        write_csv(&summary, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), SUMMARY_HEADER);
        assert_eq!(text.lines().count(), 1 + 2 * 2);
        assert_eq!(read_csv::<SummaryRow, _>(&buf[..]).unwrap(), summary);
    }
}
