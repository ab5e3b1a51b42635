//! Monte-Carlo harness: sweeps one parameter around the Table-1 style
//! defaults, runs every method on the same measurements per trial, and
//! aggregates RMSE and box statistics.

pub mod io;
pub mod stats;
pub mod svg;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{localize, Method};
use crate::scalar::Scalar;
use crate::sim::{self, ChannelParams};
use crate::solver::{SolveStatus, SolverOptions};

pub use stats::{boxplot_stats, rmse, trial_error, BoxStats};

/// Default number of unknown nodes.
pub const DEFAULT_N: usize = 15;
/// Default number of anchors.
pub const DEFAULT_M: usize = 5;
/// Default number of trials per setting.
pub const DEFAULT_TRIALS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptParameter {
    /// Number of anchors.
    M,
    DMax,
    SigmaDb,
    Epsilon,
}

impl SweptParameter {
    pub const ALL: [SweptParameter; 4] =
        [SweptParameter::M, SweptParameter::DMax, SweptParameter::SigmaDb, SweptParameter::Epsilon];

    pub fn key(self) -> &'static str {
        match self {
            SweptParameter::M => "m",
            SweptParameter::DMax => "d_max",
            SweptParameter::SigmaDb => "sigma_db",
            SweptParameter::Epsilon => "epsilon",
        }
    }

    /// Experiment label used in CSV output (`exp1` .. `exp4`).
    pub fn experiment_id(self) -> &'static str {
        match self {
            SweptParameter::M => "exp1",
            SweptParameter::DMax => "exp2",
            SweptParameter::SigmaDb => "exp3",
            SweptParameter::Epsilon => "exp4",
        }
    }

    /// Axis label for charts.
    pub fn axis_label(self) -> &'static str {
        match self {
            SweptParameter::M => "M (anchors)",
            SweptParameter::DMax => "d_max (m)",
            SweptParameter::SigmaDb => "sigma_dB (dB)",
            SweptParameter::Epsilon => "epsilon (m)",
        }
    }

    pub fn default_grid(self) -> &'static [f64] {
        match self {
            SweptParameter::M => &[3.0, 4.0, 5.0, 6.0, 7.0],
            SweptParameter::DMax => &[0.3, 0.4, 0.5, 0.6],
            SweptParameter::SigmaDb => &[1.0, 2.0, 3.5, 5.0, 6.0],
            SweptParameter::Epsilon => &[0.0, 0.01, 0.02, 0.05],
        }
    }

    pub fn from_experiment_id(id: &str) -> Option<Self> {
        match id.trim().trim_start_matches("exp") {
            "1" => Some(SweptParameter::M),
            "2" => Some(SweptParameter::DMax),
            "3" => Some(SweptParameter::SigmaDb),
            "4" => Some(SweptParameter::Epsilon),
            _ => None,
        }
    }
}

impl std::str::FromStr for SweptParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        SweptParameter::ALL
            .into_iter()
            .find(|p| p.key() == key)
            .or(match key.as_str() {
                "dmax" => Some(SweptParameter::DMax),
                "sigma" | "sigmadb" => Some(SweptParameter::SigmaDb),
                "eps" => Some(SweptParameter::Epsilon),
                _ => None,
            })
            .or_else(|| SweptParameter::from_experiment_id(&key))
            .ok_or_else(|| Error::InvalidInput(format!("unknown swept parameter '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig<T> {
    /// Label written to the `experiment` CSV column.
    pub name: String,
    pub swept: SweptParameter,
    pub sweep_values: Vec<T>,
    pub n: usize,
    pub m: usize,
    /// Values for every parameter that is not swept.
    pub params: ChannelParams<T>,
    pub trials: usize,
    pub base_seed: u64,
    pub methods: Vec<Method>,
    pub solver: SolverOptions<T>,
}

impl<T: Scalar> ExperimentConfig<T> {
    /// Defaults for one of the four sweeps.
    pub fn preset(swept: SweptParameter) -> Self {
        Self {
            name: swept.experiment_id().to_string(),
            swept,
            sweep_values: swept.default_grid().iter().map(|&v| T::of(v)).collect(),
            n: DEFAULT_N,
            m: DEFAULT_M,
            params: ChannelParams::default(),
            trials: DEFAULT_TRIALS,
            base_seed: 0,
            methods: Method::ALL.to_vec(),
            solver: SolverOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be >= 1".into()));
        }
        if self.sweep_values.is_empty() {
            return Err(Error::InvalidInput("sweep values must not be empty".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidInput("at least one method is required".into()));
        }
        self.solver.validate()?;
        for &v in &self.sweep_values {
            let (n, m, params) = self.setting(v)?;
            if n == 0 || m == 0 {
                return Err(Error::InvalidInput("need N >= 1 and M >= 1".into()));
            }
            params.validate()?;
        }
        Ok(())
    }

    /// `(N, M, params)` for one sweep value.
    pub fn setting(&self, value: T) -> Result<(usize, usize, ChannelParams<T>)> {
        let mut params = self.params;
        let mut m = self.m;
        match self.swept {
            SweptParameter::M => {
                if value.fract() != T::zero() || value < T::one() {
                    return Err(Error::InvalidInput(format!("anchor count must be a positive integer, got {value}")));
                }
                m = value.to_usize().ok_or_else(|| Error::InvalidInput(format!("bad anchor count {value}")))?;
            }
            SweptParameter::DMax => params.d_max = value,
            SweptParameter::SigmaDb => params.sigma_db = value,
            SweptParameter::Epsilon => params.epsilon = value,
        }
        Ok((self.n, m, params))
    }
}

/// Seed for trial `trial` of sweep setting `setting`.
///
/// SplitMix64 finalizer over the three inputs; stable across releases.
pub fn trial_seed(base_seed: u64, setting: usize, trial: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(mix(base_seed) ^ setting as u64) ^ trial as u64)
}

/// Outcome of one method on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord<T> {
    pub trial: usize,
    pub seed: u64,
    /// `E_i`; `None` when the trial failed.
    pub error: Option<T>,
    pub connectivity: Option<T>,
    pub kappa: Option<T>,
    pub tightness: Option<T>,
    pub status: SolveStatus,
    pub message: Option<String>,
}

/// All trials of one method at one sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow<T> {
    pub setting: T,
    pub method: Method,
    pub trials: Vec<TrialRecord<T>>,
    /// Over successful trials only.
    pub rmse: Option<T>,
    pub stats: Option<BoxStats<T>>,
    pub n_failed: usize,
}

impl<T: Scalar> ReportRow<T> {
    pub fn errors(&self) -> Vec<T> {
        self.trials.iter().filter_map(|t| t.error).collect()
    }

    pub fn median(&self) -> Option<T> {
        self.stats.as_ref().map(|s| s.median)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport<T> {
    pub name: String,
    pub swept: SweptParameter,
    /// Ordered by sweep value, then by the configured method order.
    pub rows: Vec<ReportRow<T>>,
}

impl<T: Scalar> ExperimentReport<T> {
    pub fn row(&self, setting: T, method: Method) -> Option<&ReportRow<T>> {
        self.rows.iter().find(|r| r.setting == setting && r.method == method)
    }

    pub fn rows_for(&self, method: Method) -> impl Iterator<Item = &ReportRow<T>> {
        self.rows.iter().filter(move |r| r.method == method)
    }
}

fn failed<T>(trial: usize, seed: u64, message: String) -> TrialRecord<T> {
    TrialRecord {
        trial,
        seed,
        error: None,
        connectivity: None,
        kappa: None,
        tightness: None,
        status: SolveStatus::Failed,
        message: Some(message),
    }
}

/// Runs one trial: one deployment and one measurement draw shared by all
/// methods.
fn run_trial<T: Scalar>(cfg: &ExperimentConfig<T>, setting: usize, trial: usize) -> Vec<TrialRecord<T>> {
    let seed = trial_seed(cfg.base_seed, setting, trial);
    let value = cfg.sweep_values[setting];
    let context = |e: &dyn std::fmt::Display| format!("setting {value}, trial {trial}: {e}");
    let prepared = cfg.setting(value).and_then(|(n, m, params)| {
        let scenario = sim::generate_scenario(n, m, &params, seed)?;
        let meas = sim::make_measurements(&scenario, &params, &mut sim::measurement_rng(seed))?;
        Ok((scenario, meas))
    });
    let (scenario, meas) = match prepared {
        Ok(v) => v,
        Err(e) => return cfg.methods.iter().map(|_| failed(trial, seed, context(&e))).collect(),
    };
    cfg.methods
        .iter()
        .map(|&method| {
            let outcome = localize(&meas, method, &cfg.solver)
                .and_then(|r| Ok((trial_error(&r.positions, &scenario.unknowns)?, r)));
            match outcome {
                Ok((error, r)) => TrialRecord {
                    trial,
                    seed,
                    error: Some(error),
                    connectivity: Some(r.connectivity),
                    kappa: Some(r.kappa_used),
                    tightness: Some(r.tightness),
                    status: r.status,
                    message: None,
                },
                Err(e) => {
                    let mut rec = failed(trial, seed, context(&e));
                    rec.connectivity = Some(meas.connectivity());
                    rec.kappa = Some(crate::estimator::kappa_for(method, meas.connectivity()));
                    rec
                }
            }
        })
        .collect()
}

/// Runs every (setting, trial) pair, in parallel on the current rayon pool.
/// The report does not depend on scheduling.
pub fn run_experiment<T: Scalar>(cfg: &ExperimentConfig<T>) -> Result<ExperimentReport<T>> {
    cfg.validate()?;
    let tasks: Vec<(usize, usize)> = (0..cfg.sweep_values.len())
        .flat_map(|s| (0..cfg.trials).map(move |t| (s, t)))
        .collect();
    let outcomes: Vec<Vec<TrialRecord<T>>> =
        tasks.par_iter().map(|&(s, t)| run_trial(cfg, s, t)).collect();

    let mut rows = Vec::with_capacity(cfg.sweep_values.len() * cfg.methods.len());
    for (s, &setting) in cfg.sweep_values.iter().enumerate() {
        for (k, &method) in cfg.methods.iter().enumerate() {
            let trials: Vec<TrialRecord<T>> = (0..cfg.trials)
                .map(|t| outcomes[s * cfg.trials + t][k].clone())
                .collect();
            let errors: Vec<T> = trials.iter().filter_map(|t| t.error).collect();
            let n_failed = trials.len() - errors.len();
            let (rmse, stats) = if errors.is_empty() {
                (None, None)
            } else {
                (Some(stats::rmse(&errors)?), Some(stats::boxplot_stats(&errors)?))
            };
            rows.push(ReportRow { setting, method, trials, rmse, stats, n_failed });
        }
    }
    Ok(ExperimentReport { name: cfg.name.clone(), swept: cfg.swept, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(swept: SweptParameter) -> ExperimentConfig<f64> {
        let mut cfg = ExperimentConfig::preset(swept);
        cfg.n = 4;
        cfg.m = 3;
        cfg.trials = 2;
        cfg.sweep_values = vec![cfg.sweep_values[0]];
        cfg
    }

    #[test]
    fn report_shape() {
        let cfg = tiny(SweptParameter::SigmaDb);
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.rows.len(), 2);
        for row in &report.rows {
            assert_eq!(row.trials.len(), 2);
            assert_eq!(row.n_failed, 0);
            let e = row.errors();
            assert_eq!(row.rmse.unwrap(), rmse(&e).unwrap());
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = tiny(SweptParameter::M);
        assert_eq!(run_experiment(&cfg).unwrap(), run_experiment(&cfg).unwrap());
    }

    #[test]
    fn methods_share_measurements() {
        let cfg = tiny(SweptParameter::Epsilon);
        let report = run_experiment(&cfg).unwrap();
        let (a, b) = (&report.rows[0], &report.rows[1]);
        for (x, y) in a.trials.iter().zip(&b.trials) {
            assert_eq!(x.seed, y.seed);
            assert_eq!(x.connectivity, y.connectivity);
        }
    }

    #[test]
    fn generation_failures_are_recorded() {
        let mut cfg = tiny(SweptParameter::DMax);
        cfg.sweep_values = vec![1e-4];
        let report = run_experiment(&cfg).unwrap();
        for row in &report.rows {
            assert_eq!(row.n_failed, 2);
            assert!(row.rmse.is_none());
            assert!(row.trials[0].message.as_deref().unwrap().contains("trial 0"));
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = tiny(SweptParameter::M);
        cfg.sweep_values = vec![2.5];
        assert!(cfg.validate().is_err());
        let mut cfg = tiny(SweptParameter::SigmaDb);
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = tiny(SweptParameter::SigmaDb);
        cfg.sweep_values.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = tiny(SweptParameter::SigmaDb);
        cfg.sweep_values = vec![-1.0];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn parameter_names() {
        assert_eq!("sigma-db".parse::<SweptParameter>().unwrap(), SweptParameter::SigmaDb);
        assert_eq!("dmax".parse::<SweptParameter>().unwrap(), SweptParameter::DMax);
        assert_eq!("exp4".parse::<SweptParameter>().unwrap(), SweptParameter::Epsilon);
        assert_eq!("M".parse::<SweptParameter>().unwrap(), SweptParameter::M);
        assert!("gamma".parse::<SweptParameter>().is_err());
    }

    #[test]
    fn seeds_differ_across_trials_and_settings() {
        let mut seen = std::collections::HashSet::new();
        for s in 0..5 {
            for t in 0..50 {
                assert!(seen.insert(trial_seed(7, s, t)));
            }
        }
    }
}
