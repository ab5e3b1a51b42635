//! End-to-end localization from a measurement set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{self, Point2};
use crate::scalar::Scalar;
use crate::sdr::{assemble_problem, weight_kappa};
use crate::sim::MeasurementSet;
use crate::solver::{self, SolveStatus, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Regularized relaxation with connectivity-dependent weight.
    Proposed,
    /// Unregularized relaxation (weight 0).
    Plain,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Proposed, Method::Plain];

    pub fn name(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Plain => "plain",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "proposed" | "p" => Ok(Method::Proposed),
            "plain" | "c2" => Ok(Method::Plain),
            other => Err(Error::InvalidInput(format!("unknown method '{other}' (expected proposed or plain)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LocalizationResult<T> {
    pub method: Method,
    #[serde(rename = "C")]
    pub connectivity: T,
    #[serde(rename = "kappa")]
    pub kappa_used: T,
    pub objective: T,
    pub tightness: T,
    pub positions: Vec<Point2<T>>,
    #[serde(skip, default = "default_status")]
    pub status: SolveStatus,
    #[serde(skip)]
    pub iterations: usize,
}

fn default_status() -> SolveStatus {
    SolveStatus::Optimal
}

/// Weight applied by `method` at connectivity `c`.
pub fn kappa_for<T: Scalar>(method: Method, c: T) -> T {
    match method {
        Method::Proposed => weight_kappa(c),
        Method::Plain => T::zero(),
    }
}

/// Estimates unknown positions using only reported anchors and measured
/// ranges. Connectivity is computed from the measured edges.
pub fn localize<T: Scalar>(
    meas: &MeasurementSet<T>,
    method: Method,
    opts: &SolverOptions<T>,
) -> Result<LocalizationResult<T>> {
    let sets = meas.neighbor_sets();
    let components = net::component_count(&sets, meas.n(), meas.m());
    if components != 1 {
        return Err(Error::NotConnected { components });
    }
    let connectivity = net::connectivity_measure(&sets, meas.n(), meas.m());
    let kappa_used = kappa_for(method, connectivity);
    let problem = assemble_problem(meas, kappa_used)?;
    let sol = solver::solve(&problem, opts)?;
    if sol.status == SolveStatus::Failed {
        return Err(Error::SolverFailed(format!(
            "{} after {} iterations (C = {connectivity}, kappa = {kappa_used}, residuals {:e}/{:e}, gap {:e})",
            sol.message, sol.iterations, sol.primal_residual, sol.dual_residual, sol.relative_gap
        )));
    }
    Ok(LocalizationResult {
        method,
        connectivity,
        kappa_used,
        objective: sol.objective_value,
        tightness: solver::tightness(&sol, meas.n())?,
        positions: solver::extract_positions(&sol, meas.n())?,
        status: sol.status,
        iterations: sol.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{Edge, EdgeKind};

    #[test]
    fn disconnected_input_is_rejected() {
        let meas = MeasurementSet::new(
            2,
            0.5,
            vec![Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)],
            vec![
                Edge { i: 0, j: 0, kind: EdgeKind::UnknownAnchor, dbar: 0.2 },
                Edge { i: 1, j: 1, kind: EdgeKind::UnknownAnchor, dbar: 0.2 },
            ],
        )
        .unwrap();
        assert!(matches!(
            localize(&meas, Method::Proposed, &SolverOptions::default()),
            Err(Error::NotConnected { components: 2 })
        ));
    }

    #[test]
    fn method_parsing() {
        assert_eq!("plain".parse::<Method>().unwrap(), Method::Plain);
        assert_eq!("Proposed".parse::<Method>().unwrap(), Method::Proposed);
        assert!("c1".parse::<Method>().is_err());
    }

    #[test]
    fn result_json_keys() {
        let r = LocalizationResult {
            method: Method::Plain,
            connectivity: 0.25,
            kappa_used: 0.0,
            objective: 1.5,
            tightness: 0.0,
            positions: vec![Point2::new(0.5, 0.25)],
            status: SolveStatus::Optimal,
            iterations: 12,
        };
        let v = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["C", "kappa", "method", "objective", "positions", "tightness"]);
        assert_eq!(v["method"], "plain");
        assert_eq!(v["positions"], serde_json::json!([[0.5, 0.25]]));
    }
}
