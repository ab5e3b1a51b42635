//! Cooperative localization of sensor nodes from noisy anchors and
//! RSS-derived ranges by a connectivity-regularized semidefinite relaxation.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix it to `f64`, which is what the benchmark and CLI use.

pub mod bench;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod net;
pub mod scalar;
pub mod sdr;
pub mod sim;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Point = net::Point2<f64>;
pub type Scenario = net::Scenario<f64>;
pub type ChannelParams = sim::ChannelParams<f64>;
pub type Edge = sim::Edge<f64>;
pub type MeasurementSet = sim::MeasurementSet<f64>;
pub type LocalizationResult = estimator::LocalizationResult<f64>;
pub type SolverOptions = solver::SolverOptions<f64>;
pub type ExperimentConfig = bench::ExperimentConfig<f64>;
pub type ExperimentReport = bench::ExperimentReport<f64>;

pub use estimator::{localize, Method};
pub use sim::EdgeKind;
