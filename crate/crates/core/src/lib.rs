//! Likelihood-free Bayesian inference for univariate and multivariate
//! α-stable models: exact simulation, summary statistics and a
//! partial-rejection-control ABC sequential Monte Carlo sampler.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`, which is what the studies use.

pub mod data;
pub mod error;
pub mod linalg;
pub mod rng;
pub mod scalar;
pub mod smc;
pub mod stable_model;
pub mod summaries;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use smc::{run_smc, AbcModel, Bandwidth, CovarianceForm, ParamLayout, Termination};
pub use stable_model::ModelKind;
pub use summaries::{BaseFamily, SummaryFamily, SummaryStatus};

pub type Dataset = data::Dataset<f64>;
pub type Matrix = linalg::Matrix<f64>;
pub type StableParams = stable_model::StableParams<f64>;
pub type SpectralStableModel = stable_model::SpectralStableModel<f64>;
pub type PriorSpec = stable_model::PriorSpec<f64>;
pub type SummaryVector = summaries::SummaryVector<f64>;
pub type SummarySpec = summaries::SummarySpec<f64>;
pub type ProjectionSet = summaries::ProjectionSet<f64>;
pub type Summarizer = summaries::Summarizer<f64>;
pub type AbcConfig = smc::AbcConfig<f64>;
pub type Particle = smc::Particle<f64>;
pub type Population = smc::Population<f64>;
pub type StageTrace = smc::StageTrace<f64>;
pub type SmcRun = smc::SmcRun<f64>;
pub type FitSetup = smc::FitSetup<f64>;
pub type FitResult = smc::FitResult<f64>;
