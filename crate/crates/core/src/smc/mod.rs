//! Sequential Monte Carlo ABC with partial rejection control.

mod config;
mod estimate;
mod kernel;
mod mcculloch;
mod model;
mod mutation;
mod population;
mod sampler;

pub use config::{default_lambda, default_schedule, AbcConfig, CovarianceForm};
pub use estimate::*;
pub use kernel::{kernel_weight, GaussianKernel};
pub use mcculloch::{mcculloch_estimate, population_spreads, McCullochTable};
pub use model::{abc_target_density, abc_target_log_density, AbcModel, ParamLayout, StableAbcModel, TargetEval};
pub use mutation::{perturbed_len, Bandwidth, KdeMixture, KdeMutation, MixtureKernel, Mutation};
pub use population::{ess, normalize_log_weights, resample_indices, Particle, Population, StageTrace};
pub use sampler::{initialize, prc_stage, run_sampler, SmcRun, StageOutcome, Termination};
