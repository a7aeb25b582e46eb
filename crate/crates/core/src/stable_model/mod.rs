//! Parameterizations, characteristic functions, priors, sphere geometry and
//! exact simulation of stable data in one and `d` dimensions.

mod cdf;
mod charfn;
mod params;
mod prior;
mod sampling;
mod sphere;

pub use cdf::{cdf_univariate, quantile_univariate};
pub(crate) use cdf::standard_quantile;
pub use charfn::{char_fn_multivariate, char_fn_univariate, log_char_fn_univariate, psi};
pub use params::{
    canonicalize_theta, is_unit_alpha, satisfies_ordering, ModelKind, SpectralStableModel, StableParams,
    UNIT_ALPHA_TOL,
};
pub use prior::{dirichlet_draw, dirichlet_log_density, Interval, PriorSpec, SpectralPrior, UniformBox};
pub use sampling::{sample_multivariate, sample_multivariate_with, sample_univariate, sample_univariate_with};
pub use sphere::{cartesian_to_spherical, spherical_to_cartesian};

use crate::data::Dataset;
use crate::error::Result;
use crate::rng::StreamRng;
use crate::scalar::Scalar;

/// Simulates `n` observations from the model described by `theta`.
pub fn simulate<T: Scalar>(kind: ModelKind, theta: &[T], n: usize, rng: &mut StreamRng) -> Result<Dataset<T>> {
    match kind {
        ModelKind::Univariate => {
            let p = StableParams::from_slice(theta)?;
            Ok(Dataset::Univariate(sample_univariate_with(&p, n, rng)?))
        }
        ModelKind::Multivariate { dim, masses } => {
            let m = SpectralStableModel::from_theta(dim, masses, theta)?;
            Ok(Dataset::Multivariate(sample_multivariate_with(&m, n, rng)?))
        }
    }
}
