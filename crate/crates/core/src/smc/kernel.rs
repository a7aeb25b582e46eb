//! Gaussian ABC kernel `N(S(y); S(x), ε² Σ̂)`.

use crate::error::{invalid, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::scalar::Scalar;
use crate::summaries::SummaryVector;

/// Observed summary together with the factorized kernel covariance.
#[derive(Debug, Clone)]
pub struct GaussianKernel<T> {
    observed: SummaryVector<T>,
    chol: Cholesky<T>,
    /// `−q/2 ln 2π − ½ ln det Σ̂`
    log_norm: T,
}

impl<T: Scalar> GaussianKernel<T> {
    pub fn new(observed: SummaryVector<T>, sigma: &Matrix<T>) -> Result<Self> {
        if observed.is_degenerate() {
            return Err(invalid("observed summary is degenerate"));
        }
        if sigma.rows() != observed.len() {
            return Err(invalid(format!(
                "kernel covariance is {}x{}, summary length {}",
                sigma.rows(),
                sigma.cols(),
                observed.len()
            )));
        }
        let chol = Cholesky::new(sigma)?;
        let q = T::from_usize_lossy(observed.len());
        let log_norm = -T::lit(0.5) * q * T::TAU().ln() - T::lit(0.5) * chol.log_det();
        Ok(Self { observed, chol, log_norm })
    }

    pub fn observed(&self) -> &SummaryVector<T> {
        &self.observed
    }

    /// Log density; `-inf` for degenerate simulated summaries.
    pub fn log_weight(&self, sim: &SummaryVector<T>, eps: T) -> Result<T> {
        if sim.len() != self.observed.len() || sim.family != self.observed.family {
            return Err(invalid("summary family or length mismatch"));
        }
        if sim.is_degenerate() {
            return Ok(T::neg_infinity());
        }
        let diff: Vec<T> = self.observed.values.iter().zip(&sim.values).map(|(&a, &b)| a - b).collect();
        let m = self.chol.mahalanobis_sq(&diff);
        let q = T::from_usize_lossy(diff.len());
        let lw = self.log_norm - q * eps.ln() - T::lit(0.5) * m / (eps * eps);
        Ok(if lw.is_nan() { T::neg_infinity() } else { lw })
    }
}

/// Density of `N(s_obs; s_sim, ε² Σ̂)`; zero when `s_sim` is degenerate.
pub fn kernel_weight<T: Scalar>(s_obs: &SummaryVector<T>, s_sim: &SummaryVector<T>, eps: T, sigma: &Matrix<T>) -> Result<T> {
    if !(eps > T::zero()) {
        return Err(invalid("epsilon must be positive"));
    }
    if s_obs.len() != s_sim.len() {
        return Err(invalid("summary length mismatch"));
    }
    if s_sim.is_degenerate() {
        return Ok(T::zero());
    }
    // the density is symmetric in the two arguments, so a degenerate observed
    // side is treated the same way
    if s_obs.is_degenerate() {
        return Ok(T::zero());
    }
    let k = GaussianKernel::new(s_obs.clone(), sigma)?;
    k.log_weight(s_sim, eps).map(T::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summaries::{SummaryFamily, SummaryStatus};

    fn sv(v: Vec<f64>) -> SummaryVector<f64> {
        SummaryVector::new(SummaryFamily::S1, v, SummaryStatus::Ok)
    }

    #[test]
    fn standard_normal_at_zero() {
        let w = kernel_weight(&sv(vec![0.3]), &sv(vec![0.3]), 1.0, &Matrix::identity(1)).unwrap();
        assert!((w - 0.398_942_280_401_432_7).abs() < 1e-15);
    }

    #[test]
    fn scaling_and_symmetry() {
        let sigma = Matrix::from_rows(&[vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
        let (a, b) = (sv(vec![1.0, 2.0]), sv(vec![0.5, 2.5]));
        let ab = kernel_weight(&a, &b, 0.7, &sigma).unwrap();
        let ba = kernel_weight(&b, &a, 0.7, &sigma).unwrap();
        assert!((ab - ba).abs() < 1e-15 * ab.max(1.0));
        let w1 = kernel_weight(&a, &a, 1.0, &sigma).unwrap();
        let w2 = kernel_weight(&a, &a, 0.5, &sigma).unwrap();
        assert!((w2 / w1 - 4.0).abs() < 1e-12);
        assert_eq!(kernel_weight(&a, &b, 1e-3, &sigma).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_gets_zero() {
        let d = SummaryVector::degenerate(SummaryFamily::S1, 1);
        assert_eq!(kernel_weight(&sv(vec![0.0]), &d, 1.0, &Matrix::identity(1)).unwrap(), 0.0);
        assert!(kernel_weight(&sv(vec![0.0, 1.0]), &sv(vec![0.0]), 1.0, &Matrix::identity(1)).is_err());
    }
}
