use crate::error::{invalid, Result};
use crate::scalar::{total_cmp, wrap_angle, Scalar};

use super::sphere::spherical_to_cartesian;

/// Values of `α` closer than this to 1 use the `α = 1` branch of every formula.
pub const UNIT_ALPHA_TOL: f64 = 1e-10;

#[inline]
pub fn is_unit_alpha<T: Scalar>(alpha: T) -> bool {
    (alpha - T::one()).abs() < T::lit(UNIT_ALPHA_TOL)
}

/// Univariate stable parameters `(α, β, γ, δ)`: tail index, skewness, scale, location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub delta: T,
}

impl<T: Scalar> StableParams<T> {
    pub fn new(alpha: T, beta: T, gamma: T, delta: T) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            gamma,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > T::zero() && self.alpha <= T::lit(2.0)) {
            return Err(invalid(format!("alpha must lie in (0, 2], got {}", self.alpha)));
        }
        if !(self.beta >= -T::one() && self.beta <= T::one()) {
            return Err(invalid(format!("beta must lie in [-1, 1], got {}", self.beta)));
        }
        if !(self.gamma > T::zero()) || !self.gamma.is_finite() {
            return Err(invalid(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !self.delta.is_finite() {
            return Err(invalid("delta must be finite"));
        }
        Ok(())
    }

    pub fn from_slice(theta: &[T]) -> Result<Self> {
        match theta {
            [a, b, g, d] => Self::new(*a, *b, *g, *d),
            _ => Err(invalid(format!(
                "univariate parameter vector has length {}, expected 4",
                theta.len()
            ))),
        }
    }

    pub fn to_vec(&self) -> Vec<T> {
        vec![self.alpha, self.beta, self.gamma, self.delta]
    }
}

/// Shape of a parameter vector.
///
/// Univariate: `(α, β, γ, δ)`. Multivariate with `d` dimensions and `k` masses:
/// `(w_1..w_k, φ_1 (d-1 angles), …, φ_k, μ⁰_1..μ⁰_d, α)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Univariate,
    Multivariate { dim: usize, masses: usize },
}

impl ModelKind {
    pub fn param_dim(&self) -> usize {
        match *self {
            ModelKind::Univariate => 4,
            ModelKind::Multivariate { dim, masses } => masses + masses * (dim - 1) + dim + 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelKind::Univariate => Ok(()),
            ModelKind::Multivariate { dim, masses } => {
                if dim < 2 {
                    return Err(invalid("multivariate model needs dimension >= 2"));
                }
                if masses < 1 {
                    return Err(invalid("multivariate model needs at least one spectral mass"));
                }
                Ok(())
            }
        }
    }
}

/// `d`-variate stable law with a discrete spectral measure of `k` point masses.
///
/// Masses are kept in canonical order: nondecreasing first Cartesian coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralStableModel<T> {
    dim: usize,
    alpha: T,
    weights: Vec<T>,
    angles: Vec<Vec<T>>,
    mu0: Vec<T>,
}

impl<T: Scalar> SpectralStableModel<T> {
    /// Builds a model, wrapping angles into `[0, 2π)` and sorting masses into
    /// canonical order.
    pub fn new(alpha: T, weights: Vec<T>, angles: Vec<Vec<T>>, mu0: Vec<T>) -> Result<Self> {
        let dim = mu0.len();
        if dim < 2 {
            return Err(invalid("location vector must have dimension >= 2"));
        }
        if weights.is_empty() || weights.len() != angles.len() {
            return Err(invalid(format!(
                "{} weights but {} angle rows",
                weights.len(),
                angles.len()
            )));
        }
        if angles.iter().any(|a| a.len() != dim - 1) {
            return Err(invalid(format!("every angle row must have {} entries", dim - 1)));
        }
        if !(alpha > T::zero() && alpha <= T::lit(2.0)) {
            return Err(invalid(format!("alpha must lie in (0, 2], got {alpha}")));
        }
        if weights.iter().any(|&w| !(w >= T::zero())) {
            return Err(invalid("spectral weights must be nonnegative"));
        }
        let total: T = weights.iter().copied().sum();
        if (total - T::one()).abs() > T::invariant_tol() {
            return Err(invalid(format!("spectral weights sum to {total}, expected 1")));
        }
        if angles.iter().flatten().chain(&mu0).any(|x| !x.is_finite()) {
            return Err(invalid("angles and location must be finite"));
        }
        let mut model = Self {
            dim,
            alpha,
            weights,
            angles,
            mu0,
        };
        model.canonicalize();
        Ok(model)
    }

    /// Reads a parameter vector laid out as described on [`ModelKind`].
    pub fn from_theta(dim: usize, masses: usize, theta: &[T]) -> Result<Self> {
        let kind = ModelKind::Multivariate { dim, masses };
        kind.validate()?;
        if theta.len() != kind.param_dim() {
            return Err(invalid(format!(
                "parameter vector has length {}, expected {}",
                theta.len(),
                kind.param_dim()
            )));
        }
        let weights = theta[..masses].to_vec();
        let angles = theta[masses..masses + masses * (dim - 1)]
            .chunks(dim - 1)
            .map(<[T]>::to_vec)
            .collect();
        let off = masses + masses * (dim - 1);
        let mu0 = theta[off..off + dim].to_vec();
        Self::new(theta[off + dim], weights, angles, mu0)
    }

    pub fn to_theta(&self) -> Vec<T> {
        let mut v = self.weights.clone();
        v.extend(self.angles.iter().flatten());
        v.extend(&self.mu0);
        v.push(self.alpha);
        v
    }

    pub fn kind(&self) -> ModelKind {
        ModelKind::Multivariate {
            dim: self.dim,
            masses: self.weights.len(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn masses(&self) -> usize {
        self.weights.len()
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn angles(&self) -> &[Vec<T>] {
        &self.angles
    }

    pub fn mu0(&self) -> &[T] {
        &self.mu0
    }

    /// Cartesian unit vectors `s_j` of the point masses.
    pub fn locations(&self) -> Vec<Vec<T>> {
        self.angles.iter().map(|a| spherical_to_cartesian(a)).collect()
    }

    fn canonicalize(&mut self) {
        for row in &mut self.angles {
            for a in row.iter_mut() {
                *a = wrap_angle(*a);
            }
        }
        let order = canonical_order(&self.angles);
        self.weights = order.iter().map(|&i| self.weights[i]).collect();
        self.angles = order.iter().map(|&i| self.angles[i].clone()).collect();
    }
}

/// Mass order sorting the first Cartesian coordinate `cos φ_{j,1}` ascending.
fn canonical_order<T: Scalar>(angles: &[Vec<T>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..angles.len()).collect();
    order.sort_by(|&a, &b| total_cmp(&angles[a][0].cos(), &angles[b][0].cos()));
    order
}

/// Wraps angles and sorts masses of a multivariate parameter vector in place so
/// that the ordering constraint holds.
pub fn canonicalize_theta<T: Scalar>(dim: usize, masses: usize, theta: &mut [T]) {
    let stride = dim - 1;
    let ang_off = masses;
    for a in &mut theta[ang_off..ang_off + masses * stride] {
        *a = wrap_angle(*a);
    }
    let angles: Vec<Vec<T>> = theta[ang_off..ang_off + masses * stride]
        .chunks(stride)
        .map(<[T]>::to_vec)
        .collect();
    let order = canonical_order(&angles);
    if order.iter().enumerate().all(|(i, &j)| i == j) {
        return;
    }
    let weights: Vec<T> = theta[..masses].to_vec();
    for (slot, &src) in order.iter().enumerate() {
        theta[slot] = weights[src];
        theta[ang_off + slot * stride..ang_off + (slot + 1) * stride].copy_from_slice(&angles[src]);
    }
}

/// True when the masses of a multivariate parameter vector satisfy the ordering constraint.
pub fn satisfies_ordering<T: Scalar>(dim: usize, masses: usize, theta: &[T]) -> bool {
    let stride = dim - 1;
    (1..masses).all(|j| theta[masses + (j - 1) * stride].cos() <= theta[masses + j * stride].cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn stable_params_validation() {
        assert!(StableParams::new(1.5, 0.0, 1.0, 0.0).is_ok());
        assert!(StableParams::new(2.1, 0.0, 1.0, 0.0).is_err());
        assert!(StableParams::new(0.0, 0.0, 1.0, 0.0).is_err());
        assert!(StableParams::new(1.5, 1.1, 1.0, 0.0).is_err());
        assert!(StableParams::new(1.5, 0.0, 0.0, 0.0).is_err());
        assert!(StableParams::new(1.5, 0.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn spectral_model_canonical_order() {
        let m = SpectralStableModel::new(1.7, vec![0.6, 0.4], vec![vec![FRAC_PI_4], vec![PI]], vec![0.0, 0.0])
            .unwrap();
        assert_eq!(m.weights(), &[0.4, 0.6]);
        assert_eq!(m.angles()[0][0], PI);
        let s = m.locations();
        assert!(s[0][0] <= s[1][0]);
        for loc in &s {
            let norm: f64 = loc.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn theta_round_trip() {
        let m = SpectralStableModel::new(
            1.6,
            vec![0.3, 0.7],
            vec![vec![FRAC_PI_4, PI], vec![PI / 2.0, 1.5 * PI]],
            vec![0.1, -0.2, 0.3],
        )
        .unwrap();
        let theta = m.to_theta();
        assert_eq!(theta.len(), ModelKind::Multivariate { dim: 3, masses: 2 }.param_dim());
        assert_eq!(SpectralStableModel::from_theta(3, 2, &theta).unwrap(), m);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(SpectralStableModel::new(1.5, vec![0.5, 0.6], vec![vec![0.0], vec![1.0]], vec![0.0, 0.0]).is_err());
        assert!(SpectralStableModel::new(1.5, vec![1.5, -0.5], vec![vec![0.0], vec![1.0]], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn canonicalize_theta_sorts_and_wraps() {
        let mut theta = vec![0.6, 0.4, FRAC_PI_4 + 2.0 * PI, PI, 0.0, 0.0, 1.7];
        canonicalize_theta(2, 2, &mut theta);
        assert_eq!(&theta[..2], &[0.4, 0.6]);
        assert!((theta[3] - FRAC_PI_4).abs() < 1e-12);
        assert!(satisfies_ordering(2, 2, &theta));
    }
}
