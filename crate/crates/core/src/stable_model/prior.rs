//! Product priors for the univariate and multivariate models.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};
use crate::rng::{open01, StreamRng};
use crate::scalar::Scalar;

use super::params::{canonicalize_theta, satisfies_ordering, ModelKind, StableParams};

/// Closed interval `[lo, hi]` carrying a uniform prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: T) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    pub fn clamp(&self, x: T) -> T {
        x.max(self.lo).min(self.hi)
    }

    fn sample(&self, rng: &mut StreamRng) -> T {
        self.lo + self.width() * T::lit(open01(rng))
    }
}

/// Independent uniform priors on `(α, β, γ, δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformBox<T> {
    pub alpha: Interval<T>,
    pub beta: Interval<T>,
    pub gamma: Interval<T>,
    pub delta: Interval<T>,
}

impl<T: Scalar> Default for UniformBox<T> {
    fn default() -> Self {
        Self {
            alpha: Interval::new(T::lit(1.1), T::lit(2.0)),
            beta: Interval::new(-T::one(), T::one()),
            gamma: Interval::new(T::zero(), T::lit(300.0)),
            delta: Interval::new(T::lit(-300.0), T::lit(300.0)),
        }
    }
}

impl<T: Scalar> UniformBox<T> {
    pub fn intervals(&self) -> [Interval<T>; 4] {
        [self.alpha, self.beta, self.gamma, self.delta]
    }

    /// Midpoint of the box, clipped to a valid parameter.
    pub fn center(&self) -> Vec<T> {
        self.intervals()
            .iter()
            .map(|i| (i.lo + i.hi) / T::lit(2.0))
            .collect()
    }
}

/// Priors for the spectral model: `w ~ Dirichlet(s, …, s)`, angles `~ U(0, 2π)`,
/// `μ⁰_j ~ N(ξ, 1/κ)`, `α ~ U(alpha)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPrior<T> {
    pub concentration: T,
    pub location_mean: T,
    pub location_precision: T,
    pub alpha: Interval<T>,
}

impl<T: Scalar> Default for SpectralPrior<T> {
    fn default() -> Self {
        Self {
            concentration: T::one(),
            location_mean: T::zero(),
            location_precision: T::lit(0.25),
            alpha: Interval::new(T::zero(), T::lit(2.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec<T> {
    pub univariate: UniformBox<T>,
    pub spectral: SpectralPrior<T>,
}

impl<T: Scalar> Default for PriorSpec<T> {
    fn default() -> Self {
        Self {
            univariate: UniformBox::default(),
            spectral: SpectralPrior::default(),
        }
    }
}

impl<T: Scalar> PriorSpec<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, i) in ["alpha", "beta", "gamma", "delta"].iter().zip(self.univariate.intervals()) {
            if !(i.lo < i.hi) {
                return Err(invalid(format!("prior bounds for {name} must satisfy lo < hi")));
            }
        }
        let sp = &self.spectral;
        if !(sp.concentration > T::zero()) {
            return Err(invalid("Dirichlet concentration must be positive"));
        }
        if !(sp.location_precision > T::zero()) {
            return Err(invalid("location precision must be positive"));
        }
        if !(sp.alpha.lo < sp.alpha.hi) {
            return Err(invalid("prior bounds for alpha must satisfy lo < hi"));
        }
        Ok(())
    }

    /// Draws a parameter vector laid out as described on [`ModelKind`].
    /// Multivariate draws are canonicalized to satisfy the ordering constraint.
    pub fn sample(&self, kind: ModelKind, rng: &mut StreamRng) -> Vec<T> {
        match kind {
            ModelKind::Univariate => self
                .univariate
                .intervals()
                .iter()
                .map(|i| {
                    // γ's support excludes its lower bound
                    let mut x = i.sample(rng);
                    while x <= T::zero() && i.lo == T::zero() {
                        x = i.sample(rng);
                    }
                    x
                })
                .collect(),
            ModelKind::Multivariate { dim, masses } => {
                let sp = &self.spectral;
                let mut theta = Vec::with_capacity(kind.param_dim());
                theta.extend(dirichlet_draw(&vec![sp.concentration; masses], rng));
                for _ in 0..masses * (dim - 1) {
                    theta.push(T::TAU() * T::lit(open01(rng)));
                }
                let sd = T::one() / sp.location_precision.sqrt();
                for _ in 0..dim {
                    let z: f64 = StandardNormal.sample(rng);
                    theta.push(sp.location_mean + sd * T::lit(z));
                }
                let mut a = sp.alpha.sample(rng);
                while a <= T::zero() {
                    a = sp.alpha.sample(rng);
                }
                theta.push(a.min(T::lit(2.0)));
                canonicalize_theta(dim, masses, &mut theta);
                theta
            }
        }
    }

    /// Log prior density; `-∞` outside the support.
    pub fn log_density(&self, kind: ModelKind, theta: &[T]) -> T {
        if theta.len() != kind.param_dim() || theta.iter().any(|x| !x.is_finite()) {
            return T::neg_infinity();
        }
        match kind {
            ModelKind::Univariate => {
                let b = &self.univariate;
                let inside = b.intervals().iter().zip(theta).all(|(i, &x)| i.contains(x));
                if !inside || StableParams::from_slice(theta).is_err() {
                    return T::neg_infinity();
                }
                -b.intervals().iter().map(|i| i.width().ln()).sum::<T>()
            }
            ModelKind::Multivariate { dim, masses } => self.log_density_spectral(dim, masses, theta),
        }
    }

    fn log_density_spectral(&self, dim: usize, masses: usize, theta: &[T]) -> T {
        let sp = &self.spectral;
        let w = &theta[..masses];
        let total: T = w.iter().copied().sum();
        if w.iter().any(|&x| x < T::zero()) || (total - T::one()).abs() > T::lit(1e-9).max(T::epsilon() * T::lit(64.0)) {
            return T::neg_infinity();
        }
        let ang = &theta[masses..masses + masses * (dim - 1)];
        if ang.iter().any(|&a| a < T::zero() || a >= T::TAU()) || !satisfies_ordering(dim, masses, theta) {
            return T::neg_infinity();
        }
        let alpha = theta[theta.len() - 1];
        if !sp.alpha.contains(alpha) || !(alpha > T::zero() && alpha <= T::lit(2.0)) {
            return T::neg_infinity();
        }
        let mut lp = dirichlet_log_density(w, &vec![sp.concentration; masses]);
        if !lp.is_finite() {
            return T::neg_infinity();
        }
        // masses are exchangeable: canonical labelling folds k! orderings together
        lp = lp + T::lit(ln_gamma(masses as f64 + 1.0));
        lp = lp - T::from_usize_lossy(masses * (dim - 1)) * T::TAU().ln();
        let off = masses + masses * (dim - 1);
        let kappa = sp.location_precision;
        let half_log = T::lit(0.5) * (kappa / T::TAU()).ln();
        for &mu in &theta[off..off + dim] {
            let z = mu - sp.location_mean;
            lp = lp + half_log - T::lit(0.5) * kappa * z * z;
        }
        lp - sp.alpha.width().ln()
    }
}

/// Dirichlet draw via normalized Gamma variates.
pub fn dirichlet_draw<T: Scalar, R: Rng + ?Sized>(conc: &[T], rng: &mut R) -> Vec<T> {
    loop {
        let g: Vec<f64> = conc
            .iter()
            .map(|&a| Gamma::new(a.as_f64(), 1.0).expect("positive concentration").sample(rng))
            .collect();
        let total: f64 = g.iter().sum();
        if total > 0.0 && total.is_finite() {
            return g.iter().map(|&x| T::lit(x / total)).collect();
        }
    }
}

/// Dirichlet log density at a point of the simplex.
pub fn dirichlet_log_density<T: Scalar>(w: &[T], conc: &[T]) -> T {
    let a0: f64 = conc.iter().map(|a| a.as_f64()).sum();
    let mut lp = ln_gamma(a0) - conc.iter().map(|a| ln_gamma(a.as_f64())).sum::<f64>();
    for (&x, &a) in w.iter().zip(conc) {
        let (x, a) = (x.as_f64(), a.as_f64());
        if a != 1.0 {
            lp += (a - 1.0) * x.ln();
        }
    }
    if lp.is_nan() {
        return T::neg_infinity();
    }
    T::lit(lp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn univariate_uniform_density() {
        let spec = PriorSpec::<f64>::default();
        let lp = spec.log_density(ModelKind::Univariate, &[1.5, 0.0, 10.0, 0.0]);
        let expect = -(0.9f64.ln() + 2f64.ln() + 300f64.ln() + 600f64.ln());
        assert!((lp - expect).abs() < 1e-12);
        assert_eq!(spec.log_density(ModelKind::Univariate, &[1.5, 0.0, -1.0, 0.0]), f64::NEG_INFINITY);
        assert_eq!(spec.log_density(ModelKind::Univariate, &[1.0, 0.0, 1.0, 0.0]), f64::NEG_INFINITY);
    }

    #[test]
    fn univariate_samples_inside_support() {
        let spec = PriorSpec::<f64>::default();
        let mut rng = stream(5, &[]);
        for _ in 0..1000 {
            let th = spec.sample(ModelKind::Univariate, &mut rng);
            assert!(spec.log_density(ModelKind::Univariate, &th).is_finite());
        }
    }

    #[test]
    fn multivariate_samples_canonical() {
        let spec = PriorSpec::<f64>::default();
        let kind = ModelKind::Multivariate { dim: 3, masses: 3 };
        let mut rng = stream(6, &[]);
        for _ in 0..500 {
            let th = spec.sample(kind, &mut rng);
            let w = &th[..3];
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(w.iter().all(|&x| x >= 0.0));
            assert!(satisfies_ordering(3, 3, &th));
            assert!(spec.log_density(kind, &th).is_finite());
        }
    }

    #[test]
    fn dirichlet_density_uniform_case() {
        // Dirichlet(1,1,1) is uniform on the 2-simplex with density Γ(3) = 2
        let lp = dirichlet_log_density(&[0.2, 0.3, 0.5], &[1.0, 1.0, 1.0]);
        assert!((lp - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn invalid_spec_rejected() {
        let mut spec = PriorSpec::<f64>::default();
        spec.univariate.gamma = Interval::new(5.0, 5.0);
        assert!(spec.validate().is_err());
        let mut spec = PriorSpec::<f64>::default();
        spec.spectral.location_precision = 0.0;
        assert!(spec.validate().is_err());
    }
}
