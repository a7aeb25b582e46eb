//! Kernel-density mutation: an ancestor is drawn from the previous population
//! and perturbed, and the resulting mixture density corrects the weights.

use std::collections::HashMap;

use crate::error::{invalid, Result};
use crate::rng::StreamRng;
use crate::scalar::{wrap_angle, Scalar};
use crate::stable_model::{canonicalize_theta, dirichlet_draw};

use super::model::ParamLayout;
use super::population::Population;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::gamma::ln_gamma;

/// A proposal built from a population.
pub trait Mutation<T: Scalar>: Sync {
    type Mixture: MixtureKernel<T>;

    fn mixture(&self, pop: &Population<T>) -> Result<Self::Mixture>;
}

/// The proposal `M_t` of one stage.
pub trait MixtureKernel<T: Scalar>: Sync {
    fn propose(&self, rng: &mut StreamRng) -> Vec<T>;
    /// `ln M_t(θ)`, consistent with [`MixtureKernel::propose`].
    fn log_density(&self, theta: &[T]) -> T;
}

/// Variances of the Gaussian perturbation, per perturbed coordinate.
#[derive(Debug, Clone, PartialEq)]
pub enum Bandwidth<T> {
    /// Fixed diagonal `Λ`.
    Fixed(Vec<T>),
    /// `Λ_j = scale × weighted variance of coordinate j` in the population being
    /// mutated (angles use the wrapped deviation from the circular mean), with
    /// `floor` as a lower bound on every entry. The Dirichlet concentration is
    /// adapted the same way: `κ` is chosen so the proposal variance of the
    /// simplex weights is `scale ×` their population variance.
    PopulationScaled { scale: T, floor: T },
}

/// Gaussian kernel on real and angular coordinates and an ancestor-centred
/// `Dirichlet(κ w + 1)` on simplex weights.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeMutation<T> {
    pub layout: ParamLayout,
    pub bandwidth: Bandwidth<T>,
    pub kappa: T,
}

impl<T: Scalar> KdeMutation<T> {
    pub fn new(layout: ParamLayout, bandwidth: Bandwidth<T>, kappa: T) -> Result<Self> {
        let n = perturbed_len(layout);
        match &bandwidth {
            Bandwidth::Fixed(l) => {
                if l.len() != n {
                    return Err(invalid(format!("mutation covariance needs {n} diagonal entries, got {}", l.len())));
                }
                if l.iter().any(|&v| !(v > T::zero()) || !v.is_finite()) {
                    return Err(invalid("mutation variances must be positive and finite"));
                }
            }
            Bandwidth::PopulationScaled { scale, floor } => {
                if !(*scale > T::zero()) || !(*floor > T::zero()) {
                    return Err(invalid("bandwidth scale and floor must be positive"));
                }
            }
        }
        if matches!(layout, ParamLayout::Spectral { .. }) && !(kappa > T::zero()) {
            return Err(invalid("Dirichlet concentration must be positive"));
        }
        Ok(Self { layout, bandwidth, kappa })
    }

    fn variances(&self, pop: &Population<T>) -> Vec<T> {
        match &self.bandwidth {
            Bandwidth::Fixed(l) => l.clone(),
            Bandwidth::PopulationScaled { scale, floor } => {
                let (off, n_ang) = match self.layout {
                    ParamLayout::Euclidean(_) => (0, 0),
                    ParamLayout::Spectral { dim, masses } => (masses, masses * (dim - 1)),
                };
                let n = perturbed_len(self.layout);
                (0..n)
                    .map(|j| {
                        let col = off + j;
                        let v = if j < n_ang {
                            let (s, c) = pop.particles.iter().fold((T::zero(), T::zero()), |(s, c), p| {
                                let (sn, cs) = p.theta[col].sin_cos();
                                (s + p.weight * sn, c + p.weight * cs)
                            });
                            let centre = s.atan2(c);
                            pop.particles
                                .iter()
                                .map(|p| {
                                    let d = wrap_angle(p.theta[col] - centre + T::PI()) - T::PI();
                                    p.weight * d * d
                                })
                                .sum()
                        } else {
                            let m: T = pop.particles.iter().map(|p| p.weight * p.theta[col]).sum();
                            pop.particles
                                .iter()
                                .map(|p| p.weight * (p.theta[col] - m) * (p.theta[col] - m))
                                .sum()
                        };
                        (*scale * v).max(*floor)
                    })
                    .collect()
            }
        }
    }
}

/// Concentration giving `Dir(κ w + 1)` about `scale ×` the population variance
/// of the simplex weights.
fn adapted_kappa<T: Scalar>(pop: &Population<T>, masses: usize, scale: T) -> Option<T> {
    let mut spread = T::zero();
    let mut var = T::zero();
    for j in 0..masses {
        let m: T = pop.particles.iter().map(|p| p.weight * p.theta[j]).sum();
        let v: T = pop.particles.iter().map(|p| p.weight * (p.theta[j] - m) * (p.theta[j] - m)).sum();
        spread = spread + m * (T::one() - m);
        var = var + v;
    }
    // Var ≈ w(1 − w)/(κ + k + 1) for Dir(κ w + 1)
    let k = spread / (scale * var) - T::from_usize_lossy(masses + 1);
    (k.is_finite() && var > T::zero()).then(|| k.max(T::lit(0.5)).min(T::lit(1e6)))
}

/// Number of Gaussian-perturbed coordinates (everything except simplex weights).
pub fn perturbed_len(layout: ParamLayout) -> usize {
    match layout {
        ParamLayout::Euclidean(n) => n,
        ParamLayout::Spectral { dim, masses } => masses * (dim - 1) + dim + 1,
    }
}

impl<T: Scalar> Mutation<T> for KdeMutation<T> {
    type Mixture = KdeMixture<T>;

    fn mixture(&self, pop: &Population<T>) -> Result<KdeMixture<T>> {
        KdeMixture::new(self, pop)
    }
}

#[derive(Debug, Clone)]
struct Component<T> {
    theta: Vec<T>,
    log_weight: T,
    /// Dirichlet parameters `κ w + 1` and their log normalizing constant.
    conc: Vec<T>,
    log_beta: T,
}

#[derive(Debug, Clone)]
pub struct KdeMixture<T> {
    layout: ParamLayout,
    components: Vec<Component<T>>,
    cumulative: Vec<f64>,
    kappa: T,
    variances: Vec<T>,
    sds: Vec<T>,
    log_norm: Vec<T>,
    /// Images `±2πm` needed per coordinate after reducing to `[−π, π)`.
    wraps: Vec<i32>,
    half_inv_var: Vec<T>,
    permutations: Vec<Vec<usize>>,
}

impl<T: Scalar> KdeMixture<T> {
    fn new(m: &KdeMutation<T>, pop: &Population<T>) -> Result<Self> {
        if pop.is_empty() {
            return Err(invalid("cannot mutate an empty population"));
        }
        let variances = m.variances(pop);
        // merge identical particles (resampling produces many copies)
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut thetas: Vec<Vec<T>> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for p in &pop.particles {
            if !(p.weight > T::zero()) {
                continue;
            }
            let key: Vec<u64> = p.theta.iter().map(|x| x.as_f64().to_bits()).collect();
            match index.get(&key) {
                Some(&i) => weights[i] += p.weight.as_f64(),
                None => {
                    index.insert(key, thetas.len());
                    thetas.push(p.theta.clone());
                    weights.push(p.weight.as_f64());
                }
            }
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(invalid("population has no positive weight"));
        }
        let masses = match m.layout {
            ParamLayout::Spectral { masses, .. } => masses,
            ParamLayout::Euclidean(_) => 0,
        };
        let kappa = match (&m.bandwidth, masses) {
            (Bandwidth::PopulationScaled { scale, .. }, k) if k > 1 => adapted_kappa(pop, k, *scale).unwrap_or(m.kappa),
            _ => m.kappa,
        };
        let components = thetas
            .into_iter()
            .zip(&weights)
            .map(|(theta, &w)| {
                let conc: Vec<T> = theta[..masses].iter().map(|&x| kappa * x + T::one()).collect();
                let a0: f64 = conc.iter().map(|a| a.as_f64()).sum();
                let log_beta = if masses > 0 {
                    T::lit(ln_gamma(a0) - conc.iter().map(|a| ln_gamma(a.as_f64())).sum::<f64>())
                } else {
                    T::zero()
                };
                Component { theta, log_weight: T::lit((w / total).ln()), conc, log_beta }
            })
            .collect();
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        let sds: Vec<T> = variances.iter().map(|v| v.sqrt()).collect();
        let log_norm = variances.iter().map(|&v| -T::lit(0.5) * (T::TAU() * v).ln()).collect();
        let wraps = sds
            .iter()
            .map(|s| ((8.0 * s.as_f64() - std::f64::consts::PI) / std::f64::consts::TAU).ceil().max(0.0) as i32)
            .collect();
        let half_inv_var = variances.iter().map(|&v| T::lit(0.5) / v).collect();
        Ok(Self {
            layout: m.layout,
            components,
            cumulative,
            kappa,
            variances,
            sds,
            log_norm,
            wraps,
            half_inv_var,
            permutations: permutations(masses),
        })
    }

    pub fn components(&self) -> usize {
        self.components.len()
    }

    pub fn variances(&self) -> &[T] {
        &self.variances
    }

    /// Dirichlet concentration in use.
    pub fn kappa(&self) -> T {
        self.kappa
    }

    fn pick(&self, rng: &mut StreamRng) -> &Component<T> {
        let u: f64 = rng.random();
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.components.len() - 1);
        &self.components[i]
    }

    #[inline]
    fn log_normal(&self, j: usize, x: T) -> T {
        self.log_norm[j] - x * x * self.half_inv_var[j]
    }

    #[inline]
    fn log_wrapped_normal(&self, j: usize, x: T) -> T {
        let x = x - T::TAU() * (x / T::TAU()).round();
        let w = self.wraps[j];
        if w == 0 {
            return self.log_normal(j, x);
        }
        let s: T = (-w..=w)
            .map(|m| {
                let y = x + T::TAU() * T::lit(m as f64);
                (-y * y * self.half_inv_var[j]).exp()
            })
            .sum();
        self.log_norm[j] + s.ln()
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..k).collect();
    heap_permute(k, &mut p, &mut out);
    out
}

fn heap_permute(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(p.clone());
        return;
    }
    for i in 0..k {
        heap_permute(k - 1, p, out);
        if k % 2 == 0 {
            p.swap(i, k - 1);
        } else {
            p.swap(0, k - 1);
        }
    }
}

impl<T: Scalar> MixtureKernel<T> for KdeMixture<T> {
    fn propose(&self, rng: &mut StreamRng) -> Vec<T> {
        let c = self.pick(rng);
        let mut theta = c.theta.clone();
        match self.layout {
            ParamLayout::Euclidean(_) => {
                for (x, &sd) in theta.iter_mut().zip(&self.sds) {
                    let z: f64 = StandardNormal.sample(rng);
                    *x = *x + sd * T::lit(z);
                }
            }
            ParamLayout::Spectral { dim, masses } => {
                let w = dirichlet_draw(&c.conc, rng);
                theta[..masses].copy_from_slice(&w);
                let n_ang = masses * (dim - 1);
                for (j, x) in theta[masses..].iter_mut().enumerate() {
                    let z: f64 = StandardNormal.sample(rng);
                    *x = *x + self.sds[j] * T::lit(z);
                    if j < n_ang {
                        *x = wrap_angle(*x);
                    }
                }
                canonicalize_theta(dim, masses, &mut theta);
            }
        }
        theta
    }

    fn log_density(&self, theta: &[T]) -> T {
        if theta.len() != self.layout.len() || theta.iter().any(|x| !x.is_finite()) {
            return T::neg_infinity();
        }
        let mut acc = LogSumExp::new();
        match self.layout {
            ParamLayout::Euclidean(_) => {
                for c in &self.components {
                    let mut lp = c.log_weight;
                    for (j, (&x, &m)) in theta.iter().zip(&c.theta).enumerate() {
                        lp = lp + self.log_normal(j, x - m);
                    }
                    acc.push(lp);
                }
            }
            ParamLayout::Spectral { dim, masses } => {
                let stride = dim - 1;
                let n_ang = masses * stride;
                let w = &theta[..masses];
                if w.iter().any(|&x| !(x > T::zero())) {
                    return T::neg_infinity();
                }
                let ln_w: Vec<T> = w.iter().map(|x| x.ln()).collect();
                let tail = masses + n_ang;
                for c in &self.components {
                    let mut shared = c.log_weight + c.log_beta;
                    for i in tail..theta.len() {
                        shared = shared + self.log_normal(i - masses, theta[i] - c.theta[i]);
                    }
                    // θ's masses in every order, matched against the ancestor's labels
                    for perm in &self.permutations {
                        let mut lp = shared;
                        for (slot, &src) in perm.iter().enumerate() {
                            lp = lp + (c.conc[slot] - T::one()) * ln_w[src];
                            for a in 0..stride {
                                let j = slot * stride + a;
                                let x = theta[masses + src * stride + a] - c.theta[masses + j];
                                lp = lp + self.log_wrapped_normal(j, x);
                            }
                        }
                        acc.push(lp);
                    }
                }
            }
        }
        acc.value()
    }
}

/// Streaming `ln Σ exp(x_i)`.
struct LogSumExp<T> {
    max: T,
    sum: T,
}

impl<T: Scalar> LogSumExp<T> {
    fn new() -> Self {
        Self { max: T::neg_infinity(), sum: T::zero() }
    }

    #[inline]
    fn push(&mut self, x: T) {
        if x == T::neg_infinity() || x.is_nan() {
            return;
        }
        if x > self.max {
            self.sum = self.sum * (self.max - x).exp() + T::one();
            self.max = x;
        } else {
            self.sum = self.sum + (x - self.max).exp();
        }
    }

    fn value(&self) -> T {
        if self.max == T::neg_infinity() {
            self.max
        } else {
            self.max + self.sum.ln()
        }
    }
}
