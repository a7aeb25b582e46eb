//! McCulloch's quantile estimator: tables of `v_α`, `v_β` and the
//! standardized interquartile range over `α ∈ [1, 2]`, `β ∈ [0, 1]`, computed
//! once from the distribution function and inverted by interpolation.

use std::sync::OnceLock;

use crate::scalar::Scalar;
use crate::stable_model::standard_quantile;
use crate::summaries::QuantileSpreads;

pub const ALPHA_GRID_STEP: f64 = 0.05;
pub const BETA_GRID_STEP: f64 = 0.1;
const N_ALPHA: usize = 21;
const N_BETA: usize = 11;

/// Population quantile spreads on the `(α, β)` grid.
#[derive(Debug, Clone)]
pub struct McCullochTable {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// `[alpha][beta]`
    pub v_alpha: Vec<Vec<f64>>,
    pub v_beta: Vec<Vec<f64>>,
    /// `(q.75 − q.25)/γ`
    pub iqr: Vec<Vec<f64>>,
}

/// Population spreads of the standardized law.
pub fn population_spreads(alpha: f64, beta: f64) -> QuantileSpreads<f64> {
    let q = |p| standard_quantile(alpha, beta, p);
    let (q05, q25, q50, q75, q95) = (q(0.05), q(0.25), q(0.5), q(0.75), q(0.95));
    QuantileSpreads {
        v_alpha: (q95 - q05) / (q75 - q25),
        v_beta: (q95 + q05 - 2.0 * q50) / (q95 - q05),
        iqr: q75 - q25,
    }
}

impl McCullochTable {
    pub fn compute() -> Self {
        let alphas: Vec<f64> = (0..N_ALPHA).map(|i| 1.0 + ALPHA_GRID_STEP * i as f64).collect();
        let betas: Vec<f64> = (0..N_BETA).map(|j| BETA_GRID_STEP * j as f64).collect();
        let cells: Vec<Vec<QuantileSpreads<f64>>> = {
            use rayon::prelude::*;
            alphas
                .par_iter()
                .map(|&a| betas.iter().map(|&b| population_spreads(a, b)).collect())
                .collect()
        };
        let pick = |f: fn(&QuantileSpreads<f64>) -> f64| cells.iter().map(|row| row.iter().map(f).collect()).collect();
        Self { v_alpha: pick(|s| s.v_alpha), v_beta: pick(|s| s.v_beta), iqr: pick(|s| s.iqr), alphas, betas }
    }

    /// Shared table, computed on first use.
    pub fn get() -> &'static Self {
        static TABLE: OnceLock<McCullochTable> = OnceLock::new();
        TABLE.get_or_init(Self::compute)
    }

    /// `(α̂, β̂)` matching the sample spreads, clamped to the table range.
    pub fn invert(&self, v_alpha: f64, v_beta: f64) -> Option<(f64, f64)> {
        if !v_alpha.is_finite() || !v_beta.is_finite() {
            return None;
        }
        let sign = if v_beta < 0.0 { -1.0 } else { 1.0 };
        let target_b = v_beta.abs();
        // per α row: β matching v_β, and the v_α it implies
        let mut rows: Vec<(f64, f64)> = Vec::with_capacity(self.alphas.len());
        let mut prev_beta = 0.0;
        for i in 0..self.alphas.len() {
            let vb = &self.v_beta[i];
            let beta = if vb[vb.len() - 1] - vb[0] < 1e-9 { prev_beta } else { invert_increasing(&self.betas, vb, target_b) };
            prev_beta = beta;
            rows.push((beta, interp(&self.betas, &self.v_alpha[i], beta)));
        }
        // v_α decreases with α
        let g: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let (alpha, beta) = if v_alpha >= g[0] {
            (self.alphas[0], rows[0].0)
        } else if v_alpha <= g[g.len() - 1] {
            (self.alphas[g.len() - 1], rows[g.len() - 1].0)
        } else {
            let i = (0..g.len() - 1).find(|&i| v_alpha <= g[i] && v_alpha >= g[i + 1]).unwrap_or(g.len() - 2);
            let f = if g[i] == g[i + 1] { 0.0 } else { (g[i] - v_alpha) / (g[i] - g[i + 1]) };
            (
                self.alphas[i] + f * (self.alphas[i + 1] - self.alphas[i]),
                rows[i].0 + f * (rows[i + 1].0 - rows[i].0),
            )
        };
        Some((alpha, sign * beta))
    }

    /// Standardized interquartile range at `(α, |β|)` by bilinear interpolation.
    pub fn iqr_at(&self, alpha: f64, beta: f64) -> f64 {
        let col: Vec<f64> = self.iqr.iter().map(|row| interp(&self.betas, row, beta.abs())).collect();
        interp(&self.alphas, &col, alpha)
    }
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let x = x.clamp(xs[0], xs[xs.len() - 1]);
    let i = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let f = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    ys[i - 1] + f * (ys[i] - ys[i - 1])
}

fn invert_increasing(xs: &[f64], ys: &[f64], y: f64) -> f64 {
    if y <= ys[0] {
        return xs[0];
    }
    if y >= ys[ys.len() - 1] {
        return xs[xs.len() - 1];
    }
    let i = ys.partition_point(|&v| v <= y).clamp(1, ys.len() - 1);
    let f = (y - ys[i - 1]) / (ys[i] - ys[i - 1]);
    xs[i - 1] + f * (xs[i] - xs[i - 1])
}

/// McCulloch estimate of `(α, β, γ)` from sorted data.
pub fn mcculloch_estimate<T: Scalar>(sorted: &[T]) -> Option<(T, T, T)> {
    if sorted.len() < 5 {
        return None;
    }
    let sp = QuantileSpreads::from_sorted(sorted);
    let table = McCullochTable::get();
    let (a, b) = table.invert(sp.v_alpha.as_f64(), sp.v_beta.as_f64())?;
    let g = sp.iqr.as_f64() / table.iqr_at(a, b);
    (g.is_finite() && g > 0.0).then(|| (T::lit(a), T::lit(b), T::lit(g)))
}
