//! Posterior cumulative spectral-mass curve for bivariate models.

use std::f64::consts::TAU;

use stable_abc::{ParamLayout, Population};

use crate::error::{HarnessError, Result};

/// Curve rows: grid angle, posterior mean of the cumulative weight, and the
/// mean ∓ 3 posterior standard deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct MassCurve {
    pub angle: Vec<f64>,
    pub mean: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// `points` equally spaced angles from 0 to 2π inclusive.
pub fn angle_grid(points: usize) -> Vec<f64> {
    let m = points.max(2) - 1;
    (0..=m).map(|i| TAU * i as f64 / m as f64).collect()
}

/// For each grid angle `a`, the weighted mean and spread across particles of
/// `Σ_j w_j 1{φ_j ≤ a}`.
pub fn spectral_mass_curve(pop: &Population, layout: ParamLayout, grid: &[f64]) -> Result<MassCurve> {
    let masses = match layout {
        ParamLayout::Spectral { dim: 2, masses } => masses,
        ParamLayout::Spectral { dim, .. } => {
            return Err(HarnessError::Usage(format!("spectral-mass curve needs a bivariate model, got dimension {dim}")))
        }
        ParamLayout::Euclidean(_) => return Err(HarnessError::Usage("spectral-mass curve needs a multivariate population".into())),
    };
    if pop.particles.is_empty() {
        return Err(HarnessError::Data("empty population".into()));
    }
    let total: f64 = pop.particles.iter().map(|p| p.weight).sum();
    let mut curve = MassCurve { angle: grid.to_vec(), mean: Vec::new(), lo: Vec::new(), hi: Vec::new() };
    for &a in grid {
        let (mut m1, mut m2) = (0.0, 0.0);
        for p in &pop.particles {
            let c: f64 = (0..masses).filter(|&j| p.theta[masses + j] <= a).map(|j| p.theta[j]).sum();
            m1 += p.weight * c;
            m2 += p.weight * c * c;
        }
        let mean = m1 / total;
        let sd = (m2 / total - mean * mean).max(0.0).sqrt();
        curve.mean.push(mean);
        curve.lo.push(mean - 3.0 * sd);
        curve.hi.push(mean + 3.0 * sd);
    }
    Ok(curve)
}

/// Pointwise average of several curves on the same grid.
pub fn average_curves(curves: &[MassCurve]) -> Option<MassCurve> {
    let first = curves.first()?;
    let k = curves.len() as f64;
    let avg = |f: fn(&MassCurve) -> &Vec<f64>| -> Vec<f64> {
        (0..first.angle.len()).map(|i| curves.iter().map(|c| f(c)[i]).sum::<f64>() / k).collect()
    };
    Some(MassCurve { angle: first.angle.clone(), mean: avg(|c| &c.mean), lo: avg(|c| &c.lo), hi: avg(|c| &c.hi) })
}

/// Rise of the mean curve over `[a − half_width, a + half_width]`.
pub fn rise_around(curve: &MassCurve, a: f64, half_width: f64) -> f64 {
    let at = |x: f64| {
        curve
            .angle
            .iter()
            .zip(&curve.mean)
            .filter(|(g, _)| **g <= x)
            .map(|(_, m)| *m)
            .last()
            .unwrap_or(0.0)
    };
    at(a + half_width) - at(a - half_width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use stable_abc::Particle;

    fn population(thetas: Vec<(Vec<f64>, f64)>) -> Population {
        Population {
            particles: thetas.into_iter().map(|(theta, weight)| Particle { theta, weight, summary: None }).collect(),
            epsilon: 1.0,
            stage: 0,
            ess: 1.0,
        }
    }

    #[test]
    fn single_particle_steps() {
        let pop = population(vec![(vec![0.45, 0.2, 0.35, 2.7, 3.9, 5.6, 0.0, 0.0, 1.5], 1.0)]);
        let layout = ParamLayout::Spectral { dim: 2, masses: 3 };
        let grid = [0.0, 2.69, 2.7, 3.0, 3.9, 5.0, 5.6, TAU];
        let c = spectral_mass_curve(&pop, layout, &grid).unwrap();
        let want = [0.0, 0.0, 0.45, 0.45, 0.65, 0.65, 1.0, 1.0];
        for (m, w) in c.mean.iter().zip(want) {
            assert!((m - w).abs() < 1e-12);
        }
        assert_eq!(c.lo, c.mean);
        assert_eq!(c.hi, c.mean);
    }

    #[test]
    fn total_mass_at_full_turn() {
        let pop = population(vec![
            (vec![0.3, 0.7, 1.0, 4.0, 0.0, 0.0, 1.5], 0.25),
            (vec![0.6, 0.4, 0.5, 6.0, 0.0, 0.0, 1.7], 0.75),
        ]);
        let c = spectral_mass_curve(&pop, ParamLayout::Spectral { dim: 2, masses: 2 }, &angle_grid(50)).unwrap();
        let last = c.mean.len() - 1;
        assert!((c.mean[last] - 1.0).abs() < 1e-12);
        assert!((c.hi[last] - c.lo[last]).abs() < 1e-6);
        assert_eq!(c.mean[0], 0.0);
        assert!(c.mean.windows(2).all(|w| w[1] >= w[0] - 1e-15));
    }

    #[test]
    fn rejects_univariate_and_trivariate() {
        let pop = population(vec![(vec![1.5, 0.0, 1.0, 0.0], 1.0)]);
        assert!(spectral_mass_curve(&pop, ParamLayout::Euclidean(4), &[0.0]).is_err());
        assert!(spectral_mass_curve(&pop, ParamLayout::Spectral { dim: 3, masses: 1 }, &[0.0]).is_err());
    }
}
