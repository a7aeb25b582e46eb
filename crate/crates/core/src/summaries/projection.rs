//! Random projection directions and the projected summary S6.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::linalg::{dot, Matrix};
use crate::rng::stream;
use crate::scalar::Scalar;

use super::{BaseFamily, SummaryFamily, SummaryStatus, SummaryVector};

/// `τ` unit directions in `ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSet<T> {
    dim: usize,
    vectors: Vec<Vec<T>>,
    seed: Option<u64>,
}

impl<T: Scalar> ProjectionSet<T> {
    /// Normalized standard Gaussian vectors, deterministic in `seed`.
    pub fn generate(dim: usize, tau: usize, seed: u64) -> Result<Self> {
        if dim < 2 {
            return Err(invalid(format!("projections need dimension >= 2, got {dim}")));
        }
        if tau == 0 {
            return Err(invalid("need at least one projection"));
        }
        let mut rng = stream(seed, &[0x5052_4f4a]);
        let mut vectors = Vec::with_capacity(tau);
        while vectors.len() < tau {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-300 {
                continue;
            }
            vectors.push(v.iter().map(|x| T::lit(x / norm)).collect());
        }
        Ok(Self { dim, vectors, seed: Some(seed) })
    }

    /// User-supplied directions, normalized to unit length.
    pub fn from_vectors(vectors: Vec<Vec<T>>) -> Result<Self> {
        let dim = vectors.first().map(Vec::len).ok_or_else(|| invalid("need at least one projection"))?;
        if dim < 2 {
            return Err(invalid(format!("projections need dimension >= 2, got {dim}")));
        }
        let mut out = Vec::with_capacity(vectors.len());
        for v in vectors {
            if v.len() != dim {
                return Err(invalid("projection vectors differ in length"));
            }
            let norm = dot(&v, &v).sqrt();
            if !(norm > T::zero()) || !norm.is_finite() {
                return Err(invalid("projection vector has zero or non-finite norm"));
            }
            out.push(v.iter().map(|&x| x / norm).collect());
        }
        Ok(Self { dim, vectors: out, seed: None })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tau(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<T>] {
        &self.vectors
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}

/// The projected series `X t`.
pub fn project<T: Scalar>(x: &Matrix<T>, t: &[T]) -> Vec<T> {
    x.mul_vec(t)
}

/// Column means of `x`.
pub fn column_means<T: Scalar>(x: &Matrix<T>) -> Vec<T> {
    let n = T::from_usize_lossy(x.rows());
    let mut m = vec![T::zero(); x.cols()];
    for row in x.iter_rows() {
        for (acc, &v) in m.iter_mut().zip(row) {
            *acc = *acc + v;
        }
    }
    m.iter_mut().for_each(|v| *v = *v / n);
    m
}

/// Assembles `(x̄, inner₁ \ loc, …, inner_τ \ loc)` from per-projection inner
/// summaries; the status is the worst of the parts.
pub(crate) fn assemble_s6<T: Scalar>(
    means: Vec<T>,
    inner: BaseFamily,
    parts: impl IntoIterator<Item = SummaryVector<T>>,
) -> SummaryVector<T> {
    let mut values = means;
    let mut status = SummaryStatus::Ok;
    let drop = inner.location_index();
    for part in parts {
        status = status.max(part.status);
        values.extend(
            part.values
                .into_iter()
                .enumerate()
                .filter(|&(i, _)| Some(i) != drop)
                .map(|(_, v)| v),
        );
    }
    if status != SummaryStatus::Degenerate && values.iter().any(|v| !v.is_finite()) {
        status = SummaryStatus::Degenerate;
    }
    SummaryVector::new(SummaryFamily::S6(inner), values, status)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_and_deterministic() {
        let a = ProjectionSet::<f64>::generate(3, 50, 11).unwrap();
        let b = ProjectionSet::<f64>::generate(3, 50, 11).unwrap();
        assert_eq!(a, b);
        for v in a.vectors() {
            assert!((dot(v, v).sqrt() - 1.0).abs() < 1e-12);
        }
        assert_ne!(a, ProjectionSet::generate(3, 50, 12).unwrap());
    }

    #[test]
    fn axis_projection_is_column() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        assert_eq!(project(&x, &[1.0, 0.0]), vec![1.0, 3.0, 5.0]);
        assert_eq!(column_means(&x), vec![3.0, 4.0]);
    }
}
