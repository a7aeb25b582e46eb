use crate::error::{invalid, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Observed or simulated data: a univariate series or an `n × d` table.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset<T> {
    Univariate(Vec<T>),
    Multivariate(Matrix<T>),
}

impl<T: Scalar> Dataset<T> {
    /// Number of observations.
    pub fn len(&self) -> usize {
        match self {
            Dataset::Univariate(x) => x.len(),
            Dataset::Multivariate(m) => m.rows(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            Dataset::Univariate(_) => 1,
            Dataset::Multivariate(m) => m.cols(),
        }
    }

    pub fn as_univariate(&self) -> Result<&[T]> {
        match self {
            Dataset::Univariate(x) => Ok(x),
            Dataset::Multivariate(_) => Err(invalid("expected univariate data")),
        }
    }

    pub fn as_multivariate(&self) -> Result<&Matrix<T>> {
        match self {
            Dataset::Multivariate(m) => Ok(m),
            Dataset::Univariate(_) => Err(invalid("expected multivariate data")),
        }
    }
}
