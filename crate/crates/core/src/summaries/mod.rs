//! Summary statistics S1–S6 mapping a dataset to a fixed-length real vector.

mod projection;
mod quantile;
mod s1;
mod s2;
mod s3;
mod s4;
mod s5;

pub use projection::{column_means, project, ProjectionSet};
pub use quantile::{mcculloch_quantile, quantile_sorted, sorted};
pub use s1::{s1_mcculloch, QuantileSpreads};
pub use s2::{s2_zolotarev, DEFAULT_XI};
pub use s3::{default_points, press_estimates, s3_press, PressInputs, KOUTROUVELIS_POINTS};
pub use s4::{default_grid, empirical_cf, s4_ecf};
pub use s5::{ks_sorted, ks_statistic, s5_ks, S5_PROBABILITIES};

use std::fmt;
use std::str::FromStr;

use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// A univariate summary family, usable directly or inside S6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseFamily {
    S1,
    S2,
    S3,
    S4,
    S5,
}

impl BaseFamily {
    pub const ALL: [BaseFamily; 5] = [Self::S1, Self::S2, Self::S3, Self::S4, Self::S5];

    /// Length with the default S4 grid.
    pub fn len(self) -> usize {
        match self {
            Self::S1 | Self::S2 | Self::S3 => 4,
            Self::S4 => 40,
            Self::S5 => 23,
        }
    }

    /// Index of the entry that summarizes location, dropped inside S6 where
    /// the column means take its place. The ECF family has none.
    pub fn location_index(self) -> Option<usize> {
        match self {
            Self::S1 | Self::S2 | Self::S3 => Some(3),
            Self::S4 => None,
            Self::S5 => Some(0),
        }
    }

    /// Smallest sample size the family is defined for.
    pub fn min_len(self) -> usize {
        match self {
            Self::S1 => 5,
            Self::S2 => 6,
            Self::S3 => 2,
            Self::S4 | Self::S5 => 1,
        }
    }
}

impl fmt::Display for BaseFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = match self {
            Self::S1 => 1,
            Self::S2 => 2,
            Self::S3 => 3,
            Self::S4 => 4,
            Self::S5 => 5,
        };
        write!(f, "s{i}")
    }
}

impl FromStr for BaseFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(Self::S1),
            "s2" => Ok(Self::S2),
            "s3" => Ok(Self::S3),
            "s4" => Ok(Self::S4),
            "s5" => Ok(Self::S5),
            other => Err(invalid(format!("unknown summary family '{other}'"))),
        }
    }
}

/// Tag carried by every [`SummaryVector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SummaryFamily {
    S1,
    S2,
    S3,
    S4,
    S5,
    /// Projections with the given inner family.
    S6(BaseFamily),
}

impl From<BaseFamily> for SummaryFamily {
    fn from(b: BaseFamily) -> Self {
        match b {
            BaseFamily::S1 => Self::S1,
            BaseFamily::S2 => Self::S2,
            BaseFamily::S3 => Self::S3,
            BaseFamily::S4 => Self::S4,
            BaseFamily::S5 => Self::S5,
        }
    }
}

impl SummaryFamily {
    /// Length as a function of the family, the number of projections and the
    /// dimension (default S4 grid).
    pub fn len(self, tau: usize, dim: usize) -> usize {
        match self {
            Self::S6(inner) => dim + tau * (inner.len() - usize::from(inner.location_index().is_some())),
            Self::S1 => BaseFamily::S1.len(),
            Self::S2 => BaseFamily::S2.len(),
            Self::S3 => BaseFamily::S3.len(),
            Self::S4 => BaseFamily::S4.len(),
            Self::S5 => BaseFamily::S5.len(),
        }
    }
}

/// Ordered from best to worst so that `max` combines statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SummaryStatus {
    Ok,
    /// Finite, but a value was clamped or an input nudged.
    Adjusted,
    /// Contains non-finite entries; receives zero kernel weight.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryVector<T> {
    pub family: SummaryFamily,
    pub values: Vec<T>,
    pub status: SummaryStatus,
}

impl<T: Scalar> SummaryVector<T> {
    pub fn new(family: SummaryFamily, values: Vec<T>, status: SummaryStatus) -> Self {
        Self { family, values, status }
    }

    /// An all-NaN vector of the given length.
    pub fn degenerate(family: SummaryFamily, len: usize) -> Self {
        Self::new(family, vec![T::nan(); len], SummaryStatus::Degenerate)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_degenerate(&self) -> bool {
        self.status == SummaryStatus::Degenerate
    }
}

/// Tuning constants of the individual families.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryOptions<T> {
    /// Zolotarev's `ξ` for S2.
    pub xi: T,
    /// Press evaluation points `(t₁, t₂, t₃, t₄)` for S3.
    pub press_points: [T; 4],
    /// ECF grid for S4.
    pub ecf_grid: Vec<T>,
}

impl<T: Scalar> Default for SummaryOptions<T> {
    fn default() -> Self {
        Self { xi: T::lit(DEFAULT_XI), press_points: default_points(), ecf_grid: default_grid() }
    }
}

/// Which summary to compute. Multivariate data requires projections (S6).
#[derive(Debug, Clone, PartialEq)]
pub struct SummarySpec<T> {
    pub family: BaseFamily,
    pub options: SummaryOptions<T>,
    pub projections: Option<ProjectionSet<T>>,
}

impl<T: Scalar> SummarySpec<T> {
    pub fn univariate(family: BaseFamily) -> Self {
        Self { family, options: SummaryOptions::default(), projections: None }
    }

    pub fn projected(inner: BaseFamily, projections: ProjectionSet<T>) -> Self {
        Self { family: inner, options: SummaryOptions::default(), projections: Some(projections) }
    }

    pub fn summary_family(&self) -> SummaryFamily {
        match self.projections {
            Some(_) => SummaryFamily::S6(self.family),
            None => self.family.into(),
        }
    }

    fn base(&self, x: &[T], reference: Option<&[T]>) -> SummaryVector<T> {
        let o = &self.options;
        match self.family {
            BaseFamily::S1 => s1_mcculloch(x),
            BaseFamily::S2 => s2_zolotarev(x, o.xi),
            BaseFamily::S3 => s3_press(x, o.press_points),
            BaseFamily::S4 => s4_ecf(x, &o.ecf_grid),
            BaseFamily::S5 => match reference {
                Some(r) if !x.is_empty() => s5::s5_sorted(&sorted(x), quantile::mean(x), r),
                _ => SummaryVector::degenerate(SummaryFamily::S5, 23),
            },
        }
    }

    fn base_len(&self) -> usize {
        match self.family {
            BaseFamily::S4 => 2 * self.options.ecf_grid.len(),
            f => f.len(),
        }
    }

    /// Output length for `dim`-dimensional data.
    pub fn output_len(&self, dim: usize) -> usize {
        match &self.projections {
            None => self.base_len(),
            Some(p) => dim + p.tau() * (self.base_len() - usize::from(self.family.location_index().is_some())),
        }
    }
}

/// A summary specification bound to an observed dataset: carries the sorted
/// references S5 needs and the cached observed summary.
#[derive(Debug, Clone)]
pub struct Summarizer<T> {
    spec: SummarySpec<T>,
    references: Vec<Vec<T>>,
    observed: SummaryVector<T>,
    n: usize,
    dim: usize,
}

impl<T: Scalar> Summarizer<T> {
    pub fn new(spec: SummarySpec<T>, observed: &Dataset<T>) -> Result<Self> {
        let (n, dim) = (observed.len(), observed.dim());
        if n < spec.family.min_len() {
            return Err(invalid(format!("{} needs at least {} observations, got {n}", spec.family, spec.family.min_len())));
        }
        let o = &spec.options;
        if spec.family == BaseFamily::S2 && !(o.xi > T::zero() && o.xi <= T::lit(0.5)) {
            return Err(invalid(format!("xi must lie in (0, 0.5], got {}", o.xi)));
        }
        if spec.family == BaseFamily::S3 {
            let t = o.press_points;
            if t.iter().any(|&v| v == T::zero() || !v.is_finite()) || t[0] == t[1] || t[2] == t[3] {
                return Err(invalid("Press points must be finite, nonzero, with t1 != t2 and t3 != t4"));
            }
        }
        if spec.family == BaseFamily::S4 && o.ecf_grid.is_empty() {
            return Err(invalid("ECF grid is empty"));
        }
        let references = match (observed, &spec.projections) {
            (Dataset::Univariate(_), Some(_)) => return Err(invalid("projections require multivariate data")),
            (Dataset::Multivariate(_), None) => return Err(invalid("multivariate data requires projections")),
            (Dataset::Multivariate(x), Some(p)) => {
                if p.dim() != dim {
                    return Err(invalid(format!("projections have dimension {}, data {dim}", p.dim())));
                }
                if spec.family == BaseFamily::S5 {
                    p.vectors().iter().map(|t| sorted(&project(x, t))).collect()
                } else {
                    Vec::new()
                }
            }
            (Dataset::Univariate(y), None) => {
                if spec.family == BaseFamily::S5 {
                    vec![sorted(y)]
                } else {
                    Vec::new()
                }
            }
        };
        let mut s = Self {
            observed: SummaryVector::degenerate(spec.summary_family(), 0),
            spec,
            references,
            n,
            dim,
        };
        s.observed = s.summarize(observed)?;
        Ok(s)
    }

    pub fn spec(&self) -> &SummarySpec<T> {
        &self.spec
    }

    pub fn observed(&self) -> &SummaryVector<T> {
        &self.observed
    }

    /// Sample size of the observed data; simulations use the same.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.spec.output_len(self.dim)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Summary of `data`, which must have the observed shape's dimension.
    pub fn summarize(&self, data: &Dataset<T>) -> Result<SummaryVector<T>> {
        if data.dim() != self.dim {
            return Err(invalid(format!("data has dimension {}, expected {}", data.dim(), self.dim)));
        }
        Ok(match (data, &self.spec.projections) {
            (Dataset::Univariate(x), None) => self.spec.base(x, self.references.first().map(Vec::as_slice)),
            (Dataset::Multivariate(x), Some(p)) => self.summarize_projected(x, p),
            _ => return Err(invalid("data kind does not match the summary specification")),
        })
    }

    fn summarize_projected(&self, x: &Matrix<T>, p: &ProjectionSet<T>) -> SummaryVector<T> {
        if x.rows() == 0 {
            return SummaryVector::degenerate(self.spec.summary_family(), self.len());
        }
        let parts = p.vectors().iter().enumerate().map(|(i, t)| {
            let series = project(x, t);
            self.spec.base(&series, self.references.get(i).map(Vec::as_slice))
        });
        projection::assemble_s6(column_means(x), self.spec.family, parts)
    }
}

/// S6 of `x` with a fresh reference for S5 (the data itself).
pub fn s6_projected<T: Scalar>(x: &Matrix<T>, proj: &ProjectionSet<T>, inner: BaseFamily) -> Result<SummaryVector<T>> {
    let data = Dataset::Multivariate(x.clone());
    Summarizer::new(SummarySpec::projected(inner, proj.clone()), &data).map(|s| s.observed)
}
