//! Labelled summary vectors for the `summarize` subcommand.

use stable_abc::summaries::{SummaryOptions, S5_PROBABILITIES};
use stable_abc::{BaseFamily, Dataset, Matrix, Summarizer, SummaryStatus};

use crate::config::StudyConfig;
use crate::error::{HarnessError, Result};
use crate::io::SeriesTable;

/// Component labels of a base family's vector.
pub fn base_names(family: BaseFamily, options: &SummaryOptions<f64>) -> Vec<String> {
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    match family {
        BaseFamily::S1 => s(&["v_alpha", "v_beta", "iqr", "mean"]),
        BaseFamily::S2 => s(&["nu", "eta", "tau", "mean"]),
        BaseFamily::S3 => s(&["alpha", "beta", "gamma", "delta"]),
        BaseFamily::S4 => {
            let g = &options.ecf_grid;
            g.iter().map(|t| format!("re({t})")).chain(g.iter().map(|t| format!("im({t})"))).collect()
        }
        BaseFamily::S5 => std::iter::once("mean".to_string())
            .chain(S5_PROBABILITIES.iter().map(|p| format!("q({p})")))
            .chain(std::iter::once("ks".to_string()))
            .collect(),
    }
}

/// Labels of the projected summary: column means, then each projection's
/// entries without the location entry.
pub fn projected_names(family: BaseFamily, options: &SummaryOptions<f64>, dim: usize, tau: usize) -> Vec<String> {
    let base = base_names(family, options);
    let drop = family.location_index();
    let mut out: Vec<String> = (1..=dim).map(|i| format!("colmean{i}")).collect();
    for p in 1..=tau {
        out.extend(base.iter().enumerate().filter(|&(i, _)| Some(i) != drop).map(|(_, n)| format!("p{p}:{n}")));
    }
    out
}

/// Summary of one column (base family) or of all columns (projected).
pub fn summarize_table(cfg: &StudyConfig, table: &SeriesTable) -> Result<(Vec<(String, f64)>, SummaryStatus)> {
    let family = cfg.base_family()?;
    let dim = table.columns.len();
    let data = if dim == 1 {
        Dataset::Univariate(table.columns[0].clone())
    } else {
        Dataset::Multivariate(Matrix::from_row_major(table.rows(), dim, table.row_major())?)
    };
    let spec = cfg.summary_spec(dim)?;
    let names = match &spec.projections {
        Some(p) => projected_names(family, &spec.options, dim, p.tau()),
        None => base_names(family, &spec.options),
    };
    let s = Summarizer::new(spec, &data)?;
    let v = s.observed();
    if v.values.len() != names.len() {
        return Err(HarnessError::Numerical("summary length does not match its labels".into()));
    }
    Ok((names.into_iter().zip(v.values.iter().copied()).collect(), v.status))
}
