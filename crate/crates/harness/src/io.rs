//! CSV series input, log returns and small CSV writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{io_err, HarnessError, Result};

/// Named numeric columns read from a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl SeriesTable {
    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.columns[i].as_slice())
    }

    /// Keeps the named columns, in the order given.
    pub fn select(&self, names: &[String]) -> Result<Self> {
        let mut columns = Vec::with_capacity(names.len());
        for n in names {
            let c = self.column(n).ok_or_else(|| HarnessError::Data(format!("no column named {n:?}")))?;
            columns.push(c.to_vec());
        }
        Ok(Self { names: names.to_vec(), columns })
    }

    /// Row-major `rows × columns` values.
    pub fn row_major(&self) -> Vec<f64> {
        let (n, d) = (self.rows(), self.columns.len());
        let mut out = Vec::with_capacity(n * d);
        for i in 0..n {
            out.extend(self.columns.iter().map(|c| c[i]));
        }
        out
    }
}

/// Reads a rectangular numeric CSV with one header row.
///
/// Ragged rows and unparseable cells are rejected with the offending line
/// number (the header is line 1).
pub fn load_series_csv(path: impl AsRef<Path>) -> Result<SeriesTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| HarnessError::Data(format!("{}: {e}", path.display())))?;
    parse_series_csv(file, &path.display().to_string())
}

pub fn parse_series_csv(reader: impl std::io::Read, source: &str) -> Result<SeriesTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let data_err = |line: u64, msg: String| HarnessError::Data(format!("{source}: line {line}: {msg}"));
    let names: Vec<String> = rdr
        .headers()
        .map_err(|e| HarnessError::Data(format!("{source}: {e}")))?
        .iter()
        .map(str::to_owned)
        .collect();
    if names.is_empty() || names.iter().all(String::is_empty) {
        return Err(data_err(1, "missing header row".into()));
    }
    let mut columns = vec![Vec::new(); names.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| HarnessError::Data(format!("{source}: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != names.len() {
            return Err(data_err(line, format!("expected {} fields, found {}", names.len(), rec.len())));
        }
        for (j, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| data_err(line, format!("column {:?}: cannot parse {cell:?} as a number", names[j])))?;
            columns[j].push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(HarnessError::Data(format!("{source}: no data rows")));
    }
    Ok(SeriesTable { names, columns })
}

/// `y_t = ln(p_{t+1} / p_t)`.
pub fn log_returns(series: &[f64]) -> Result<Vec<f64>> {
    if series.len() < 2 {
        return Err(HarnessError::Data("log returns need at least two values".into()));
    }
    if let Some(i) = series.iter().position(|&p| !(p > 0.0 && p.is_finite())) {
        return Err(HarnessError::Data(format!("value at index {i} is not a positive finite number: {}", series[i])));
    }
    Ok(series.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
}

/// Writes a CSV with a header and pre-formatted rows.
pub fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| io_err(path, e))
}

/// Shortest representation that round-trips; `NA` for missing values.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "NA".into()
    } else {
        format!("{x}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), fmt_num)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file() {
        let t = parse_series_csv("r\n1.5\n".as_bytes(), "mem").unwrap();
        assert_eq!(t.names, vec!["r"]);
        assert_eq!(t.columns, vec![vec![1.5]]);
    }

    #[test]
    fn ragged_row_names_line() {
        let e = parse_series_csv("a,b\n1,2\n3\n".as_bytes(), "mem").unwrap_err();
        assert!(matches!(e, HarnessError::Data(ref m) if m.contains("line 3")), "{e}");
    }

    #[test]
    fn non_numeric_cell_names_line() {
        let e = parse_series_csv("a,b\n1,2\n3,x\n".as_bytes(), "mem").unwrap_err();
        assert!(matches!(e, HarnessError::Data(ref m) if m.contains("line 3") && m.contains("\"x\"")), "{e}");
    }

    #[test]
    fn header_order_is_kept() {
        let t = parse_series_csv("AUD,EURO\n1,2\n3,4\n".as_bytes(), "mem").unwrap();
        assert_eq!(t.names, vec!["AUD", "EURO"]);
        assert_eq!(t.column("EURO").unwrap(), &[2.0, 4.0]);
        assert_eq!(t.row_major(), vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn log_return_examples() {
        assert!((log_returns(&[100.0, 110.0]).unwrap()[0] - 0.0953102).abs() < 1e-7);
        assert_eq!(log_returns(&[3.0; 5]).unwrap(), vec![0.0; 4]);
        let e = std::f64::consts::E;
        let r = log_returns(&[1.0, e, e * e]).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-15 && (r[1] - 1.0).abs() < 1e-15);
        assert!(log_returns(&[1.0, 0.0]).is_err());
        assert!(log_returns(&[1.0]).is_err());
    }
}
