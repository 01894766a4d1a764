use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::HermitianOperator;

/// `{"dim": n, "re": [[…]], "im": [[…]]}`; `im` defaults to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixFile {
    pub fn to_operator(&self) -> Result<HermitianOperator> {
        let check = |rows: &[Vec<f64>], part: &str| -> Result<()> {
            if rows.len() != self.dim || rows.iter().any(|r| r.len() != self.dim) {
                return Err(Error::Parse(format!("\"{part}\" must be a {0}x{0} array", self.dim)));
            }
            Ok(())
        };
        check(&self.re, "re")?;
        if let Some(im) = &self.im {
            check(im, "im")?;
        }
        HermitianOperator::from_parts(&self.re, self.im.as_deref())
    }

    pub fn from_operator(h: &HermitianOperator) -> Self {
        let n = h.dim();
        let m = h.matrix();
        let re = (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect();
        let im: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect();
        let im = if im.iter().flatten().all(|x| *x == 0.0) { None } else { Some(im) };
        MatrixFile { dim: n, re, im }
    }
}

pub fn read_matrix(path: &Path) -> Result<HermitianOperator> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let file: MatrixFile = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    file.to_operator()
}

pub fn write_matrix(path: &Path, h: &HermitianOperator) -> Result<()> {
    write_json(path, &MatrixFile::from_operator(h))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// `MIN:MAX:N`, sampled at `N` equally spaced points including both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::Parse(format!("grid needs at least 2 points, got {count}")));
        }
        if !(min < max) || !min.is_finite() || !max.is_finite() {
            return Err(Error::Parse(format!("grid needs finite MIN < MAX, got {min}:{max}")));
        }
        Ok(Grid { min, max, count })
    }

    pub fn points(&self) -> Vec<f64> {
        let last = self.count - 1;
        (0..self.count)
            .map(|i| if i == last { self.max } else { self.min + (self.max - self.min) * i as f64 / last as f64 })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("grid must be MIN:MAX:N, got {s:?}")));
        }
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad grid bound {x:?}")));
        let count = parts[2].trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad grid count {:?}", parts[2])))?;
        Grid::new(num(parts[0])?, num(parts[1])?, count)
    }
}

/// `NAME=VALUE`.
pub fn parse_tolerance(s: &str) -> Result<(String, f64)> {
    let (name, value) = s.split_once('=').ok_or_else(|| Error::Parse(format!("tolerance must be NAME=VALUE, got {s:?}")))?;
    let value: f64 = value.trim().parse().map_err(|_| Error::Parse(format!("bad tolerance value {value:?}")))?;
    if !(value > 0.0) {
        return Err(Error::Parse(format!("tolerance {name} must be positive")));
    }
    Ok((name.trim().to_string(), value))
}

/// `A..B` (inclusive), `A..=B`, or a comma list.
pub fn parse_orders(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse(format!("orders must look like 1..5 or 1,2,4, got {s:?}"));
    let num = |x: &str| x.trim().parse::<usize>().map_err(|_| bad());
    let mut orders: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        (num(a)?..=num(b)?).collect()
    } else {
        s.split(',').map(num).collect::<Result<_>>()?
    };
    orders.sort_unstable();
    orders.dedup();
    if orders.is_empty() || orders[0] == 0 {
        return Err(Error::Parse(format!("orders must be positive and nonempty, got {s:?}")));
    }
    Ok(orders)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Everything a subcommand needs, after flag parsing.
#[derive(Debug, Clone)]
pub struct JobConfig {
    pub order: usize,
    pub h0: Option<PathBuf>,
    pub v: Option<PathBuf>,
    pub grid: Option<Grid>,
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
    pub format: OutputFormat,
    pub out: PathBuf,
    pub random: Option<(usize, usize)>,
    pub wide_spectrum: Option<f64>,
    pub orders: Vec<usize>,
}

impl JobConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::Parse("order must be at least 1".into()));
        }
        Ok(())
    }

    /// Reads `--h0` and `--v`.
    pub fn load_pair(&self) -> Result<(HermitianOperator, HermitianOperator)> {
        let (Some(h0), Some(v)) = (&self.h0, &self.v) else {
            return Err(Error::Parse("both --h0 and --v are required".into()));
        };
        let h0 = read_matrix(h0)?;
        let v = read_matrix(v)?;
        if h0.dim() != v.dim() {
            return Err(Error::DimensionMismatch { expected: h0.dim(), found: v.dim() });
        }
        Ok((h0, v))
    }
}

/// Shortest round-trip decimal form.
pub fn fmt_num(x: f64) -> String {
    format!("{x:?}")
}

/// Header plus rows of numbers as CSV.
pub fn csv_table(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| fmt_num(*x)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}
