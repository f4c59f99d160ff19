//! CSV ingestion and quantile discretisation.
//!
//! Cut points are empirical quantiles at `i / n_bins` using linear
//! interpolation between order statistics (`h = (n − 1)p`, the default
//! definition in R and NumPy). Bins are left-closed: a value equal to a cut
//! point belongs to the upper bin, so the symbol of `v` is the number of cut
//! points `≤ v`.

use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hmm::Sequence;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MissingPolicy {
    Drop,
    #[default]
    Error,
    ForwardFill,
}

impl FromStr for MissingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drop" => Ok(MissingPolicy::Drop),
            "error" => Ok(MissingPolicy::Error),
            "forward-fill" | "forward_fill" | "ffill" => Ok(MissingPolicy::ForwardFill),
            other => Err(Error::InvalidArgument(format!(
                "unknown missing-value policy {other:?} (expected drop, error or forward-fill)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawSeries {
    pub values: Vec<f64>,
    pub source: PathBuf,
    pub column: String,
    /// Missing cells encountered (dropped or filled).
    pub missing: usize,
}

fn is_missing(cell: &str) -> bool {
    let c = cell.trim();
    c.is_empty()
        || ["na", "n/a", "nan", "null", "none"]
            .iter()
            .any(|m| c.eq_ignore_ascii_case(m))
}

/// Reads one numeric column from a headed CSV file.
pub fn load_csv(
    path: impl AsRef<Path>,
    column: &str,
    missing_policy: MissingPolicy,
    delimiter: u8,
) -> Result<RawSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .from_reader(file);
    let headers = reader.headers()?.clone();
    let idx = headers
        .iter()
        .position(|h| h.trim() == column)
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("no column named {column:?}"),
        })?;

    let mut values = Vec::new();
    let mut missing = 0;
    let mut last: Option<f64> = None;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let cell = record
            .get(idx)
            .ok_or_else(|| parse_err(format!("row has no column {column:?}")))?;
        if is_missing(cell) {
            missing += 1;
            match missing_policy {
                MissingPolicy::Drop => continue,
                MissingPolicy::Error => {
                    return Err(parse_err(format!("missing value in column {column:?}")))
                }
                MissingPolicy::ForwardFill => match last {
                    Some(v) => values.push(v),
                    None => {
                        return Err(parse_err(
                            "cannot forward-fill: the first value is missing".into(),
                        ))
                    }
                },
            }
            continue;
        }
        let v: f64 = cell
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("cannot parse {cell:?} as a number")))?;
        if !v.is_finite() {
            return Err(parse_err(format!("non-finite value {cell:?}")));
        }
        values.push(v);
        last = Some(v);
    }
    if values.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("column {column:?} has no usable values"),
        });
    }
    Ok(RawSeries {
        values,
        source: path.to_path_buf(),
        column: column.to_string(),
        missing,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationSpec {
    pub cut_points: Vec<f64>,
    pub labels: Vec<String>,
    /// Quantile definition and boundary convention the cut points came from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
}

const METHOD: &str = "linear-interpolation quantiles at i/n_bins; left-closed bins";

pub fn default_labels(n_bins: usize) -> Vec<String> {
    match n_bins {
        2 => vec!["low".into(), "high".into()],
        3 => vec!["low".into(), "medium".into(), "high".into()],
        _ => (0..n_bins).map(|i| format!("bin{i}")).collect(),
    }
}

impl DiscretizationSpec {
    pub fn new(cut_points: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        let spec = DiscretizationSpec {
            cut_points,
            labels,
            method: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.cut_points.is_empty() {
            return Err(Error::InvalidArgument("need at least one cut point".into()));
        }
        if self.cut_points.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("cut points must be finite".into()));
        }
        if let Some(w) = self.cut_points.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::CoincidentCutPoints(format!("{} then {}", w[0], w[1])));
        }
        if self.labels.len() != self.n_bins() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} bins",
                self.labels.len(),
                self.n_bins()
            )));
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        self.cut_points.len() + 1
    }

    pub fn symbol(&self, value: f64) -> usize {
        self.cut_points.partition_point(|&c| c <= value)
    }

    pub fn encode(&self, values: &[f64]) -> Result<Sequence> {
        Sequence::new(values.iter().map(|&v| self.symbol(v)).collect(), self.n_bins())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: DiscretizationSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        DiscretizationSpec::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = self.to_json()?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Linear-interpolation quantile of already sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty() && (0.0..=1.0).contains(&p));
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= sorted.len() || frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Equal-probability cut points for `n_bins` bins.
pub fn quantile_cut_points(values: &[f64], n_bins: usize) -> Result<Vec<f64>> {
    if n_bins < 2 {
        return Err(Error::InvalidArgument("n_bins must be ≥ 2".into()));
    }
    if values.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok((1..n_bins)
        .map(|i| quantile_sorted(&sorted, i as f64 / n_bins as f64))
        .collect())
}

/// Discretises a series into `n_bins` empirical-quantile bins.
pub fn discretize(series: &RawSeries, n_bins: usize) -> Result<(Sequence, DiscretizationSpec)> {
    let cuts = quantile_cut_points(&series.values, n_bins)?;
    let mut spec = DiscretizationSpec::new(cuts, default_labels(n_bins))?;
    spec.method = Some(METHOD.to_string());
    let seq = spec.encode(&series.values)?;
    Ok((seq, spec))
}
