//! Report assembly and rendering (aligned text, CSV, JSON).
//!
//! Text tables round to five decimals (three for Z, four for `K^r/n`).
//! CSV and JSON carry full precision; both print the shortest decimal that
//! round-trips, so the two formats hold identical numbers.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{threshold_from_sequences, ComparisonOperators, ExactComparison};
use crate::fragment_test::{SweepReport, TestResult};
use crate::hmm::Hmm;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidArgument(format!(
                "unknown format {other:?} (expected text, csv or json)"
            ))),
        }
    }
}

/// `"<1e-300"` for clamped tail probabilities, scientific notation otherwise.
pub fn format_p_value(p: f64) -> String {
    if p == 0.0 {
        "<1e-300".to_string()
    } else if p >= 1e-3 {
        format!("{p:.5}")
    } else {
        format!("{p:.3e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn opt5(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.5}"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareReport {
    pub model1: String,
    pub model2: String,
    #[serde(flatten)]
    pub sweep: SweepReport,
}

impl CompareReport {
    pub fn new(h1: &Hmm, h2: &Hmm, sweep: SweepReport) -> Self {
        CompareReport {
            model1: h1.label().to_string(),
            model2: h2.label().to_string(),
            sweep,
        }
    }

    fn ratios_for(&self, t: &TestResult) -> (Option<f64>, Option<f64>) {
        self.sweep
            .ratio_ending_at(t.r)
            .map_or((None, None), |row| (Some(row.model1), Some(row.model2)))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Text => Ok(self.to_text()),
            Format::Csv => Ok(self.to_csv()),
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
        }
    }

    pub fn to_text(&self) -> String {
        let s = &self.sweep;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "fragment comparison: model1 = {}, model2 = {} (n = {}, K = {}, k = {}, seed = {})",
            self.model1, self.model2, s.n, s.alphabet_size, s.k, s.seed
        );
        let _ = writeln!(
            out,
            "one-sided p tests H1: mu1(r) > mu2(r); ratios are mu(r)/mu(r-1)"
        );
        let _ = writeln!(
            out,
            "{:>3} {:>10} {:>10} {:>9} {:>10} {:>10} {:>9} {:>9} {:>9} {:>9} {:>8} {:>7}  flags",
            "r", "mean_diff", "std", "Z", "p", "p_2sided", "mu1_hat", "mu2_hat", "ratio1", "ratio2", "K^r", "K^r/n"
        );
        for t in &s.results {
            let (r1, r2) = self.ratios_for(t);
            let mut flags = Vec::new();
            if t.sparsity_warning {
                flags.push("sparse");
            }
            if t.all_fragments_identical {
                flags.push("identical-fragments");
            }
            let _ = writeln!(
                out,
                "{:>3} {:>10.5} {:>10.5} {:>9.3} {:>10} {:>10} {:>9.5} {:>9.5} {:>9} {:>9} {:>8} {:>7.4}  {}",
                t.r,
                t.mean_diff,
                t.sample_std,
                t.z,
                format_p_value(t.p_value),
                format_p_value(t.p_two_sided),
                t.mu1_hat,
                t.mu2_hat,
                opt5(r1),
                opt5(r2),
                t.fragment_space.map_or_else(|| "-".into(), |v| v.to_string()),
                t.sparsity_ratio,
                flags.join(",")
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "r,k,mean_diff,sample_std,z,p_value,p_two_sided,mu1_hat,mu2_hat,\
             mu1_ratio_r_over_r_minus_1,mu2_ratio_r_over_r_minus_1,\
             fragment_space,sparsity_ratio,sparsity_warning,all_fragments_identical\n",
        );
        for t in &self.sweep.results {
            let (r1, r2) = self.ratios_for(t);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                t.r,
                t.k,
                t.mean_diff,
                t.sample_std,
                t.z,
                t.p_value,
                t.p_two_sided,
                t.mu1_hat,
                t.mu2_hat,
                opt(r1),
                opt(r2),
                t.fragment_space.map_or_else(String::new, |v| v.to_string()),
                t.sparsity_ratio,
                t.sparsity_warning,
                t.all_fragments_identical
            );
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactRow {
    #[serde(flatten)]
    pub comparison: ExactComparison,
    /// `μ₁(r+1)/μ₁(r)`.
    pub ratio_1: f64,
    /// `μ₂(r+1)/μ₂(r)`.
    pub ratio_2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactReport {
    pub truth: String,
    pub model1: String,
    pub model2: String,
    pub lambda_1: f64,
    pub lambda_2: f64,
    /// Smallest `r*` ≤ `r_max` from which `μ₁ > μ₂` holds through `r_max`.
    pub dominance_threshold: Option<usize>,
    pub rows: Vec<ExactRow>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        f64::NAN
    }
}

impl ExactReport {
    pub fn compute(h0: &Hmm, h1: &Hmm, h2: &Hmm, r_min: usize, r_max: usize) -> Result<Self> {
        if r_min < 1 || r_max < r_min {
            return Err(Error::InvalidArgument(
                "need 1 ≤ r_min ≤ r_max for the exact table".into(),
            ));
        }
        let ops = ComparisonOperators::new(h0, h1, h2)?;
        let table = ops.table(r_max)?;
        let mu1 = ops.w1.mu_sequence(r_max + 1);
        let mu2 = ops.w2.mu_sequence(r_max + 1);
        let rows = table
            .into_iter()
            .filter(|c| c.r >= r_min)
            .map(|c| {
                let i = c.r - 1;
                ExactRow {
                    ratio_1: ratio(mu1[i + 1], mu1[i]),
                    ratio_2: ratio(mu2[i + 1], mu2[i]),
                    comparison: c,
                }
            })
            .collect::<Vec<_>>();
        let first = &rows[0].comparison;
        Ok(ExactReport {
            truth: h0.label().to_string(),
            model1: h1.label().to_string(),
            model2: h2.label().to_string(),
            lambda_1: first.lambda_1,
            lambda_2: first.lambda_2,
            dominance_threshold: threshold_from_sequences(&mu1[..r_max], &mu2[..r_max]),
            rows,
        })
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Text => Ok(self.to_text()),
            Format::Csv => Ok(self.to_csv()),
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "exact comparison: truth = {}, model1 = {}, model2 = {}",
            self.truth, self.model1, self.model2
        );
        let _ = writeln!(
            out,
            "lambda_max(W1) = {:.8}, lambda_max(W2) = {:.8}, dominance threshold r* = {}",
            self.lambda_1,
            self.lambda_2,
            self.dominance_threshold
                .map_or_else(|| "none".to_string(), |r| r.to_string())
        );
        let _ = writeln!(
            out,
            "{:>3} {:>12} {:>12} {:>12} {:>12} {:>12} {:>10} {:>10}",
            "r", "mu1", "mu2", "mu1-mu2", "E[(L1-L2)^2]", "sigma2", "ratio1", "ratio2"
        );
        for row in &self.rows {
            let c = &row.comparison;
            let _ = writeln!(
                out,
                "{:>3} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>10.5} {:>10.5}",
                c.r, c.mu_1, c.mu_2, c.mu_12, c.second_moment, c.sigma2, row.ratio_1, row.ratio_2
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "r,mu_1,mu_2,mu_12,second_moment,sigma2,ratio_1_next_over_r,ratio_2_next_over_r,\
             lambda_1,lambda_2,dominance_threshold\n",
        );
        let threshold = self
            .dominance_threshold
            .map_or_else(String::new, |r| r.to_string());
        for row in &self.rows {
            let c = &row.comparison;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                c.r,
                c.mu_1,
                c.mu_2,
                c.mu_12,
                c.second_moment,
                c.sigma2,
                row.ratio_1,
                row.ratio_2,
                self.lambda_1,
                self.lambda_2,
                threshold
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{reference_hmm1, reference_hmm2};
    use crate::fragment_test::sweep;
    use crate::hmm::simulate;

    fn compare_report() -> CompareReport {
        let (h1, h2) = (reference_hmm1(), reference_hmm2());
        let y = simulate(&h2, 4560, 1).unwrap();
        CompareReport::new(&h1, &h2, sweep(&y, &h1, &h2, 3, 7, 300, 4).unwrap())
    }

    #[test]
    fn p_value_formatting() {
        assert_eq!(format_p_value(0.0), "<1e-300");
        assert_eq!(format_p_value(0.5), "0.50000");
        assert_eq!(format_p_value(1.234e-9), "1.234e-9");
    }

    #[test]
    fn format_parsing() {
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert!("xml".parse::<Format>().is_err());
    }

    #[test]
    fn text_report_shape() {
        let text = compare_report().to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3 + 5);
        assert!(lines[3].trim_start().starts_with("3 "));
        assert!(lines[6].ends_with("sparse"));
        assert!(!lines[5].contains("sparse"));
        assert!(lines[3].contains("0.0059"));
    }

    #[test]
    fn csv_and_json_agree() {
        let rep = compare_report();
        let json: serde_json::Value = serde_json::from_str(&rep.render(Format::Json).unwrap()).unwrap();
        let csv = rep.to_csv();
        let mut reader = csv::Reader::from_reader(csv.as_bytes());
        let headers = reader.headers().unwrap().clone();
        for (rec, res) in reader.records().zip(json["results"].as_array().unwrap()) {
            let rec = rec.unwrap();
            for field in ["mean_diff", "sample_std", "z", "p_value", "mu1_hat", "mu2_hat", "sparsity_ratio"] {
                let col = headers.iter().position(|h| h == field).unwrap();
                let from_csv: f64 = rec[col].parse().unwrap();
                assert_eq!(from_csv, res[field].as_f64().unwrap(), "{field}");
            }
        }
    }

    #[test]
    fn exact_report_identical_models() {
        let h0 = reference_hmm2();
        let h = reference_hmm1();
        let rep = ExactReport::compute(&h0, &h, &h, 1, 8).unwrap();
        assert_eq!(rep.rows.len(), 8);
        assert_eq!(rep.dominance_threshold, None);
        for row in &rep.rows {
            assert_eq!(row.comparison.mu_1, row.comparison.mu_2);
            assert_eq!(row.comparison.sigma2, 0.0);
        }
        assert!(rep.to_text().contains("r* = none"));
        assert_eq!(rep.to_csv().lines().count(), 9);
    }

    #[test]
    fn exact_report_finds_threshold_for_truth() {
        let h0 = reference_hmm2();
        let rep = ExactReport::compute(&h0, &h0, &reference_hmm1(), 3, 10).unwrap();
        assert_eq!(rep.rows.first().unwrap().comparison.r, 3);
        assert!(rep.dominance_threshold.is_some());
        assert!(rep.lambda_1 > rep.lambda_2);
        assert!(ExactReport::compute(&h0, &h0, &h0, 4, 3).is_err());
    }
}
