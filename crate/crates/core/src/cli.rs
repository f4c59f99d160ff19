//! Command-line front end: `discretize`, `fit`, `compare`, `exact`,
//! `simulate`.
//!
//! Each command is a plain function returning the text destined for stdout,
//! so the binary stays a thin dispatcher and the commands can be driven
//! directly from tests.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::baum_welch::{fit, loglik_trace_report, FitConfig};
use crate::error::{Error, Result};
use crate::fragment_test::sweep;
use crate::hmm::{log_likelihood_full, simulate, Hmm, Sequence};
use crate::ingest::{discretize, load_csv, DiscretizationSpec, MissingPolicy};
use crate::report::{CompareReport, ExactReport, Format};

#[derive(Debug, Parser)]
#[command(name = "fraghmm", version, about = "Fragment-based comparison of discrete HMMs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discretise a CSV column into quantile bins.
    Discretize(DiscretizeArgs),
    /// Fit an HMM to a symbol sequence with Baum-Welch.
    Fit(FitArgs),
    /// Sampled fragment Z-tests between two models over a range of r.
    Compare(CompareArgs),
    /// Closed-form fragment metrics for two candidates against a truth.
    Exact(ExactArgs),
    /// Simulate a symbol sequence from a model.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct DiscretizeArgs {
    /// Input CSV with a header row.
    pub csv: PathBuf,
    #[arg(long)]
    pub column: String,
    #[arg(long, default_value_t = 3)]
    pub bins: usize,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// drop, error or forward-fill.
    #[arg(long, default_value = "error", value_parser = parse_policy)]
    pub missing: MissingPolicy,
    /// Reuse the cut points of a saved spec instead of computing quantiles.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Sequence file to write (one symbol per line).
    #[arg(long)]
    pub out: PathBuf,
    /// Where to save the spec; defaults to `<out>.spec.json`.
    #[arg(long)]
    pub spec_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Sequence file (one symbol per line).
    pub seq: PathBuf,
    #[arg(long)]
    pub states: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    /// Alphabet size; inferred from the largest symbol when omitted.
    #[arg(long)]
    pub alphabet: Option<usize>,
    #[arg(long)]
    pub label: Option<String>,
    /// Model JSON to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Log-likelihood trace CSV; defaults to `<out>.trace.csv`.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub seq: PathBuf,
    pub model1: PathBuf,
    pub model2: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub r_min: usize,
    #[arg(long, default_value_t = 7)]
    pub r_max: usize,
    #[arg(short, long, default_value_t = 1000)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "text", value_parser = parse_format)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    /// Data-generating model.
    pub model0: PathBuf,
    pub model1: PathBuf,
    pub model2: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub r_min: usize,
    #[arg(long, default_value_t = 10)]
    pub r_max: usize,
    #[arg(long, default_value = "text", value_parser = parse_format)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub model: PathBuf,
    #[arg(short, long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_policy(s: &str) -> std::result::Result<MissingPolicy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes to `out` when given, otherwise hands the text back for stdout.
fn emit(out: Option<&Path>, text: String) -> Result<String> {
    match out {
        Some(path) => {
            write_file(path, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

pub fn cmd_discretize(args: &DiscretizeArgs) -> Result<String> {
    if !args.delimiter.is_ascii() {
        return Err(Error::InvalidArgument("delimiter must be a single ASCII character".into()));
    }
    let series = load_csv(&args.csv, &args.column, args.missing, args.delimiter as u8)?;
    let (seq, spec) = match &args.spec {
        Some(path) => {
            let spec = DiscretizationSpec::load(path)?;
            (spec.encode(&series.values)?, spec)
        }
        None => discretize(&series, args.bins)?,
    };
    seq.save(&args.out)?;
    let spec_out = args
        .spec_out
        .clone()
        .unwrap_or_else(|| with_suffix(&args.out, ".spec.json"));
    spec.save(&spec_out)?;
    Ok(format!(
        "wrote {} symbols ({} bins, {} missing cells) to {}; cut points {:?} saved to {}\n",
        seq.len(),
        spec.n_bins(),
        series.missing,
        args.out.display(),
        spec.cut_points,
        spec_out.display()
    ))
}

pub fn cmd_fit(args: &FitArgs) -> Result<String> {
    let y = Sequence::load(&args.seq, args.alphabet)?;
    let cfg = FitConfig {
        n_states: args.states,
        max_iters: args.max_iters,
        tol: args.tol,
        seed: args.seed,
        n_restarts: args.restarts,
    };
    let mut res = fit(&y, &cfg)?;
    if let Some(label) = &args.label {
        res.model = res.model.with_label(label.clone());
    }
    res.model.save(&args.out)?;
    let trace_out = args
        .trace_out
        .clone()
        .unwrap_or_else(|| with_suffix(&args.out, ".trace.csv"));
    write_file(&trace_out, &loglik_trace_report(&res))?;
    let full = log_likelihood_full(&res.model, &y)?;
    let mut msg = format!(
        "fitted {} states on {} symbols: {} iterations, converged = {}\n\
         final EM log-likelihood: {:.4}\n\
         log-likelihood with stationary start: {:.4}\n",
        args.states,
        y.len(),
        res.iterations_used,
        res.converged,
        res.final_log_likelihood(),
        full.value
    );
    if !res.absent_symbols.is_empty() {
        msg.push_str(&format!(
            "warning: symbols {:?} never occur; their emission probabilities are zero\n",
            res.absent_symbols
        ));
    }
    Ok(msg)
}

pub fn cmd_compare(args: &CompareArgs) -> Result<String> {
    let h1 = Hmm::load(&args.model1)?;
    let h2 = Hmm::load(&args.model2)?;
    if h1.n_symbols() != h2.n_symbols() {
        return Err(Error::AlphabetMismatch {
            left: h1.n_symbols(),
            right: h2.n_symbols(),
        });
    }
    let y = Sequence::load(&args.seq, Some(h1.n_symbols()))?;
    let rep = sweep(&y, &h1, &h2, args.r_min, args.r_max, args.k, args.seed)?;
    let report = CompareReport::new(&h1, &h2, rep);
    emit(args.out.as_deref(), report.render(args.format)?)
}

pub fn cmd_exact(args: &ExactArgs) -> Result<String> {
    let h0 = Hmm::load(&args.model0)?;
    let h1 = Hmm::load(&args.model1)?;
    let h2 = Hmm::load(&args.model2)?;
    let report = ExactReport::compute(&h0, &h1, &h2, args.r_min, args.r_max)?;
    emit(args.out.as_deref(), report.render(args.format)?)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<String> {
    let h = Hmm::load(&args.model)?;
    let y = simulate(&h, args.n, args.seed)?;
    y.save(&args.out)?;
    Ok(format!("wrote {} symbols to {}\n", y.len(), args.out.display()))
}

pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Discretize(a) => cmd_discretize(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Exact(a) => cmd_exact(a),
        Command::Simulate(a) => cmd_simulate(a),
    }
}

/// Single-line rendering of an error for the `error:` prefix.
pub fn error_line(err: &Error) -> String {
    format!("error: {}", err.to_string().replace('\n', " "))
}
