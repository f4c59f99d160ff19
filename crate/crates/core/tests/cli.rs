use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fraghmm::fixtures::{reference_hmm1, reference_hmm2, HMM1_JSON, HMM2_JSON};
use fraghmm::{Hmm, Sequence};
use tempfile::TempDir;

fn fraghmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraghmm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = fraghmm(args);
    assert!(
        out.status.success(),
        "fraghmm {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace {
            dir: TempDir::new().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, contents: &str) -> PathBuf {
        let path = self.path(name);
        fs::write(&path, contents).unwrap();
        path
    }

    fn models(&self) -> (PathBuf, PathBuf) {
        (self.write("hmm1.json", HMM1_JSON), self.write("hmm2.json", HMM2_JSON))
    }

    fn simulated(&self, n: usize, seed: u64) -> PathBuf {
        let path = self.path(&format!("sim_{n}_{seed}.txt"));
        fraghmm::hmm::simulate(&reference_hmm2(), n, seed)
            .unwrap()
            .save(&path)
            .unwrap();
        path
    }
}

#[test]
fn discretize_toy_csv() {
    let ws = Workspace::new();
    let csv = ws.write("toy.csv", "day,ozone\n1,10\n2,40\n3,20\n4,50\n5,30\n6,60\n");
    let out = ws.path("toy.seq");
    let msg = ok(&["discretize", p(&csv), "--column", "ozone", "--bins", "3", "--out", p(&out)]);
    assert!(msg.contains("wrote 6 symbols"));
    let seq = Sequence::load(&out, Some(3)).unwrap();
    assert_eq!(seq.symbols(), &[0, 1, 0, 2, 1, 2]);
    let spec = fs::read_to_string(ws.path("toy.seq.spec.json")).unwrap();
    assert!(spec.contains("cut_points"));
}

#[test]
fn discretize_with_saved_spec_reproduces_symbols() {
    let ws = Workspace::new();
    let csv = ws.write("a.csv", "x\n1.5\n0.2\n3.3\n2.0\n0.7\n2.8\n");
    let first = ws.path("first.seq");
    let spec = ws.path("cuts.json");
    ok(&["discretize", p(&csv), "--column", "x", "--out", p(&first), "--spec-out", p(&spec)]);
    let second = ws.path("second.seq");
    ok(&["discretize", p(&csv), "--column", "x", "--spec", p(&spec), "--out", p(&second)]);
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
}

#[test]
fn constant_column_fails_with_single_error_line() {
    let ws = Workspace::new();
    let csv = ws.write("flat.csv", "x\n5\n5\n5\n5\n5\n");
    let out = fraghmm(&["discretize", p(&csv), "--column", "x", "--out", p(&ws.path("flat.seq"))]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    assert!(stderr.starts_with("error: "));
    assert!(stderr.contains("coincide"), "{stderr}");
}

#[test]
fn malformed_csv_reports_line() {
    let ws = Workspace::new();
    let csv = ws.write("bad.csv", "t,x\n1,0.5\n2,abc\n");
    let out = fraghmm(&["discretize", p(&csv), "--column", "x", "--out", p(&ws.path("o.seq"))]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.starts_with("error: ") && stderr.contains("line 3"), "{stderr}");
}

#[test]
fn missing_column_is_an_error() {
    let ws = Workspace::new();
    let csv = ws.write("c.csv", "a,b\n1,2\n");
    let out = fraghmm(&["discretize", p(&csv), "--column", "z", "--out", p(&ws.path("o.seq"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error: "));
}

#[test]
fn fit_single_state_gives_symbol_frequencies() {
    let ws = Workspace::new();
    let seq = ws.write("s.txt", "0\n1\n1\n2\n2\n2\n1\n2\n");
    let model = ws.path("m1.json");
    let msg = ok(&["fit", p(&seq), "--states", "1", "--out", p(&model)]);
    assert!(msg.contains("log-likelihood"));
    let h = Hmm::load(&model).unwrap();
    let s = h.emission().matrix();
    assert_eq!(h.n_states(), 1);
    for (m, want) in [1.0 / 8.0, 3.0 / 8.0, 4.0 / 8.0].into_iter().enumerate() {
        assert!((s[(0, m)] - want).abs() < 1e-12);
    }
    assert!(ws.path("m1.json.trace.csv").exists());
}

#[test]
fn fit_is_byte_deterministic() {
    let ws = Workspace::new();
    let seq = ws.simulated(600, 3);
    let (a, b) = (ws.path("a.json"), ws.path("b.json"));
    for out in [&a, &b] {
        ok(&["fit", p(&seq), "--states", "3", "--seed", "11", "--max-iters", "50", "--out", p(out)]);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(
        fs::read(ws.path("a.json.trace.csv")).unwrap(),
        fs::read(ws.path("b.json.trace.csv")).unwrap()
    );
    let trace = fs::read_to_string(ws.path("a.json.trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,log_likelihood\n"));
}

#[test]
fn compare_identical_models_gives_zero_z() {
    let ws = Workspace::new();
    let seq = ws.simulated(2000, 5);
    let (h1, _) = ws.models();
    let text = ok(&["compare", p(&seq), p(&h1), p(&h1), "--r-min", "3", "--r-max", "5", "-k", "200", "--format", "csv"]);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut rows = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        assert_eq!(rec[4].parse::<f64>().unwrap(), 0.0);
        assert_eq!(rec[5].parse::<f64>().unwrap(), 0.5);
        rows += 1;
    }
    assert_eq!(rows, 3);
}

#[test]
fn compare_csv_and_json_carry_the_same_numbers() {
    let ws = Workspace::new();
    let seq = ws.simulated(4560, 9);
    let (h1, h2) = ws.models();
    let base = ["compare", p(&seq), p(&h1), p(&h2), "--r-min", "3", "--r-max", "7", "-k", "400", "--seed", "2"];
    let csv_text = ok(&[&base[..], &["--format", "csv"]].concat());
    let json_text = ok(&[&base[..], &["--format", "json"]].concat());
    let json: serde_json::Value = serde_json::from_str(&json_text).unwrap();
    let results = json["results"].as_array().unwrap();
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let records: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(records.len(), results.len());
    for (rec, res) in records.iter().zip(results) {
        for field in ["mean_diff", "sample_std", "z", "p_value", "p_two_sided", "mu1_hat", "mu2_hat", "sparsity_ratio"] {
            let col = headers.iter().position(|h| h == field).unwrap();
            assert_eq!(rec[col].parse::<f64>().unwrap(), res[field].as_f64().unwrap(), "{field}");
        }
    }
}

#[test]
fn compare_z_column_is_internally_consistent() {
    let ws = Workspace::new();
    let seq = ws.simulated(4560, 21);
    let (h1, h2) = ws.models();
    let text = ok(&["compare", p(&seq), p(&h1), p(&h2), "--r-min", "2", "--r-max", "7", "-k", "1000", "--format", "csv"]);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    for rec in reader.records() {
        let rec = rec.unwrap();
        let k: f64 = rec[1].parse().unwrap();
        let mean: f64 = rec[2].parse().unwrap();
        let std: f64 = rec[3].parse().unwrap();
        let z: f64 = rec[4].parse().unwrap();
        assert!((z - mean / (std / k.sqrt())).abs() < 1e-9);
    }
}

#[test]
fn compare_text_report_is_table_shaped() {
    let ws = Workspace::new();
    let seq = ws.simulated(4560, 2);
    let (h1, h2) = ws.models();
    let out = ws.path("report.txt");
    let stdout = ok(&["compare", p(&seq), p(&h1), p(&h2), "--out", p(&out)]);
    assert!(stdout.is_empty());
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().skip(3).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[3].contains("0.1599") && rows[3].ends_with("sparse"));
    assert!(rows[0].contains("0.0059"));
}

#[test]
fn compare_rejects_alphabet_mismatch() {
    let ws = Workspace::new();
    let seq = ws.write("s.txt", "0\n1\n4\n2\n");
    let (h1, h2) = ws.models();
    let out = fraghmm(&["compare", p(&seq), p(&h1), p(&h2), "--r-min", "2", "--r-max", "2", "-k", "5"]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error: "));
}

#[test]
fn exact_with_identical_models() {
    let ws = Workspace::new();
    let (h1, h2) = ws.models();
    let text = ok(&["exact", p(&h2), p(&h1), p(&h1), "--r-max", "8", "--format", "json"]);
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(json["dominance_threshold"].is_null());
    let rows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    for row in rows {
        assert_eq!(row["mu_1"], row["mu_2"]);
        assert_eq!(row["sigma2"].as_f64().unwrap(), 0.0);
    }
}

#[test]
fn exact_truth_table_matches_library() {
    let ws = Workspace::new();
    let (h1, h2) = ws.models();
    let text = ok(&["exact", p(&h2), p(&h2), p(&h1), "--r-min", "3", "--r-max", "7", "--format", "csv"]);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let (m1, m2) = (reference_hmm1(), reference_hmm2());
    for rec in reader.records() {
        let rec = rec.unwrap();
        let r: usize = rec[0].parse().unwrap();
        let mu1: f64 = rec[1].parse().unwrap();
        assert_eq!(mu1, fraghmm::exact::exact_mu(&m2, &m2, r).unwrap());
        assert!(mu1 > fraghmm::exact::exact_mu(&m2, &m1, r).unwrap());
    }
}

#[test]
fn exact_lambda_matches_last_ratio_at_r30() {
    // Fixture with a wide spectral gap in its pair operator.
    let ws = Workspace::new();
    let sticky = ws.write(
        "sticky.json",
        r#"{"label":"sticky","transition":[[0.9,0.1],[0.2,0.8]],"emission":[[0.8,0.2],[0.3,0.7]]}"#,
    );
    let text = ok(&["exact", p(&sticky), p(&sticky), p(&sticky), "--r-min", "30", "--r-max", "30", "--format", "json"]);
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    let lambda = json["lambda_1"].as_f64().unwrap();
    let row = &json["rows"][0];
    assert_eq!(row["r"], 30);
    assert!((row["ratio_1"].as_f64().unwrap() - lambda).abs() < 1e-6);
}

#[test]
fn simulate_is_deterministic() {
    let ws = Workspace::new();
    let (_, h2) = ws.models();
    let (a, b) = (ws.path("a.txt"), ws.path("b.txt"));
    for out in [&a, &b] {
        ok(&["simulate", p(&h2), "-n", "10", "--seed", "7", "--out", p(out)]);
    }
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes, fs::read(&b).unwrap());
    assert_eq!(Sequence::load(&a, Some(3)).unwrap().len(), 10);
}

#[test]
fn simulate_one_hot_model_is_constant() {
    let ws = Workspace::new();
    let model = ws.write(
        "onehot.json",
        r#"{"label":"onehot","transition":[[1.0]],"emission":[[0.0,1.0,0.0]]}"#,
    );
    let out = ws.path("c.txt");
    ok(&["simulate", p(&model), "-n", "25", "--out", p(&out)]);
    assert_eq!(fs::read_to_string(&out).unwrap(), "1\n".repeat(25));
}

#[test]
fn simulate_rejects_invalid_model() {
    let ws = Workspace::new();
    let model = ws.write(
        "bad.json",
        r#"{"label":"bad","transition":[[0.5,0.2],[0.5,0.5]],"emission":[[1.0],[1.0]]}"#,
    );
    let out = fraghmm(&["simulate", p(&model), "-n", "5", "--out", p(&ws.path("x.txt"))]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.starts_with("error: ") && stderr.lines().count() == 1);
}

#[test]
fn simulated_csv_roundtrips_through_discretize() {
    let ws = Workspace::new();
    let seq = fraghmm::hmm::simulate(&reference_hmm2(), 4560, 8).unwrap();
    let mut csv_text = String::from("t,value\n");
    for (i, s) in seq.symbols().iter().enumerate() {
        csv_text.push_str(&format!("{i},{}\n", *s as f64 * 10.0 + (i % 7) as f64 * 0.1));
    }
    let csv = ws.write("sim.csv", &csv_text);
    let out = ws.path("sim.seq");
    ok(&["discretize", p(&csv), "--column", "value", "--out", p(&out)]);
    assert_eq!(Sequence::load(&out, Some(3)).unwrap().len(), 4560);
}
