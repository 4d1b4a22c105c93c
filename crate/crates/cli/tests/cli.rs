use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_monomvn"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read(path: impl AsRef<Path>) -> String {
    fs::read_to_string(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&read(dir.join("manifest.json"))).unwrap()
}

/// Deterministic pseudo-random numbers without pulling in an RNG crate.
fn lcg(seed: u64) -> impl FnMut() -> f64 {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    move || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    }
}

/// Panel with column `j` observed in its first `lengths[j]` rows.
fn write_panel(path: &Path, lengths: &[usize], seed: u64) {
    let n = lengths[0];
    let mut r = lcg(seed);
    let header: Vec<String> = (0..lengths.len()).map(|j| format!("a{j}")).collect();
    let mut text = header.join(",") + "\n";
    for i in 0..n {
        let common = r();
        let row: Vec<String> = lengths
            .iter()
            .map(|&l| if i < l { format!("{}", common + 0.5 * r()) } else { "NA".into() })
            .collect();
        text += &(row.join(",") + "\n");
    }
    fs::write(path, text).unwrap();
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn estimate_writes_moments_and_manifest() {
    let d = TempDir::new().unwrap();
    write_panel(&d.path().join("in.csv"), &[40, 40, 30, 12, 6], 1);
    ok(d.path(), &["estimate", "--method", "lasso", "--p", "0.25", "in.csv"]);
    let mu = csv_rows(&read(d.path().join("mu.csv")));
    assert_eq!(mu[0], ["label", "mean"]);
    assert_eq!(mu.len(), 6);
    let sigma = csv_rows(&read(d.path().join("sigma.csv")));
    assert_eq!(sigma[0], ["", "a0", "a1", "a2", "a3", "a4"]);
    assert_eq!(sigma.len(), 6);
    for (i, row) in sigma.iter().enumerate().skip(1) {
        for (j, cell) in row.iter().enumerate().skip(1) {
            assert_eq!(cell, &sigma[j][i], "symmetric storage");
        }
    }
    let log = read(d.path().join("method_log.csv"));
    assert!(log.lines().nth(5).unwrap().contains(",lasso,"), "{log}");
    let m = manifest(d.path());
    assert_eq!(m["command"], "estimate");
    assert_eq!(m["config"]["method"], "lasso");
    assert_eq!(m["config"]["p"], 0.25);
    assert_eq!(m["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 3);
}

#[test]
fn estimate_is_deterministic() {
    let d = TempDir::new().unwrap();
    write_panel(&d.path().join("in.csv"), &[50, 45, 20, 20, 8, 5], 2);
    ok(d.path(), &["estimate", "--method", "ridge", "in.csv", "--out-dir", "a"]);
    ok(d.path(), &["estimate", "--method", "ridge", "in.csv", "--out-dir", "b"]);
    for f in ["mu.csv", "sigma.csv", "method_log.csv"] {
        assert_eq!(read(d.path().join("a").join(f)), read(d.path().join("b").join(f)));
    }
}

#[test]
fn ols_on_wide_panel_is_an_estimation_failure() {
    let d = TempDir::new().unwrap();
    write_panel(&d.path().join("in.csv"), &[6, 6, 6, 6, 6, 6, 6, 6], 3);
    let out = run(d.path(), &["estimate", "--method", "ols", "in.csv"]);
    assert_eq!(code(&out), 4);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("estimation") && err.contains("rank deficient"), "{err}");
    assert!(!d.path().join("sigma.csv").exists());
}

#[test]
fn factor_parsimony_writes_asset_block() {
    let d = TempDir::new().unwrap();
    write_panel(&d.path().join("in.csv"), &[60, 50, 40, 10], 4);
    write_panel(&d.path().join("f.csv"), &[60], 5);
    ok(d.path(), &["estimate", "--factors", "f.csv", "--method", "factor-parsimony", "--p", "0", "in.csv"]);
    let sigma = csv_rows(&read(d.path().join("sigma.csv")));
    assert_eq!(sigma[0], ["", "a0", "a1", "a2", "a3"]);
    let fs = csv_rows(&read(d.path().join("factor_sigma.csv")));
    assert_eq!(fs.len(), 2);
    assert_eq!(manifest(d.path())["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn input_errors_map_to_exit_codes() {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join("bad.csv"), "a,b\n1,2\n3,x\n").unwrap();
    assert_eq!(code(&run(d.path(), &["estimate", "bad.csv"])), 2);
    fs::write(d.path().join("ragged.csv"), "a,b\n1,2\n3\n").unwrap();
    assert_eq!(code(&run(d.path(), &["estimate", "ragged.csv"])), 2);
    fs::write(d.path().join("gap.csv"), "a,b\n1,2\n3,NA\n4,5\n5,NA\n").unwrap();
    let out = run(d.path(), &["estimate", "gap.csv"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not monotone"));
    write_panel(&d.path().join("ok.csv"), &[20, 10], 6);
    assert_eq!(code(&run(d.path(), &["estimate", "--p", "1.5", "ok.csv"])), 5);
    assert_eq!(code(&run(d.path(), &["estimate", "--method", "nope", "ok.csv"])), 5);
    assert_eq!(code(&run(d.path(), &["estimate", "--frobnicate", "ok.csv"])), 5);
    assert_eq!(code(&run(d.path(), &["estimate", "missing.csv"])), 5);
    assert_eq!(code(&run(d.path(), &["--version"])), 0);
}

#[test]
fn oldest_first_reverses_rows() {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join("old.csv"), "a,b\n1,NA\n2,NA\n3,7\n5,6\n4,9\n").unwrap();
    fs::write(d.path().join("new.csv"), "a,b\n4,9\n5,6\n3,7\n2,NA\n1,NA\n").unwrap();
    ok(d.path(), &["estimate", "--oldest-first", "old.csv", "--out-dir", "o"]);
    ok(d.path(), &["estimate", "new.csv", "--out-dir", "n"]);
    assert_eq!(read(d.path().join("o/sigma.csv")), read(d.path().join("n/sigma.csv")));
    assert_eq!(code(&run(d.path(), &["estimate", "old.csv"])), 3);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let d = TempDir::new().unwrap();
    write_panel(&d.path().join("in.csv"), &[30, 30, 20, 8], 7);
    fs::write(d.path().join("run.cfg"), "# settings\nmethod = ridge\np = 0.5\nmle_denominator = true\n").unwrap();
    ok(d.path(), &["estimate", "--config", "run.cfg", "--p", "0.25", "in.csv"]);
    let m = manifest(d.path());
    assert_eq!(m["config"]["method"], "ridge");
    assert_eq!(m["config"]["p"], 0.25);
    assert_eq!(m["config"]["mle_denominator"], true);
    assert_eq!(m["config_file"]["entries"]["p"], "0.5");
    assert_eq!(m["args"][0], "estimate");

    fs::write(d.path().join("bad.cfg"), "colour = blue\n").unwrap();
    assert_eq!(code(&run(d.path(), &["estimate", "--config", "bad.cfg", "in.csv"])), 5);
    assert_eq!(code(&run(d.path(), &["estimate", "--config", "absent.cfg", "in.csv"])), 5);
}

#[test]
fn benchmark_is_reproducible() {
    let d = TempDir::new().unwrap();
    let args = |out: &'static str| ["benchmark", "--trials", "5", "--m", "10", "--n", "100", "--seed", "7", "--out-dir", out];
    ok(d.path(), &args("a"));
    ok(d.path(), &args("b"));
    for f in ["ranks.csv", "ell_long.csv"] {
        assert_eq!(read(d.path().join("a").join(f)), read(d.path().join("b").join(f)));
    }
    let ranks = csv_rows(&read(d.path().join("a/ranks.csv")));
    assert_eq!(ranks.len(), 7);
    assert_eq!(ranks[0][0], "method");
    let long = read(d.path().join("a/ell_long.csv"));
    assert_eq!(long.lines().count(), 1 + 5 * 6);
}

#[test]
fn benchmark_single_complete_trial_ranks_first() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["benchmark", "--trials", "1", "--m", "4", "--n", "30", "--estimators", "complete"]);
    let ranks = csv_rows(&read(d.path().join("ranks.csv")));
    assert_eq!(ranks.len(), 2);
    assert_eq!(ranks[1][..2], ["complete", "1"]);
}

#[test]
fn benchmark_mvt_reports_monte_carlo_error() {
    let d = TempDir::new().unwrap();
    ok(
        d.path(),
        &["benchmark", "--trials", "2", "--m", "5", "--n", "60", "--dist", "mvt", "--estimators", "pcr", "--mc-draws", "500"],
    );
    let long = csv_rows(&read(d.path().join("ell_long.csv")));
    for row in &long[1..] {
        let se: f64 = row[4].parse().unwrap();
        assert!(se > 0.0);
        assert_eq!(row[5], "NA");
    }
}

#[test]
fn simulate_then_evaluate() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["simulate", "--m", "4", "--n", "50", "--seed", "11", "--out-dir", "sim"]);
    let truth: serde_json::Value = serde_json::from_str(&read(d.path().join("sim/truth.json"))).unwrap();
    assert_eq!(truth["mu"].as_array().unwrap().len(), 4);
    assert_eq!(truth["lengths"][0], 50);
    ok(d.path(), &["estimate", "--method", "pcr", "sim/panel.csv", "--out-dir", "est"]);
    let out = ok(
        d.path(),
        &["evaluate", "--mu", "est/mu.csv", "--sigma", "est/sigma.csv", "--truth", "sim/truth.json", "--method", "pcr"],
    );
    let rec: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rec["method"], "pcr");
    assert!(rec["kl"].as_f64().unwrap() >= 0.0);
    assert!(rec["ell"].as_f64().unwrap().is_finite());
    assert!(rec["ell_se"].is_null());
    assert_eq!(rec["positive_definite"], true);
}

#[test]
fn evaluating_the_truth_gives_zero_kl() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["simulate", "--m", "3", "--n", "20", "--seed", "5", "--out-dir", "."]);
    let truth: serde_json::Value = serde_json::from_str(&read(d.path().join("truth.json"))).unwrap();
    let labels: Vec<String> = truth["labels"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    let mut mu = "label,mean\n".to_string();
    let mut sigma = format!(",{}\n", labels.join(","));
    for (i, l) in labels.iter().enumerate() {
        mu += &format!("{l},{}\n", truth["mu"][i]);
        let row: Vec<String> = (0..3).map(|j| truth["sigma"][i][j].to_string()).collect();
        sigma += &format!("{l},{}\n", row.join(","));
    }
    fs::write(d.path().join("mu.csv"), mu).unwrap();
    fs::write(d.path().join("sigma.csv"), sigma).unwrap();
    let out = ok(d.path(), &["evaluate", "--mu", "mu.csv", "--sigma", "sigma.csv", "--truth", "truth.json"]);
    let rec: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(rec["kl"].as_f64().unwrap().abs() < 1e-12, "{rec}");
}

#[test]
fn identity_covariance_gives_equal_weights() {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join("s.csv"), ",x,y,z,w\nx,1,0,0,0\ny,0,1,0,0\nz,0,0,1,0\nw,0,0,0,1\n").unwrap();
    ok(d.path(), &["portfolio", "--sigma", "s.csv"]);
    let w = csv_rows(&read(d.path().join("weights.csv")));
    assert_eq!(w[0], ["label", "weight"]);
    assert_eq!(w[1][0], "x");
    for row in &w[1..] {
        assert!((row[1].parse::<f64>().unwrap() - 0.25).abs() < 1e-12);
    }
    fs::write(d.path().join("np.csv"), ",x,y\nx,1,2\ny,2,1\n").unwrap();
    assert_eq!(code(&run(d.path(), &["portfolio", "--sigma", "np.csv"])), 4);
}

/// Monthly dated returns with staggered listings, plus risk-free and market files.
fn write_backtest_inputs(dir: &Path, periods: usize, assets: usize) -> [PathBuf; 3] {
    let mut r = lcg(99);
    let dates: Vec<String> = (0..periods).map(|t| format!("{}-{:02}", 1990 + t / 12, t % 12 + 1)).collect();
    let mut ret = format!("date,{}\n", (0..assets).map(|j| format!("s{j}")).collect::<Vec<_>>().join(","));
    let mut rf = "date,rf\n".to_string();
    let mut mkt = "date,mkt\n".to_string();
    for (t, date) in dates.iter().enumerate() {
        let f = 0.04 * r();
        let cells: Vec<String> = (0..assets)
            .map(|j| if t < 3 * j { "NA".into() } else { format!("{}", 0.005 + (0.5 + j as f64 / assets as f64) * f + 0.03 * r()) })
            .collect();
        ret += &format!("{date},{}\n", cells.join(","));
        rf += &format!("{date},0.002\n");
        mkt += &format!("{date},{}\n", 0.006 + f);
    }
    let paths = [dir.join("returns.csv"), dir.join("rf.csv"), dir.join("mkt.csv")];
    fs::write(&paths[0], ret).unwrap();
    fs::write(&paths[1], rf).unwrap();
    fs::write(&paths[2], mkt).unwrap();
    paths
}

#[test]
fn backtest_writes_table_two_layout() {
    let d = TempDir::new().unwrap();
    write_backtest_inputs(d.path(), 72, 10);
    fs::write(d.path().join("bt.cfg"), "estimators = eq,min,pcr,fpcr\npaths = 3\nsubsample = 6\nwindow = 36\n").unwrap();
    let args = ["backtest", "--config", "bt.cfg", "--returns", "returns.csv", "--riskfree", "rf.csv", "--market", "mkt.csv"];
    ok(d.path(), &args);
    let table = csv_rows(&read(d.path().join("table.csv")));
    assert_eq!(table[0], ["method", "mean", "sd", "sharpe", "te", "cm", "wmin"]);
    let names: Vec<&str> = table[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(names, ["eq", "min", "pcr", "fpcr"]);
    let paths = read(d.path().join("paths.csv"));
    assert_eq!(paths.lines().count(), 1 + 4 * 3);
    let m = manifest(d.path());
    assert_eq!(m["config"]["paths"], 3);
    assert_eq!(m["inputs"].as_array().unwrap().len(), 3);

    let first = read(d.path().join("table.csv"));
    ok(d.path(), &args);
    assert_eq!(first, read(d.path().join("table.csv")));
}

#[test]
fn backtest_without_riskfree_file_is_a_usage_error() {
    let d = TempDir::new().unwrap();
    write_backtest_inputs(d.path(), 30, 3);
    fs::remove_file(d.path().join("rf.csv")).unwrap();
    let out = run(
        d.path(),
        &["backtest", "--returns", "returns.csv", "--riskfree", "rf.csv", "--market", "mkt.csv"],
    );
    assert_eq!(code(&out), 5);
    assert!(String::from_utf8_lossy(&out.stderr).contains("riskfree"));
}
