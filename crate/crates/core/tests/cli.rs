use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lowrankseg::cli::{EXIT_INPUT, EXIT_NOT_CONVERGED, EXIT_OK, strip_volatile};
use lowrankseg::data::{load_labels, load_matrix};
use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_lowrankseg");

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/record.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn exec(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("LOWRANKSEG_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

struct Run {
    code: i32,
    record: Option<Value>,
    stderr: String,
}

/// Runs a command with `--out <dir>/record.json` appended and parses the record.
fn run_in(dir: &TempDir, args: &[&str], env: &[(&str, &str)]) -> Run {
    let out: PathBuf = dir.path().join("record.json");
    let _ = std::fs::remove_file(&out);
    let mut full: Vec<&str> = args.to_vec();
    let out_str = out.to_str().unwrap().to_owned();
    full.extend(["--out", &out_str]);
    let output = exec(&full, env);
    let record = std::fs::read_to_string(&out).ok().map(|s| serde_json::from_str(&s).unwrap());
    if let Some(r) = &record {
        let validator = schema();
        let errors: Vec<String> = validator.iter_errors(r).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "schema violations: {errors:?}");
    }
    Run { code: output.status.code().unwrap(), record, stderr: String::from_utf8_lossy(&output.stderr).into() }
}

fn path_in(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn solve_clean_toy_record() {
    let dir = TempDir::new().unwrap();
    let (z, e) = (path_in(&dir, "z.csv"), path_in(&dir, "e.csv"));
    let r = run_in(&dir, &["solve", "--toy", "--seed", "1", "--lambda", "1.0", "--psd", "--dump-z", &z, "--dump-e", &e], &[]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let rec = r.record.unwrap();
    assert_eq!(rec["command"], "solve");
    assert_eq!(rec["results"]["converged"], true);
    let eig: Vec<f64> = rec["results"]["spectrum"]["eigenvalues"].as_array().unwrap().iter().map(f).collect();
    assert!(eig[..20].iter().all(|l| (l - 1.0).abs() < 1e-2));
    assert!(eig[20..].iter().all(|l| l.abs() < 1e-3));
    assert_eq!(load_matrix(&z).unwrap().shape(), (100, 100));
    assert_eq!(load_matrix(&e).unwrap().shape(), (100, 100));
    assert_eq!(rec["params"]["solver"]["lambda"], 1.0);
    assert_eq!(rec["seeds"], serde_json::json!([1]));
}

#[test]
fn solve_missing_input_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let r = run_in(&dir, &["solve", "--input", "missing.csv"], &[]);
    assert_eq!(r.code, EXIT_INPUT);
    assert!(r.record.is_none());
    assert!(r.stderr.contains("missing.csv"), "{}", r.stderr);
}

#[test]
fn solve_iteration_cap_exits_two() {
    let dir = TempDir::new().unwrap();
    let r = run_in(&dir, &["solve", "--toy", "--seed", "1", "--lambda", "1e-9", "--max-iter", "5"], &[]);
    assert_eq!(r.code, EXIT_NOT_CONVERGED);
    let rec = r.record.unwrap();
    assert_eq!(rec["results"]["converged"], false);
    assert_eq!(rec["results"]["iterations"], 5);
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["solve"][..],
        &["frobnicate"],
        &["solve", "--toy", "--lambda", "abc"],
        &["solve", "--toy", "--noise", "l7"],
        &["bench", "--sizes", "10,x"],
        &["cluster", "--toy"],
    ] {
        assert_eq!(exec(args, &[]).status.code(), Some(EXIT_INPUT), "{args:?}");
    }
    assert_eq!(exec(&["--help"], &[]).status.code(), Some(EXIT_OK));
    assert_eq!(exec(&["solve", "--help"], &[]).status.code(), Some(EXIT_OK));
}

#[test]
fn invalid_parameters_exit_one() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run_in(&dir, &["solve", "--toy", "--lambda", "-1"], &[]).code, EXIT_INPUT);
    assert_eq!(run_in(&dir, &["spectrum-sweep", "--toy", "--lambdas", "1:0.1:0.5"], &[]).code, EXIT_INPUT);
    assert_eq!(run_in(&dir, &["noise-compare", "--seeds", "0"], &[]).code, EXIT_INPUT);
    let r = run_in(&dir, &["noise-compare", "--fractions", "0", "--seeds", "1"], &[("LOWRANKSEG_THREADS", "zero")]);
    assert_eq!(r.code, EXIT_INPUT);
    assert!(r.stderr.contains("LOWRANKSEG_THREADS"));
}

#[test]
fn sweep_single_lambda_single_row_with_csv() {
    let dir = TempDir::new().unwrap();
    let csv = path_in(&dir, "sweep.csv");
    let r = run_in(&dir, &["spectrum-sweep", "--toy", "--lambdas", "1.0", "--psd", "on", "--csv", &csv], &[]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert_eq!(r.record.unwrap()["results"]["rows"].as_array().unwrap().len(), 1);
    let table = load_matrix(&csv).unwrap();
    assert_eq!(table.shape(), (1, 3 + 200));
    assert_eq!(table[(0, 0)], 1.0);
}

#[test]
fn sweep_both_variants_match_on_clean_data() {
    let dir = TempDir::new().unwrap();
    let r = run_in(&dir, &["spectrum-sweep", "--toy", "--seed", "2", "--lambdas", "0.5:0.5:1.0", "--psd", "both"], &[]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let rec = r.record.unwrap();
    assert_eq!(rec["results"]["rows"].as_array().unwrap().len(), 4);
    let cross = rec["results"]["cross_variant"].as_array().unwrap();
    assert_eq!(cross.len(), 2);
    let last = cross.last().unwrap();
    assert_eq!(f(&last["lambda"]), 1.0);
    assert!(f(&last["eigenvalue_gap"]) <= 1e-3);
}

#[test]
fn sweep_noisy_psd_spectrum_confined() {
    let dir = TempDir::new().unwrap();
    let args = [
        "spectrum-sweep", "--toy", "--seed", "3", "--lambdas", "0.12", "--psd", "on",
        "--noise-level", "0.2", "--noise-model", "sample-specific",
    ];
    let r = run_in(&dir, &args, &[]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let rec = r.record.unwrap();
    for l in rec["results"]["rows"][0]["spectrum"]["eigenvalues"].as_array().unwrap() {
        assert!((-1e-6..=1.01).contains(&f(l)));
    }
}

#[test]
fn noise_compare_clean_fraction_and_single_seed() {
    let dir = TempDir::new().unwrap();
    let r = run_in(&dir, &["noise-compare", "--fractions", "0,0.1", "--seeds", "1"], &[]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let rec = r.record.unwrap();
    let rows = rec["results"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for norm in ["l1", "l21"] {
        assert_eq!(f(&rows[0][norm]["mean"]), 1.0);
        for row in rows {
            assert_eq!(f(&row[norm]["std"]), 0.0);
        }
    }
}

#[test]
fn noise_compare_is_thread_count_independent() {
    let dir = TempDir::new().unwrap();
    let args = ["noise-compare", "--fractions", "0.1,0.3", "--seeds", "2"];
    let mut one = run_in(&dir, &args, &[("LOWRANKSEG_THREADS", "1")]).record.unwrap();
    let mut four = run_in(&dir, &args, &[("LOWRANKSEG_THREADS", "4")]).record.unwrap();
    strip_volatile(&mut one);
    strip_volatile(&mut four);
    assert_eq!(one, four);
}

#[test]
fn bench_single_size() {
    let dir = TempDir::new().unwrap();
    let r = run_in(&dir, &["bench", "--sizes", "40", "--reps", "3"], &[]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let rec = r.record.unwrap();
    let rows = rec["results"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    for key in ["eig", "svd", "j_step_psd", "j_step_lrr"] {
        let t = f(&rows[0]["timing"][key]);
        assert!(t.is_finite() && t > 0.0, "{key}: {t}");
    }
}

fn cluster_accuracy(dir: &TempDir, extra: &[&str]) -> Value {
    let mut args = vec!["cluster", "--toy", "--seed", "1"];
    args.extend(extra);
    let r = run_in(dir, &args, &[]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    r.record.unwrap()["results"].clone()
}

#[test]
fn cluster_methods_on_clean_toy() {
    let dir = TempDir::new().unwrap();
    let psd = cluster_accuracy(&dir, &["--k", "5", "--method", "lrr-psd"]);
    assert_eq!(f(&psd["accuracy"]), 1.0);
    assert!(f(&psd["block_diagonal_mass"]) >= 0.99);
    let lrr = cluster_accuracy(&dir, &["--k", "5", "--method", "lrr"]);
    assert_eq!(f(&lrr["accuracy"]), 1.0);
    let gauss = cluster_accuracy(&dir, &["--k", "5", "--method", "gauss", "--sigma", "1"]);
    assert!(f(&gauss["accuracy"]) < f(&psd["accuracy"]));
    assert_eq!(gauss["block_diagonal_mass"], Value::Null);

    let single = cluster_accuracy(&dir, &["--k", "1", "--method", "linear"]);
    assert!(single["labels"].as_array().unwrap().iter().all(|l| l == 0));
    assert_eq!(f(&single["accuracy"]), 0.2);

    let r = run_in(&dir, &["cluster", "--toy", "--k", "5", "--method", "gauss"], &[]);
    assert_eq!(r.code, EXIT_INPUT);
    assert!(r.stderr.contains("--sigma"));
}

#[test]
fn generate_then_cluster_from_files() {
    let dir = TempDir::new().unwrap();
    let (x, labels) = (path_in(&dir, "x.csv"), path_in(&dir, "labels.csv"));
    let r = run_in(&dir, &["generate", "--toy", "--seed", "5", "--out-x", &x, "--out-labels", &labels], &[]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert_eq!(r.record.unwrap()["results"]["rank"], 20);
    assert_eq!(load_matrix(&x).unwrap().shape(), (100, 100));
    assert_eq!(load_labels(&labels).unwrap().len(), 100);

    let r = run_in(&dir, &["cluster", "--input", &x, "--labels", &labels, "--k", "5", "--method", "lrr-psd"], &[]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let rec = r.record.unwrap();
    assert_eq!(f(&rec["results"]["accuracy"]), 1.0);
    assert_eq!(rec["results"]["block_diagonal_mass"], Value::Null);

    let r = run_in(&dir, &["cluster", "--input", &x, "--k", "5", "--method", "linear"], &[]);
    assert_eq!(r.record.unwrap()["results"]["accuracy"], Value::Null);
}

#[test]
fn record_goes_to_stdout_without_out() {
    let output = exec(&["bench", "--sizes", "5", "--reps", "1"], &[]);
    assert_eq!(output.status.code(), Some(EXIT_OK));
    let rec: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(rec["command"], "bench");
    assert!(schema().is_valid(&rec));
}

#[test]
fn seeded_commands_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let x = path_in(&dir, "x.csv");
    let commands: Vec<Vec<&str>> = vec![
        vec!["solve", "--toy", "--seed", "4", "--lambda", "0.3", "--noise-level", "0.1"],
        vec!["spectrum-sweep", "--toy", "--seed", "4", "--lambdas", "0.2,0.9", "--samples-per", "10"],
        vec!["noise-compare", "--fractions", "0.2", "--seeds", "2", "--lambda", "0.12"],
        vec!["bench", "--sizes", "16,24", "--reps", "2", "--seed", "3"],
        vec!["cluster", "--toy", "--seed", "4", "--k", "5", "--method", "gauss", "--sigma", "2"],
        vec!["generate", "--toy", "--seed", "4", "--out-x", &x, "--noise-level", "0.3", "--noise-model", "random-entries"],
    ];
    for args in commands {
        let mut a = run_in(&dir, &args, &[]).record.unwrap();
        let mut b = run_in(&dir, &args, &[]).record.unwrap();
        strip_volatile(&mut a);
        strip_volatile(&mut b);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap(), "{args:?}");
    }
}
