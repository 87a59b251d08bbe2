//! Command-line harness: argument parsing, experiment records and exit codes.
//!
//! Every command writes one JSON [`ExperimentRecord`] (to `--out` or stdout). Exit codes:
//! [`EXIT_OK`] on success, [`EXIT_INPUT`] on usage or input errors, [`EXIT_NOT_CONVERGED`]
//! when a solve hit its iteration cap or diverged.

pub mod experiments;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::data::{self, CorruptionModel, CorruptionSpec, Dataset, ToyParams};
use crate::segmentation::{self, AffinityMode};
use crate::solver::{self, AlmConfig, NoiseNorm};
use crate::{Error, Mat};
use experiments::CORRUPTION_SEED_OFFSET;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

/// Keys whose values vary between identical runs.
pub const VOLATILE_KEYS: [&str; 2] = ["timing", "timestamps"];

#[derive(Parser, Debug)]
#[command(name = "lowrankseg", version, about = "Low-rank and PSD affinity learning for subspace segmentation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve robust LRR or LRR-PSD on one data matrix.
    Solve(SolveArgs),
    /// Spectra of the learned representation over a λ grid.
    SpectrumSweep(SweepArgs),
    /// Segmentation accuracy of the ℓ1 and ℓ2,1 noise norms versus corruption level.
    NoiseCompare(NoiseCompareArgs),
    /// Time symmetric eigen-decomposition against SVD.
    Bench(BenchArgs),
    /// Spectral clustering with a learned or kernel affinity.
    Cluster(ClusterArgs),
    /// Write a synthetic dataset to CSV.
    Generate(GenerateArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DataArgs {
    /// Data matrix CSV, one sample per column.
    #[arg(long, conflicts_with = "toy", required_unless_present = "toy")]
    pub input: Option<PathBuf>,
    /// Use the synthetic union-of-subspaces dataset.
    #[arg(long)]
    pub toy: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub subspaces: usize,
    #[arg(long, default_value_t = 4)]
    pub subspace_dim: usize,
    #[arg(long, default_value_t = 100)]
    pub ambient_dim: usize,
    #[arg(long, default_value_t = 20)]
    pub samples_per: usize,
    /// Corruption fraction (entries or samples, per the model).
    #[arg(long, default_value_t = 0.0)]
    pub noise_level: f64,
    #[arg(long, value_enum, default_value_t = CorruptionModel::SampleSpecific)]
    pub noise_model: CorruptionModel,
    /// Noise magnitude relative to ‖X‖_F.
    #[arg(long, default_value_t = 0.3)]
    pub noise_scale: f64,
}

impl DataArgs {
    fn toy_params(&self) -> ToyParams {
        ToyParams {
            seed: self.seed,
            num_subspaces: self.subspaces,
            subspace_dim: self.subspace_dim,
            ambient_dim: self.ambient_dim,
            samples_per: self.samples_per,
        }
    }

    fn corruption(&self) -> Option<CorruptionSpec> {
        (self.noise_level > 0.0).then_some(CorruptionSpec {
            model: self.noise_model,
            fraction: self.noise_level,
            sigma_scale: self.noise_scale,
            seed: self.seed + CORRUPTION_SEED_OFFSET,
        })
    }

    /// Data matrix plus ground truth when synthetic.
    fn load(&self) -> crate::Result<(Mat, Option<Dataset>)> {
        let spec = self.corruption();
        if let Some(path) = &self.input {
            let x = data::load_matrix(path)?;
            let x = match spec {
                Some(s) => data::corrupt(&x, &s)?.0,
                None => x,
            };
            return Ok((x, None));
        }
        let mut ds = data::generate_toy(&self.toy_params())?;
        if let Some(s) = spec {
            ds = ds.corrupted(&s)?.0;
        }
        Ok((ds.x.clone(), Some(ds)))
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = NoiseNorm::L21)]
    pub noise: NoiseNorm,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
}

impl SolverArgs {
    fn config(&self, psd: bool) -> AlmConfig {
        AlmConfig {
            lambda: self.lambda,
            noise_norm: self.noise,
            tol: self.tol,
            max_iter: self.max_iter,
            psd,
            ..AlmConfig::default()
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Constrain the representation to the PSD cone.
    #[arg(long)]
    pub psd: bool,
    /// JSON record path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub dump_z: Option<PathBuf>,
    #[arg(long)]
    pub dump_e: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PsdChoice {
    On,
    Off,
    Both,
}

impl PsdChoice {
    fn variants(self) -> Vec<bool> {
        match self {
            PsdChoice::On => vec![true],
            PsdChoice::Off => vec![false],
            PsdChoice::Both => vec![true, false],
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// `start:step:end` (inclusive), a comma list, or one value.
    #[arg(long, default_value = "0.1:0.1:1.0")]
    pub lambdas: String,
    #[arg(long, value_enum, default_value_t = PsdChoice::Both)]
    pub psd: PsdChoice,
    #[arg(long, value_enum, default_value_t = NoiseNorm::L21)]
    pub noise: NoiseNorm,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plot table: lambda, psd, iterations, eigenvalues, singular values.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct NoiseCompareArgs {
    #[arg(long, default_value = "0:0.05:0.5")]
    pub fractions: String,
    /// Number of seeds; seeds 1..=N are used.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    #[arg(long, default_value_t = experiments::NOISE_COMPARE_LAMBDA)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = CorruptionModel::RandomEntries)]
    pub noise_model: CorruptionModel,
    #[arg(long, default_value_t = 0.3)]
    pub noise_scale: f64,
    #[arg(long, value_enum, default_value_t = PsdChoice::On)]
    pub psd: PsdChoice,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BenchArgs {
    /// Comma-separated matrix sizes.
    #[arg(long, value_delimiter = ',', default_value = "100,500,1000,2000")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Lrr,
    LrrPsd,
    Gauss,
    Linear,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Ground-truth labels CSV (one integer per line).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = Method::LrrPsd)]
    pub method: Method,
    /// Gaussian kernel bandwidth.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub out_x: PathBuf,
    #[arg(long)]
    pub out_labels: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize, Debug)]
pub struct Timestamps {
    pub started: String,
    pub finished: String,
}

/// Self-describing result of one command.
#[derive(Serialize, Debug)]
pub struct ExperimentRecord {
    pub command: String,
    pub params: Value,
    pub seeds: Vec<u64>,
    pub results: Value,
    pub library_version: String,
    pub timestamps: Timestamps,
}

/// Removes every [`VOLATILE_KEYS`] entry at any depth.
pub fn strip_volatile(v: &mut Value) {
    match v {
        Value::Object(map) => {
            for key in VOLATILE_KEYS {
                map.remove(key);
            }
            map.values_mut().for_each(strip_volatile);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_volatile),
        _ => {}
    }
}

enum Outcome {
    Done,
    NotConverged,
}

struct Report {
    seeds: Vec<u64>,
    results: Value,
    outcome: Outcome,
}

fn to_value<T: Serialize>(v: &T) -> crate::Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Parameter(format!("serialization failed: {e}")))
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Micros, true)
}

fn write_record(record: &ExperimentRecord, out: Option<&Path>) -> crate::Result<()> {
    let text = serde_json::to_string_pretty(record)
        .map_err(|e| Error::Parameter(format!("serialization failed: {e}")))?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    faer::set_global_parallelism(faer::Par::Seq);
    match execute(&cli.command) {
        Ok(Outcome::Done) => EXIT_OK,
        Ok(Outcome::NotConverged) => EXIT_NOT_CONVERGED,
        Err(Error::Divergence { step, iteration }) => {
            eprintln!("error: solver diverged in the {step} at iteration {iteration}");
            EXIT_NOT_CONVERGED
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

fn execute(command: &Command) -> crate::Result<Outcome> {
    let started = now();
    let (name, params, out, report) = match command {
        Command::Solve(a) => ("solve", to_value(a)?, a.out.as_deref(), cmd_solve(a)?),
        Command::SpectrumSweep(a) => ("spectrum-sweep", to_value(a)?, a.out.as_deref(), cmd_sweep(a)?),
        Command::NoiseCompare(a) => ("noise-compare", to_value(a)?, a.out.as_deref(), cmd_noise_compare(a)?),
        Command::Bench(a) => ("bench", to_value(a)?, a.out.as_deref(), cmd_bench(a)?),
        Command::Cluster(a) => ("cluster", to_value(a)?, a.out.as_deref(), cmd_cluster(a)?),
        Command::Generate(a) => ("generate", to_value(a)?, a.out.as_deref(), cmd_generate(a)?),
    };
    let record = ExperimentRecord {
        command: name.into(),
        params,
        seeds: report.seeds,
        results: report.results,
        library_version: env!("CARGO_PKG_VERSION").into(),
        timestamps: Timestamps { started, finished: now() },
    };
    write_record(&record, out)?;
    Ok(report.outcome)
}

fn outcome(converged: bool) -> Outcome {
    if converged { Outcome::Done } else { Outcome::NotConverged }
}

#[derive(Serialize)]
struct SolveTiming {
    #[serde(flatten)]
    steps: solver::StepTiming,
    total: f64,
}

#[derive(Serialize)]
struct SolveResults {
    converged: bool,
    iterations: usize,
    final_residual: Option<solver::IterationRecord>,
    spectrum: solver::SpectrumReport,
    history: Vec<solver::IterationRecord>,
    timing: SolveTiming,
}

fn cmd_solve(a: &SolveArgs) -> crate::Result<Report> {
    let (x, _) = a.data.load()?;
    let t = std::time::Instant::now();
    let res = solver::solve(&x, &a.solver.config(a.psd))?;
    let total = t.elapsed().as_secs_f64();
    if let Some(path) = &a.dump_z {
        data::save_matrix(path, &res.z)?;
    }
    if let Some(path) = &a.dump_e {
        data::save_matrix(path, &res.e)?;
    }
    let results = SolveResults {
        converged: res.converged,
        iterations: res.iterations,
        final_residual: res.history.last().copied(),
        spectrum: solver::spectrum_report(&res.z)?,
        history: res.history,
        timing: SolveTiming { steps: res.timing, total },
    };
    Ok(Report { seeds: vec![a.data.seed], results: to_value(&results)?, outcome: outcome(res.converged) })
}

fn cmd_sweep(a: &SweepArgs) -> crate::Result<Report> {
    let lambdas = experiments::parse_grid(&a.lambdas)?;
    let (x, _) = a.data.load()?;
    let base = AlmConfig { noise_norm: a.noise, tol: a.tol, max_iter: a.max_iter, ..AlmConfig::default() };
    let out = experiments::spectrum_sweep(&x, &lambdas, &a.psd.variants(), &base)?;
    if let Some(path) = &a.csv {
        data::save_matrix(path, &experiments::sweep_table(&out.rows)?)?;
    }
    let converged = out.rows.iter().all(|r| r.converged);
    Ok(Report { seeds: vec![a.data.seed], results: to_value(&out)?, outcome: outcome(converged) })
}

fn cmd_noise_compare(a: &NoiseCompareArgs) -> crate::Result<Report> {
    if a.seeds == 0 {
        return Err(Error::Parameter("--seeds must be at least 1".into()));
    }
    if a.psd == PsdChoice::Both {
        return Err(Error::Parameter("noise-compare takes --psd on or off".into()));
    }
    let fractions = experiments::parse_grid(&a.fractions)?;
    let seeds: Vec<u64> = (1..=a.seeds).collect();
    let params = experiments::NoiseCompareParams {
        model: a.noise_model,
        sigma_scale: a.noise_scale,
        psd: a.psd == PsdChoice::On,
        max_iter: a.max_iter,
        ..experiments::NoiseCompareParams::new(fractions, seeds.clone(), a.lambda)
    };
    let rows = experiments::noise_compare(&params, experiments::thread_count()?)?;
    let converged = rows.iter().all(|r| r.l1.all_converged && r.l21.all_converged);
    Ok(Report { seeds, results: to_value(&rows)?, outcome: outcome(converged) })
}

fn cmd_bench(a: &BenchArgs) -> crate::Result<Report> {
    let rows = experiments::bench(&a.sizes, a.reps, a.seed)?;
    Ok(Report { seeds: vec![a.seed], results: to_value(&rows)?, outcome: Outcome::Done })
}

#[derive(Serialize)]
struct ClusterResults {
    method: Method,
    k: usize,
    labels: Vec<usize>,
    accuracy: Option<f64>,
    /// Mass of the learned representation inside the ground-truth blocks.
    block_diagonal_mass: Option<f64>,
    solver_converged: Option<bool>,
}

fn cmd_cluster(a: &ClusterArgs) -> crate::Result<Report> {
    let (x, ds) = a.data.load()?;
    let truth = match (&a.labels, &ds) {
        (Some(path), _) => Some(data::load_labels(path)?),
        (None, Some(ds)) => Some(ds.labels.clone()),
        (None, None) => None,
    };
    let mut mass = None;
    let mut converged = None;
    let w = match a.method {
        Method::Gauss => {
            let sigma = a
                .sigma
                .ok_or_else(|| Error::Parameter("--sigma is required for the gauss method".into()))?;
            segmentation::gaussian_affinity(&x, sigma)?
        }
        Method::Linear => segmentation::linear_affinity(&x),
        Method::Lrr | Method::LrrPsd => {
            let psd = a.method == Method::LrrPsd;
            let res = solver::solve(&x, &a.solver.config(psd))?;
            converged = Some(res.converged);
            if let Some(ds) = &ds {
                let sizes = vec![ds.meta.samples_per_subspace; ds.meta.num_subspaces];
                mass = Some(segmentation::block_diagonal_mass(&res.z, &sizes)?);
            }
            let mode = if psd { AffinityMode::PsdDirect } else { AffinityMode::AbsSym };
            segmentation::affinity_from_representation(&res.z, mode)?
        }
    };
    let mut clusters = segmentation::spectral_cluster(&w, a.k, a.data.seed)?;
    if let Some(t) = &truth {
        clusters = clusters.with_truth(t)?;
    }
    let results = ClusterResults {
        method: a.method,
        k: a.k,
        labels: clusters.labels,
        accuracy: clusters.accuracy,
        block_diagonal_mass: mass,
        solver_converged: converged,
    };
    Ok(Report {
        seeds: vec![a.data.seed],
        results: to_value(&results)?,
        outcome: outcome(converged.unwrap_or(true)),
    })
}

#[derive(Serialize)]
struct GenerateResults {
    rows: usize,
    cols: usize,
    rank: usize,
    corrupted_entries: usize,
    meta: data::DatasetMeta,
}

fn cmd_generate(a: &GenerateArgs) -> crate::Result<Report> {
    if a.data.input.is_some() {
        return Err(Error::Parameter("generate only produces synthetic data; use --toy".into()));
    }
    let mut ds = data::generate_toy(&a.data.toy_params())?;
    let mut corrupted_entries = 0;
    if let Some(spec) = a.data.corruption() {
        let (c, mask) = ds.corrupted(&spec)?;
        ds = c;
        corrupted_entries = mask.count();
    }
    data::save_matrix(&a.out_x, &ds.x)?;
    if let Some(path) = &a.out_labels {
        data::save_labels(path, &ds.labels)?;
    }
    let results = GenerateResults {
        rows: ds.x.rows(),
        cols: ds.x.cols(),
        rank: crate::linalg::numerical_rank(&ds.x, crate::linalg::DEFAULT_RANK_TOL),
        corrupted_entries,
        meta: ds.meta,
    };
    Ok(Report { seeds: vec![a.data.seed], results: to_value(&results)?, outcome: Outcome::Done })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_removes_nested_volatile_keys() {
        let mut v = serde_json::json!({
            "timestamps": {"started": "x"},
            "results": [{"n": 1, "timing": {"eig": 0.1}}, {"timing": 2}],
            "keep": {"timing_like": 1}
        });
        strip_volatile(&mut v);
        assert_eq!(v, serde_json::json!({"results": [{"n": 1}, {}], "keep": {"timing_like": 1}}));
    }

    #[test]
    fn parse_failures_map_to_input_error() {
        assert_eq!(run(["lowrankseg", "solve"]), EXIT_INPUT);
        assert_eq!(run(["lowrankseg", "nope"]), EXIT_INPUT);
        assert_eq!(run(["lowrankseg", "solve", "--toy", "--input", "a.csv"]), EXIT_INPUT);
        assert_eq!(run(["lowrankseg", "--help"]), EXIT_OK);
        assert_eq!(run(["lowrankseg", "--version"]), EXIT_OK);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
