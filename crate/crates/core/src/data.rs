//! Synthetic union-of-subspaces data, noise injection and CSV matrix files.
//!
//! The toy generator draws a random orthonormal basis `U₁ ∈ R^{D×d}` and one random
//! rotation `T`, sets `U_{i+1} = T·U_i`, and samples each group as `U_i·Q_i` with
//! standard normal `Q_i`. Columns are emitted in group order, so the ideal coefficient
//! matrix is block-diagonal in sample order.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Mat, Result};

/// Samples (columns) plus ground-truth group labels.
#[derive(Clone, Debug)]
pub struct Dataset {
    /// `ambient_dim × n`, one sample per column.
    pub x: Mat,
    /// Nondecreasing group index per column.
    pub labels: Vec<usize>,
    pub meta: DatasetMeta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub num_subspaces: usize,
    pub subspace_dim: usize,
    pub ambient_dim: usize,
    pub samples_per_subspace: usize,
    pub seed: u64,
    pub corruption: Option<CorruptionSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyParams {
    pub seed: u64,
    pub num_subspaces: usize,
    pub subspace_dim: usize,
    pub ambient_dim: usize,
    pub samples_per: usize,
}

impl ToyParams {
    /// Five 4-dimensional subspaces of R^100 with 20 samples each.
    pub fn new(seed: u64) -> Self {
        Self { seed, num_subspaces: 5, subspace_dim: 4, ambient_dim: 100, samples_per: 20 }
    }
}

pub fn generate_toy(params: &ToyParams) -> Result<Dataset> {
    let &ToyParams { seed, num_subspaces: k, subspace_dim: d, ambient_dim, samples_per } = params;
    if k == 0 || d == 0 || samples_per == 0 {
        return Err(Error::Parameter("subspace count, dimension and sample count must be positive".into()));
    }
    if k * d > ambient_dim {
        return Err(Error::Parameter(format!(
            "{k} independent subspaces of dimension {d} do not fit in R^{ambient_dim}"
        )));
    }
    if samples_per <= d {
        return Err(Error::Parameter(format!(
            "need more than {d} samples per subspace, got {samples_per}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis = Mat::random_orthonormal(ambient_dim, d, &mut rng);
    let rotation = random_rotation(ambient_dim, &mut rng);

    let n = k * samples_per;
    let mut x = faer::Mat::<f64>::zeros(ambient_dim, n);
    for group in 0..k {
        if group > 0 {
            basis = rotation.matmul(&basis);
        }
        let coeffs = Mat::random_normal(d, samples_per, &mut rng);
        let block = basis.matmul(&coeffs);
        x.as_mut()
            .submatrix_mut(0, group * samples_per, ambient_dim, samples_per)
            .copy_from(block.as_faer());
    }

    Ok(Dataset {
        x: Mat::from_faer(x)?,
        labels: (0..n).map(|i| i / samples_per).collect(),
        meta: DatasetMeta {
            num_subspaces: k,
            subspace_dim: d,
            ambient_dim,
            samples_per_subspace: samples_per,
            seed,
            corruption: None,
        },
    })
}

/// Haar orthogonal matrix with its determinant forced to +1.
fn random_rotation(n: usize, rng: &mut ChaCha8Rng) -> Mat {
    let q = Mat::random_orthonormal(n, n, rng);
    if q.as_faer().determinant() > 0.0 {
        return q;
    }
    let mut inner = q.into_faer();
    for v in inner.col_as_slice_mut(0) {
        *v = -*v;
    }
    Mat::from_faer(inner).expect("sign flip keeps entries finite")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CorruptionModel {
    /// A fraction of all entries, anywhere in the matrix.
    RandomEntries,
    /// A fraction of whole columns (samples).
    SampleSpecific,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub model: CorruptionModel,
    /// Fraction of entries (or columns) touched, in `[0, 1]`.
    pub fraction: f64,
    /// Total noise magnitude relative to `‖X‖_F`.
    pub sigma_scale: f64,
    pub seed: u64,
}

/// Row-major boolean map of corrupted entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorruptionMask {
    pub rows: usize,
    pub cols: usize,
    pub touched: Vec<bool>,
}

impl CorruptionMask {
    pub fn count(&self) -> usize {
        self.touched.iter().filter(|&&t| t).count()
    }

    pub fn is_touched(&self, i: usize, j: usize) -> bool {
        self.touched[i * self.cols + j]
    }
}

/// Adds zero-mean Gaussian noise with per-entry standard deviation
/// `sigma_scale·‖X‖_F/√(d·n)` to the entries selected by `spec`.
///
/// With every entry selected the expected noise norm is `sigma_scale·‖X‖_F`.
pub fn corrupt(x: &Mat, spec: &CorruptionSpec) -> Result<(Mat, CorruptionMask)> {
    if !(0.0..=1.0).contains(&spec.fraction) {
        return Err(Error::Parameter(format!("corruption fraction {} outside [0, 1]", spec.fraction)));
    }
    if !(spec.sigma_scale >= 0.0 && spec.sigma_scale.is_finite()) {
        return Err(Error::Parameter(format!("sigma scale {} must be nonnegative", spec.sigma_scale)));
    }
    let (d, n) = x.shape();
    let mut data = x.to_row_major();
    let mut touched = vec![false; d * n];

    let std = spec.sigma_scale * x.frobenius() / ((d * n) as f64).sqrt();
    let noise = Normal::new(0.0, std).map_err(|e| Error::Parameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    match spec.model {
        CorruptionModel::RandomEntries => {
            let count = (spec.fraction * (d * n) as f64).round() as usize;
            for idx in index::sample(&mut rng, d * n, count) {
                data[idx] += noise.sample(&mut rng);
                touched[idx] = true;
            }
        }
        CorruptionModel::SampleSpecific => {
            let count = (spec.fraction * n as f64).round() as usize;
            for j in index::sample(&mut rng, n, count) {
                for i in 0..d {
                    data[i * n + j] += noise.sample(&mut rng);
                    touched[i * n + j] = true;
                }
            }
        }
    }

    let out = Mat::from_row_major(d, n, data)?;
    Ok((out, CorruptionMask { rows: d, cols: n, touched }))
}

impl Dataset {
    /// Applies [`corrupt`] to the samples and records the spec in the metadata.
    pub fn corrupted(mut self, spec: &CorruptionSpec) -> Result<(Self, CorruptionMask)> {
        let (x, mask) = corrupt(&self.x, spec)?;
        self.x = x;
        self.meta.corruption = Some(*spec);
        Ok((self, mask))
    }
}

fn parse_err(line: Option<usize>, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Reads a headerless comma-separated matrix, one row per line.
pub fn read_matrix<R: Read>(reader: R) -> Result<Mat> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize);
        let width = *cols.get_or_insert(record.len());
        if record.len() != width {
            return Err(parse_err(line, format!("expected {width} fields, found {}", record.len())));
        }
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line, format!("not a number: {field:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("non-finite value: {field:?}")));
            }
            data.push(v);
        }
        rows += 1;
    }
    match cols {
        Some(c) if rows > 0 && c > 0 => Mat::from_row_major(rows, c, data),
        _ => Err(parse_err(None, "empty matrix")),
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<Mat> {
    read_matrix(open(path.as_ref())?)
}

/// Writes every entry with 17 significant digits, which round-trips `f64` exactly.
pub fn write_matrix<W: Write>(writer: W, m: &Mat) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for i in 0..m.rows() {
        w.write_record((0..m.cols()).map(|j| format!("{:.16e}", m[(i, j)])))
            .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_matrix(path: impl AsRef<Path>, m: &Mat) -> Result<()> {
    write_matrix(BufWriter::new(create(path.as_ref())?), m)
}

fn csv_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Reads integer labels from a CSV file; all fields are taken in reading order.
pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(open(path.as_ref())?);
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| parse_err(e.position().map(|p| p.line() as usize), e.to_string()))?;
        let line = record.position().map(|p| p.line() as usize);
        for field in record.iter().filter(|f| !f.is_empty()) {
            labels.push(field.parse().map_err(|_| parse_err(line, format!("not a label: {field:?}")))?);
        }
    }
    if labels.is_empty() {
        return Err(parse_err(None, "no labels"));
    }
    Ok(labels)
}

/// One label per line.
pub fn save_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    let mut w = BufWriter::new(create(path.as_ref())?);
    for l in labels {
        writeln!(w, "{l}")?;
    }
    w.flush()?;
    Ok(())
}
