//! He-H⁺ Hamiltonian construction, coefficient tables and energy-curve sweeps.
//!
//! A sweep evaluates, at every grid point, the exact ground energy and the
//! best VQE energy over several seeded restarts. Points are independent and
//! run on a thread pool; results are always ordered by grid index.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{AnsatzCircuit, Topology};
use crate::error::{Error, Result};
use crate::optimizer::{derive_seed, run_vqe, OptimizerConfig};
use crate::pauli::{ground_energy_exact, Hamiltonian, PauliString, PauliTerm};

/// Grid values closer than this are the same point.
pub const GRID_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_RESTARTS: usize = 5;

/// One row of a He-H⁺ coefficient table. R in Å, the rest in Hartree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeHCoefficients {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "Jx")]
    pub jx: f64,
    #[serde(rename = "Jz")]
    pub jz: f64,
    #[serde(rename = "Jxx")]
    pub jxx: f64,
    #[serde(rename = "Jzz")]
    pub jzz: f64,
    #[serde(rename = "Jxz")]
    pub jxz: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

impl HeHCoefficients {
    fn validate(&self) -> Result<()> {
        let values = [self.r, self.jx, self.jz, self.jxx, self.jzz, self.jxz, self.c];
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Schema(format!("non-finite value {v} in row R = {}", self.r)));
        }
        if self.r <= 0.0 {
            return Err(Error::Schema(format!("bond length must be positive, got {}", self.r)));
        }
        Ok(())
    }
}

/// `½[Jx(XI + IX) + Jz(ZI + IZ) + Jxx·XX + Jzz·ZZ + Jxz(XZ + ZX) + C·II]`
///
/// All nine terms are kept, including zero-coefficient ones.
pub fn build_heh_hamiltonian(c: &HeHCoefficients) -> Hamiltonian {
    let labels = [
        ("XI", c.jx),
        ("IX", c.jx),
        ("ZI", c.jz),
        ("IZ", c.jz),
        ("XX", c.jxx),
        ("ZZ", c.jzz),
        ("XZ", c.jxz),
        ("ZX", c.jxz),
        ("II", c.c),
    ];
    let terms =
        labels.iter().map(|&(s, v)| PauliTerm::new(0.5 * v, PauliString::parse(s, 2).expect("static label"))).collect();
    Hamiltonian::new(2, terms).expect("finite coefficients")
}

/// Rows sorted by strictly increasing R. Lookups are exact to
/// [`GRID_TOLERANCE`]; there is no interpolation.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable {
    rows: Vec<HeHCoefficients>,
}

impl CoefficientTable {
    pub fn from_rows(rows: Vec<HeHCoefficients>) -> Result<CoefficientTable> {
        for row in &rows {
            row.validate()?;
        }
        for pair in rows.windows(2) {
            let (a, b) = (pair[0].r, pair[1].r);
            if (b - a).abs() <= GRID_TOLERANCE {
                return Err(Error::Schema(format!("duplicate R = {b}")));
            }
            if b < a {
                return Err(Error::Schema(format!("R is not increasing: {a} followed by {b}")));
            }
        }
        Ok(CoefficientTable { rows })
    }

    /// Reads a CSV with header `R,Jx,Jz,Jxx,Jzz,Jxz,C`.
    pub fn load(path: impl AsRef<Path>) -> Result<CoefficientTable> {
        let path = path.as_ref();
        let csv_err = |source| Error::Csv { path: path.to_owned(), source };
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err)?;
        let headers = reader.headers().map_err(csv_err)?.clone();
        for col in ["R", "Jx", "Jz", "Jxx", "Jzz", "Jxz", "C"] {
            if !headers.iter().any(|h| h == col) {
                return Err(Error::Schema(format!("{}: missing column {col}", path.display())));
            }
        }
        let rows = reader.deserialize().collect::<std::result::Result<Vec<HeHCoefficients>, _>>().map_err(csv_err)?;
        CoefficientTable::from_rows(rows)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let csv_err = |source| Error::Csv { path: path.to_owned(), source };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        for row in &self.rows {
            w.serialize(row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn rows(&self) -> &[HeHCoefficients] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn lookup(&self, r: f64) -> Result<&HeHCoefficients> {
        let i = self.rows.partition_point(|row| row.r < r - GRID_TOLERANCE);
        match self.rows.get(i) {
            Some(row) if (row.r - r).abs() <= GRID_TOLERANCE => Ok(row),
            _ => Err(Error::MissingGridPoint(r)),
        }
    }
}

/// Either an explicit list of values or `{start, stop, step}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    /// A range holds `floor((stop − start)/step) + 1` points, the i-th being
    /// `start + i·step`.
    pub fn points(&self) -> Result<Vec<f64>> {
        match *self {
            Grid::List(ref values) => {
                if values.is_empty() {
                    return Err(Error::Schema("grid is empty".into()));
                }
                if let Some(v) = values.iter().find(|v| !v.is_finite()) {
                    return Err(Error::Schema(format!("non-finite grid value {v}")));
                }
                Ok(values.clone())
            }
            Grid::Range { start, stop, step } => {
                if !(step.is_finite() && step > 0.0) {
                    return Err(Error::Schema(format!("grid step must be positive, got {step}")));
                }
                if !(start.is_finite() && stop.is_finite()) || stop < start {
                    return Err(Error::Schema(format!("grid range [{start}, {stop}] is empty or invalid")));
                }
                // absorb rounding so that e.g. (2.5 − 0.5)/0.05 counts 40 steps
                let steps = ((stop - start) / step + GRID_TOLERANCE).floor() as usize;
                Ok((0..=steps).map(|i| start + i as f64 * step).collect())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    R,
    #[serde(rename = "phi")]
    Phi,
}

/// Where each grid point's Hamiltonian comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum HamiltonianSource {
    /// He-H⁺ coefficient table; each grid value is looked up as R.
    Table { path: PathBuf },
    /// One Hamiltonian file per grid point, in grid order.
    Files { paths: Vec<PathBuf> },
    /// An exporter manifest; grid values are matched to entries.
    Manifest { path: PathBuf },
}

/// Exporter manifest: `{"entries": [{"grid_value": v, "path": "...", "error": null}, ...]}`.
/// Entry paths are relative to the manifest's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub grid_value: f64,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub error: Option<String>,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Manifest> {
        read_json(path.as_ref())
    }
}

fn default_layers() -> usize {
    1
}

fn default_restarts() -> usize {
    DEFAULT_RESTARTS
}

fn default_optimizer() -> OptimizerConfig {
    OptimizerConfig { iterations: 100, ..Default::default() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Grid,
    pub source: HamiltonianSource,
    #[serde(default = "default_layers")]
    pub layers: usize,
    #[serde(default)]
    pub topology: Topology,
    #[serde(default = "default_optimizer")]
    pub optimizer: OptimizerConfig,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    /// Root seed; per-point, per-restart seeds are derived from it.
    #[serde(default)]
    pub seed: u64,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_owned(), source })
}

impl SweepSpec {
    /// Loads a spec file. Relative source paths are resolved against the
    /// spec's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<SweepSpec> {
        let path = path.as_ref();
        let mut spec: SweepSpec = read_json(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        spec.source = match spec.source {
            HamiltonianSource::Table { path } => HamiltonianSource::Table { path: base.join(path) },
            HamiltonianSource::Files { paths } => {
                HamiltonianSource::Files { paths: paths.into_iter().map(|p| base.join(p)).collect() }
            }
            HamiltonianSource::Manifest { path } => HamiltonianSource::Manifest { path: base.join(path) },
        };
        Ok(spec)
    }

    pub fn validate(&self) -> Result<Vec<f64>> {
        let points = self.grid.points()?;
        if self.restarts == 0 {
            return Err(Error::Schema("restarts must be at least 1".into()));
        }
        if let HamiltonianSource::Files { paths } = &self.source {
            if paths.len() != points.len() {
                return Err(Error::Schema(format!(
                    "{} Hamiltonian files for {} grid points",
                    paths.len(),
                    points.len()
                )));
            }
        }
        if matches!(self.source, HamiltonianSource::Table { .. }) && self.variable != SweepVariable::R {
            return Err(Error::Schema("coefficient tables only drive R sweeps".into()));
        }
        self.optimizer.validate().map_err(|e| Error::Schema(e.to_string()))?;
        Ok(points)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub grid_value: f64,
    pub exact_energy: Option<f64>,
    pub vqe_energy: Option<f64>,
    pub converged: bool,
    /// Seed of the best restart.
    pub seed: Option<u64>,
    /// Present when the point failed.
    pub error: Option<String>,
}

impl SweepRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
}

fn argmin_by(records: &[SweepRecord], key: impl Fn(&SweepRecord) -> Option<f64>) -> Option<usize> {
    records
        .iter()
        .enumerate()
        .filter_map(|(i, r)| key(r).filter(|_| !r.failed()).map(|e| (i, e)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
}

impl SweepResult {
    pub fn argmin_exact(&self) -> Option<usize> {
        argmin_by(&self.records, |r| r.exact_energy)
    }

    pub fn argmin_vqe(&self) -> Option<usize> {
        argmin_by(&self.records, |r| r.vqe_energy)
    }

    pub fn succeeded(&self) -> usize {
        self.records.iter().filter(|r| !r.failed()).count()
    }

    /// CSV with header `grid_value,exact_energy,vqe_energy,converged,seed`.
    /// Failed points have `converged = failed` and empty cells for missing values.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let csv_err = |source| Error::Csv { path: path.to_owned(), source };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(["grid_value", "exact_energy", "vqe_energy", "converged", "seed"]).map_err(csv_err)?;
        for r in &self.records {
            let converged = if r.failed() { "failed".to_string() } else { r.converged.to_string() };
            w.serialize((r.grid_value, r.exact_energy, r.vqe_energy, converged, r.seed)).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Inverse of [`SweepResult::write_csv`]. Error messages are not stored in
    /// the CSV, so failed rows come back with the message `"failed"`.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<SweepResult> {
        let path = path.as_ref();
        let csv_err = |source| Error::Csv { path: path.to_owned(), source };
        let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
        let mut records = Vec::new();
        for row in reader.deserialize() {
            let (grid_value, exact_energy, vqe_energy, converged, seed): (
                f64,
                Option<f64>,
                Option<f64>,
                String,
                Option<u64>,
            ) = row.map_err(csv_err)?;
            let (converged, error) = match converged.as_str() {
                "true" => (true, None),
                "false" => (false, None),
                "failed" => (false, Some("failed".to_string())),
                other => return Err(Error::Schema(format!("bad converged value {other:?}"))),
            };
            records.push(SweepRecord { grid_value, exact_energy, vqe_energy, converged, seed, error });
        }
        Ok(SweepResult { records })
    }
}

/// Seed used for `restart` at grid index `point`.
pub fn restart_seed(root: u64, point: usize, restart: usize) -> u64 {
    derive_seed(derive_seed(root, point as u64), restart as u64)
}

enum Resolver {
    Table(CoefficientTable),
    Files(Vec<PathBuf>),
    Manifest { base: PathBuf, manifest: Manifest },
}

impl Resolver {
    fn new(source: &HamiltonianSource) -> Result<Resolver> {
        Ok(match source {
            HamiltonianSource::Table { path } => Resolver::Table(CoefficientTable::load(path)?),
            HamiltonianSource::Files { paths } => Resolver::Files(paths.clone()),
            HamiltonianSource::Manifest { path } => Resolver::Manifest {
                base: path.parent().map(Path::to_path_buf).unwrap_or_default(),
                manifest: Manifest::load(path)?,
            },
        })
    }

    fn resolve(&self, index: usize, value: f64) -> Result<Hamiltonian> {
        match self {
            Resolver::Table(table) => Ok(build_heh_hamiltonian(table.lookup(value)?)),
            Resolver::Files(paths) => Hamiltonian::load(&paths[index]),
            Resolver::Manifest { base, manifest } => {
                let entry = manifest
                    .entries
                    .iter()
                    .find(|e| (e.grid_value - value).abs() <= GRID_TOLERANCE)
                    .ok_or(Error::MissingGridPoint(value))?;
                if let Some(err) = &entry.error {
                    return Err(Error::Schema(format!("manifest entry {value} failed upstream: {err}")));
                }
                let path =
                    entry.path.as_ref().ok_or_else(|| Error::Schema(format!("manifest entry {value} has no path")))?;
                Hamiltonian::load(base.join(path))
            }
        }
    }
}

/// Exact ground energy plus best-of-restarts VQE for one Hamiltonian.
pub fn evaluate_point(
    h: &Hamiltonian,
    layers: usize,
    topology: Topology,
    optimizer: &OptimizerConfig,
    seeds: impl IntoIterator<Item = u64>,
) -> Result<(f64, f64, u64)> {
    let exact = ground_energy_exact(h)?.ground_energy;
    let circuit = AnsatzCircuit::build(h.num_qubits(), layers, topology)?;
    let mut best: Option<(f64, u64)> = None;
    let mut last_err = None;
    for seed in seeds {
        let config = OptimizerConfig { seed, ..optimizer.clone() };
        match run_vqe(h, &circuit, &config, Some(exact)) {
            Ok(trace) => {
                let e = trace.final_energy();
                if best.is_none_or(|(b, _)| e < b) {
                    best = Some((e, seed));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match (best, last_err) {
        (Some((e, seed)), _) => Ok((exact, e, seed)),
        (None, Some(err)) => Err(err),
        (None, None) => Err(Error::InvalidConfig("no restarts requested".into())),
    }
}

/// Runs every grid point on a pool of `jobs` threads (`None` = all cores).
/// Failures at individual points are recorded, not propagated.
pub fn run_sweep(spec: &SweepSpec, jobs: Option<usize>) -> Result<SweepResult> {
    let points = spec.validate()?;
    let resolver = Resolver::new(&spec.source)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;

    let records = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, &value)| {
                let resolved = resolver.resolve(i, value);
                let outcome = resolved.and_then(|h| {
                    let seeds = (0..spec.restarts).map(|r| restart_seed(spec.seed, i, r));
                    evaluate_point(&h, spec.layers, spec.topology, &spec.optimizer, seeds)
                });
                match outcome {
                    Ok((exact, vqe, seed)) => SweepRecord {
                        grid_value: value,
                        exact_energy: Some(exact),
                        vqe_energy: Some(vqe),
                        converged: vqe <= exact + spec.optimizer.convergence_tolerance,
                        seed: Some(seed),
                        error: None,
                    },
                    Err(e) => SweepRecord {
                        grid_value: value,
                        exact_energy: None,
                        vqe_energy: None,
                        converged: false,
                        seed: None,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    });
    Ok(SweepResult { records })
}
