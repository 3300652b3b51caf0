//! Gradient-descent VQE loop with four gradient estimators.
//!
//! | method | probes per step | gradient component `i` |
//! |--------|-----------------|------------------------|
//! | FOGD   | `dim + 1`       | `(E(θ + h eᵢ) − E(θ)) / h` |
//! | SOGD   | `2·dim`         | `(E(θ + h eᵢ) − E(θ − h eᵢ)) / 2h` |
//! | PS     | `2·dim`         | `(E(θ + π/2 eᵢ) − E(θ − π/2 eᵢ)) / 2` |
//! | SPSA   | `2`             | `(E(θ + c_k Δ) − E(θ − c_k Δ)) / (2 c_k Δᵢ)` |
//!
//! The update is `θ ← θ − η ∇E`. SPSA replaces the constant `η` with the
//! decaying gain `a / (k + 1 + A)^α`.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{AnsatzCircuit, ParameterVector, Topology};
use crate::error::{Error, Result};
use crate::estimator::{estimate, EstimatorConfig, EstimatorMode};
use crate::pauli::Hamiltonian;

pub const DEFAULT_ETA: f64 = 0.8;
pub const DEFAULT_FOGD_STEP: f64 = 1e-6;
pub const DEFAULT_SOGD_STEP: f64 = 1e-4;
pub const DEFAULT_SMALL_INIT: f64 = 0.1;
pub const DEFAULT_CONVERGENCE_TOLERANCE: f64 = 0.1;

const STREAM_INIT: u64 = 0;
const STREAM_SPSA: u64 = 1;
const STREAM_SHOTS: u64 = 2;

/// Derives an independent 64-bit seed for `stream` from `root`.
pub fn derive_seed(root: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(stream);
    rng.next_u64()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fogd,
    Sogd,
    Spsa,
    #[default]
    Ps,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Fogd, Method::Sogd, Method::Spsa, Method::Ps];

    /// Energy probes one gradient estimate costs for `dim` parameters.
    pub fn probes_per_step(self, dim: usize) -> usize {
        match self {
            Method::Fogd => dim + 1,
            Method::Sogd | Method::Ps => 2 * dim,
            Method::Spsa => 2,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Fogd => "fogd",
            Method::Sogd => "sogd",
            Method::Spsa => "spsa",
            Method::Ps => "ps",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        match s.to_ascii_lowercase().as_str() {
            "fogd" => Ok(Method::Fogd),
            "sogd" => Ok(Method::Sogd),
            "spsa" => Ok(Method::Spsa),
            "ps" => Ok(Method::Ps),
            other => Err(Error::InvalidConfig(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitStrategy {
    /// Uniform on `[0, 2π)`.
    #[default]
    Random,
    /// Uniform on `[0, ε)`.
    Small,
    Zero,
}

impl fmt::Display for InitStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitStrategy::Random => "random",
            InitStrategy::Small => "small",
            InitStrategy::Zero => "zero",
        })
    }
}

impl std::str::FromStr for InitStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<InitStrategy> {
        match s {
            "random" => Ok(InitStrategy::Random),
            "small" => Ok(InitStrategy::Small),
            "zero" => Ok(InitStrategy::Zero),
            other => Err(Error::InvalidConfig(format!("unknown init strategy {other:?}"))),
        }
    }
}

/// SPSA gain constants. `a` and `big_a` default to values derived from the
/// run (see [`SpsaSchedule::resolve`]).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpsaConstants {
    pub a: Option<f64>,
    pub big_a: Option<f64>,
    pub alpha: f64,
    pub c: f64,
    pub gamma: f64,
}

impl Default for SpsaConstants {
    fn default() -> Self {
        SpsaConstants { a: None, big_a: None, alpha: 0.602, c: 0.2, gamma: 0.101 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpsaSchedule {
    pub a: f64,
    pub big_a: f64,
    pub alpha: f64,
    pub c: f64,
    pub gamma: f64,
}

impl SpsaSchedule {
    /// Fills in `A = 0.1·iterations` and `a = η·(1 + A)^α`, so the first
    /// gain equals `eta`.
    pub fn resolve(constants: &SpsaConstants, eta: f64, iterations: usize) -> SpsaSchedule {
        let big_a = constants.big_a.unwrap_or(0.1 * iterations as f64);
        let a = constants.a.unwrap_or_else(|| eta * (1.0 + big_a).powf(constants.alpha));
        SpsaSchedule { a, big_a, alpha: constants.alpha, c: constants.c, gamma: constants.gamma }
    }

    /// Learning rate `a / (k + 1 + A)^α`.
    pub fn gain(&self, k: usize) -> f64 {
        self.a / (k as f64 + 1.0 + self.big_a).powf(self.alpha)
    }

    /// Perturbation size `c / (k + 1)^γ`.
    pub fn perturbation(&self, k: usize) -> f64 {
        self.c / (k as f64 + 1.0).powf(self.gamma)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub method: Method,
    pub eta: f64,
    pub iterations: usize,
    /// Finite-difference step; `None` picks the per-method default.
    pub fd_step: Option<f64>,
    pub spsa: SpsaConstants,
    pub init: InitStrategy,
    /// `ε` for [`InitStrategy::Small`].
    pub init_scale: f64,
    pub seed: u64,
    pub estimator: EstimatorConfig,
    /// A run is converged iff its final energy is at most reference + this.
    pub convergence_tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: Method::Ps,
            eta: DEFAULT_ETA,
            iterations: 20,
            fd_step: None,
            spsa: SpsaConstants::default(),
            init: InitStrategy::Random,
            init_scale: DEFAULT_SMALL_INIT,
            seed: 0,
            estimator: EstimatorConfig::default(),
            convergence_tolerance: DEFAULT_CONVERGENCE_TOLERANCE,
        }
    }
}

impl OptimizerConfig {
    pub fn fd_step_or_default(&self) -> f64 {
        self.fd_step.unwrap_or(match self.method {
            Method::Fogd => DEFAULT_FOGD_STEP,
            _ => DEFAULT_SOGD_STEP,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return bad(format!("eta must be positive, got {}", self.eta));
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        let h = self.fd_step_or_default();
        if !(h.is_finite() && h > 0.0) {
            return bad(format!("finite-difference step must be positive, got {h}"));
        }
        if !(self.init_scale.is_finite() && self.init_scale > 0.0) {
            return bad(format!("init_scale must be positive, got {}", self.init_scale));
        }
        let s = &self.spsa;
        for (name, v) in [("alpha", s.alpha), ("c", s.c), ("gamma", s.gamma)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("spsa.{name} must be positive, got {v}"));
            }
        }
        if let Some(a) = s.a.filter(|a| !(a.is_finite() && *a > 0.0)) {
            return bad(format!("spsa.a must be positive, got {a}"));
        }
        if let Some(big_a) = s.big_a.filter(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad(format!("spsa.big_a must be non-negative, got {big_a}"));
        }
        if !(self.convergence_tolerance.is_finite() && self.convergence_tolerance >= 0.0) {
            return bad("convergence_tolerance must be non-negative".into());
        }
        self.estimator.validate()
    }
}

/// Energy of an ansatz against a Hamiltonian, with probe accounting.
pub struct EnergyObjective<'a> {
    circuit: &'a AnsatzCircuit,
    hamiltonian: &'a Hamiltonian,
    estimator: EstimatorConfig,
    rng: ChaCha8Rng,
    probes: u64,
    evaluations: u64,
}

impl<'a> EnergyObjective<'a> {
    /// Sampling draws come from a generator seeded with `estimator.seed`.
    pub fn new(
        circuit: &'a AnsatzCircuit,
        hamiltonian: &'a Hamiltonian,
        estimator: EstimatorConfig,
    ) -> Result<EnergyObjective<'a>> {
        if circuit.num_qubits() != hamiltonian.num_qubits() {
            return Err(Error::DimensionMismatch {
                state: circuit.num_qubits(),
                hamiltonian: hamiltonian.num_qubits(),
            });
        }
        estimator.validate()?;
        Ok(EnergyObjective {
            circuit,
            hamiltonian,
            rng: ChaCha8Rng::seed_from_u64(estimator.seed),
            estimator,
            probes: 0,
            evaluations: 0,
        })
    }

    fn evaluate(&mut self, theta: &[f64]) -> Result<(f64, u64)> {
        let state = self.circuit.run(theta)?;
        let est = estimate(&state, self.hamiltonian, &self.estimator, &mut self.rng)?;
        if !est.value.is_finite() {
            return Err(Error::NonFiniteEnergy);
        }
        let used = match self.estimator.mode {
            EstimatorMode::Exact => 1,
            EstimatorMode::Sampled => est.evaluations_used,
        };
        Ok((est.value, used))
    }

    /// One counted energy probe.
    pub fn energy(&mut self, theta: &[f64]) -> Result<f64> {
        let (value, used) = self.evaluate(theta)?;
        self.probes += 1;
        self.evaluations += used;
        Ok(value)
    }

    /// Energy for trace recording; not charged to the probe counters.
    pub fn measure(&mut self, theta: &[f64]) -> Result<f64> {
        self.evaluate(theta).map(|(value, _)| value)
    }

    /// Number of counted [`EnergyObjective::energy`] calls.
    pub fn probes(&self) -> u64 {
        self.probes
    }

    /// Circuit executions behind the counted probes: one per probe in exact
    /// mode, shots × measured terms per probe when sampling.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }
}

fn checked<E>(energy: &mut E, theta: &[f64]) -> Result<f64>
where
    E: FnMut(&[f64]) -> Result<f64>,
{
    let e = energy(theta)?;
    if e.is_finite() {
        Ok(e)
    } else {
        Err(Error::NonFiniteEnergy)
    }
}

fn require_positive_step(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("step must be positive, got {h}")))
    }
}

/// `θ − η·g`
pub fn gd_step(theta: &[f64], grad: &[f64], eta: f64) -> Result<Vec<f64>> {
    if theta.len() != grad.len() {
        return Err(Error::LengthMismatch(theta.len(), grad.len()));
    }
    if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient(i));
    }
    Ok(theta.iter().zip(grad).map(|(t, g)| t - eta * g).collect())
}

/// Forward difference.
pub fn grad_fogd<E>(energy: &mut E, theta: &[f64], h: f64) -> Result<Vec<f64>>
where
    E: FnMut(&[f64]) -> Result<f64>,
{
    require_positive_step(h)?;
    let base = checked(energy, theta)?;
    let mut probe = theta.to_vec();
    (0..theta.len())
        .map(|i| {
            probe[i] = theta[i] + h;
            let e = checked(energy, &probe)?;
            probe[i] = theta[i];
            Ok((e - base) / h)
        })
        .collect()
}

/// Symmetric difference `(E(θ + s eᵢ) − E(θ − s eᵢ)) / denom`.
fn symmetric_difference<E>(energy: &mut E, theta: &[f64], shift: f64, denom: f64) -> Result<Vec<f64>>
where
    E: FnMut(&[f64]) -> Result<f64>,
{
    let mut probe = theta.to_vec();
    (0..theta.len())
        .map(|i| {
            probe[i] = theta[i] + shift;
            let plus = checked(energy, &probe)?;
            probe[i] = theta[i] - shift;
            let minus = checked(energy, &probe)?;
            probe[i] = theta[i];
            Ok((plus - minus) / denom)
        })
        .collect()
}

/// Central difference.
pub fn grad_sogd<E>(energy: &mut E, theta: &[f64], h: f64) -> Result<Vec<f64>>
where
    E: FnMut(&[f64]) -> Result<f64>,
{
    require_positive_step(h)?;
    symmetric_difference(energy, theta, h, 2.0 * h)
}

/// Parameter-shift rule. Exact for parameters that each drive a single
/// Pauli-generated rotation, which holds for every slot of the ansatz.
pub fn grad_ps<E>(energy: &mut E, theta: &[f64]) -> Result<Vec<f64>>
where
    E: FnMut(&[f64]) -> Result<f64>,
{
    symmetric_difference(energy, theta, FRAC_PI_2, 2.0)
}

/// SPSA gradient for a given ±1 direction `delta` and perturbation size `ck`.
pub fn spsa_gradient<E>(energy: &mut E, theta: &[f64], ck: f64, delta: &[f64]) -> Result<Vec<f64>>
where
    E: FnMut(&[f64]) -> Result<f64>,
{
    if theta.len() != delta.len() {
        return Err(Error::LengthMismatch(theta.len(), delta.len()));
    }
    require_positive_step(ck)?;
    let plus: Vec<f64> = theta.iter().zip(delta).map(|(t, d)| t + ck * d).collect();
    let minus: Vec<f64> = theta.iter().zip(delta).map(|(t, d)| t - ck * d).collect();
    let diff = checked(energy, &plus)? - checked(energy, &minus)?;
    Ok(delta.iter().map(|d| diff / (2.0 * ck * d)).collect())
}

/// Draws a Rademacher direction and returns the SPSA gradient estimate for
/// iteration `k`.
pub fn grad_spsa<E, R>(
    energy: &mut E,
    theta: &[f64],
    k: usize,
    schedule: &SpsaSchedule,
    rng: &mut R,
) -> Result<Vec<f64>>
where
    E: FnMut(&[f64]) -> Result<f64>,
    R: Rng + ?Sized,
{
    let delta: Vec<f64> = (0..theta.len()).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    spsa_gradient(energy, theta, schedule.perturbation(k), &delta)
}

/// Initial parameters for an `n`-qubit, `m`-layer ansatz.
pub fn init_params<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    strategy: InitStrategy,
    small_scale: f64,
    rng: &mut R,
) -> ParameterVector {
    let dim = 2 * n * (m + 1);
    let values = match strategy {
        InitStrategy::Random => (0..dim).map(|_| TAU * rng.random::<f64>()).collect(),
        InitStrategy::Small => (0..dim).map(|_| small_scale * rng.random::<f64>()).collect(),
        InitStrategy::Zero => vec![0.0; dim],
    };
    ParameterVector::new(values).expect("finite initial parameters")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub params: Vec<f64>,
    /// Cumulative circuit evaluations spent on gradient probes so far.
    pub evaluations: u64,
    /// Cumulative gradient energy probes so far.
    pub probes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub records: Vec<IterationRecord>,
    /// `None` when no reference energy was supplied.
    pub converged: Option<bool>,
}

impl OptimizationTrace {
    pub fn final_record(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn final_energy(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.energy)
    }

    pub fn final_params(&self) -> &[f64] {
        self.records.last().map_or(&[], |r| &r.params)
    }

    /// CSV with header `iteration,energy,evaluations`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let csv_err = |source| Error::Csv { path: path.to_owned(), source };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(["iteration", "energy", "evaluations"]).map_err(csv_err)?;
        for r in &self.records {
            w.serialize((r.iteration, r.energy, r.evaluations)).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Run metadata written next to a trace CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceSidecar {
    pub config: OptimizerConfig,
    pub seed: u64,
    pub num_qubits: usize,
    pub layers: usize,
    pub topology: Topology,
    pub final_energy: f64,
    pub final_params: Vec<f64>,
    pub converged: Option<bool>,
    pub reference_energy: Option<f64>,
}

impl TraceSidecar {
    pub fn new(
        trace: &OptimizationTrace,
        config: &OptimizerConfig,
        circuit: &AnsatzCircuit,
        reference_energy: Option<f64>,
    ) -> TraceSidecar {
        TraceSidecar {
            config: config.clone(),
            seed: config.seed,
            num_qubits: circuit.num_qubits(),
            layers: circuit.num_layers(),
            topology: circuit.topology(),
            final_energy: trace.final_energy(),
            final_params: trace.final_params().to_vec(),
            converged: trace.converged,
            reference_energy,
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text =
            serde_json::to_string_pretty(self).map_err(|source| Error::Json { path: path.to_owned(), source })?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Runs a fixed number of gradient-descent iterations from
/// [`init_params`]. The trace holds `iterations + 1` records, the first
/// being the starting point.
///
/// When `reference` is given, `converged` is set by comparing the final
/// energy against `reference + convergence_tolerance`. Failures after the
/// objective is set up are returned as [`Error::Aborted`] carrying the
/// records collected so far.
pub fn run_vqe(
    h: &Hamiltonian,
    circuit: &AnsatzCircuit,
    config: &OptimizerConfig,
    reference: Option<f64>,
) -> Result<OptimizationTrace> {
    config.validate()?;
    let estimator = EstimatorConfig { seed: derive_seed(config.seed, STREAM_SHOTS), ..config.estimator };
    let mut objective = EnergyObjective::new(circuit, h, estimator)?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, STREAM_INIT));
    let mut spsa_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, STREAM_SPSA));
    let schedule = SpsaSchedule::resolve(&config.spsa, config.eta, config.iterations);
    let fd_step = config.fd_step_or_default();

    let mut theta =
        init_params(circuit.num_qubits(), circuit.num_layers(), config.init, config.init_scale, &mut init_rng)
            .into_inner();
    let mut trace = OptimizationTrace { records: Vec::with_capacity(config.iterations + 1), converged: None };

    let abort = |iteration: usize, source: Error, trace: OptimizationTrace| Error::Aborted {
        iteration,
        source: Box::new(source),
        partial: Box::new(trace),
    };

    match objective.measure(&theta) {
        Ok(energy) => trace.records.push(IterationRecord {
            iteration: 0,
            energy,
            params: theta.clone(),
            evaluations: 0,
            probes: 0,
        }),
        Err(e) => return Err(abort(0, e, trace)),
    }

    for k in 0..config.iterations {
        let step = (|| -> Result<(Vec<f64>, f64)> {
            let mut energy = |t: &[f64]| objective.energy(t);
            let (grad, eta) = match config.method {
                Method::Fogd => (grad_fogd(&mut energy, &theta, fd_step)?, config.eta),
                Method::Sogd => (grad_sogd(&mut energy, &theta, fd_step)?, config.eta),
                Method::Ps => (grad_ps(&mut energy, &theta)?, config.eta),
                Method::Spsa => (grad_spsa(&mut energy, &theta, k, &schedule, &mut spsa_rng)?, schedule.gain(k)),
            };
            let next = ParameterVector::new(gd_step(&theta, &grad, eta)?)?.into_inner();
            let e = objective.measure(&next)?;
            Ok((next, e))
        })();
        match step {
            Ok((next, energy)) => {
                theta = next;
                trace.records.push(IterationRecord {
                    iteration: k + 1,
                    energy,
                    params: theta.clone(),
                    evaluations: objective.evaluations(),
                    probes: objective.probes(),
                });
            }
            Err(e) => return Err(abort(k + 1, e, trace)),
        }
    }

    trace.converged = reference.map(|r| trace.final_energy() <= r + config.convergence_tolerance);
    Ok(trace)
}
