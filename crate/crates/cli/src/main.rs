//! `vqelab` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or schema error, 2 runtime failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use vqelab::molecules::{Manifest, SweepSpec};
use vqelab::optimizer::TraceSidecar;
use vqelab::{
    ground_energy_exact, run_sweep, run_vqe, AnsatzCircuit, CoefficientTable, Error, EstimatorMode, Hamiltonian,
    HamiltonianSource, InitStrategy, Method, OptimizerConfig, Topology,
};

const JOBS_ENV: &str = "VQELAB_JOBS";

#[derive(Parser)]
#[command(name = "vqelab", version, about = "Statevector VQE laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground energy by exact diagonalization.
    Exact {
        hamiltonian: PathBuf,
        /// Also print the ground-state amplitudes.
        #[arg(long)]
        state: bool,
    },
    /// Single VQE run; writes a trace CSV and a JSON sidecar.
    Vqe {
        hamiltonian: PathBuf,
        #[command(flatten)]
        opt: OptimizerFlags,
        /// Default: 20 for 2-qubit inputs, 100 otherwise.
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long, default_value_t = 1)]
        layers: usize,
        #[arg(long, value_enum, default_value_t = Topo::Chain)]
        topology: Topo,
        #[arg(long, default_value = "trace.csv")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Reference::None)]
        reference: Reference,
    },
    /// Energy-curve sweep described by a JSON sweep file; flags override its settings.
    Sweep {
        spec: PathBuf,
        #[command(flatten)]
        opt: OptimizerFlags,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        layers: Option<usize>,
        #[arg(long, value_enum)]
        topology: Option<Topo>,
        #[arg(long)]
        restarts: Option<usize>,
        /// Worker threads; default is all available cores.
        #[arg(long, env = JOBS_ENV)]
        jobs: Option<usize>,
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
    },
    /// Check a Hamiltonian, coefficient table, sweep spec or manifest.
    Validate {
        path: PathBuf,
        /// Require a Hamiltonian to declare this many qubits.
        #[arg(long)]
        qubits: Option<usize>,
    },
}

#[derive(Args)]
struct OptimizerFlags {
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, value_enum)]
    estimator: Option<Estimator>,
    /// Shots per measured term; implies sampled estimation.
    #[arg(long)]
    shots: Option<u32>,
    #[arg(long, value_enum)]
    init: Option<Init>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Fogd,
    Sogd,
    Spsa,
    Ps,
}

#[derive(Clone, Copy, ValueEnum)]
enum Topo {
    Chain,
    Ring,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Estimator {
    Exact,
    Sampled,
}

#[derive(Clone, Copy, ValueEnum)]
enum Init {
    Random,
    Small,
    Zero,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Reference {
    None,
    Exact,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Fogd => Method::Fogd,
            MethodArg::Sogd => Method::Sogd,
            MethodArg::Spsa => Method::Spsa,
            MethodArg::Ps => Method::Ps,
        }
    }
}

impl From<Topo> for Topology {
    fn from(t: Topo) -> Topology {
        match t {
            Topo::Chain => Topology::Chain,
            Topo::Ring => Topology::Ring,
        }
    }
}

impl From<Init> for InitStrategy {
    fn from(i: Init) -> InitStrategy {
        match i {
            Init::Random => InitStrategy::Random,
            Init::Small => InitStrategy::Small,
            Init::Zero => InitStrategy::Zero,
        }
    }
}

/// A failure together with its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn usage(error: anyhow::Error) -> Failure {
        Failure { code: 1, error }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = if e.is_input_error() { 1 } else { 2 };
        Failure { code, error: e.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Failure {
        match error.downcast_ref::<Error>() {
            Some(e) if e.is_input_error() => Failure { code: 1, error },
            _ => Failure { code: 2, error },
        }
    }
}

type CmdResult = Result<ExitCode, Failure>;

impl OptimizerFlags {
    fn apply(&self, config: &mut OptimizerConfig) -> Result<(), Failure> {
        if let Some(m) = self.method {
            config.method = m.into();
        }
        if let Some(eta) = self.eta {
            config.eta = eta;
        }
        if let Some(init) = self.init {
            config.init = init.into();
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        match (self.estimator, self.shots) {
            (Some(Estimator::Exact), Some(_)) => {
                return Err(Failure::usage(anyhow!(
                    "--shots requires sampled estimation, but --estimator exact was given"
                )))
            }
            (Some(Estimator::Exact), None) => config.estimator.mode = EstimatorMode::Exact,
            (Some(Estimator::Sampled), _) | (None, Some(_)) => config.estimator.mode = EstimatorMode::Sampled,
            (None, None) => {}
        }
        if let Some(shots) = self.shots {
            config.estimator.shots = shots;
        }
        config.validate().map_err(Failure::from)
    }
}

fn print_config(value: &serde_json::Value) {
    let text = value.to_string();
    eprintln!("config: {text}");
}

/// `x` rounded to 10 significant digits, in plain decimal notation.
fn sig10(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.9}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (9 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn cmd_exact(path: &Path, state: bool) -> CmdResult {
    print_config(&serde_json::json!({ "command": "exact", "hamiltonian": path, "state": state }));
    let h = Hamiltonian::load(path)?;
    let spectrum = ground_energy_exact(&h)?;
    println!("{}", sig10(spectrum.ground_energy));
    if state {
        for (i, a) in spectrum.ground_state.amplitudes().iter().enumerate() {
            println!("{i:0width$b} {:+.10} {:+.10}i", a.re, a.im, width = h.num_qubits());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

#[allow(clippy::too_many_arguments)]
fn cmd_vqe(
    path: &Path,
    opt: &OptimizerFlags,
    iters: Option<usize>,
    layers: usize,
    topology: Topo,
    out: &Path,
    reference: Reference,
) -> CmdResult {
    let h = Hamiltonian::load(path)?;
    let n = h.num_qubits();
    let mut config =
        OptimizerConfig { iterations: iters.unwrap_or(if n == 2 { 20 } else { 100 }), ..Default::default() };
    opt.apply(&mut config)?;
    let circuit = AnsatzCircuit::build(n, layers, topology.into())?;
    print_config(&serde_json::json!({
        "command": "vqe",
        "hamiltonian": path,
        "num_qubits": n,
        "layers": layers,
        "topology": circuit.topology(),
        "num_params": circuit.num_params(),
        "optimizer": config,
        "out": out,
        "reference": reference == Reference::Exact,
    }));

    let exact = match reference {
        Reference::Exact => Some(ground_energy_exact(&h)?.ground_energy),
        Reference::None => None,
    };
    let (trace, failure) = match run_vqe(&h, &circuit, &config, exact) {
        Ok(trace) => (trace, None),
        Err(Error::Aborted { iteration, source, partial }) => {
            (*partial, Some(anyhow!("optimizer aborted at iteration {iteration}: {source}")))
        }
        Err(e) => return Err(e.into()),
    };
    trace.write_csv(out)?;
    if trace.records.is_empty() {
        return Err(Failure { code: 2, error: failure.unwrap_or_else(|| anyhow!("empty trace")) });
    }
    TraceSidecar::new(&trace, &config, &circuit, exact).write(sidecar_path(out))?;
    if let Some(error) = failure {
        return Err(Failure { code: 2, error: error.context(format!("partial trace written to {}", out.display())) });
    }

    print!("final energy {}", sig10(trace.final_energy()));
    if let Some(e) = exact {
        print!("  exact {}  gap {:.3e}", sig10(e), trace.final_energy() - e);
    }
    println!();
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    path: &Path,
    opt: &OptimizerFlags,
    iters: Option<usize>,
    layers: Option<usize>,
    topology: Option<Topo>,
    restarts: Option<usize>,
    jobs: Option<usize>,
    out: &Path,
) -> CmdResult {
    let mut spec = SweepSpec::load(path)?;
    if let Some(k) = iters {
        spec.optimizer.iterations = k;
    }
    if let Some(m) = layers {
        spec.layers = m;
    }
    if let Some(t) = topology {
        spec.topology = t.into();
    }
    if let Some(r) = restarts {
        spec.restarts = r;
    }
    if let Some(seed) = opt.seed {
        spec.seed = seed;
    }
    opt.apply(&mut spec.optimizer)?;
    if jobs == Some(0) {
        return Err(Failure::usage(anyhow!("--jobs must be at least 1")));
    }
    print_config(&serde_json::json!({ "command": "sweep", "spec": spec, "jobs": jobs, "out": out }));

    let result = run_sweep(&spec, jobs)?;
    result.write_csv(out)?;
    for r in result.records.iter().filter(|r| r.failed()) {
        eprintln!("point {} failed: {}", r.grid_value, r.error.as_deref().unwrap_or("unknown error"));
    }
    println!("{} of {} points succeeded", result.succeeded(), result.records.len());
    if let Some(i) = result.argmin_exact() {
        let r = &result.records[i];
        println!("exact minimum at {}: {}", r.grid_value, sig10(r.exact_energy.unwrap_or(f64::NAN)));
    }
    if let Some(i) = result.argmin_vqe() {
        let r = &result.records[i];
        println!("vqe minimum at {}: {}", r.grid_value, sig10(r.vqe_energy.unwrap_or(f64::NAN)));
    }
    if result.succeeded() == 0 {
        return Err(Failure { code: 2, error: anyhow!("every grid point failed") });
    }
    Ok(ExitCode::SUCCESS)
}

enum FileKind {
    Hamiltonian,
    Table,
    Spec,
    Manifest,
}

fn detect(path: &Path) -> anyhow::Result<FileKind> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        return Ok(FileKind::Table);
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("{} is not valid JSON", path.display()))?;
    let has = |key: &str| value.get(key).is_some();
    if has("terms") || has("num_qubits") {
        Ok(FileKind::Hamiltonian)
    } else if has("entries") {
        Ok(FileKind::Manifest)
    } else if has("grid") || has("variable") || has("source") {
        Ok(FileKind::Spec)
    } else {
        Err(anyhow!("{}: not a Hamiltonian, coefficient table, sweep spec or manifest", path.display()))
    }
}

fn check_hamiltonian(path: &Path, qubits: Option<usize>) -> anyhow::Result<String> {
    let h = Hamiltonian::load(path)?;
    if let Some(q) = qubits.filter(|&q| q != h.num_qubits()) {
        return Err(anyhow!("declares {} qubits, expected {q}", h.num_qubits()));
    }
    Ok(format!("Hamiltonian, {} qubits, {} terms", h.num_qubits(), h.terms().len()))
}

fn validate(path: &Path, qubits: Option<usize>) -> anyhow::Result<String> {
    match detect(path)? {
        FileKind::Hamiltonian => check_hamiltonian(path, qubits),
        FileKind::Table => {
            let t = CoefficientTable::load(path)?;
            if t.is_empty() {
                return Err(anyhow!("coefficient table has no rows"));
            }
            Ok(format!("coefficient table, {} rows", t.len()))
        }
        FileKind::Spec => {
            let spec = SweepSpec::load(path)?;
            let points = spec.validate()?;
            match &spec.source {
                HamiltonianSource::Table { path } => {
                    let table = CoefficientTable::load(path)?;
                    for v in &points {
                        table.lookup(*v)?;
                    }
                }
                HamiltonianSource::Files { paths } => {
                    for p in paths {
                        check_hamiltonian(p, None).with_context(|| p.display().to_string())?;
                    }
                }
                HamiltonianSource::Manifest { path } => {
                    validate(path, None)?;
                }
            }
            Ok(format!("sweep spec, {} grid points", points.len()))
        }
        FileKind::Manifest => {
            let manifest = Manifest::load(path)?;
            let base = path.parent().unwrap_or(Path::new(""));
            let mut ok = 0;
            for entry in &manifest.entries {
                match (&entry.path, &entry.error) {
                    (Some(p), None) => {
                        let p = base.join(p);
                        check_hamiltonian(&p, qubits).with_context(|| p.display().to_string())?;
                        ok += 1;
                    }
                    (None, None) => return Err(anyhow!("entry {} has neither path nor error", entry.grid_value)),
                    (_, Some(_)) => {}
                }
            }
            Ok(format!("manifest, {} entries ({ok} usable)", manifest.entries.len()))
        }
    }
}

fn cmd_validate(path: &Path, qubits: Option<usize>) -> CmdResult {
    print_config(&serde_json::json!({ "command": "validate", "path": path, "qubits": qubits }));
    match validate(path, qubits) {
        Ok(summary) => {
            println!("OK");
            eprintln!("{summary}");
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => Err(Failure::usage(e)),
    }
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Exact { hamiltonian, state } => cmd_exact(&hamiltonian, state),
        Command::Vqe { hamiltonian, opt, iters, layers, topology, out, reference } => {
            cmd_vqe(&hamiltonian, &opt, iters, layers, topology, &out, reference)
        }
        Command::Sweep { spec, opt, iters, layers, topology, restarts, jobs, out } => {
            cmd_sweep(&spec, &opt, iters, layers, topology, restarts, jobs, &out)
        }
        Command::Validate { path, qubits } => cmd_validate(&path, qubits),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
