//! A statevector VQE laboratory.
//!
//! - [`pauli`]: Pauli-string Hamiltonians, their JSON file format, dense
//!   matrices and exact ground energies.
//! - [`circuit`]: statevector gates and the layered Rx/Rz/CZ ansatz.
//! - [`estimator`]: exact and shot-sampled `⟨ψ|H|ψ⟩`.
//! - [`optimizer`]: FOGD, SOGD, parameter-shift and SPSA gradient descent.
//! - [`molecules`]: He-H⁺ coefficient tables and energy-curve sweeps.

pub mod circuit;
pub mod error;
pub mod estimator;
pub mod molecules;
pub mod optimizer;
pub mod pauli;

pub use circuit::{AnsatzCircuit, ParameterVector, Statevector, Topology};
pub use error::{Error, Result};
pub use estimator::{expectation_exact, expectation_sampled, EnergyEstimate, EstimatorConfig, EstimatorMode};
pub use molecules::{
    build_heh_hamiltonian, run_sweep, CoefficientTable, Grid, HamiltonianSource, HeHCoefficients, SweepResult,
    SweepSpec,
};
pub use optimizer::{run_vqe, InitStrategy, Method, OptimizationTrace, OptimizerConfig};
pub use pauli::{ground_energy_exact, Hamiltonian, Pauli, PauliString, PauliTerm, Spectrum};
