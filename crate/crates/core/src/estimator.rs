//! Energy expectation values, exact and shot-sampled.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Statevector;
use crate::error::{Error, Result};
use crate::pauli::{Hamiltonian, Pauli, PauliString};

pub const DEFAULT_SHOTS: u32 = 8192;

/// Imaginary residue above which an expectation value is rejected.
const IMAG_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorMode {
    #[default]
    Exact,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    pub mode: EstimatorMode,
    pub shots: u32,
    pub seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig { mode: EstimatorMode::Exact, shots: DEFAULT_SHOTS, seed: 0 }
    }
}

impl EstimatorConfig {
    pub fn exact() -> Self {
        Self::default()
    }

    pub fn sampled(shots: u32, seed: u64) -> Self {
        EstimatorConfig { mode: EstimatorMode::Sampled, shots, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == EstimatorMode::Sampled && self.shots == 0 {
            return Err(Error::InvalidConfig("sampled estimation needs at least one shot".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyEstimate {
    pub value: f64,
    /// Circuit executions consumed (shots summed over measured terms).
    pub evaluations_used: u64,
    /// Binomial standard error of `value`; zero in exact mode.
    pub std_error: f64,
}

fn check_dims(state: &Statevector, h: &Hamiltonian) -> Result<()> {
    if state.num_qubits() != h.num_qubits() {
        return Err(Error::DimensionMismatch { state: state.num_qubits(), hamiltonian: h.num_qubits() });
    }
    Ok(())
}

/// `⟨ψ|H|ψ⟩`, one Pauli term at a time.
pub fn expectation_exact(state: &Statevector, h: &Hamiltonian) -> Result<f64> {
    check_dims(state, h)?;
    let psi = state.amplitudes();
    let mut scratch = vec![Complex64::new(0.0, 0.0); psi.len()];
    let mut total = Complex64::new(0.0, 0.0);
    for term in h.terms() {
        term.string.apply_into(psi, &mut scratch);
        let braket: Complex64 = psi.iter().zip(&scratch).map(|(a, b)| a.conj() * b).sum();
        total += braket * term.coefficient;
    }
    if total.im.abs() > IMAG_TOLERANCE {
        return Err(Error::NonHermitian(total.im));
    }
    Ok(total.re)
}

/// Shot-based estimate: each non-identity term is measured separately in its
/// own product basis with `config.shots` samples.
pub fn expectation_sampled<R: Rng + ?Sized>(
    state: &Statevector,
    h: &Hamiltonian,
    config: &EstimatorConfig,
    rng: &mut R,
) -> Result<EnergyEstimate> {
    check_dims(state, h)?;
    if config.shots == 0 {
        return Err(Error::InvalidConfig("sampled estimation needs at least one shot".into()));
    }
    let shots = config.shots;
    let mut value = 0.0;
    let mut variance = 0.0;
    let mut measured_terms = 0u64;
    let mut cdf = Vec::with_capacity(state.amplitudes().len());
    for term in h.terms() {
        if term.string.is_identity() {
            value += term.coefficient;
            continue;
        }
        measured_terms += 1;
        let rotated = rotate_to_measurement_basis(state, &term.string)?;
        let mean = sample_parity_mean(&rotated, term.string.support_mask(), shots, &mut cdf, rng);
        value += term.coefficient * mean;
        variance += term.coefficient * term.coefficient * (1.0 - mean * mean).max(0.0) / shots as f64;
    }
    Ok(EnergyEstimate { value, evaluations_used: measured_terms * shots as u64, std_error: variance.sqrt() })
}

/// X positions get `H`, Y positions get `H·S†`; both map the +1/−1 eigenvectors
/// onto `|0⟩`/`|1⟩`.
fn rotate_to_measurement_basis(state: &Statevector, string: &PauliString) -> Result<Statevector> {
    let mut rotated = state.clone();
    for (q, p) in string.ops().iter().enumerate() {
        match p {
            Pauli::X => rotated.apply_h(q)?,
            Pauli::Y => {
                rotated.apply_sdg(q)?;
                rotated.apply_h(q)?;
            }
            Pauli::I | Pauli::Z => {}
        }
    }
    Ok(rotated)
}

/// Mean of `(-1)^{popcount(outcome & support)}` over `shots` inverse-CDF draws.
fn sample_parity_mean<R: Rng + ?Sized>(
    state: &Statevector,
    support: usize,
    shots: u32,
    cdf: &mut Vec<f64>,
    rng: &mut R,
) -> f64 {
    cdf.clear();
    let mut acc = 0.0;
    for a in state.amplitudes() {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let last = cdf.len() - 1;
    let mut sum: i64 = 0;
    for _ in 0..shots {
        let u = rng.random::<f64>() * acc;
        let outcome = cdf.partition_point(|&c| c <= u).min(last);
        sum += if (outcome & support).count_ones().is_multiple_of(2) { 1 } else { -1 };
    }
    sum as f64 / shots as f64
}

/// Dispatches on `config.mode`. Exact mode reports zero evaluations since the
/// state is already prepared.
pub fn estimate<R: Rng + ?Sized>(
    state: &Statevector,
    h: &Hamiltonian,
    config: &EstimatorConfig,
    rng: &mut R,
) -> Result<EnergyEstimate> {
    match config.mode {
        EstimatorMode::Exact => {
            Ok(EnergyEstimate { value: expectation_exact(state, h)?, evaluations_used: 0, std_error: 0.0 })
        }
        EstimatorMode::Sampled => expectation_sampled(state, h, config, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn plus() -> Statevector {
        let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Statevector::from_amplitudes(vec![r, r]).unwrap()
    }

    #[test]
    fn exact_examples() {
        let h = Hamiltonian::from_labels(2, &[("ZI", 1.0)]).unwrap();
        assert!((expectation_exact(&Statevector::zero(2), &h).unwrap() - 1.0).abs() < 1e-12);

        let h = Hamiltonian::from_labels(1, &[("X", 1.0)]).unwrap();
        assert!((expectation_exact(&plus(), &h).unwrap() - 1.0).abs() < 1e-12);

        let h = Hamiltonian::from_labels(1, &[("Y", 1.0)]).unwrap();
        let y_plus =
            Statevector::from_amplitudes(vec![Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(0.0, FRAC_1_SQRT_2)])
                .unwrap();
        assert!((expectation_exact(&y_plus, &h).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let h = Hamiltonian::from_labels(2, &[("ZI", 1.0)]).unwrap();
        assert!(matches!(
            expectation_exact(&Statevector::zero(1), &h),
            Err(Error::DimensionMismatch { state: 1, hamiltonian: 2 })
        ));
    }

    #[test]
    fn sampled_deterministic_outcomes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = EstimatorConfig::sampled(17, 0);
        let h = Hamiltonian::from_labels(1, &[("Z", 1.0)]).unwrap();
        let e = expectation_sampled(&Statevector::zero(1), &h, &cfg, &mut rng).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.evaluations_used, 17);

        let h = Hamiltonian::from_labels(1, &[("X", 1.0)]).unwrap();
        let e = expectation_sampled(&plus(), &h, &cfg, &mut rng).unwrap();
        assert_eq!(e.value, 1.0);

        let y_minus =
            Statevector::from_amplitudes(vec![Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(0.0, -FRAC_1_SQRT_2)])
                .unwrap();
        let h = Hamiltonian::from_labels(1, &[("Y", 2.0)]).unwrap();
        let e = expectation_sampled(&y_minus, &h, &cfg, &mut rng).unwrap();
        assert_eq!(e.value, -2.0);
    }

    #[test]
    fn identity_terms_are_exact_and_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let h = Hamiltonian::from_labels(2, &[("II", 0.75), ("ZZ", 0.5)]).unwrap();
        let cfg = EstimatorConfig::sampled(100, 0);
        let e = expectation_sampled(&Statevector::zero(2), &h, &cfg, &mut rng).unwrap();
        assert_eq!(e.value, 1.25);
        assert_eq!(e.evaluations_used, 100);
    }

    #[test]
    fn zero_shots_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let h = Hamiltonian::from_labels(1, &[("Z", 1.0)]).unwrap();
        let cfg = EstimatorConfig::sampled(0, 0);
        assert!(cfg.validate().is_err());
        assert!(expectation_sampled(&Statevector::zero(1), &h, &cfg, &mut rng).is_err());
    }

    #[test]
    fn single_qubit_z_scoring_mean() {
        // α|0⟩ + β|1⟩ with |α|² = 0.8
        let state =
            Statevector::from_amplitudes(vec![Complex64::new(0.8f64.sqrt(), 0.0), Complex64::new(0.0, 0.2f64.sqrt())])
                .unwrap();
        let h = Hamiltonian::from_labels(1, &[("Z", 1.0)]).unwrap();
        let exact = expectation_exact(&state, &h).unwrap();
        assert!((exact - 0.6).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cfg = EstimatorConfig::sampled(200_000, 0);
        let e = expectation_sampled(&state, &h, &cfg, &mut rng).unwrap();
        assert!((e.value - exact).abs() < 5.0 * e.std_error, "{} vs {}", e.value, exact);
    }
}
