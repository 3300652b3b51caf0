//! Dense statevector simulation of the layered Rx/Rz/CZ ansatz.

use std::fmt;
use std::ops::Deref;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Amplitudes of an `N`-qubit pure state. Index bit `N-1-q` belongs to qubit `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// `|0…0⟩`
    pub fn zero(num_qubits: usize) -> Statevector {
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        amplitudes[0] = ONE;
        Statevector { num_qubits, amplitudes }
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Statevector> {
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::InvalidConfig(format!("basis index {index} out of range for {num_qubits} qubits")));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Statevector { num_qubits, amplitudes })
    }

    /// Wraps raw amplitudes. The length must be a power of two no smaller
    /// than 2; the vector is taken as-is (see [`Statevector::normalized`]).
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Statevector> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidConfig(format!("amplitude count {len} is not a power of two >= 2")));
        }
        Ok(Statevector { num_qubits: len.trailing_zeros() as usize, amplitudes })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Statevector {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a /= n);
        }
        self
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Statevector) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitOutOfRange { qubit, n: self.num_qubits });
        }
        Ok(())
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    /// Applies a 2×2 unitary `[[u00, u01], [u10, u11]]` to one qubit.
    pub fn apply_single_qubit(&mut self, qubit: usize, u: [[Complex64; 2]; 2]) -> Result<()> {
        self.check_qubit(qubit)?;
        let stride = self.mask(qubit);
        for block in self.amplitudes.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a0, *a1);
                *a0 = u[0][0] * x + u[0][1] * y;
                *a1 = u[1][0] * x + u[1][1] * y;
            }
        }
        Ok(())
    }

    /// `Rx(θ) = cos(θ/2)·I − i·sin(θ/2)·X`
    pub fn apply_rx(&mut self, qubit: usize, angle: f64) -> Result<()> {
        let (s, c) = (angle / 2.0).sin_cos();
        let diag = Complex64::new(c, 0.0);
        let off = Complex64::new(0.0, -s);
        self.apply_single_qubit(qubit, [[diag, off], [off, diag]])
    }

    /// `Rz(θ) = diag(e^{−iθ/2}, e^{iθ/2})`
    pub fn apply_rz(&mut self, qubit: usize, angle: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        let stride = self.mask(qubit);
        let (s, c) = (angle / 2.0).sin_cos();
        let p0 = Complex64::new(c, -s);
        let p1 = Complex64::new(c, s);
        for block in self.amplitudes.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            lo.iter_mut().for_each(|a| *a *= p0);
            hi.iter_mut().for_each(|a| *a *= p1);
        }
        Ok(())
    }

    /// Negates every amplitude whose control and target bits are both 1.
    pub fn apply_cz(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::InvalidCzPair(control, target));
        }
        let both = self.mask(control) | self.mask(target);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & both == both {
                *a = -*a;
            }
        }
        Ok(())
    }

    /// Hadamard, used for measurement-basis changes.
    pub fn apply_h(&mut self, qubit: usize) -> Result<()> {
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.apply_single_qubit(qubit, [[r, r], [r, -r]])
    }

    /// `S† = diag(1, −i)`
    pub fn apply_sdg(&mut self, qubit: usize) -> Result<()> {
        self.apply_single_qubit(qubit, [[ONE, ZERO], [ZERO, Complex64::new(0.0, -1.0)]])
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// CZ on (0,1), (1,2), …, (N−2, N−1).
    #[default]
    Chain,
    /// Chain plus (N−1, 0) when N > 2.
    Ring,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Chain => "chain",
            Topology::Ring => "ring",
        })
    }
}

impl std::str::FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Topology> {
        match s {
            "chain" => Ok(Topology::Chain),
            "ring" => Ok(Topology::Ring),
            other => Err(Error::InvalidConfig(format!("unknown topology {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    Rx { qubit: usize, slot: usize },
    Rz { qubit: usize, slot: usize },
    Cz { control: usize, target: usize },
}

/// The layered ansatz: a rotation layer (`Rx` then `Rz` on every qubit),
/// followed by `M` repetitions of an entangling CZ layer and another rotation
/// layer.
///
/// Slot `2·N·layer + 2·q` drives `Rx` on qubit `q`; the next slot drives its `Rz`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnsatzCircuit {
    num_qubits: usize,
    num_layers: usize,
    topology: Topology,
    gates: Vec<Gate>,
    num_params: usize,
}

impl AnsatzCircuit {
    pub fn build(num_qubits: usize, num_layers: usize, topology: Topology) -> Result<AnsatzCircuit> {
        if num_qubits == 0 {
            return Err(Error::ZeroQubits);
        }
        let n = num_qubits;
        let mut gates = Vec::new();
        let mut slot = 0;
        let mut rotation_layer = |gates: &mut Vec<Gate>| {
            for q in 0..n {
                gates.push(Gate::Rx { qubit: q, slot });
                gates.push(Gate::Rz { qubit: q, slot: slot + 1 });
                slot += 2;
            }
        };
        rotation_layer(&mut gates);
        for _ in 0..num_layers {
            gates.extend(entangler_pairs(n, topology).map(|(control, target)| Gate::Cz { control, target }));
            rotation_layer(&mut gates);
        }
        let num_params = 2 * n * (num_layers + 1);
        Ok(AnsatzCircuit { num_qubits, num_layers, topology, gates, num_params })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Always `2·N·(M+1)`.
    pub fn num_params(&self) -> usize {
        self.num_params
    }

    /// Applies the gate program to `|0…0⟩`.
    pub fn run(&self, params: &[f64]) -> Result<Statevector> {
        if params.len() != self.num_params {
            return Err(Error::ParameterCount { expected: self.num_params, found: params.len() });
        }
        let mut state = Statevector::zero(self.num_qubits);
        for gate in &self.gates {
            match *gate {
                Gate::Rx { qubit, slot } => state.apply_rx(qubit, params[slot])?,
                Gate::Rz { qubit, slot } => state.apply_rz(qubit, params[slot])?,
                Gate::Cz { control, target } => state.apply_cz(control, target)?,
            }
        }
        Ok(state)
    }
}

fn entangler_pairs(n: usize, topology: Topology) -> impl Iterator<Item = (usize, usize)> {
    let wrap = (topology == Topology::Ring && n > 2).then_some((n - 1, 0));
    (0..n.saturating_sub(1)).map(|q| (q, q + 1)).chain(wrap)
}

/// Rotation angles in radians, one per ansatz slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Result<ParameterVector> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteParameter(i));
        }
        Ok(ParameterVector(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ParameterVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}
