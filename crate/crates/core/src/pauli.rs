//! Pauli strings, qubit Hamiltonians and exact diagonalization.
//!
//! Qubit 0 is the leftmost character of a Pauli string and addresses the most
//! significant bit of a basis-state index. For `N = 3`, the string `"XIZ"`
//! applies `X` to bit `0b100` and `Z` to bit `0b001`.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::Statevector;
use crate::error::{Error, Result};

/// Largest register `to_matrix` will densify by default.
pub const MAX_DENSE_QUBITS: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(ch: char) -> Option<Pauli> {
        match ch {
            'I' | '1' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A tensor product of single-qubit Paulis, one per qubit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    /// Parses a label such as `"XZ"` or `"X1"` (`'1'` is read as identity).
    pub fn parse(text: &str, n: usize) -> Result<PauliString> {
        if text.is_empty() {
            return Err(Error::EmptyPauliString);
        }
        let ops = text
            .chars()
            .enumerate()
            .map(|(position, ch)| Pauli::from_char(ch).ok_or(Error::InvalidPauliChar { ch, position }))
            .collect::<Result<Vec<_>>>()?;
        if ops.len() != n {
            return Err(Error::PauliLength { expected: n, found: ops.len() });
        }
        Ok(PauliString(ops))
    }

    pub fn identity(n: usize) -> PauliString {
        PauliString(vec![Pauli::I; n])
    }

    pub fn from_ops(ops: Vec<Pauli>) -> PauliString {
        PauliString(ops)
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    fn bit(&self, qubit: usize) -> usize {
        1 << (self.0.len() - 1 - qubit)
    }

    /// Bits flipped by the string (positions holding X or Y).
    pub fn flip_mask(&self) -> usize {
        self.mask_of(|p| matches!(p, Pauli::X | Pauli::Y))
    }

    /// Bits contributing a `(-1)^b` sign (positions holding Y or Z).
    pub fn sign_mask(&self) -> usize {
        self.mask_of(|p| matches!(p, Pauli::Y | Pauli::Z))
    }

    /// Bits holding any non-identity operator.
    pub fn support_mask(&self) -> usize {
        self.mask_of(|p| p != Pauli::I)
    }

    fn mask_of(&self, pred: impl Fn(Pauli) -> bool) -> usize {
        (0..self.0.len()).filter(|&q| pred(self.0[q])).fold(0, |m, q| m | self.bit(q))
    }

    /// `i^(number of Y)`, the constant part of the phase picked up by `P|b⟩`.
    fn y_phase(&self) -> Complex64 {
        match self.0.iter().filter(|&&p| p == Pauli::Y).count() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Writes `P|ψ⟩` into `out`. `P|b⟩ = i^{#Y} (-1)^{|b ∧ sign|} |b ⊕ flip⟩`.
    pub fn apply_into(&self, amplitudes: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(amplitudes.len(), out.len());
        let flip = self.flip_mask();
        let sign = self.sign_mask();
        let phase = self.y_phase();
        for (b, &amp) in amplitudes.iter().enumerate() {
            let s = if (b & sign).count_ones() % 2 == 1 { -phase } else { phase };
            out[b ^ flip] = s * amp;
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub string: PauliString,
}

impl PauliTerm {
    pub fn new(coefficient: f64, string: PauliString) -> PauliTerm {
        PauliTerm { coefficient, string }
    }
}

/// A real-weighted sum of Pauli strings over a fixed number of qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    num_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl Hamiltonian {
    pub fn new(num_qubits: usize, terms: Vec<PauliTerm>) -> Result<Hamiltonian> {
        if num_qubits == 0 {
            return Err(Error::ZeroQubits);
        }
        for t in &terms {
            if t.string.len() != num_qubits {
                return Err(Error::PauliLength { expected: num_qubits, found: t.string.len() });
            }
            if !t.coefficient.is_finite() {
                return Err(Error::NonFiniteCoefficient(t.coefficient));
            }
        }
        Ok(Hamiltonian { num_qubits, terms })
    }

    /// Builds a Hamiltonian from `(label, coefficient)` pairs.
    pub fn from_labels(num_qubits: usize, labels: &[(&str, f64)]) -> Result<Hamiltonian> {
        let terms = labels
            .iter()
            .map(|&(s, c)| Ok(PauliTerm::new(c, PauliString::parse(s, num_qubits)?)))
            .collect::<Result<Vec<_>>>()?;
        Hamiltonian::new(num_qubits, terms)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// Merges duplicate strings (first occurrence keeps its position) and
    /// drops terms whose coefficient is exactly zero.
    pub fn normalized(&self) -> Hamiltonian {
        let mut index: HashMap<&PauliString, usize> = HashMap::new();
        let mut merged: Vec<PauliTerm> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            match index.get(&t.string) {
                Some(&i) => merged[i].coefficient += t.coefficient,
                None => {
                    index.insert(&t.string, merged.len());
                    merged.push(t.clone());
                }
            }
        }
        merged.retain(|t| t.coefficient != 0.0);
        Hamiltonian { num_qubits: self.num_qubits, terms: merged }
    }

    /// `a·self + b·other`, without normalization.
    pub fn linear_combination(&self, a: f64, other: &Hamiltonian, b: f64) -> Result<Hamiltonian> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch { state: self.num_qubits, hamiltonian: other.num_qubits });
        }
        let terms = self
            .terms
            .iter()
            .map(|t| PauliTerm::new(a * t.coefficient, t.string.clone()))
            .chain(other.terms.iter().map(|t| PauliTerm::new(b * t.coefficient, t.string.clone())))
            .collect();
        Hamiltonian::new(self.num_qubits, terms)
    }

    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        self.to_matrix_with_cap(MAX_DENSE_QUBITS)
    }

    /// Dense `2^N × 2^N` matrix `Σ c_k P_k`.
    pub fn to_matrix_with_cap(&self, cap: usize) -> Result<DMatrix<Complex64>> {
        if self.num_qubits > cap {
            return Err(Error::TooManyQubits { n: self.num_qubits, cap });
        }
        let dim = 1usize << self.num_qubits;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for t in &self.terms {
            let flip = t.string.flip_mask();
            let sign = t.string.sign_mask();
            let phase = t.string.y_phase() * t.coefficient;
            for col in 0..dim {
                let s = if (col & sign).count_ones() % 2 == 1 { -phase } else { phase };
                m[(col ^ flip, col)] += s;
            }
        }
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Hamiltonian> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: HamiltonianFile =
            serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_owned(), source })?;
        Ok(Hamiltonian::try_from(file)?.normalized())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(&HamiltonianFile::from(self))
            .map_err(|source| Error::Json { path: path.to_owned(), source })?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// On-disk form: `{"num_qubits": N, "terms": [{"pauli": "XZ", "coeff": 0.5}, ...]}`.
///
/// Any other top-level keys (an exporter's `metadata` block, for instance)
/// are ignored.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HamiltonianFile {
    pub num_qubits: usize,
    pub terms: Vec<TermRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermRecord {
    pub pauli: String,
    pub coeff: f64,
}

impl TryFrom<HamiltonianFile> for Hamiltonian {
    type Error = Error;

    fn try_from(file: HamiltonianFile) -> Result<Hamiltonian> {
        let n = file.num_qubits;
        let terms = file
            .terms
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let string = PauliString::parse(&r.pauli, n)
                    .map_err(|e| Error::Schema(format!("term {i} ({:?}): {e}", r.pauli)))?;
                Ok(PauliTerm::new(r.coeff, string))
            })
            .collect::<Result<Vec<_>>>()?;
        Hamiltonian::new(n, terms)
    }
}

impl From<&Hamiltonian> for HamiltonianFile {
    fn from(h: &Hamiltonian) -> HamiltonianFile {
        HamiltonianFile {
            num_qubits: h.num_qubits,
            terms: h.terms.iter().map(|t| TermRecord { pauli: t.string.to_string(), coeff: t.coefficient }).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    pub ground_energy: f64,
    pub ground_state: Statevector,
}

/// Lowest eigenpair of the dense Hamiltonian matrix.
///
/// For a degenerate ground level any eigenvector of the minimum eigenvalue
/// may be returned.
pub fn ground_energy_exact(h: &Hamiltonian) -> Result<Spectrum> {
    let m = h.to_matrix()?;
    let dim = m.nrows();
    let eig = m.try_symmetric_eigen(f64::EPSILON, 1000 * dim.max(10)).ok_or(Error::EigenSolverFailed)?;
    let (idx, &energy) =
        eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).ok_or(Error::EigenSolverFailed)?;
    if !energy.is_finite() {
        return Err(Error::EigenSolverFailed);
    }
    let v: Vec<Complex64> = eig.eigenvectors.column(idx).iter().copied().collect();
    let ground_state = Statevector::from_amplitudes(v)?.normalized();
    Ok(Spectrum { ground_energy: energy, ground_state })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn parses_identity_and_alias() {
        let s = PauliString::parse("II", 2).unwrap();
        assert!(s.is_identity());
        let s = PauliString::parse("X1", 2).unwrap();
        assert_eq!(s.ops(), &[Pauli::X, Pauli::I]);
        assert_eq!(s.to_string(), "XI");
    }

    #[test]
    fn rejects_bad_strings() {
        assert!(matches!(PauliString::parse("XQ", 2), Err(Error::InvalidPauliChar { ch: 'Q', position: 1 })));
        assert!(matches!(PauliString::parse("XYZ", 2), Err(Error::PauliLength { expected: 2, found: 3 })));
        assert!(matches!(PauliString::parse("", 2), Err(Error::EmptyPauliString)));
        assert!(matches!(PauliString::parse("xz", 2), Err(Error::InvalidPauliChar { .. })));
    }

    #[test]
    fn z_matrix() {
        let h = Hamiltonian::from_labels(1, &[("Z", 1.0)]).unwrap();
        let m = h.to_matrix().unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]));
    }

    #[test]
    fn zi_plus_iz_matrix() {
        let h = Hamiltonian::from_labels(2, &[("ZI", 0.5), ("IZ", 0.5)]).unwrap();
        let m = h.to_matrix().unwrap();
        let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(0.0), c(0.0), c(-1.0)]));
        assert_eq!(m, expected);
    }

    #[test]
    fn xx_matrix_is_antidiagonal() {
        let h = Hamiltonian::from_labels(2, &[("XX", 1.0)]).unwrap();
        let m = h.to_matrix().unwrap();
        for r in 0..4 {
            for col in 0..4 {
                let want = if r + col == 3 { 1.0 } else { 0.0 };
                assert_eq!(m[(r, col)], c(want));
            }
        }
    }

    #[test]
    fn y_matrix_and_qubit_order() {
        let h = Hamiltonian::from_labels(1, &[("Y", 1.0)]).unwrap();
        let m = h.to_matrix().unwrap();
        assert_eq!(m[(0, 1)], Complex64::new(0.0, -1.0));
        assert_eq!(m[(1, 0)], Complex64::new(0.0, 1.0));

        // X on qubit 0 flips the most significant bit.
        let h = Hamiltonian::from_labels(2, &[("XI", 1.0)]).unwrap();
        let m = h.to_matrix().unwrap();
        assert_eq!(m[(2, 0)], c(1.0));
        assert_eq!(m[(1, 0)], c(0.0));
    }

    #[test]
    fn cap_guard() {
        let h = Hamiltonian::from_labels(3, &[("ZZZ", 1.0)]).unwrap();
        assert!(matches!(h.to_matrix_with_cap(2), Err(Error::TooManyQubits { n: 3, cap: 2 })));
    }

    #[test]
    fn ground_of_z_and_x() {
        let h = Hamiltonian::from_labels(1, &[("Z", 1.0)]).unwrap();
        let s = ground_energy_exact(&h).unwrap();
        assert!((s.ground_energy + 1.0).abs() < 1e-12);
        assert!((s.ground_state.amplitudes()[1].norm() - 1.0).abs() < 1e-12);

        let h = Hamiltonian::from_labels(1, &[("X", 1.0)]).unwrap();
        let s = ground_energy_exact(&h).unwrap();
        assert!((s.ground_energy + 1.0).abs() < 1e-12);
        let a = s.ground_state.amplitudes();
        // (|0⟩ − |1⟩)/√2 up to a global phase
        let r = a[1] / a[0];
        assert!((r - c(-1.0)).norm() < 1e-12);
        assert!((a[0].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn normalization_merges_and_drops() {
        let h = Hamiltonian::from_labels(2, &[("XX", 0.2), ("ZI", 0.0), ("XX", 0.3), ("I1", 1.0)]).unwrap();
        let n = h.normalized();
        assert_eq!(n.terms().len(), 2);
        assert_eq!(n.terms()[0].string.to_string(), "XX");
        assert!((n.terms()[0].coefficient - 0.5).abs() < 1e-15);
        assert_eq!(n.terms()[1].string.to_string(), "II");
    }

    #[test]
    fn rejects_non_finite_and_zero_qubits() {
        assert!(matches!(Hamiltonian::from_labels(1, &[("Z", f64::NAN)]), Err(Error::NonFiniteCoefficient(_))));
        assert!(matches!(Hamiltonian::new(0, vec![]), Err(Error::ZeroQubits)));
    }

    #[test]
    fn load_examples() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.json");

        std::fs::write(
            &p,
            r#"{"num_qubits": 2, "terms": [{"pauli": "ZI", "coeff": 0.5}, {"pauli": "IZ", "coeff": 0.5}]}"#,
        )
        .unwrap();
        let h = Hamiltonian::load(&p).unwrap();
        assert_eq!(h.num_qubits(), 2);
        assert_eq!(h.terms().len(), 2);

        std::fs::write(
            &p,
            r#"{"num_qubits": 2, "terms": [{"pauli": "XX", "coeff": 0.2}, {"pauli": "XX", "coeff": 0.3}]}"#,
        )
        .unwrap();
        let h = Hamiltonian::load(&p).unwrap();
        assert_eq!(h.terms().len(), 1);
        assert!((h.terms()[0].coefficient - 0.5).abs() < 1e-15);

        std::fs::write(&p, r#"{"num_qubits": 3, "terms": [{"pauli": "XX", "coeff": 0.2}]}"#).unwrap();
        let err = Hamiltonian::load(&p).unwrap_err();
        assert!(err.is_input_error(), "{err}");

        std::fs::write(&p, r#"{"num_qubits": 1, "terms": [{"pauli": "X", "coeff": "big"}]}"#).unwrap();
        assert!(Hamiltonian::load(&p).unwrap_err().is_input_error());

        let err = Hamiltonian::load(dir.path().join("missing.json")).unwrap_err();
        assert!(!err.is_input_error());
    }

    #[test]
    fn metadata_block_is_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.json");
        std::fs::write(
            &p,
            r#"{"num_qubits": 1, "terms": [{"pauli": "Z", "coeff": -0.25}], "metadata": {"basis": "sto-3g"}}"#,
        )
        .unwrap();
        assert_eq!(Hamiltonian::load(&p).unwrap().terms().len(), 1);
    }
}
