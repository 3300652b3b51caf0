//! Independent reference implementations used as test oracles. Nothing here
//! goes through the crate's matrix, gate or eigensolver code.

#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use vqelab::{Hamiltonian, PauliString, PauliTerm, Statevector};

pub type CMatrix = Vec<Vec<Complex64>>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    (0..dim).map(|i| (0..dim).map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect()).collect()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.len();
    let mut out = vec![vec![c(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == c(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn matvec(a: &CMatrix, v: &[Complex64]) -> Vec<Complex64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

pub fn pauli_matrix(ch: char) -> CMatrix {
    match ch {
        'I' => identity(2),
        'X' => vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]],
        'Y' => vec![vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]],
        'Z' => vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]],
        _ => panic!("bad pauli {ch}"),
    }
}

/// Σ c_k ⊗_q P_{k,q}, leftmost factor on the most significant bit.
pub fn kron_hamiltonian(h: &Hamiltonian) -> CMatrix {
    let dim = 1 << h.num_qubits();
    let mut out = vec![vec![c(0.0, 0.0); dim]; dim];
    for t in h.terms() {
        let label = t.string.to_string();
        let mut m = vec![vec![c(1.0, 0.0)]];
        for ch in label.chars() {
            m = kron(&m, &pauli_matrix(ch));
        }
        for i in 0..dim {
            for j in 0..dim {
                out[i][j] += m[i][j] * t.coefficient;
            }
        }
    }
    out
}

pub fn quadratic_form(m: &CMatrix, psi: &[Complex64]) -> Complex64 {
    let mv = matvec(m, psi);
    psi.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
}

/// Eigenvalues of a Hermitian matrix via cyclic Jacobi rotations on the real
/// symmetric embedding `[[A, −B], [B, A]]` (each eigenvalue appears twice).
pub fn jacobi_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let n = h.len();
    let m = 2 * n;
    let mut a = vec![vec![0.0; m]; m];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = h[i][j].re;
            a[i + n][j + n] = h[i][j].re;
            a[i][j + n] = -h[i][j].im;
            a[i + n][j] = h[i][j].im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..m {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..m).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

pub fn jacobi_ground_energy(h: &Hamiltonian) -> f64 {
    jacobi_eigenvalues(&kron_hamiltonian(h))[0]
}

pub fn random_hamiltonian<R: Rng>(rng: &mut R, n: usize, terms: usize) -> Hamiltonian {
    let ops = ['I', 'X', 'Y', 'Z'];
    let terms = (0..terms)
        .map(|_| {
            let label: String = (0..n).map(|_| ops[rng.random_range(0..4)]).collect();
            PauliTerm::new(rng.random_range(-1.0..1.0), PauliString::parse(&label, n).unwrap())
        })
        .collect();
    Hamiltonian::new(n, terms).unwrap()
}

/// Random Hamiltonian over {I, X, Z} only (real symmetric matrix).
pub fn random_real_hamiltonian<R: Rng>(rng: &mut R, n: usize, terms: usize) -> Hamiltonian {
    let ops = ['I', 'X', 'Z'];
    let terms = (0..terms)
        .map(|_| {
            let label: String = (0..n).map(|_| ops[rng.random_range(0..3)]).collect();
            PauliTerm::new(rng.random_range(-1.0..1.0), PauliString::parse(&label, n).unwrap())
        })
        .collect();
    Hamiltonian::new(n, terms).unwrap()
}

pub fn random_state<R: Rng>(rng: &mut R, n: usize) -> Statevector {
    let amps = (0..1usize << n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    Statevector::from_amplitudes(amps).unwrap().normalized()
}

pub fn random_angles<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    (0..k).map(|_| TAU * rng.random::<f64>()).collect()
}

pub fn rx_matrix(theta: f64) -> CMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    vec![vec![c(co, 0.0), c(0.0, -s)], vec![c(0.0, -s), c(co, 0.0)]]
}

pub fn rz_matrix(theta: f64) -> CMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    vec![vec![c(co, -s), c(0.0, 0.0)], vec![c(0.0, 0.0), c(co, s)]]
}

/// Full-register matrix of a single-qubit gate on `qubit`.
pub fn embed(gate: &CMatrix, qubit: usize, n: usize) -> CMatrix {
    let id = identity(2);
    let mut m = vec![vec![c(1.0, 0.0)]];
    for q in 0..n {
        m = kron(&m, if q == qubit { gate } else { &id });
    }
    m
}

/// CZ as `I − 2|11⟩⟨11|` on the given pair, written via projectors.
pub fn cz_matrix(control: usize, target: usize, n: usize) -> CMatrix {
    let p1 = vec![vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]];
    let id2 = identity(2);
    let mut proj = vec![vec![c(1.0, 0.0)]];
    for q in 0..n {
        proj = kron(&proj, if q == control || q == target { &p1 } else { &id2 });
    }
    let dim = 1 << n;
    let id = identity(dim);
    (0..dim).map(|i| (0..dim).map(|j| id[i][j] - proj[i][j] * 2.0).collect()).collect()
}

/// The layered ansatz as an explicit product of `2^N × 2^N` matrices,
/// rebuilt from its definition rather than from the crate's gate list.
pub fn ansatz_matrix_chain(n: usize, layers: usize, ring: bool, theta: &[f64]) -> Vec<Complex64> {
    assert_eq!(theta.len(), 2 * n * (layers + 1));
    let dim = 1 << n;
    let mut u = identity(dim);
    let mut slot = 0;
    let mut rotations = |u: &mut CMatrix| {
        for q in 0..n {
            *u = matmul(&embed(&rx_matrix(theta[slot]), q, n), u);
            *u = matmul(&embed(&rz_matrix(theta[slot + 1]), q, n), u);
            slot += 2;
        }
    };
    rotations(&mut u);
    for _ in 0..layers {
        for q in 0..n.saturating_sub(1) {
            u = matmul(&cz_matrix(q, q + 1, n), &u);
        }
        if ring && n > 2 {
            u = matmul(&cz_matrix(n - 1, 0, n), &u);
        }
        rotations(&mut u);
    }
    u.iter().map(|row| row[0]).collect()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn data_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

/// Random real symmetric matrix with entries in [-1, 1).
pub fn random_symmetric<R: Rng>(rng: &mut R, dim: usize) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in 0..=i {
            let v = rng.random_range(-1.0..1.0);
            a[i][j] = v;
            a[j][i] = v;
        }
    }
    a
}
