//! Small dense complex linear algebra used by the twirl and the density-matrix oracle.
//!
//! Two-qubit matrices are ordered with Alice's qubit as the most significant
//! bit: basis index = 2·a + b.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::bell_algebra::{BellLabel, Pauli};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn pauli_matrix(p: Pauli) -> CMatrix {
    match p {
        Pauli::I => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ONE]),
        Pauli::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        Pauli::Y => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        Pauli::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    }
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// State vector of a Bell state in the (Alice, Bob) computational basis.
pub fn bell_vector(label: BellLabel) -> CVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if label.phase() == 0 { 1.0 } else { -1.0 };
    let mut v = CVector::zeros(4);
    if label.amplitude() == 0 {
        // (|00> ± |11>)/√2
        v[0] = c(s, 0.0);
        v[3] = c(sign * s, 0.0);
    } else {
        // (|01> ± |10>)/√2
        v[1] = c(s, 0.0);
        v[2] = c(sign * s, 0.0);
    }
    v
}

pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn bell_projector(label: BellLabel) -> CMatrix {
    projector(&bell_vector(label))
}

/// Bell-basis change of frame: column k is |B_k⟩.
pub fn bell_basis() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for label in BellLabel::ALL {
        m.set_column(label.index(), &bell_vector(label));
    }
    m
}

/// `u · rho · u†`
pub fn conjugate(u: &CMatrix, rho: &CMatrix) -> CMatrix {
    u * rho * u.adjoint()
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Largest entry of |m − m†|.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Expectation value ⟨v|m|v⟩ (real part).
pub fn expectation(m: &CMatrix, v: &CVector) -> f64 {
    (v.adjoint() * m * v)[(0, 0)].re
}

/// Reorders the qubits of a `2^n`-dimensional operator.
///
/// Qubit 0 is the most significant bit. `order[k]` names the old qubit that
/// becomes new qubit `k`.
pub fn permute_qubits(m: &CMatrix, order: &[usize]) -> CMatrix {
    let n = order.len();
    let dim = 1usize << n;
    assert_eq!(m.nrows(), dim, "operator dimension does not match qubit count");
    let remap = |new_index: usize| -> usize {
        let mut old = 0usize;
        for (k, &q) in order.iter().enumerate() {
            let bit = (new_index >> (n - 1 - k)) & 1;
            old |= bit << (n - 1 - q);
        }
        old
    };
    let map: Vec<usize> = (0..dim).map(remap).collect();
    CMatrix::from_fn(dim, dim, |r, c| m[(map[r], map[c])])
}

/// Traces out the trailing `traced_dim`-dimensional factor of a bipartite operator.
pub fn partial_trace_trailing(m: &CMatrix, traced_dim: usize) -> CMatrix {
    let kept = m.nrows() / traced_dim;
    CMatrix::from_fn(kept, kept, |r, c| {
        (0..traced_dim)
            .map(|k| m[(r * traced_dim + k, c * traced_dim + k)])
            .sum()
    })
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    let herm = (m + m.adjoint()) * c(0.5, 0.0);
    herm.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
