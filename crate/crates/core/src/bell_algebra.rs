//! Bell labels and the exact label maps of one purification round.
//!
//! A Bell state is named by two bits `(phase, amplitude)`:
//!
//! | label | state |
//! |-------|-------|
//! | (0,0) | Φ⁺ = (|00⟩+|11⟩)/√2 |
//! | (0,1) | Ψ⁺ = (|01⟩+|10⟩)/√2 |
//! | (1,0) | Φ⁻ = (|00⟩−|11⟩)/√2 |
//! | (1,1) | Ψ⁻ = (|01⟩−|10⟩)/√2 |
//!
//! All maps act on labels (projectors); global phases are dropped because the
//! ensemble is Bell-diagonal after the initial twirl.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// A `(phase, amplitude)` bit pair acting on labels and flags by XOR.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shift(u8);

impl Shift {
    pub const NONE: Shift = Shift(0b00);
    pub const AMPLITUDE: Shift = Shift(0b01);
    pub const PHASE: Shift = Shift(0b10);
    pub const BOTH: Shift = Shift(0b11);
    pub const ALL: [Shift; 4] = [Shift(0), Shift(1), Shift(2), Shift(3)];

    pub const fn new(phase: u8, amplitude: u8) -> Self {
        Shift(((phase & 1) << 1) | (amplitude & 1))
    }

    pub const fn from_index(index: usize) -> Self {
        Shift((index & 3) as u8)
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }

    pub const fn phase(self) -> u8 {
        self.0 >> 1
    }

    pub const fn amplitude(self) -> u8 {
        self.0 & 1
    }

    /// Composition of two shifts.
    pub const fn then(self, other: Shift) -> Shift {
        Shift(self.0 ^ other.0)
    }
}

/// One of the four Bell states.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct BellLabel(u8);

impl BellLabel {
    pub const PHI_PLUS: BellLabel = BellLabel(0b00);
    pub const PSI_PLUS: BellLabel = BellLabel(0b01);
    pub const PHI_MINUS: BellLabel = BellLabel(0b10);
    pub const PSI_MINUS: BellLabel = BellLabel(0b11);

    /// Labels in index order `B00, B01, B10, B11`.
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PHI_PLUS,
        BellLabel::PSI_PLUS,
        BellLabel::PHI_MINUS,
        BellLabel::PSI_MINUS,
    ];

    pub const fn new(phase: u8, amplitude: u8) -> Self {
        BellLabel(((phase & 1) << 1) | (amplitude & 1))
    }

    /// Index `2·phase + amplitude`, so `B_ij` has index `ij` read in binary.
    pub const fn from_index(index: usize) -> Self {
        BellLabel((index & 3) as u8)
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }

    pub const fn phase(self) -> u8 {
        self.0 >> 1
    }

    pub const fn amplitude(self) -> u8 {
        self.0 & 1
    }

    pub const fn shifted(self, s: Shift) -> BellLabel {
        BellLabel(self.0 ^ s.0)
    }

    /// The shift that takes `self` to `other`.
    pub const fn shift_to(self, other: BellLabel) -> Shift {
        Shift(self.0 ^ other.0)
    }

    pub const fn name(self) -> &'static str {
        match self.0 {
            0 => "phi+",
            1 => "psi+",
            2 => "phi-",
            _ => "psi-",
        }
    }
}

impl fmt::Debug for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B{}{}({})", self.phase(), self.amplitude(), self.name())
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<BellLabel> for String {
    fn from(b: BellLabel) -> String {
        b.name().to_string()
    }
}

impl TryFrom<String> for BellLabel {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        BellLabel::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("unknown Bell label {s:?}"))
    }
}

/// Single-qubit Pauli operator σ₀…σ₃.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub const fn from_index(index: usize) -> Pauli {
        match index & 3 {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Y,
            _ => Pauli::Z,
        }
    }

    pub const fn index(self) -> usize {
        self as usize
    }
}

/// Label shift caused by σ_p acting on one qubit of a Bell pair.
///
/// σx flips the amplitude bit, σz the phase bit, σy both.
pub const fn pauli_shift(p: Pauli) -> Shift {
    match p {
        Pauli::I => Shift::NONE,
        Pauli::X => Shift::AMPLITUDE,
        Pauli::Y => Shift::BOTH,
        Pauli::Z => Shift::PHASE,
    }
}

/// Combined shift of σ_mu on Alice's qubit and σ_nu on Bob's.
pub const fn two_sided_shift(mu: Pauli, nu: Pauli) -> Shift {
    pauli_shift(mu).then(pauli_shift(nu))
}

pub const fn apply_two_sided_pauli(b: BellLabel, mu: Pauli, nu: Pauli) -> BellLabel {
    b.shifted(two_sided_shift(mu, nu))
}

/// Relabeling by the bilateral rotation ½(1 − iσx) ⊗ (1 + iσx).
///
/// Fixes Φ⁺ and Ψ⁺ and exchanges Φ⁻ ↔ Ψ⁻.
pub const fn rotation_step3(b: BellLabel) -> BellLabel {
    BellLabel::new(b.phase(), b.amplitude() ^ b.phase())
}

/// The rotation's action on a shift. The map is linear over GF(2), so it
/// also translates an error recorded after the rotation into the frame before it.
pub const fn rotate_shift(s: Shift) -> Shift {
    Shift::new(s.phase(), s.amplitude() ^ s.phase())
}

/// Bilateral CNOT on (source, target): phases propagate back to the
/// source, amplitudes forward to the target.
pub const fn bcnot_map(source: BellLabel, target: BellLabel) -> (BellLabel, BellLabel) {
    (
        BellLabel::new(source.phase() ^ target.phase(), source.amplitude()),
        BellLabel::new(target.phase(), source.amplitude() ^ target.amplitude()),
    )
}

/// Whether z-measurements on both halves of the target agree.
pub const fn measurement_coincides(target: BellLabel) -> bool {
    target.amplitude() == 0
}

/// A validated two-qubit density matrix.
#[derive(Clone, Debug)]
pub struct DenseTwoQubitState(CMatrix);

/// Tolerance for trace, Hermiticity and positivity of dense states.
pub const DENSE_TOL: f64 = 1e-12;

impl DenseTwoQubitState {
    pub fn new(rho: CMatrix) -> Result<Self> {
        if rho.nrows() != 4 || rho.ncols() != 4 {
            return Err(Error::InvalidState(format!(
                "expected a 4x4 matrix, got {}x{}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let tr = linalg::trace(&rho);
        if (tr.re - 1.0).abs() > DENSE_TOL || tr.im.abs() > DENSE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let defect = linalg::hermiticity_defect(&rho);
        if defect > DENSE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:e})")));
        }
        let min_eig = linalg::min_eigenvalue(&rho);
        if min_eig < -1e-10 {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(DenseTwoQubitState(rho))
    }

    pub fn from_bell_diagonal(p: [f64; 4]) -> Result<Self> {
        let mut rho = CMatrix::zeros(4, 4);
        for b in BellLabel::ALL {
            rho += linalg::bell_projector(b) * linalg::c(p[b.index()], 0.0);
        }
        Self::new(rho)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Diagonal entries ⟨B_k|ρ|B_k⟩ in label index order.
    pub fn bell_diagonal(&self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for b in BellLabel::ALL {
            out[b.index()] = linalg::expectation(&self.0, &linalg::bell_vector(b));
        }
        out
    }

    /// Largest off-diagonal magnitude in the Bell basis.
    pub fn bell_off_diagonal(&self) -> f64 {
        let basis = linalg::bell_basis();
        let in_bell = basis.adjoint() * &self.0 * &basis;
        let mut worst = 0.0f64;
        for r in 0..4 {
            for c in 0..4 {
                if r != c {
                    worst = worst.max(in_bell[(r, c)].norm());
                }
            }
        }
        worst
    }
}

/// Uniform average over the four bilateral rotations σ_k ⊗ σ_k.
///
/// Projects any two-qubit state onto its Bell-diagonal part.
pub fn twirl_dense(rho: &DenseTwoQubitState) -> DenseTwoQubitState {
    let mut out = CMatrix::zeros(4, 4);
    for p in Pauli::ALL {
        let s = linalg::pauli_matrix(p);
        let u = linalg::kron(&s, &s);
        out += linalg::conjugate(&u, rho.matrix());
    }
    out *= linalg::c(0.25, 0.0);
    // Average of unitary conjugates of a valid state; restore exact Hermiticity.
    let out = (&out + out.adjoint()) * linalg::c(0.5, 0.0);
    DenseTwoQubitState(out)
}
