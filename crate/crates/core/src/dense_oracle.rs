//! Brute-force density-matrix reference for one and two pairs.
//!
//! Two-pair operators use the fixed qubit order
//! `(Alice-control, Alice-target, Bob-control, Bob-target)`, qubit 0 being
//! the most significant bit. Single-pair operators use `(Alice, Bob)`.
//!
//! Nothing here reads the label tables of [`crate::bell_algebra`]; every map
//! is obtained by conjugating projectors with explicit unitaries.

use crate::bell_algebra::{two_sided_shift, BellLabel, Pauli, Shift};
use crate::error::{Error, Result};
use crate::lab_demon::{flag_update, ErrorFlag};
use crate::linalg::{self, c, CMatrix};
use crate::noise_model::{NoiseModel, Placement};
use crate::recurrence::{SubensembleState, KEEP_FLOOR};

/// Tolerance for identifying a conjugated projector as a Bell projector.
pub const ORACLE_TOL: f64 = 1e-12;

/// Reorders `(A_c, B_c, A_t, B_t)` ↔ `(A_c, A_t, B_c, B_t)`; the map is its own inverse.
const PAIR_ORDER: [usize; 4] = [0, 2, 1, 3];

pub struct ProtocolUnitaries {
    /// ½(1 − iσx) ⊗ (1 + iσx) on one pair.
    pub rotation: CMatrix,
    /// The rotation on both pairs, in two-pair qubit order.
    pub rotation_two_pair: CMatrix,
    /// CNOT(A_c → A_t) · CNOT(B_c → B_t).
    pub bcnot: CMatrix,
}

fn cnot() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = c(1.0, 0.0);
    m[(1, 1)] = c(1.0, 0.0);
    m[(2, 3)] = c(1.0, 0.0);
    m[(3, 2)] = c(1.0, 0.0);
    m
}

pub fn build_protocol_unitaries() -> ProtocolUnitaries {
    let id = linalg::identity(2);
    let x = linalg::pauli_matrix(Pauli::X);
    let i = c(0.0, 1.0);
    let alice = (&id - &x * i) * c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let bob = (&id + &x * i) * c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let rotation = linalg::kron(&alice, &bob);
    let rotation_two_pair = to_two_pair_order(&linalg::kron(&rotation, &rotation));
    // In (A_c, A_t, B_c, B_t) order the two CNOTs act on disjoint adjacent qubit pairs.
    let bcnot = linalg::kron(&cnot(), &cnot());
    ProtocolUnitaries {
        rotation,
        rotation_two_pair,
        bcnot,
    }
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    linalg::max_abs_diff(&(u * u.adjoint()), &linalg::identity(u.nrows())) < tol
}

/// `ρ_control ⊗ ρ_target` → two-pair qubit order.
pub fn to_two_pair_order(pair_major: &CMatrix) -> CMatrix {
    linalg::permute_qubits(pair_major, &PAIR_ORDER)
}

/// Two-pair qubit order → `(A_c, B_c, A_t, B_t)`.
pub fn to_pair_major(two_pair: &CMatrix) -> CMatrix {
    linalg::permute_qubits(two_pair, &PAIR_ORDER)
}

/// Lifts an operator on `(A, B)` of one pair to the two-pair space.
fn lift(op: &CMatrix, on_control: bool) -> CMatrix {
    let id = linalg::identity(4);
    let pair_major = if on_control {
        linalg::kron(op, &id)
    } else {
        linalg::kron(&id, op)
    };
    to_two_pair_order(&pair_major)
}

fn two_sided_pauli(mu: Pauli, nu: Pauli) -> CMatrix {
    linalg::kron(&linalg::pauli_matrix(mu), &linalg::pauli_matrix(nu))
}

/// Projector onto coinciding z-outcomes of the target pair.
fn coincidence_projector() -> CMatrix {
    let mut m = CMatrix::zeros(16, 16);
    for k in 0..16 {
        let alice_target = (k >> 2) & 1;
        let bob_target = k & 1;
        if alice_target == bob_target {
            m[(k, k)] = c(1.0, 0.0);
        }
    }
    m
}

/// The Bell state a 4×4 state is, if it is one.
pub fn identify_bell(rho: &CMatrix) -> Option<BellLabel> {
    BellLabel::ALL
        .into_iter()
        .find(|&b| (linalg::expectation(rho, &linalg::bell_vector(b)) - 1.0).abs() < ORACLE_TOL)
}

/// The product of Bell states a two-pair state is, if it is one.
pub fn identify_bell_pair(two_pair: &CMatrix) -> Option<(BellLabel, BellLabel)> {
    let pm = to_pair_major(two_pair);
    for s in BellLabel::ALL {
        for t in BellLabel::ALL {
            let v = linalg::bell_vector(s).kronecker(&linalg::bell_vector(t));
            if (linalg::expectation(&pm, &v) - 1.0).abs() < ORACLE_TOL {
                return Some((s, t));
            }
        }
    }
    None
}

fn bell_pair_projector(s: BellLabel, t: BellLabel) -> CMatrix {
    to_two_pair_order(&linalg::kron(&linalg::bell_projector(s), &linalg::bell_projector(t)))
}

/// Label maps obtained by conjugation.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedTables {
    pub rotation: [BellLabel; 4],
    /// `bcnot[source][target]`.
    pub bcnot: [[(BellLabel, BellLabel); 4]; 4],
    /// `two_sided[label][4·μ + ν]`.
    pub two_sided: [[BellLabel; 16]; 4],
    /// Kept-pair Bell state for pure control/target flags; `(00)` where the
    /// flag-predicted states are always discarded.
    pub flag_update: [[ErrorFlag; 4]; 4],
}

fn not_bell(what: String) -> Error {
    Error::InvalidState(format!("{what} is not a Bell projector"))
}

pub fn derive_label_maps() -> Result<DerivedTables> {
    let u = build_protocol_unitaries();

    let mut rotation = [BellLabel::PHI_PLUS; 4];
    for b in BellLabel::ALL {
        let out = linalg::conjugate(&u.rotation, &linalg::bell_projector(b));
        rotation[b.index()] = identify_bell(&out).ok_or_else(|| not_bell(format!("rotation of {b:?}")))?;
    }

    let mut bcnot = [[(BellLabel::PHI_PLUS, BellLabel::PHI_PLUS); 4]; 4];
    for s in BellLabel::ALL {
        for t in BellLabel::ALL {
            let out = linalg::conjugate(&u.bcnot, &bell_pair_projector(s, t));
            bcnot[s.index()][t.index()] =
                identify_bell_pair(&out).ok_or_else(|| not_bell(format!("BCNOT of ({s:?}, {t:?})")))?;
        }
    }

    let mut two_sided = [[BellLabel::PHI_PLUS; 16]; 4];
    for b in BellLabel::ALL {
        for mu in Pauli::ALL {
            for nu in Pauli::ALL {
                let out = linalg::conjugate(&two_sided_pauli(mu, nu), &linalg::bell_projector(b));
                two_sided[b.index()][4 * mu.index() + nu.index()] =
                    identify_bell(&out).ok_or_else(|| not_bell(format!("{mu:?}⊗{nu:?} on {b:?}")))?;
            }
        }
    }

    let projector = coincidence_projector();
    let mut flag_table = [[ErrorFlag::CLEAN; 4]; 4];
    for f1 in BellLabel::ALL {
        for f2 in BellLabel::ALL {
            let rho = bell_pair_projector(f1, f2);
            let rho = linalg::conjugate(&u.rotation_two_pair, &rho);
            let rho = linalg::conjugate(&u.bcnot, &rho);
            let kept = &projector * rho * &projector;
            let reduced = linalg::partial_trace_trailing(&to_pair_major(&kept), 4);
            let keep = linalg::trace(&reduced).re;
            if keep > ORACLE_TOL {
                let normalized = reduced * c(1.0 / keep, 0.0);
                let b =
                    identify_bell(&normalized).ok_or_else(|| not_bell(format!("kept pair for ({f1:?}, {f2:?})")))?;
                flag_table[f1.index()][f2.index()] = ErrorFlag::from_index(b.index());
            }
        }
    }

    Ok(DerivedTables {
        rotation,
        bcnot,
        two_sided,
        flag_update: flag_table,
    })
}

/// The Pauli pair `(a, b)` with `R† (σ_μ ⊗ σ_ν) R ∝ σ_a ⊗ σ_b`.
fn conjugate_through_rotation(rotation: &CMatrix, mu: Pauli, nu: Pauli) -> Result<(Pauli, Pauli)> {
    let k = rotation.adjoint() * two_sided_pauli(mu, nu) * rotation;
    for a in Pauli::ALL {
        for b in Pauli::ALL {
            let overlap = linalg::trace(&(two_sided_pauli(a, b).adjoint() * &k)).norm() / 4.0;
            if (overlap - 1.0).abs() < ORACLE_TOL {
                return Ok((a, b));
            }
        }
    }
    Err(Error::InvalidState(format!(
        "rotation does not map {mu:?}⊗{nu:?} to a Pauli"
    )))
}

/// Output of the dense reference round.
#[derive(Clone, Debug)]
pub struct OracleRound {
    pub state: SubensembleState,
    pub keep_probability: f64,
    /// Largest Bell-basis off-diagonal of any kept flag-conditioned state,
    /// relative to its trace.
    pub max_off_diagonal: f64,
    /// Smallest eigenvalue seen across the noisy two-pair states.
    pub min_eigenvalue: f64,
    /// Largest trace deviation introduced by a noise channel.
    pub channel_trace_defect: f64,
}

/// Applies the per-pair Kraus sum to every flag-tagged two-pair state.
///
/// `tag_shift` gives the flag shift recorded for a Kraus branch.
fn apply_noise(
    tagged: &[CMatrix],
    noise: &NoiseModel,
    on_control: bool,
    tag_shift: &dyn Fn(Pauli, Pauli) -> Shift,
) -> Vec<CMatrix> {
    let mut out = vec![CMatrix::zeros(16, 16); 16];
    for (key, rho) in tagged.iter().enumerate() {
        let (fc, ft) = (ErrorFlag::from_index(key / 4), ErrorFlag::from_index(key % 4));
        for (mu, nu, p) in noise.outcomes() {
            if p == 0.0 {
                continue;
            }
            let k = lift(&two_sided_pauli(mu, nu), on_control);
            let s = tag_shift(mu, nu);
            let new_key = if on_control {
                4 * fc.shifted(s).index() + ft.index()
            } else {
                4 * fc.index() + ft.shifted(s).index()
            };
            out[new_key] += linalg::conjugate(&k, rho) * c(p, 0.0);
        }
    }
    out
}

/// One noisy purification round on the full two-pair density matrix, with
/// flags carried as classical tags.
pub fn oracle_one_round(state: &SubensembleState, noise: &NoiseModel, placement: Placement) -> Result<OracleRound> {
    let u = build_protocol_unitaries();

    // Flag-conditioned single-pair states, unnormalized.
    let pair_states: Vec<CMatrix> = ErrorFlag::ALL
        .iter()
        .map(|&f| {
            let mut rho = CMatrix::zeros(4, 4);
            for b in BellLabel::ALL {
                rho += linalg::bell_projector(b) * c(state.get(f, b), 0.0);
            }
            rho
        })
        .collect();

    // tagged[4·fc + ft] = ρ_fc ⊗ ρ_ft in two-pair order
    let mut tagged: Vec<CMatrix> = (0..16)
        .map(|k| to_two_pair_order(&linalg::kron(&pair_states[k / 4], &pair_states[k % 4])))
        .collect();
    let input_trace: f64 = tagged.iter().map(|m| linalg::trace(m).re).sum();

    let direct = |mu: Pauli, nu: Pauli| two_sided_shift(mu, nu);
    let rotation = u.rotation.clone();
    let translated = move |mu: Pauli, nu: Pauli| {
        let (a, b) = conjugate_through_rotation(&rotation, mu, nu).expect("Clifford rotation");
        two_sided_shift(a, b)
    };

    match placement {
        Placement::BeforeRotation => {
            tagged = apply_noise(&tagged, noise, true, &direct);
            tagged = apply_noise(&tagged, noise, false, &direct);
            for rho in tagged.iter_mut() {
                *rho = linalg::conjugate(&u.rotation_two_pair, rho);
            }
        }
        Placement::BeforeBcnot => {
            for rho in tagged.iter_mut() {
                *rho = linalg::conjugate(&u.rotation_two_pair, rho);
            }
            tagged = apply_noise(&tagged, noise, true, &translated);
            tagged = apply_noise(&tagged, noise, false, &translated);
        }
    }

    let noisy_trace: f64 = tagged.iter().map(|m| linalg::trace(m).re).sum();
    let channel_trace_defect = (noisy_trace - input_trace).abs();
    let min_eigenvalue = tagged.iter().map(linalg::min_eigenvalue).fold(f64::INFINITY, f64::min);

    let projector = coincidence_projector();
    let mut weights = [0.0; 16];
    let mut keep = 0.0;
    let mut max_off_diagonal = 0.0f64;
    let basis = linalg::bell_basis();
    for (key, rho) in tagged.iter().enumerate() {
        let rho = linalg::conjugate(&u.bcnot, rho);
        let kept = &projector * rho * &projector;
        let reduced = linalg::partial_trace_trailing(&to_pair_major(&kept), 4);
        let tr = linalg::trace(&reduced).re;
        if tr <= 0.0 {
            continue;
        }
        keep += tr;
        let new_flag = flag_update(ErrorFlag::from_index(key / 4), ErrorFlag::from_index(key % 4));
        let in_bell = basis.adjoint() * &reduced * &basis;
        for b in BellLabel::ALL {
            weights[4 * new_flag.index() + b.index()] += in_bell[(b.index(), b.index())].re;
        }
        for r in 0..4 {
            for col in 0..4 {
                if r != col {
                    max_off_diagonal = max_off_diagonal.max(in_bell[(r, col)].norm() / tr);
                }
            }
        }
    }
    if keep < KEEP_FLOOR {
        return Err(Error::Degenerate {
            round: 1,
            keep_probability: keep,
            floor: KEEP_FLOOR,
        });
    }
    // Clip round-off negatives before normalizing.
    let weights = weights.map(|w| if w < 0.0 && w > -1e-15 { 0.0 } else { w });
    Ok(OracleRound {
        state: SubensembleState::from_weights(weights)?,
        keep_probability: keep,
        max_off_diagonal,
        min_eigenvalue,
        channel_trace_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell_algebra::{apply_two_sided_pauli, bcnot_map, rotation_step3};
    use crate::lab_demon::FLAG_UPDATE_TABLE;

    #[test]
    fn unitaries_are_unitary() {
        let u = build_protocol_unitaries();
        assert!(is_unitary(&u.rotation, 1e-12));
        assert!(is_unitary(&u.rotation_two_pair, 1e-12));
        assert!(is_unitary(&u.bcnot, 1e-12));
        assert!(linalg::max_abs_diff(&(&u.bcnot * &u.bcnot), &linalg::identity(16)) < 1e-12);
    }

    #[test]
    fn rotation_sends_phi_minus_to_psi_minus() {
        let u = build_protocol_unitaries();
        let out = linalg::conjugate(&u.rotation, &linalg::bell_projector(BellLabel::PHI_MINUS));
        assert!(linalg::max_abs_diff(&out, &linalg::bell_projector(BellLabel::PSI_MINUS)) < 1e-12);
    }

    #[test]
    fn derived_tables_match_label_algebra() {
        let d = derive_label_maps().unwrap();
        for b in BellLabel::ALL {
            assert_eq!(d.rotation[b.index()], rotation_step3(b));
            for t in BellLabel::ALL {
                assert_eq!(d.bcnot[b.index()][t.index()], bcnot_map(b, t));
            }
            for mu in Pauli::ALL {
                for nu in Pauli::ALL {
                    assert_eq!(
                        d.two_sided[b.index()][4 * mu.index() + nu.index()],
                        apply_two_sided_pauli(b, mu, nu)
                    );
                }
            }
        }
        assert_eq!(d.flag_update, FLAG_UPDATE_TABLE);
    }

    #[test]
    fn noiseless_pure_round() {
        let s = SubensembleState::point(ErrorFlag::CLEAN, BellLabel::PHI_PLUS);
        let r = oracle_one_round(&s, &NoiseModel::identity(), Placement::BeforeRotation).unwrap();
        assert!(r.state.max_abs_diff(&s) < 1e-12);
        assert!((r.keep_probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kept_state_stays_bell_diagonal() {
        let s = SubensembleState::werner(0.8, crate::lab_demon::FlagMode::Random).unwrap();
        let r = oracle_one_round(&s, &NoiseModel::fig1(), Placement::BeforeBcnot).unwrap();
        assert!(r.max_off_diagonal < 1e-12);
        assert!(r.channel_trace_defect < 1e-10);
        assert!(r.min_eigenvalue > -1e-10);
    }

    #[test]
    fn rotation_conjugation_matches_frame_translation() {
        let u = build_protocol_unitaries();
        for mu in Pauli::ALL {
            for nu in Pauli::ALL {
                let (a, b) = conjugate_through_rotation(&u.rotation, mu, nu).unwrap();
                assert_eq!(
                    two_sided_shift(a, b),
                    crate::bell_algebra::rotate_shift(two_sided_shift(mu, nu))
                );
            }
        }
    }
}
