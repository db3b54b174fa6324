//! Exact evolution of the 16 flag-resolved Bell coefficients.
//!
//! One round is generated by enumerating every (control, target) category
//! pair and every noise outcome; no closed-form recurrence is transcribed.
//! Control and target are drawn independently from the same distribution,
//! which is the large-ensemble limit of the random renumbering step.

mod exponents;
mod regime;

pub use exponents::{convergence_exponents, ExponentFit, ExponentSettings, SeriesFit};
pub use regime::{
    classify_regime, find_thresholds, regime_grid, threshold_grid, Bracket, Regime, RegimeReport, RegimeTolerances,
    ScanSettings, Thresholds,
};

use serde::{Deserialize, Serialize};

use crate::bell_algebra::{
    bcnot_map, measurement_coincides, rotate_shift, rotation_step3, two_sided_shift, BellLabel, Shift,
};
use crate::error::{check_distribution, Error, Result};
use crate::lab_demon::{flag_update, ErrorFlag, FlagMode};
use crate::noise_model::{NoiseModel, Placement};

/// Keep probabilities below this value stop the protocol.
pub const KEEP_FLOOR: f64 = 1e-9;

const NORM_TOL: f64 = 1e-12;

/// Flag-resolved Bell coefficients `P[flag][bell]`, stored at `4·flag + bell`.
///
/// In the `A, B, C, D` naming, `A ↔ Φ⁺ (B00)`, `B ↔ Ψ⁻ (B11)`,
/// `C ↔ Ψ⁺ (B01)` and `D ↔ Φ⁻ (B10)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubensembleState {
    p: [f64; 16],
}

#[inline]
const fn slot(flag: ErrorFlag, bell: BellLabel) -> usize {
    4 * flag.index() + bell.index()
}

impl SubensembleState {
    pub fn new(p: [f64; 16]) -> Result<Self> {
        check_distribution(&p, NORM_TOL)?;
        Ok(SubensembleState { p })
    }

    /// Bell-diagonal pairs with the given label probabilities (index order
    /// B00, B01, B10, B11) and flags uncorrelated with the labels.
    pub fn from_bell(bell: [f64; 4], flags: FlagMode) -> Result<Self> {
        check_distribution(&bell, NORM_TOL)?;
        let mut p = [0.0; 16];
        for b in BellLabel::ALL {
            match flags {
                FlagMode::Fixed => p[slot(ErrorFlag::CLEAN, b)] = bell[b.index()],
                FlagMode::Random => {
                    for f in ErrorFlag::ALL {
                        p[slot(f, b)] = bell[b.index()] / 4.0;
                    }
                }
            }
        }
        Ok(SubensembleState { p })
    }

    /// Werner-like input: weight `fidelity` on Φ⁺ and the rest spread evenly.
    pub fn werner(fidelity: f64, flags: FlagMode) -> Result<Self> {
        Self::from_bell(werner_bell(fidelity), flags)
    }

    pub fn uniform() -> Self {
        SubensembleState { p: [1.0 / 16.0; 16] }
    }

    /// All weight on one (flag, bell) category.
    pub fn point(flag: ErrorFlag, bell: BellLabel) -> Self {
        let mut p = [0.0; 16];
        p[slot(flag, bell)] = 1.0;
        SubensembleState { p }
    }

    pub fn coefficients(&self) -> &[f64; 16] {
        &self.p
    }

    pub fn get(&self, flag: ErrorFlag, bell: BellLabel) -> f64 {
        self.p[slot(flag, bell)]
    }

    /// Bell-label marginal in index order B00, B01, B10, B11.
    pub fn bell_marginal(&self) -> [f64; 4] {
        let mut m = [0.0; 4];
        for (k, v) in self.p.iter().enumerate() {
            m[k % 4] += v;
        }
        m
    }

    pub fn flag_marginal(&self) -> [f64; 4] {
        let mut m = [0.0; 4];
        for (k, v) in self.p.iter().enumerate() {
            m[k / 4] += v;
        }
        m
    }

    /// Marginal coefficients `(A, B, C, D) = (Φ⁺, Ψ⁻, Ψ⁺, Φ⁻)`.
    pub fn abcd(&self) -> [f64; 4] {
        bell_to_abcd(self.bell_marginal())
    }

    /// F = Σ_flag P(flag, Φ⁺).
    pub fn fidelity(&self) -> f64 {
        ErrorFlag::ALL.iter().map(|&f| self.get(f, BellLabel::PHI_PLUS)).sum()
    }

    /// F_cond = Σ_ij P((ij), B_ij): the weight of pairs whose flag names their state.
    pub fn conditional_fidelity(&self) -> f64 {
        ErrorFlag::ALL
            .iter()
            .map(|&f| self.get(f, BellLabel::from_index(f.index())))
            .sum()
    }

    pub fn total_variation(&self, other: &SubensembleState) -> f64 {
        0.5 * self
            .p
            .iter()
            .zip(other.p.iter())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }

    pub fn max_abs_diff(&self, other: &SubensembleState) -> f64 {
        self.p
            .iter()
            .zip(other.p.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Builds a state from unnormalized nonnegative weights.
    pub fn from_weights(w: [f64; 16]) -> Result<Self> {
        let total: f64 = w.iter().sum();
        if !(total > 0.0) || w.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(Error::InvalidDistribution(
                "weights must be nonnegative with positive sum".into(),
            ));
        }
        Ok(SubensembleState {
            p: w.map(|v| v / total),
        })
    }
}

pub fn werner_bell(fidelity: f64) -> [f64; 4] {
    let r = (1.0 - fidelity) / 3.0;
    [fidelity, r, r, r]
}

/// Reorders a label-indexed marginal (B00, B01, B10, B11) into `(A, B, C, D)`.
pub fn bell_to_abcd(m: [f64; 4]) -> [f64; 4] {
    [m[0], m[3], m[1], m[2]]
}

/// Noise and rotation applied to one pair category: returns the recorded
/// flag and the rotated Bell label.
#[inline]
fn prepare(flag: ErrorFlag, bell: BellLabel, s: Shift, placement: Placement) -> (ErrorFlag, BellLabel) {
    match placement {
        Placement::BeforeRotation => (flag.shifted(s), rotation_step3(bell.shifted(s))),
        // The error hits after the rotation; the demon records it in the
        // pre-rotation frame so the flag keeps naming the state.
        Placement::BeforeBcnot => (flag.shifted(rotate_shift(s)), rotation_step3(bell).shifted(s)),
    }
}

/// One purification round: noise, rotation, BCNOT, coincidence test on the
/// target, flag update of the kept control.
///
/// Returns the normalized state of the kept pairs and the keep probability.
pub fn one_round(
    state: &SubensembleState,
    noise: &NoiseModel,
    placement: Placement,
) -> Result<(SubensembleState, f64)> {
    one_round_with_floor(state, noise, placement, KEEP_FLOOR)
}

pub(crate) fn one_round_with_floor(
    state: &SubensembleState,
    noise: &NoiseModel,
    placement: Placement,
    floor: f64,
) -> Result<(SubensembleState, f64)> {
    let mut prepared = [0.0; 16];
    for flag in ErrorFlag::ALL {
        for bell in BellLabel::ALL {
            let w = state.get(flag, bell);
            if w == 0.0 {
                continue;
            }
            for (mu, nu, f) in noise.outcomes() {
                if f == 0.0 {
                    continue;
                }
                let (fl, b) = prepare(flag, bell, two_sided_shift(mu, nu), placement);
                prepared[slot(fl, b)] += w * f;
            }
        }
    }

    let mut kept = [0.0; 16];
    let mut keep = 0.0;
    for (c, &wc) in prepared.iter().enumerate() {
        if wc == 0.0 {
            continue;
        }
        let (control_flag, control_bell) = (ErrorFlag::from_index(c / 4), BellLabel::from_index(c % 4));
        for (t, &wt) in prepared.iter().enumerate() {
            if wt == 0.0 {
                continue;
            }
            let (target_flag, target_bell) = (ErrorFlag::from_index(t / 4), BellLabel::from_index(t % 4));
            let (source_out, target_out) = bcnot_map(control_bell, target_bell);
            if measurement_coincides(target_out) {
                let w = wc * wt;
                kept[slot(flag_update(control_flag, target_flag), source_out)] += w;
                keep += w;
            }
        }
    }

    if keep < floor {
        return Err(Error::Degenerate {
            round: 1,
            keep_probability: keep,
            floor,
        });
    }
    Ok((
        SubensembleState {
            p: kept.map(|v| v / keep),
        },
        keep,
    ))
}

/// The same round with flags ignored: four Bell coefficients in, four out.
pub fn reduced_round(bell: [f64; 4], noise: &NoiseModel, placement: Placement) -> Result<([f64; 4], f64)> {
    let shifts = noise.label_shift_distribution();
    let mut prepared = [0.0; 4];
    for b in BellLabel::ALL {
        for s in Shift::ALL {
            let (_, r) = prepare(ErrorFlag::CLEAN, b, s, placement);
            prepared[r.index()] += bell[b.index()] * shifts[s.index()];
        }
    }
    let mut out = [0.0; 4];
    let mut keep = 0.0;
    for c in BellLabel::ALL {
        for t in BellLabel::ALL {
            let (s2, t2) = bcnot_map(c, t);
            if measurement_coincides(t2) {
                let w = prepared[c.index()] * prepared[t.index()];
                out[s2.index()] += w;
                keep += w;
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
    Ok((out.map(|v| v / keep), keep))
}

/// When to stop iterating.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StopRule {
    pub max_rounds: usize,
    /// Sup-norm change of the 16 coefficients below which the state is a fixpoint.
    pub fixpoint_tol: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            max_rounds: 500,
            fixpoint_tol: 1e-12,
        }
    }
}

impl StopRule {
    /// Exactly `rounds` rounds, no early stop.
    pub fn rounds(rounds: usize) -> Self {
        StopRule {
            max_rounds: rounds,
            fixpoint_tol: -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub fidelity: f64,
    pub conditional_fidelity: f64,
    /// Probability that a given control pair survived this round; 1 for the input.
    pub keep_probability: f64,
    pub state: SubensembleState,
}

impl RoundRecord {
    fn new(round: usize, state: SubensembleState, keep_probability: f64) -> Self {
        RoundRecord {
            round,
            fidelity: state.fidelity(),
            conditional_fidelity: state.conditional_fidelity(),
            keep_probability,
            state,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Round 0 is the input state.
    pub records: Vec<RoundRecord>,
    /// Whether the fixpoint tolerance was met before `max_rounds`.
    pub converged: bool,
}

impl Trajectory {
    pub fn final_record(&self) -> &RoundRecord {
        self.records.last().expect("trajectory always holds the input record")
    }

    /// Limiting fidelity, read from the final state.
    pub fn f_max(&self) -> f64 {
        self.final_record().fidelity
    }

    pub fn f_cond_limit(&self) -> f64 {
        self.final_record().conditional_fidelity
    }

    pub fn rounds(&self) -> usize {
        self.records.len() - 1
    }

    pub fn fidelities(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.fidelity).collect()
    }

    pub fn conditional_fidelities(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.conditional_fidelity).collect()
    }
}

/// Iterates [`one_round`] until the fixpoint tolerance or the round cap.
pub fn iterate(
    initial: &SubensembleState,
    noise: &NoiseModel,
    placement: Placement,
    stop: StopRule,
) -> Result<Trajectory> {
    let mut records = vec![RoundRecord::new(0, *initial, 1.0)];
    let mut state = *initial;
    let mut converged = false;
    for round in 1..=stop.max_rounds {
        let (next, keep) = one_round(&state, noise, placement).map_err(|e| match e {
            Error::Degenerate {
                keep_probability,
                floor,
                ..
            } => Error::Degenerate {
                round,
                keep_probability,
                floor,
            },
            other => other,
        })?;
        let change = next.max_abs_diff(&state);
        state = next;
        records.push(RoundRecord::new(round, state, keep));
        if change < stop.fixpoint_tol {
            converged = true;
            break;
        }
    }
    Ok(Trajectory { records, converged })
}
