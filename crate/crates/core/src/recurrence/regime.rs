use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{iterate, StopRule, SubensembleState};
use crate::error::{Error, Result};
use crate::noise_model::{NoiseModel, Placement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    /// The ensemble drifts to a fidelity at or below 1/2.
    NoPurification,
    /// Purifies, but the flags do not pin down the pair states.
    PurifyInsecure,
    /// Purifies and the conditional fidelity tends to one.
    PurifySecure,
}

impl Regime {
    pub fn purifies(self) -> bool {
        self != Regime::NoPurification
    }

    pub fn is_secure(self) -> bool {
        self == Regime::PurifySecure
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::NoPurification => "NO_PURIFICATION",
            Regime::PurifyInsecure => "PURIFY_INSECURE",
            Regime::PurifySecure => "PURIFY_SECURE",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegimeTolerances {
    /// Secure iff `1 − F_cond` at the fixpoint is below this.
    pub secure_tol: f64,
    /// Purifying iff `F_max > 1/2 + purify_margin`.
    pub purify_margin: f64,
    pub stop: StopRule,
}

impl Default for RegimeTolerances {
    fn default() -> Self {
        RegimeTolerances {
            secure_tol: 1e-6,
            purify_margin: 1e-4,
            // Convergence of F_cond slows down near the security boundary.
            stop: StopRule {
                max_rounds: 5000,
                fixpoint_tol: 1e-12,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub f_max: f64,
    pub f_cond_limit: f64,
    pub rounds: usize,
    pub converged: bool,
    /// The keep probability collapsed; limits are NaN.
    pub degenerate: bool,
}

pub fn classify_regime(
    noise: &NoiseModel,
    initial: &SubensembleState,
    placement: Placement,
    tol: &RegimeTolerances,
) -> RegimeReport {
    match iterate(initial, noise, placement, tol.stop) {
        Ok(t) => {
            let f_max = t.f_max();
            let f_cond_limit = t.f_cond_limit();
            let regime = if f_max <= 0.5 + tol.purify_margin {
                Regime::NoPurification
            } else if 1.0 - f_cond_limit < tol.secure_tol {
                Regime::PurifySecure
            } else {
                Regime::PurifyInsecure
            };
            RegimeReport {
                regime,
                f_max,
                f_cond_limit,
                rounds: t.rounds(),
                converged: t.converged,
                degenerate: false,
            }
        }
        Err(Error::Degenerate { round, .. }) => RegimeReport {
            regime: Regime::NoPurification,
            f_max: f64::NAN,
            f_cond_limit: f64::NAN,
            rounds: round,
            converged: false,
            degenerate: true,
        },
        Err(e) => unreachable!("iterate only fails with Degenerate: {e}"),
    }
}

/// Final bisection bracket around a regime boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSettings {
    /// Parameter interval `[lo, hi]`; the family must get less noisy towards `hi`.
    pub range: [f64; 2],
    pub bisect_tol: f64,
    pub placement: Placement,
    pub tolerances: RegimeTolerances,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            range: [0.85, 1.0],
            bisect_tol: 1e-5,
            placement: Placement::BeforeRotation,
            tolerances: RegimeTolerances::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Midpoint of the purification bracket, if the range crosses it.
    pub f_purify: Option<f64>,
    /// Midpoint of the security bracket, if the range crosses it.
    pub f_secure: Option<f64>,
    pub purify_bracket: Option<Bracket>,
    pub secure_bracket: Option<Bracket>,
    pub regime_at_lo: Regime,
    pub regime_at_hi: Regime,
}

impl Thresholds {
    /// `f_secure − f_purify` when both boundaries were found.
    pub fn intermediate_width(&self) -> Option<f64> {
        Some(self.f_secure? - self.f_purify?)
    }
}

fn bisect(lo: f64, hi: f64, tol: f64, mut above: impl FnMut(f64) -> Result<bool>) -> Result<Bracket> {
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if above(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Bracket { lo, hi })
}

/// Locates the purification and security boundaries of a one-parameter
/// noise family by bisection on the regime.
pub fn find_thresholds<F>(family: F, initial: &SubensembleState, settings: &ScanSettings) -> Result<Thresholds>
where
    F: Fn(f64) -> Result<NoiseModel>,
{
    let regime_at = |x: f64| -> Result<Regime> {
        let noise = family(x)?;
        Ok(classify_regime(&noise, initial, settings.placement, &settings.tolerances).regime)
    };
    let [lo, hi] = settings.range;
    if !(lo < hi) {
        return Err(Error::Config(format!("scan range [{lo}, {hi}] is empty")));
    }
    let (r_lo, r_hi) = (regime_at(lo)?, regime_at(hi)?);
    if r_lo == r_hi {
        return Err(Error::NoThreshold {
            lo,
            hi,
            regime: r_lo.to_string(),
        });
    }
    let purify_bracket = if !r_lo.purifies() && r_hi.purifies() {
        Some(bisect(lo, hi, settings.bisect_tol, |x| Ok(regime_at(x)?.purifies()))?)
    } else {
        None
    };
    let secure_bracket = if !r_lo.is_secure() && r_hi.is_secure() {
        // The security boundary cannot lie below the purification boundary.
        let start = purify_bracket.map_or(lo, |b| b.lo);
        Some(bisect(start, hi, settings.bisect_tol, |x| {
            Ok(regime_at(x)?.is_secure())
        })?)
    } else {
        None
    };
    Ok(Thresholds {
        f_purify: purify_bracket.map(|b| b.midpoint()),
        f_secure: secure_bracket.map(|b| b.midpoint()),
        purify_bracket,
        secure_bracket,
        regime_at_lo: r_lo,
        regime_at_hi: r_hi,
    })
}

/// Regime at each parameter value, evaluated in parallel.
pub fn regime_grid<F>(
    family: F,
    initial: &SubensembleState,
    points: &[f64],
    settings: &ScanSettings,
) -> Result<Vec<(f64, RegimeReport)>>
where
    F: Fn(f64) -> Result<NoiseModel> + Sync,
{
    points
        .par_iter()
        .map(|&x| {
            let noise = family(x)?;
            Ok((
                x,
                classify_regime(&noise, initial, settings.placement, &settings.tolerances),
            ))
        })
        .collect()
}

/// Thresholds for several initial states, one independent scan each.
pub fn threshold_grid<F>(
    family: F,
    initials: &[(f64, SubensembleState)],
    settings: &ScanSettings,
) -> Vec<(f64, Result<Thresholds>)>
where
    F: Fn(f64) -> Result<NoiseModel> + Sync,
{
    initials
        .par_iter()
        .map(|(label, init)| (*label, find_thresholds(&family, init, settings)))
        .collect()
}
