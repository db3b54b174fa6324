use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExponentSettings {
    /// Distances at or below this are floating-point noise and are dropped.
    pub floor: f64,
    /// Minimum number of tail points in a fit.
    pub min_tail: usize,
}

impl Default for ExponentSettings {
    fn default() -> Self {
        ExponentSettings {
            floor: 1e-14,
            min_tail: 6,
        }
    }
}

/// Least-squares line through `ln(distance)` against the round number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesFit {
    /// Decay rate per round, `−slope`.
    pub rate: f64,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual_rms: f64,
    pub first_round: usize,
    pub last_round: usize,
    /// `|slope(first half) − slope(second half)| / |slope|` over the window;
    /// large values mean the decay is not a single exponential.
    pub slope_drift: f64,
}

impl SeriesFit {
    pub fn is_geometric(&self, max_drift: f64) -> bool {
        self.slope_drift <= max_drift
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// Fit of `ln|F_∞ − F_n|`.
    pub fidelity: SeriesFit,
    /// Fit of `ln(1 − F_cond_n)`.
    pub conditional: SeriesFit,
}

impl ExponentFit {
    pub fn rate_f(&self) -> f64 {
        self.fidelity.rate
    }

    pub fn rate_fcond(&self) -> f64 {
        self.conditional.rate
    }

    /// `|rate_F − rate_Fcond| / rate_Fcond`.
    pub fn relative_rate_difference(&self) -> f64 {
        (self.rate_f() - self.rate_fcond()).abs() / self.rate_fcond().abs()
    }
}

fn line_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, rms)
}

/// Fits the tail of a distance series. The tail is the latter half of the
/// last run of distances above the floor.
fn fit_tail(name: &str, distances: &[f64], settings: &ExponentSettings) -> Result<SeriesFit> {
    let above = |d: f64| d.is_finite() && d > settings.floor;
    let Some(end) = distances.iter().rposition(|&d| above(d)) else {
        return Err(Error::InsufficientTail(format!(
            "{name}: no distance above {:e}",
            settings.floor
        )));
    };
    let mut start = end;
    while start > 0 && above(distances[start - 1]) {
        start -= 1;
    }
    let run = end - start + 1;
    if run < settings.min_tail {
        return Err(Error::InsufficientTail(format!(
            "{name}: {run} usable round(s), need {}",
            settings.min_tail
        )));
    }
    let len = (run / 2).max(settings.min_tail);
    let first = end + 1 - len;
    let points: Vec<(f64, f64)> = (first..=end).map(|n| (n as f64, distances[n].ln())).collect();
    let (slope, intercept, residual_rms) = line_fit(&points);
    let half = points.len() / 2;
    let (s1, _, _) = line_fit(&points[..half.max(2)]);
    let (s2, _, _) = line_fit(&points[points.len() - half.max(2)..]);
    Ok(SeriesFit {
        rate: -slope,
        slope,
        intercept,
        residual_rms,
        first_round: first,
        last_round: end,
        slope_drift: (s1 - s2).abs() / slope.abs(),
    })
}

/// Decay rates of `|F_∞ − F_n|` and `1 − F_cond_n`, with `F_∞` taken from
/// the final record.
pub fn convergence_exponents(trajectory: &Trajectory, settings: &ExponentSettings) -> Result<ExponentFit> {
    let f_inf = trajectory.f_max();
    let gap_f: Vec<f64> = trajectory.records.iter().map(|r| (f_inf - r.fidelity).abs()).collect();
    let gap_c: Vec<f64> = trajectory
        .records
        .iter()
        .map(|r| 1.0 - r.conditional_fidelity)
        .collect();
    Ok(ExponentFit {
        fidelity: fit_tail("F", &gap_f, settings)?,
        conditional: fit_tail("F_cond", &gap_c, settings)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab_demon::FlagMode;
    use crate::noise_model::{NoiseModel, Placement};
    use crate::recurrence::{iterate, StopRule, SubensembleState};

    #[test]
    fn line_fit_recovers_exact_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|n| (n as f64, 2.0 - 0.7 * n as f64)).collect();
        let (s, i, r) = line_fit(&pts);
        assert!((s + 0.7).abs() < 1e-12 && (i - 2.0).abs() < 1e-12 && r < 1e-12);
    }

    #[test]
    fn constant_trajectory_has_no_tail() {
        let s = SubensembleState::werner(1.0, FlagMode::Fixed).unwrap();
        let t = iterate(
            &s,
            &NoiseModel::identity(),
            Placement::BeforeRotation,
            StopRule::rounds(20),
        )
        .unwrap();
        let err = convergence_exponents(&t, &ExponentSettings::default()).unwrap_err();
        assert!(matches!(err, Error::InsufficientTail(_)));
    }

    #[test]
    fn noiseless_decay_is_not_geometric() {
        let s = SubensembleState::werner(0.99, FlagMode::Fixed).unwrap();
        let t = iterate(
            &s,
            &NoiseModel::identity(),
            Placement::BeforeRotation,
            StopRule::rounds(30),
        )
        .unwrap();
        let fit = convergence_exponents(&t, &ExponentSettings::default()).unwrap();
        // Quadratic convergence: the log-distance slope steepens along the tail.
        assert!(!fit.fidelity.is_geometric(0.1), "drift {}", fit.fidelity.slope_drift);
    }

    #[test]
    fn fig1_rates_agree() {
        let s = SubensembleState::werner(0.85, FlagMode::Fixed).unwrap();
        let t = iterate(&s, &NoiseModel::fig1(), Placement::BeforeRotation, StopRule::rounds(60)).unwrap();
        let fit = convergence_exponents(&t, &ExponentSettings::default()).unwrap();
        assert!(fit.relative_rate_difference() < 0.1);
        assert!(fit.fidelity.is_geometric(0.1) && fit.conditional.is_geometric(0.1));
    }
}
