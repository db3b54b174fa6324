//! Two-sided Pauli noise: ρ → Σ f_{μν} (σ_μ ⊗ σ_ν) ρ (σ_μ ⊗ σ_ν).

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bell_algebra::{two_sided_shift, Pauli, Shift};
use crate::error::{check_distribution, check_probability, Error, Result};

const SUM_TOL: f64 = 1e-12;

/// Joint distribution `f[4·μ + ν]` of the Pauli σ_μ on Alice's qubit and
/// σ_ν on Bob's qubit of a pair.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    f: [f64; 16],
}

/// Where the per-round channel acts relative to the bilateral rotation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    #[default]
    BeforeRotation,
    BeforeBcnot,
}

impl NoiseModel {
    pub fn explicit(f: [f64; 16]) -> Result<Self> {
        check_distribution(&f, SUM_TOL)?;
        Ok(NoiseModel { f })
    }

    pub fn identity() -> Self {
        let mut f = [0.0; 16];
        f[0] = 1.0;
        NoiseModel { f }
    }

    /// Independent one-qubit depolarizing channels on both qubits of the pair:
    /// `f_{μν} = g_μ g_ν` with `g₀ = f0`, `g_{1,2,3} = (1 − f0)/3`.
    pub fn from_one_qubit_depolarizing(f0: f64) -> Result<Self> {
        let g = depolarizing_weights(check_probability("f0", f0)?);
        let mut f = [0.0; 16];
        for mu in 0..4 {
            for nu in 0..4 {
                f[4 * mu + nu] = g[mu] * g[nu];
            }
        }
        Ok(NoiseModel { f })
    }

    /// One-qubit depolarizing channel on Alice's qubit only:
    /// `f_{μ0} = g_μ`, all other entries zero.
    ///
    /// Noise confined to one laboratory; each pair then sees a single
    /// depolarizing qubit per round.
    pub fn from_one_sided_depolarizing(f0: f64) -> Result<Self> {
        let g = depolarizing_weights(check_probability("f0", f0)?);
        let mut f = [0.0; 16];
        for (mu, w) in g.iter().enumerate() {
            f[4 * mu] = *w;
        }
        Ok(NoiseModel { f })
    }

    /// `f_{00} = f00` with the remaining weight spread evenly over the other 15 rotations.
    pub fn from_uniform_residual(f00: f64) -> Result<Self> {
        let f00 = check_probability("f00", f00)?;
        let mut f = [(1.0 - f00) / 15.0; 16];
        f[0] = f00;
        Ok(NoiseModel { f })
    }

    /// Reference trajectory preset: white noise with 97 % noise fidelity.
    pub fn fig1() -> Self {
        Self::from_uniform_residual(0.97).expect("0.97 is a probability")
    }

    pub fn probabilities(&self) -> &[f64; 16] {
        &self.f
    }

    pub fn probability(&self, mu: Pauli, nu: Pauli) -> f64 {
        self.f[4 * mu.index() + nu.index()]
    }

    /// No-error probability `f_{00}`.
    pub fn fidelity(&self) -> f64 {
        self.f[0]
    }

    /// Iterator over `(μ, ν, f_{μν})`.
    pub fn outcomes(&self) -> impl Iterator<Item = (Pauli, Pauli, f64)> + '_ {
        (0..16).map(move |k| (Pauli::from_index(k / 4), Pauli::from_index(k % 4), self.f[k]))
    }

    /// Probability of each combined label shift, indexed by `Shift::index`.
    pub fn label_shift_distribution(&self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (mu, nu, p) in self.outcomes() {
            out[two_sided_shift(mu, nu).index()] += p;
        }
        out
    }

    pub fn sampler(&self) -> NoiseSampler {
        NoiseSampler {
            index: WeightedIndex::new(self.f).expect("validated distribution has positive mass"),
        }
    }

    /// Draws one `(μ, ν)` outcome. Builds a sampler per call; use
    /// [`NoiseModel::sampler`] in loops.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Pauli, Pauli) {
        self.sampler().sample(rng)
    }
}

fn depolarizing_weights(f0: f64) -> [f64; 4] {
    let r = (1.0 - f0) / 3.0;
    [f0, r, r, r]
}

/// Precomputed alias-free sampler over the 16 outcomes.
#[derive(Clone, Debug)]
pub struct NoiseSampler {
    index: WeightedIndex<f64>,
}

impl NoiseSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Pauli, Pauli) {
        let k = self.index.sample(rng);
        (Pauli::from_index(k / 4), Pauli::from_index(k % 4))
    }

    pub fn sample_shift<R: Rng + ?Sized>(&self, rng: &mut R) -> Shift {
        let (mu, nu) = self.sample(rng);
        two_sided_shift(mu, nu)
    }
}

/// Serializable description of a noise model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    /// Depolarizing on both qubits of the pair.
    Product {
        f0: f64,
    },
    /// Depolarizing on Alice's qubit only.
    OneSided {
        f0: f64,
    },
    Uniform {
        f00: f64,
    },
    Explicit {
        f: Vec<f64>,
    },
}

impl NoiseSpec {
    pub fn build(&self) -> Result<NoiseModel> {
        match self {
            NoiseSpec::Product { f0 } => NoiseModel::from_one_qubit_depolarizing(*f0),
            NoiseSpec::OneSided { f0 } => NoiseModel::from_one_sided_depolarizing(*f0),
            NoiseSpec::Uniform { f00 } => NoiseModel::from_uniform_residual(*f00),
            NoiseSpec::Explicit { f } => {
                let f: [f64; 16] = f.as_slice().try_into().map_err(|_| {
                    Error::InvalidDistribution(format!("explicit noise needs 16 entries, got {}", f.len()))
                })?;
                NoiseModel::explicit(f)
            }
        }
    }
}

/// One-parameter noise families used by threshold scans.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFamily {
    Product,
    OneSided,
    Uniform,
}

impl NoiseFamily {
    pub fn build(self, parameter: f64) -> Result<NoiseModel> {
        match self {
            NoiseFamily::Product => NoiseModel::from_one_qubit_depolarizing(parameter),
            NoiseFamily::OneSided => NoiseModel::from_one_sided_depolarizing(parameter),
            NoiseFamily::Uniform => NoiseModel::from_uniform_residual(parameter),
        }
    }

    pub fn spec(self, parameter: f64) -> NoiseSpec {
        match self {
            NoiseFamily::Product => NoiseSpec::Product { f0: parameter },
            NoiseFamily::OneSided => NoiseSpec::OneSided { f0: parameter },
            NoiseFamily::Uniform => NoiseSpec::Uniform { f00: parameter },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NoiseFamily::Product => "product",
            NoiseFamily::OneSided => "one_sided",
            NoiseFamily::Uniform => "uniform",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn product_depolarizing_values() {
        let n = NoiseModel::from_one_qubit_depolarizing(1.0).unwrap();
        assert_eq!(n, NoiseModel::identity());

        let n = NoiseModel::from_one_qubit_depolarizing(0.97).unwrap();
        assert_abs_diff_eq!(n.probability(Pauli::I, Pauli::I), 0.9409, epsilon = 1e-15);
        for j in 1..4 {
            let p = Pauli::from_index(j);
            assert_abs_diff_eq!(n.probability(Pauli::I, p), 0.0097, epsilon = 1e-15);
            assert_abs_diff_eq!(n.probability(p, Pauli::I), 0.0097, epsilon = 1e-15);
            for k in 1..4 {
                assert_abs_diff_eq!(n.probability(p, Pauli::from_index(k)), 0.0001, epsilon = 1e-15);
            }
        }

        let n = NoiseModel::from_one_qubit_depolarizing(0.0).unwrap();
        assert_eq!(n.fidelity(), 0.0);
        assert_abs_diff_eq!(n.probability(Pauli::X, Pauli::Z), 1.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn uniform_residual_values() {
        assert_eq!(NoiseModel::from_uniform_residual(1.0).unwrap(), NoiseModel::identity());
        let n = NoiseModel::from_uniform_residual(0.97).unwrap();
        for k in 1..16 {
            assert_abs_diff_eq!(n.probabilities()[k], 0.002, epsilon = 1e-15);
        }
        let n = NoiseModel::from_uniform_residual(1.0 / 16.0).unwrap();
        for k in 0..16 {
            assert_abs_diff_eq!(n.probabilities()[k], 1.0 / 16.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn out_of_range_parameters_rejected() {
        for bad in [-0.1, 1.5, f64::NAN] {
            assert!(NoiseModel::from_one_qubit_depolarizing(bad).is_err());
            assert!(NoiseModel::from_one_sided_depolarizing(bad).is_err());
            assert!(NoiseModel::from_uniform_residual(bad).is_err());
        }
        let mut f = [0.0; 16];
        f[0] = 0.5;
        assert!(NoiseModel::explicit(f).is_err());
        f[1] = -0.1;
        f[2] = 0.6;
        assert!(NoiseModel::explicit(f).is_err());
    }

    #[test]
    fn shift_distribution() {
        assert_eq!(NoiseModel::identity().label_shift_distribution(), [1.0, 0.0, 0.0, 0.0]);

        // Enumerate the 16 terms by hand: identity shift comes from (0,0) and
        // the three (j,j) pairs.
        let n = NoiseModel::from_one_qubit_depolarizing(0.97).unwrap();
        let d = n.label_shift_distribution();
        assert_abs_diff_eq!(d[0], 0.9409 + 3.0 * 0.0001, epsilon = 1e-15);
        assert_abs_diff_eq!(d.iter().sum::<f64>(), 1.0, epsilon = 1e-15);

        let n = NoiseModel::from_uniform_residual(1.0 / 16.0).unwrap();
        for p in n.label_shift_distribution() {
            assert_abs_diff_eq!(p, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn identity_channel_always_samples_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = NoiseModel::identity().sampler();
        for _ in 0..1000 {
            assert_eq!(s.sample(&mut rng), (Pauli::I, Pauli::I));
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let n = NoiseModel::fig1();
        let s = n.sampler();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..100).map(|_| s.sample(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(3), draw(3));
        assert_ne!(draw(3), draw(4));
    }

    #[test]
    fn empirical_frequencies_within_five_sigma() {
        let n = NoiseModel::from_one_qubit_depolarizing(0.7).unwrap();
        let s = n.sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 1_000_000usize;
        let mut counts = [0usize; 16];
        for _ in 0..draws {
            let (mu, nu) = s.sample(&mut rng);
            counts[4 * mu.index() + nu.index()] += 1;
        }
        for (k, &p) in n.probabilities().iter().enumerate() {
            let sigma = (p * (1.0 - p) / draws as f64).sqrt();
            let freq = counts[k] as f64 / draws as f64;
            assert!((freq - p).abs() < 5.0 * sigma, "outcome {k}: {freq} vs {p}");
        }
    }

    #[test]
    fn spec_roundtrip() {
        let json = r#"{"family":"uniform","f00":0.97}"#;
        let spec: NoiseSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.build().unwrap(), NoiseModel::fig1());
        assert_eq!(serde_json::to_string(&spec).unwrap(), json);

        let spec: NoiseSpec =
            serde_json::from_str(r#"{"family":"explicit","f":[1,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0]}"#).unwrap();
        assert_eq!(spec.build().unwrap(), NoiseModel::identity());

        let spec: NoiseSpec = serde_json::from_str(r#"{"family":"explicit","f":[1,0]}"#).unwrap();
        assert!(spec.build().is_err());
        assert!(serde_json::from_str::<NoiseSpec>(r#"{"family":"product","f0":0.9,"extra":1}"#).is_err());
    }
}
