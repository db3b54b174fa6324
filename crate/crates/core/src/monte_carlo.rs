//! Finite ensembles of flagged Bell pairs pushed through sampled noisy rounds.
//!
//! The population is a flat array of one-byte records. Noise is sampled in
//! fixed-size chunks, each with its own ChaCha stream derived from
//! `(seed, purpose, round, chunk)`; the per-round shuffle is sequential. A
//! fixed `(seed, chunk count)` therefore gives bit-identical runs regardless
//! of the number of worker threads.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::bell_algebra::{bcnot_map, measurement_coincides, rotate_shift, rotation_step3, BellLabel};
use crate::error::{check_distribution, Error, Result};
use crate::lab_demon::{flag_update, ErrorFlag, FlagMode};
use crate::noise_model::{NoiseModel, Placement};
use crate::recurrence::SubensembleState;

/// Default number of RNG chunks.
pub const DEFAULT_CHUNKS: usize = 64;

/// A pair's Bell label and error flag packed as `4·flag + bell`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct PairRecord(u8);

impl PairRecord {
    pub const fn new(bell: BellLabel, flag: ErrorFlag) -> Self {
        PairRecord((flag.index() * 4 + bell.index()) as u8)
    }

    pub const fn bell(self) -> BellLabel {
        BellLabel::from_index((self.0 & 3) as usize)
    }

    pub const fn flag(self) -> ErrorFlag {
        ErrorFlag::from_index((self.0 >> 2) as usize)
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy)]
#[repr(u64)]
enum Stream {
    Init = 1,
    Noise = 2,
    Shuffle = 3,
    Sacrifice = 4,
}

fn stream_rng(seed: u64, purpose: Stream, round: usize, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 60) | ((round as u64 & 0x0fff_ffff) << 32) | chunk as u64);
    rng
}

#[derive(Clone, Debug)]
pub struct Ensemble {
    pairs: Vec<PairRecord>,
    seed: u64,
    chunks: usize,
    round: usize,
    /// Separate counter so repeated fidelity checks draw fresh streams.
    checks: usize,
}

/// Samples `n` i.i.d. pairs with Bell labels drawn from `bell` (index order
/// B00, B01, B10, B11).
pub fn init_ensemble(bell: [f64; 4], n: usize, flags: FlagMode, seed: u64, chunks: usize) -> Result<Ensemble> {
    check_distribution(&bell, 1e-12)?;
    if n < 2 {
        return Err(Error::Config(format!("an ensemble needs at least 2 pairs, got {n}")));
    }
    if chunks == 0 {
        return Err(Error::Config("chunk count must be positive".into()));
    }
    let labels = WeightedIndex::new(bell).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let mut pairs = vec![PairRecord(0); n];
    let chunk_len = n.div_ceil(chunks);
    pairs.par_chunks_mut(chunk_len).enumerate().for_each(|(k, chunk)| {
        let mut rng = stream_rng(seed, Stream::Init, 0, k);
        for rec in chunk.iter_mut() {
            let bell = BellLabel::from_index(labels.sample(&mut rng));
            let flag = match flags {
                FlagMode::Fixed => ErrorFlag::CLEAN,
                FlagMode::Random => ErrorFlag::from_index(rng.random_range(0..4usize)),
            };
            *rec = PairRecord::new(bell, flag);
        }
    });
    Ok(Ensemble {
        pairs,
        seed,
        chunks,
        round: 0,
        checks: 0,
    })
}

/// Statistics of the population after a round (or of the input, round 0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundStats {
    pub round: usize,
    pub pairs_in: usize,
    pub survivors: usize,
    /// `survivors / floor(pairs_in / 2)`; 1 for the input row.
    pub keep_fraction: f64,
    pub fidelity: f64,
    pub conditional_fidelity: f64,
    /// Binomial standard error of `fidelity`.
    pub sample_stddev_f: f64,
    /// Empirical `(flag, bell)` frequencies at `4·flag + bell`.
    pub joint: [f64; 16],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTrajectory {
    pub rows: Vec<RoundStats>,
    /// Set when the ensemble ran out of pairs before the requested rounds.
    pub halted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityCheck {
    pub passed: bool,
    pub estimate: f64,
    /// Clopper–Pearson interval at the requested confidence.
    pub interval: [f64; 2],
    pub sacrificed: usize,
    pub remaining: usize,
}

/// Exact binomial (Clopper–Pearson) interval for `successes` out of `trials`.
pub fn clopper_pearson(successes: usize, trials: usize, confidence: f64) -> [f64; 2] {
    let alpha = 1.0 - confidence;
    let (x, n) = (successes as f64, trials as f64);
    let lower = if successes == 0 {
        0.0
    } else {
        Beta::new(x, n - x + 1.0)
            .expect("positive shapes")
            .inverse_cdf(alpha / 2.0)
    };
    let upper = if successes == trials {
        1.0
    } else {
        Beta::new(x + 1.0, n - x)
            .expect("positive shapes")
            .inverse_cdf(1.0 - alpha / 2.0)
    };
    [lower, upper]
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[PairRecord] {
        &self.pairs
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn chunks(&self) -> usize {
        self.chunks
    }

    /// Builds an ensemble from explicit records.
    pub fn from_pairs(pairs: Vec<PairRecord>, seed: u64, chunks: usize) -> Self {
        Ensemble {
            pairs,
            seed,
            chunks: chunks.max(1),
            round: 0,
            checks: 0,
        }
    }

    pub fn counts(&self) -> [usize; 16] {
        let mut c = [0usize; 16];
        for p in &self.pairs {
            c[p.index()] += 1;
        }
        c
    }

    /// Empirical `(flag, bell)` frequencies; all zero for an empty ensemble.
    pub fn joint_distribution(&self) -> [f64; 16] {
        let n = self.pairs.len();
        if n == 0 {
            return [0.0; 16];
        }
        self.counts().map(|c| c as f64 / n as f64)
    }

    pub fn to_state(&self) -> Result<SubensembleState> {
        SubensembleState::from_weights(self.counts().map(|c| c as f64))
    }

    fn stats(&self, pairs_in: usize) -> RoundStats {
        let joint = self.joint_distribution();
        let n = self.pairs.len();
        let fidelity = if n == 0 {
            f64::NAN
        } else {
            ErrorFlag::ALL.iter().map(|f| joint[4 * f.index()]).sum()
        };
        let conditional_fidelity = if n == 0 {
            f64::NAN
        } else {
            ErrorFlag::ALL.iter().map(|f| joint[5 * f.index()]).sum()
        };
        let pairings = pairs_in / 2;
        RoundStats {
            round: self.round,
            pairs_in,
            survivors: n,
            keep_fraction: if self.round == 0 {
                1.0
            } else if pairings == 0 {
                f64::NAN
            } else {
                n as f64 / pairings as f64
            },
            fidelity,
            conditional_fidelity,
            sample_stddev_f: (fidelity * (1.0 - fidelity) / n as f64).sqrt(),
            joint,
        }
    }

    /// Statistics of the current population as a round-0 row.
    pub fn initial_stats(&self) -> RoundStats {
        self.stats(self.pairs.len())
    }

    fn chunk_len(&self) -> usize {
        self.pairs.len().div_ceil(self.chunks).max(1)
    }

    /// Sacrifices a uniformly random fraction of the pairs to estimate the
    /// fidelity; passes iff the lower 99 % Clopper–Pearson bound exceeds `f_min`.
    pub fn check_minimum_fidelity(&mut self, sacrifice_fraction: f64, f_min: f64) -> Result<FidelityCheck> {
        if !(sacrifice_fraction > 0.0 && sacrifice_fraction < 1.0) {
            return Err(Error::Config(format!(
                "sacrifice fraction {sacrifice_fraction} must lie in (0, 1)"
            )));
        }
        let k = (sacrifice_fraction * self.pairs.len() as f64).round() as usize;
        if k == 0 {
            return Err(Error::Config("sacrifice set is empty".into()));
        }
        let mut rng = stream_rng(self.seed, Stream::Sacrifice, self.round, self.checks);
        self.checks += 1;
        self.pairs.shuffle(&mut rng);
        let removed = self.pairs.split_off(self.pairs.len() - k);
        let hits = removed.iter().filter(|p| p.bell() == BellLabel::PHI_PLUS).count();
        let interval = clopper_pearson(hits, k, 0.99);
        Ok(FidelityCheck {
            passed: interval[0] > f_min,
            estimate: hits as f64 / k as f64,
            interval,
            sacrificed: k,
            remaining: self.pairs.len(),
        })
    }

    /// One purification round on the whole population.
    pub fn run_round(&mut self, noise: &NoiseModel, placement: Placement) -> Result<RoundStats> {
        let pairs_in = self.pairs.len();
        if pairs_in < 2 {
            return Err(Error::Halt { pairs: pairs_in });
        }
        let round = self.round + 1;
        let seed = self.seed;
        let sampler = noise.sampler();
        let chunk_len = self.chunk_len();

        // Noise (recorded on the flag) and the bilateral rotation.
        self.pairs.par_chunks_mut(chunk_len).enumerate().for_each(|(k, chunk)| {
            let mut rng = stream_rng(seed, Stream::Noise, round, k);
            for rec in chunk.iter_mut() {
                let s = sampler.sample_shift(&mut rng);
                let (flag, bell) = match placement {
                    Placement::BeforeRotation => (rec.flag().shifted(s), rotation_step3(rec.bell().shifted(s))),
                    Placement::BeforeBcnot => (
                        rec.flag().shifted(rotate_shift(s)),
                        rotation_step3(rec.bell()).shifted(s),
                    ),
                };
                *rec = PairRecord::new(bell, flag);
            }
        });

        // Random renumbering, then adjacent records form (control, target).
        let mut rng = stream_rng(seed, Stream::Shuffle, round, 0);
        self.pairs.shuffle(&mut rng);

        self.pairs = self
            .pairs
            .par_chunks_exact(2)
            .filter_map(|pair| {
                let (control, target) = (pair[0], pair[1]);
                let (source_out, target_out) = bcnot_map(control.bell(), target.bell());
                measurement_coincides(target_out)
                    .then(|| PairRecord::new(source_out, flag_update(control.flag(), target.flag())))
            })
            .collect();
        self.round = round;
        Ok(self.stats(pairs_in))
    }

    /// Runs up to `rounds` rounds, stopping early when fewer than two pairs remain.
    pub fn run_protocol(&mut self, noise: &NoiseModel, placement: Placement, rounds: usize) -> EmpiricalTrajectory {
        let mut rows = vec![self.initial_stats()];
        let mut halted = false;
        for _ in 0..rounds {
            match self.run_round(noise, placement) {
                Ok(stats) => rows.push(stats),
                Err(_) => {
                    halted = true;
                    break;
                }
            }
        }
        EmpiricalTrajectory { rows, halted }
    }
}
