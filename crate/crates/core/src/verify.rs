//! Conformance checks of the label tables and the exact round map against
//! the dense reference.

use std::fmt;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bell_algebra::{apply_two_sided_pauli, bcnot_map, rotation_step3, BellLabel, Pauli};
use crate::dense_oracle::{build_protocol_unitaries, derive_label_maps, is_unitary, oracle_one_round, DerivedTables};
use crate::error::Result;
use crate::lab_demon::{flag_update, ErrorFlag};
use crate::noise_model::{NoiseModel, Placement};
use crate::recurrence::{one_round, SubensembleState};

/// The flag update table as printed text: rows are the control flag
/// (00),(01),(10),(11), columns the target flag in the same order.
pub const REFERENCE_FLAG_ROWS: [&str; 4] = ["00 00 00 10", "00 01 11 00", "00 11 01 00", "10 00 00 00"];

/// Number of random (state, noise) instances compared against the oracle.
pub const ROUND_INSTANCES: usize = 20;

/// Componentwise tolerance for engine-vs-oracle rounds.
pub const ROUND_TOL: f64 = 1e-10;

/// Label tables under test. [`ProtocolTables::shipped`] reads them from the
/// library; fixtures can load altered copies from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolTables {
    /// Image of B00, B01, B10, B11 under the bilateral rotation.
    pub rotation: [BellLabel; 4],
    /// `bcnot[source][target] = (source out, target out)`.
    pub bcnot: [[(BellLabel, BellLabel); 4]; 4],
    /// `two_sided[label][4·μ + ν]`.
    pub two_sided: [[BellLabel; 16]; 4],
    /// `flag_update[control][target]`.
    pub flag_update: [[ErrorFlag; 4]; 4],
}

impl ProtocolTables {
    pub fn shipped() -> Self {
        let rotation = BellLabel::ALL.map(rotation_step3);
        let bcnot = BellLabel::ALL.map(|s| BellLabel::ALL.map(|t| bcnot_map(s, t)));
        let two_sided = BellLabel::ALL.map(|b| {
            std::array::from_fn(|k| apply_two_sided_pauli(b, Pauli::from_index(k / 4), Pauli::from_index(k % 4)))
        });
        let flag_update = ErrorFlag::ALL.map(|c| ErrorFlag::ALL.map(|t| flag_update(c, t)));
        ProtocolTables {
            rotation,
            bcnot,
            two_sided,
            flag_update,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// One line per offending entry; empty when the check passed.
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name)?;
            for line in &c.failures {
                writeln!(f, "    {line}")?;
            }
        }
        Ok(())
    }
}

fn result(name: &str, failures: Vec<String>) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: failures.is_empty(),
        failures,
    }
}

fn flag_name(i: usize) -> String {
    String::from(ErrorFlag::from_index(i))
}

pub fn check_unitaries() -> CheckResult {
    let u = build_protocol_unitaries();
    let mut failures = Vec::new();
    for (name, m) in [
        ("rotation", &u.rotation),
        ("two-pair rotation", &u.rotation_two_pair),
        ("BCNOT", &u.bcnot),
    ] {
        if !is_unitary(m, 1e-12) {
            failures.push(format!("{name} is not unitary"));
        }
    }
    result("unitarity", failures)
}

/// Supplied flag table against [`REFERENCE_FLAG_ROWS`].
pub fn check_flag_table_text(tables: &ProtocolTables) -> CheckResult {
    let mut failures = Vec::new();
    for (r, row) in REFERENCE_FLAG_ROWS.iter().enumerate() {
        for (col, entry) in row.split_whitespace().enumerate() {
            let got = String::from(tables.flag_update[r][col]);
            if got != entry {
                failures.push(format!(
                    "row {r} (control {}), column {col} (target {}): table has ({got}), expected ({entry})",
                    flag_name(r),
                    flag_name(col)
                ));
            }
        }
    }
    result("flag table conformance", failures)
}

/// Supplied flag table against the derivation from the dense reference.
pub fn check_flag_table_derived(tables: &ProtocolTables, derived: &DerivedTables) -> CheckResult {
    let mut failures = Vec::new();
    for r in 0..4 {
        for col in 0..4 {
            let (got, want) = (tables.flag_update[r][col], derived.flag_update[r][col]);
            if got != want {
                failures.push(format!(
                    "row {r}, column {col}: table has {got}, derivation gives {want}"
                ));
            }
        }
    }
    result("flag table derivation", failures)
}

pub fn check_rotation(tables: &ProtocolTables, derived: &DerivedTables) -> CheckResult {
    let failures = BellLabel::ALL
        .iter()
        .filter(|b| tables.rotation[b.index()] != derived.rotation[b.index()])
        .map(|b| {
            format!(
                "rotation of {b}: table has {}, oracle gives {}",
                tables.rotation[b.index()],
                derived.rotation[b.index()]
            )
        })
        .collect();
    result("rotation map", failures)
}

/// The BCNOT label map must permute the 16 label pairs.
pub fn check_bcnot_bijection(tables: &ProtocolTables) -> CheckResult {
    let mut seen: [Option<(BellLabel, BellLabel)>; 16] = [None; 16];
    let mut failures = Vec::new();
    for s in BellLabel::ALL {
        for t in BellLabel::ALL {
            let (so, to) = tables.bcnot[s.index()][t.index()];
            let slot = &mut seen[4 * so.index() + to.index()];
            match slot {
                Some((ps, pt)) => {
                    failures.push(format!("BCNOT sends both ({ps}, {pt}) and ({s}, {t}) to ({so}, {to})"))
                }
                None => *slot = Some((s, t)),
            }
        }
    }
    result("BCNOT bijection", failures)
}

pub fn check_bcnot(tables: &ProtocolTables, derived: &DerivedTables) -> CheckResult {
    let mut failures = Vec::new();
    for s in BellLabel::ALL {
        for t in BellLabel::ALL {
            let (got, want) = (tables.bcnot[s.index()][t.index()], derived.bcnot[s.index()][t.index()]);
            if got != want {
                failures.push(format!(
                    "BCNOT of ({s}, {t}): table has ({}, {}), oracle gives ({}, {})",
                    got.0, got.1, want.0, want.1
                ));
            }
        }
    }
    result("BCNOT map", failures)
}

pub fn check_two_sided(tables: &ProtocolTables, derived: &DerivedTables) -> CheckResult {
    let mut failures = Vec::new();
    for b in BellLabel::ALL {
        for k in 0..16 {
            let (got, want) = (tables.two_sided[b.index()][k], derived.two_sided[b.index()][k]);
            if got != want {
                failures.push(format!(
                    "{:?}⊗{:?} on {b}: table has {got}, oracle gives {want}",
                    Pauli::from_index(k / 4),
                    Pauli::from_index(k % 4)
                ));
            }
        }
    }
    result("two-sided Pauli map", failures)
}

/// A random noise model with a dominant identity component.
pub fn random_noise(rng: &mut ChaCha8Rng) -> NoiseModel {
    let mut f: [f64; 16] = std::array::from_fn(|_| rng.random::<f64>());
    f[0] += 4.0 * rng.random::<f64>();
    let total: f64 = f.iter().sum();
    NoiseModel::explicit(f.map(|x| x / total)).expect("normalized weights")
}

pub fn random_state(rng: &mut ChaCha8Rng) -> SubensembleState {
    SubensembleState::from_weights(std::array::from_fn(|_| rng.random::<f64>())).expect("positive weights")
}

/// Largest componentwise gap between the exact round map and the dense
/// reference over `instances` random (state, noise, placement) triples.
pub fn round_equivalence(instances: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..instances)
        .map(|i| {
            let state = random_state(&mut rng);
            let noise = random_noise(&mut rng);
            let placement = if i % 2 == 0 {
                Placement::BeforeRotation
            } else {
                Placement::BeforeBcnot
            };
            let (engine, keep) = one_round(&state, &noise, placement)?;
            let oracle = oracle_one_round(&state, &noise, placement)?;
            Ok(engine
                .max_abs_diff(&oracle.state)
                .max((keep - oracle.keep_probability).abs()))
        })
        .collect()
}

pub fn check_round_equivalence() -> CheckResult {
    let failures = match round_equivalence(ROUND_INSTANCES, 0x5eed) {
        Ok(gaps) => gaps
            .iter()
            .enumerate()
            .filter(|(_, g)| !(**g <= ROUND_TOL))
            .map(|(i, g)| format!("instance {i}: engine and oracle differ by {g:e}"))
            .collect(),
        Err(e) => vec![e.to_string()],
    };
    result("round map vs oracle", failures)
}

/// Runs every check on the supplied tables. The round-map comparison always
/// exercises the library's own engine.
pub fn run_verification(tables: &ProtocolTables) -> VerifyReport {
    let mut checks = vec![check_unitaries()];
    match derive_label_maps() {
        Ok(derived) => {
            checks.push(check_rotation(tables, &derived));
            checks.push(check_bcnot_bijection(tables));
            checks.push(check_bcnot(tables, &derived));
            checks.push(check_two_sided(tables, &derived));
            checks.push(check_flag_table_text(tables));
            checks.push(check_flag_table_derived(tables, &derived));
        }
        Err(e) => checks.push(result("oracle derivation", vec![e.to_string()])),
    }
    checks.push(check_round_equivalence());
    VerifyReport { checks }
}
