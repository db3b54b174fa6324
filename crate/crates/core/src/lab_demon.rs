//! Classical error-flag bookkeeping of the lab demon.
//!
//! Each pair carries a flag `(error phase bit, error amplitude bit)`. Pauli
//! errors flip flag bits exactly as they flip Bell-label bits, and on every
//! accepted round the kept pair's flag is replaced by a fixed function of the
//! control and target flags.

use std::fmt;

use crate::bell_algebra::{pauli_shift, two_sided_shift, Pauli, Shift};

/// Two classical bits attached to every pair.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ErrorFlag(u8);

impl ErrorFlag {
    pub const CLEAN: ErrorFlag = ErrorFlag(0);
    pub const ALL: [ErrorFlag; 4] = [ErrorFlag(0), ErrorFlag(1), ErrorFlag(2), ErrorFlag(3)];

    pub const fn new(phase: u8, amplitude: u8) -> Self {
        ErrorFlag(((phase & 1) << 1) | (amplitude & 1))
    }

    pub const fn from_index(index: usize) -> Self {
        ErrorFlag((index & 3) as u8)
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

    pub const fn shifted(self, s: Shift) -> ErrorFlag {
        ErrorFlag(self.0 ^ s.index() as u8)
    }
}

impl fmt::Debug for ErrorFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}{})", self.phase(), self.amplitude())
    }
}

impl fmt::Display for ErrorFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}{})", self.phase(), self.amplitude())
    }
}

impl From<ErrorFlag> for String {
    fn from(f: ErrorFlag) -> String {
        format!("{}{}", f.phase(), f.amplitude())
    }
}

/// Parses `"pa"` or `"(pa)"` with bits `p`, `a` ∈ {0, 1}.
impl TryFrom<String> for ErrorFlag {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        let bits = s.trim().trim_start_matches('(').trim_end_matches(')');
        match bits.as_bytes() {
            [p @ (b'0' | b'1'), a @ (b'0' | b'1')] => Ok(ErrorFlag::new(p - b'0', a - b'0')),
            _ => Err(format!("invalid error flag {s:?}")),
        }
    }
}

pub const fn record_error(flag: ErrorFlag, mu: Pauli) -> ErrorFlag {
    flag.shifted(pauli_shift(mu))
}

/// Records σ_mu on Alice's side and σ_nu on Bob's side on the pair's single flag.
pub const fn record_two_sided(flag: ErrorFlag, mu: Pauli, nu: Pauli) -> ErrorFlag {
    flag.shifted(two_sided_shift(mu, nu))
}

const F00: ErrorFlag = ErrorFlag::new(0, 0);
const F01: ErrorFlag = ErrorFlag::new(0, 1);
const F10: ErrorFlag = ErrorFlag::new(1, 0);
const F11: ErrorFlag = ErrorFlag::new(1, 1);

/// Updated flag of a kept pair, indexed `[control flag][target flag]`.
///
/// The table is symmetric, so the row/column convention does not matter.
pub const FLAG_UPDATE_TABLE: [[ErrorFlag; 4]; 4] = [
    [F00, F00, F00, F10],
    [F00, F01, F11, F00],
    [F00, F11, F01, F00],
    [F10, F00, F00, F00],
];

/// New flag of the kept control pair given the (pre-rotation) flags of the
/// control `flag1` and the measured target `flag2`.
pub const fn flag_update(flag1: ErrorFlag, flag2: ErrorFlag) -> ErrorFlag {
    FLAG_UPDATE_TABLE[flag1.index()][flag2.index()]
}

/// How flags are assigned before the first round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagMode {
    /// Every pair starts with flag (00).
    #[default]
    Fixed,
    /// Flags drawn uniformly and independently of the Bell label.
    Random,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u8, a: u8) -> ErrorFlag {
        ErrorFlag::new(p, a)
    }

    #[test]
    fn record_error_examples() {
        assert_eq!(record_error(f(0, 0), Pauli::X), f(0, 1));
        assert_eq!(record_error(f(1, 1), Pauli::Y), f(0, 0));
        assert_eq!(record_error(f(0, 1), Pauli::I), f(0, 1));
        assert_eq!(record_error(f(0, 0), Pauli::Z), f(1, 0));
    }

    #[test]
    fn record_two_sided_examples() {
        assert_eq!(record_two_sided(f(0, 0), Pauli::X, Pauli::X), f(0, 0));
        assert_eq!(record_two_sided(f(0, 0), Pauli::Z, Pauli::I), f(1, 0));
        assert_eq!(record_two_sided(f(0, 1), Pauli::Y, Pauli::Z), f(0, 0));
    }

    #[test]
    fn flag_update_examples() {
        assert_eq!(flag_update(f(0, 0), f(1, 1)), f(1, 0));
        assert_eq!(flag_update(f(1, 0), f(0, 1)), f(1, 1));
        assert_eq!(flag_update(f(1, 1), f(1, 1)), f(0, 0));
        assert_eq!(flag_update(f(0, 0), f(0, 0)), f(0, 0));
    }

    #[test]
    fn full_table_verbatim() {
        // rows: control flag (00),(01),(10),(11); columns: target flag in the same order
        let rows = [
            ["00", "00", "00", "10"],
            ["00", "01", "11", "00"],
            ["00", "11", "01", "00"],
            ["10", "00", "00", "00"],
        ];
        for (r, row) in rows.iter().enumerate() {
            for (c, entry) in row.iter().enumerate() {
                let got = flag_update(ErrorFlag::from_index(r), ErrorFlag::from_index(c));
                assert_eq!(format!("{}{}", got.phase(), got.amplitude()), *entry, "row {r} col {c}");
            }
        }
    }

    #[test]
    fn table_is_symmetric() {
        for a in ErrorFlag::ALL {
            for b in ErrorFlag::ALL {
                assert_eq!(flag_update(a, b), flag_update(b, a));
            }
        }
    }

    #[test]
    fn record_error_is_a_group_action() {
        for flag in ErrorFlag::ALL {
            for p in Pauli::ALL {
                assert_eq!(record_error(record_error(flag, p), p), flag);
                for q in Pauli::ALL {
                    assert_eq!(
                        record_error(record_error(flag, p), q),
                        record_error(record_error(flag, q), p)
                    );
                }
            }
        }
    }
}
