//! Experiment configuration documents and named presets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::lab_demon::FlagMode;
use crate::monte_carlo::DEFAULT_CHUNKS;
use crate::noise_model::{NoiseFamily, NoiseModel, NoiseSpec, Placement};
use crate::recurrence::{werner_bell, RegimeTolerances, ScanSettings, StopRule, SubensembleState};

/// Bell-label distribution of the input pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// Werner state of the given fidelity.
    Werner { fidelity: f64 },
    /// Explicit probabilities of B00, B01, B10, B11.
    Bell { probabilities: [f64; 4] },
}

impl InitialSpec {
    pub fn bell(&self) -> Result<[f64; 4]> {
        match self {
            InitialSpec::Werner { fidelity } => Ok(werner_bell(check_probability("initial fidelity", *fidelity)?)),
            InitialSpec::Bell { probabilities } => Ok(*probabilities),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: OutputFormat,
    /// Omit wall-clock fields so repeated runs produce identical bytes.
    pub deterministic: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
            deterministic: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub family: NoiseFamily,
    pub range: [f64; 2],
    pub bisect_tol: f64,
    /// Evenly spaced points for the regime-vs-parameter table; 0 skips it.
    pub grid_points: usize,
    /// Werner fidelities for the threshold sensitivity grid; empty skips it.
    pub werner_grid: Vec<f64>,
    pub tolerances: RegimeTolerances,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            family: NoiseFamily::OneSided,
            range: [0.88, 0.92],
            bisect_tol: 1e-5,
            grid_points: 41,
            werner_grid: vec![0.75, 0.85, 0.95],
            tolerances: RegimeTolerances::default(),
        }
    }
}

impl ScanConfig {
    pub fn grid(&self) -> Vec<f64> {
        let [lo, hi] = self.range;
        match self.grid_points {
            0 => vec![],
            1 => vec![lo],
            n => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Name of the preset this config started from, if any.
    pub preset: Option<String>,
    pub noise: NoiseSpec,
    pub initial: InitialSpec,
    pub flags: FlagMode,
    pub placement: Placement,
    /// Rounds to run (engine and Monte Carlo).
    pub rounds: usize,
    /// Stop the engine early once the state moves less than this; negative disables.
    pub fixpoint_tol: f64,
    /// Monte Carlo population size.
    pub pairs: usize,
    pub seed: u64,
    /// Monte Carlo RNG chunk count; results depend on it, thread count does not.
    pub chunks: usize,
    pub scan: ScanConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            preset: None,
            noise: NoiseSpec::Uniform { f00: 0.97 },
            initial: InitialSpec::Werner { fidelity: 0.85 },
            flags: FlagMode::Fixed,
            placement: Placement::BeforeRotation,
            rounds: 10,
            fixpoint_tol: -1.0,
            pairs: 10_000_000,
            seed: 1,
            chunks: DEFAULT_CHUNKS,
            scan: ScanConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

pub const PRESETS: [&str; 3] = ["fig1", "noiseless", "threshold"];

impl ExperimentConfig {
    /// Named starting points:
    ///
    /// - `fig1`: uniform residual noise 0.97, Werner 0.85, fixed flags, seed 1,
    ///   10⁷ pairs, 10 rounds;
    /// - `noiseless`: perfect operations on Werner 0.7, 30 rounds;
    /// - `threshold`: one-sided depolarizing scan over [0.88, 0.92].
    pub fn preset(name: &str) -> Result<Self> {
        let base = ExperimentConfig {
            preset: Some(name.to_string()),
            ..ExperimentConfig::default()
        };
        match name {
            "fig1" => Ok(base),
            "noiseless" => Ok(ExperimentConfig {
                noise: NoiseSpec::Uniform { f00: 1.0 },
                initial: InitialSpec::Werner { fidelity: 0.7 },
                rounds: 30,
                pairs: 1_000_000,
                ..base
            }),
            "threshold" => Ok(ExperimentConfig {
                noise: NoiseSpec::OneSided { f0: 0.8985 },
                rounds: 5000,
                fixpoint_tol: 1e-12,
                ..base
            }),
            _ => Err(Error::Config(format!(
                "unknown preset {name:?}; available: {}",
                PRESETS.join(", ")
            ))),
        }
    }

    /// Parses a JSON document; errors carry the line and column.
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("{origin}:{}:{}: {}", e.line(), e.column(), strip_position(&e))))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let config_err = |e: Error| Error::Config(e.to_string());
        self.noise_model().map_err(config_err)?;
        self.initial
            .bell()
            .and_then(|b| SubensembleState::from_bell(b, self.flags))
            .map_err(config_err)?;
        if self.pairs < 2 {
            return Err(Error::Config(format!(
                "pairs = {} but at least 2 are needed",
                self.pairs
            )));
        }
        if self.chunks == 0 {
            return Err(Error::Config("chunks must be positive".into()));
        }
        let [lo, hi] = self.scan.range;
        if !(lo < hi) || lo < 0.0 || hi > 1.0 {
            return Err(Error::Config(format!(
                "scan range [{lo}, {hi}] must satisfy 0 <= lo < hi <= 1"
            )));
        }
        if !(self.scan.bisect_tol > 0.0) {
            return Err(Error::Config("scan.bisect_tol must be positive".into()));
        }
        for &f in &self.scan.werner_grid {
            check_probability("werner grid fidelity", f).map_err(config_err)?;
        }
        Ok(())
    }

    pub fn noise_model(&self) -> Result<NoiseModel> {
        self.noise.build()
    }

    pub fn initial_state(&self) -> Result<SubensembleState> {
        SubensembleState::from_bell(self.initial.bell()?, self.flags)
    }

    pub fn stop_rule(&self) -> StopRule {
        StopRule {
            max_rounds: self.rounds,
            fixpoint_tol: self.fixpoint_tol,
        }
    }

    pub fn scan_settings(&self) -> ScanSettings {
        ScanSettings {
            range: self.scan.range,
            bisect_tol: self.scan.bisect_tol,
            placement: self.placement,
            tolerances: self.scan.tolerances,
        }
    }
}

fn strip_position(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(i) => s[..i].to_string(),
        None => s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig1_preset_values() {
        let c = ExperimentConfig::preset("fig1").unwrap();
        assert_eq!(c.noise, NoiseSpec::Uniform { f00: 0.97 });
        assert_eq!(c.initial, InitialSpec::Werner { fidelity: 0.85 });
        assert_eq!(
            (c.seed, c.pairs, c.rounds, c.flags),
            (1, 10_000_000, 10, FlagMode::Fixed)
        );
        c.validate().unwrap();
    }

    #[test]
    fn all_presets_validate() {
        for p in PRESETS {
            ExperimentConfig::preset(p).unwrap().validate().unwrap();
        }
        assert!(ExperimentConfig::preset("fig3").is_err());
    }

    #[test]
    fn effective_config_round_trips() {
        let c = ExperimentConfig::preset("threshold").unwrap();
        assert_eq!(ExperimentConfig::from_json(&c.to_json(), "x").unwrap(), c);
    }

    #[test]
    fn partial_document_takes_defaults() {
        let c = ExperimentConfig::from_json(r#"{"seed": 7, "noise": {"family": "product", "f0": 0.99}}"#, "x").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.rounds, ExperimentConfig::default().rounds);
    }

    #[test]
    fn unknown_key_is_line_anchored() {
        let text = "{\n  \"seed\": 3,\n  \"sede\": 4\n}";
        let err = ExperimentConfig::from_json(text, "cfg.json").unwrap_err().to_string();
        assert!(err.contains("cfg.json:3:"), "{err}");
        assert!(err.contains("unknown field `sede`"), "{err}");
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for text in [
            r#"{"noise": {"family": "product", "f0": 1.2}}"#,
            r#"{"initial": {"kind": "bell", "probabilities": [0.5, 0.5, 0.5, 0.0]}}"#,
            r#"{"pairs": 1}"#,
            r#"{"scan": {"range": [0.9, 0.8]}}"#,
        ] {
            assert!(
                matches!(ExperimentConfig::from_json(text, "x"), Err(Error::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn scan_grid_spacing() {
        let s = ScanConfig {
            range: [0.0, 1.0],
            grid_points: 5,
            ..ScanConfig::default()
        };
        assert_eq!(s.grid(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
