use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::ConfigError;
use crate::solver::{Grid, SchemeConfig};
use crate::thermo::{EosVariant, ThermoModel};
use crate::weak_strong::ClassicalSolution;
use crate::young::{EnsembleSpec, InitialData, Perturbation, DEFAULT_MERGE_TOLERANCE};

type Result<T> = std::result::Result<T, ConfigError>;

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level run configuration, read from TOML.
///
/// Every section is optional and falls back to the documented defaults;
/// unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub thermo: ThermoSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default = "InitialData::sod")]
    pub problem: InitialData,
    #[serde(default)]
    pub study: StudySection,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            output_dir: default_output_dir(),
            thermo: ThermoSection::default(),
            grid: GridSection::default(),
            scheme: SchemeConfig::default(),
            ensemble: EnsembleSection::default(),
            problem: InitialData::sod(),
            study: StudySection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermoSection {
    pub c_v: f64,
    pub variant: EosVariant,
}

impl Default for ThermoSection {
    fn default() -> Self {
        Self { c_v: 1.5, variant: EosVariant::PerfectGas }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { dim: 1, n: 200, length: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub resolutions: Vec<usize>,
    /// Spatial blocks per axis; `0` means one block per cell.
    pub x_blocks: usize,
    pub t_blocks: usize,
    pub snapshots_per_block: usize,
    /// Amplitude of the seeded multiplicative noise; `0` disables it.
    pub perturbation: f64,
    /// Atom merge tolerance; `0` disables compression.
    pub compression: f64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            resolutions: vec![32, 64, 128, 256],
            x_blocks: 8,
            t_blocks: 8,
            snapshots_per_block: 1,
            perturbation: 0.0,
            compression: DEFAULT_MERGE_TOLERANCE,
        }
    }
}

/// Named classical solutions for the weak-strong study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolutionChoice {
    #[default]
    Contact,
    Constant,
    Boost,
}

impl SolutionChoice {
    pub fn name(self) -> &'static str {
        match self {
            Self::Contact => "contact",
            Self::Constant => "constant",
            Self::Boost => "boost",
        }
    }

    pub fn solution(self) -> ClassicalSolution {
        match self {
            Self::Contact => ClassicalSolution::contact(),
            Self::Constant => ClassicalSolution::constant(1.0, 1.0, [0.0; 3]),
            Self::Boost => ClassicalSolution::constant(1.0, 1.0, [0.0; 3]).boosted([0.5, 0.0, 0.0]),
        }
    }
}

impl std::str::FromStr for SolutionChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "contact" => Ok(Self::Contact),
            "constant" => Ok(Self::Constant),
            "boost" => Ok(Self::Boost),
            other => Err(format!("unknown solution '{other}' (expected contact, constant or boost)")),
        }
    }
}

/// Weak-strong study settings. Resolutions and time blocks come from
/// `[ensemble]`; the study uses its own spatial blocking and end time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudySection {
    pub solution: SolutionChoice,
    pub x_blocks: usize,
    pub t_end: f64,
}

impl Default for StudySection {
    fn default() -> Self {
        Self { solution: SolutionChoice::Contact, x_blocks: 0, t_end: 0.25 }
    }
}

impl RunConfig {
    pub fn model(&self) -> Result<ThermoModel> {
        ThermoModel::new(self.thermo.c_v, self.thermo.variant).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.dim, self.grid.n, self.grid.length).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Checks everything that does not depend on the subcommand.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::Invalid(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let model = self.model()?;
        let grid = self.grid()?;
        self.scheme.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let Some(s0) = self.scheme.s0 {
            if !s0.is_finite() {
                return Err(ConfigError::Invalid("scheme.s0 must be finite".into()));
            }
        }
        self.problem.sample(grid, &model).map_err(|e| ConfigError::Invalid(format!("problem: {e}")))?;
        if let InitialData::Classical { solution } | InitialData::DensityBump { solution, .. } = &self.problem {
            solution.validate().map_err(|e| ConfigError::Invalid(format!("problem: {e}")))?;
        }
        let e = &self.ensemble;
        if !(e.perturbation >= 0.0 && e.perturbation < 1.0) {
            return Err(ConfigError::Invalid("ensemble.perturbation must lie in [0, 1)".into()));
        }
        if !(e.compression >= 0.0) || !e.compression.is_finite() {
            return Err(ConfigError::Invalid("ensemble.compression must be >= 0".into()));
        }
        if !(self.study.t_end > 0.0) || !self.study.t_end.is_finite() {
            return Err(ConfigError::Invalid("study.t_end must be > 0".into()));
        }
        Ok(())
    }

    /// Ensemble over `[problem]` for the `ensemble`, `ym` and `defects`
    /// commands.
    pub fn ensemble_spec(&self) -> Result<EnsembleSpec> {
        let e = &self.ensemble;
        let spec = EnsembleSpec {
            resolutions: e.resolutions.clone(),
            dim: self.grid.dim,
            length: self.grid.length,
            x_blocks: e.x_blocks,
            t_blocks: e.t_blocks,
            snapshots_per_block: e.snapshots_per_block,
            model: self.model()?,
            scheme: self.scheme,
            initial: self.problem.clone(),
            perturbation: (e.perturbation > 0.0).then_some(Perturbation { amplitude: e.perturbation }),
            seed: self.seed,
            compression: (e.compression > 0.0).then_some(e.compression),
        };
        spec.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(spec)
    }

    /// Ensemble for the weak-strong study of `choice`: initial data is the
    /// classical solution, no perturbation or compression.
    pub fn study_spec(&self, choice: SolutionChoice) -> Result<(EnsembleSpec, ClassicalSolution)> {
        let sol = choice.solution();
        let mut spec = self.ensemble_spec()?;
        spec.x_blocks = self.study.x_blocks;
        spec.scheme.t_end = self.study.t_end;
        spec.initial = InitialData::Classical { solution: sol.clone() };
        spec.perturbation = None;
        spec.compression = None;
        spec.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok((spec, sol))
    }
}

/// Parses and validates a TOML configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        ConfigError::Parse { line, column, message: e.message().trim().to_string() }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}
