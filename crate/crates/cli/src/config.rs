//! Run configuration, read from TOML. Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub state: StateConfig,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub trajectory: TrajectoryConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub marginal: MarginalConfig,
    #[serde(default)]
    pub momentum: MomentumConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub bohm: BohmConfig,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Box,
    Superposition,
    Tabulated,
    PlaneWave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    Centered,
    Wall,
}

/// A state descriptor. Which fields apply depends on `kind`:
/// `box` uses `n`, `length`, `convention`; `superposition` uses `length`,
/// `convention` and `components`; `tabulated` reads `path` (columns
/// `x,re,im`); `plane_wave` uses `k` and `length`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub kind: StateKind,
    pub n: Option<u32>,
    #[serde(default = "one")]
    pub length: f64,
    #[serde(default = "centered")]
    pub convention: Convention,
    #[serde(default)]
    pub components: Vec<ComponentConfig>,
    pub path: Option<PathBuf>,
    pub k: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    pub n: u32,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
    /// Defaults to the box energy of level `n`.
    pub energy: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub period: f64,
    #[serde(default = "ten")]
    pub speed_cap: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            hbar: 1.0,
            period: 1.0,
            speed_cap: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    SinglePass,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionConfig {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingConfig {
    Grid,
    Random,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryConfig {
    #[serde(default = "single_pass")]
    pub mode: ModeConfig,
    #[serde(default = "forward")]
    pub direction: DirectionConfig,
    /// Fixed offset. Mutually exclusive with `t0_seed`.
    pub t0: Option<f64>,
    /// Draw the offset uniformly from `[0, T)` with this seed.
    pub t0_seed: Option<u64>,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default = "grid")]
    pub sampling: SamplingConfig,
    /// Seed for random sampling times.
    #[serde(default)]
    pub seed: u64,
    /// Time covered in periodic mode; defaults to `2T`.
    pub span: Option<f64>,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            mode: ModeConfig::SinglePass,
            direction: DirectionConfig::Forward,
            t0: None,
            t0_seed: None,
            n_samples: default_samples(),
            sampling: SamplingConfig::Grid,
            seed: 0,
            span: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Bin width; defaults to `0.02 L`.
    pub dx: Option<f64>,
    #[serde(default = "default_l1")]
    pub l1_max: f64,
    #[serde(default = "default_sigmas")]
    pub chi2_sigmas: f64,
    /// Density to test against; defaults to the density being sampled.
    pub target: Option<StateConfig>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            dx: None,
            l1_max: default_l1(),
            chi2_sigmas: default_sigmas(),
            target: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalConfig {
    #[serde(default)]
    pub t_start: f64,
    /// Averaging window; defaults to the slowest beat period of the state.
    pub t_avg: Option<f64>,
    #[serde(default = "default_time_nodes")]
    pub n_t: usize,
}

impl Default for MarginalConfig {
    fn default() -> Self {
        Self {
            t_start: 0.0,
            t_avg: None,
            n_t: default_time_nodes(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentumConfig {
    #[serde(default = "default_mu_points")]
    pub n_mu: usize,
    #[serde(default = "default_mu_max")]
    pub mu_max: f64,
}

impl Default for MomentumConfig {
    fn default() -> Self {
        Self {
            n_mu: default_mu_points(),
            mu_max: default_mu_max(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
    /// Finite-difference step for the Newton check.
    #[serde(default = "default_newton_h")]
    pub newton_h: f64,
    /// Only points with density above this enter the Newton statistics.
    #[serde(default = "default_newton_floor")]
    pub newton_floor: f64,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self {
            cutoff: default_cutoff(),
            newton_h: default_newton_h(),
            newton_floor: default_newton_floor(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BohmConfig {
    /// Starting point; defaults to the middle of the domain.
    pub x0: Option<f64>,
    /// Length of the integration; defaults to `T`.
    pub duration: Option<f64>,
    #[serde(default = "default_dt")]
    pub dt: f64,
}

impl Default for BohmConfig {
    fn default() -> Self {
        Self {
            x0: None,
            duration: None,
            dt: default_dt(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    #[serde(default = "default_members")]
    pub members: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            members: default_members(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: default_directory(),
        }
    }
}

fn one() -> f64 {
    1.0
}
fn ten() -> f64 {
    10.0
}
fn centered() -> Convention {
    Convention::Centered
}
fn single_pass() -> ModeConfig {
    ModeConfig::SinglePass
}
fn forward() -> DirectionConfig {
    DirectionConfig::Forward
}
fn grid() -> SamplingConfig {
    SamplingConfig::Grid
}
fn default_samples() -> usize {
    1001
}
fn default_l1() -> f64 {
    0.02
}
fn default_sigmas() -> f64 {
    4.0
}
fn default_time_nodes() -> usize {
    qtraj::nonstationary::DEFAULT_TIME_NODES
}
fn default_mu_points() -> usize {
    qtraj::observables::DEFAULT_MOMENTUM_POINTS
}
fn default_mu_max() -> f64 {
    qtraj::observables::DEFAULT_MOMENTUM_HALF_WIDTH
}
fn default_cutoff() -> f64 {
    qtraj::observables::DEFAULT_DENSITY_CUTOFF
}
fn default_newton_h() -> f64 {
    1e-4
}
fn default_newton_floor() -> f64 {
    0.05
}
fn default_dt() -> f64 {
    1e-3
}
fn default_members() -> usize {
    16
}
fn default_directory() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Resolves relative tabulated-state paths against the directory holding
    /// the config file. The output directory stays relative to the caller.
    pub fn anchor(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.state.path.as_mut() {
            fix(p);
        }
        if let Some(p) = self.verify.target.as_mut().and_then(|t| t.path.as_mut()) {
            fix(p);
        }
    }
}
