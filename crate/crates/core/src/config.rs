//! Experiment configuration: strict JSON with reference defaults for every
//! omitted field.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::NetworkParams;
use crate::model::{ArrivalModel, CompressionMode, CycleConvention, HardwareProfile, TaskProfile, UplinkNumerator};
use crate::numerics::QuadratureSpec;
use crate::sdcp::{AnalysisOptions, BetaSearch};
use crate::sim::{CouplingMode, McConfig};
use crate::stp::{RateFormula, SirThreshold};

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Io(String),
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    Validation(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io(m) => write!(f, "cannot read config: {m}"),
            Self::Parse { line, column, message } => {
                write!(f, "config parse error at line {line}, column {column}: {message}")
            }
            Self::Validation(m) => write!(f, "invalid config: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Validation(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkSection {
    /// `c`, per m^2. Mutually exclusive with `fn_density`.
    pub cluster_param: Option<f64>,
    /// `lambda_N`, per m^2.
    pub fn_density: Option<f64>,
    pub pathloss_exponent: f64,
    pub power_control: f64,
    pub max_tx_power: f64,
    pub bandwidth: f64,
    pub fap_density: Option<f64>,
}

impl Default for NetworkSection {
    fn default() -> Self {
        let r = NetworkParams::reference();
        Self {
            cluster_param: None,
            fn_density: None,
            pathloss_exponent: r.pathloss_exponent,
            power_control: r.power_control,
            max_tx_power: r.max_tx_power,
            bandwidth: r.bandwidth,
            fap_density: None,
        }
    }
}

impl NetworkSection {
    fn resolve(&self) -> Result<NetworkParams, ConfigError> {
        let density = match (self.cluster_param, self.fn_density) {
            (Some(_), Some(_)) => return invalid("network: give cluster_param or fn_density, not both"),
            (Some(c), None) => c / std::f64::consts::PI,
            (None, Some(d)) => d,
            (None, None) => NetworkParams::reference().fn_density,
        };
        let params = NetworkParams {
            fn_density: density,
            pathloss_exponent: self.pathloss_exponent,
            power_control: self.power_control,
            max_tx_power: self.max_tx_power,
            bandwidth: self.bandwidth,
            fap_density: self.fap_density,
        };
        params
            .validate()
            .map_err(|e| ConfigError::Validation(format!("network: {e}")))?;
        Ok(params)
    }
}

/// SIR threshold as `{"db": x}` or `{"linear": x}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ThresholdSpec {
    Db(f64),
    Linear(f64),
}

impl ThresholdSpec {
    pub fn resolve(self) -> Result<SirThreshold, ConfigError> {
        match self {
            Self::Db(x) => SirThreshold::from_db(x),
            Self::Linear(x) => SirThreshold::linear(x),
        }
        .map_err(|e| ConfigError::Validation(format!("tau: {e}")))
    }
}

/// `"local"`, `"edge"` or `{"hybrid": beta}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModeSpec {
    Local,
    Edge,
    Hybrid(f64),
}

impl From<ModeSpec> for CompressionMode {
    fn from(m: ModeSpec) -> Self {
        match m {
            ModeSpec::Local => Self::Local,
            ModeSpec::Edge => Self::Edge,
            ModeSpec::Hybrid(b) => Self::Hybrid(b),
        }
    }
}

impl From<CompressionMode> for ModeSpec {
    fn from(m: CompressionMode) -> Self {
        match m {
            CompressionMode::Local => Self::Local,
            CompressionMode::Edge => Self::Edge,
            CompressionMode::Hybrid(b) => Self::Hybrid(b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// End-to-end latency target, s.
    Rho,
    /// Offloading ratio of the hybrid mode.
    Beta,
    /// Task generation rate per UE, tasks/s.
    Psi,
    /// Backhaul capacity, bit/s.
    CBh,
    /// SIR threshold, dB.
    Tau,
    /// Fog-node compression speed, cycles/s.
    FnSpeed,
}

impl SweepVariable {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Rho => "rho",
            Self::Beta => "beta",
            Self::Psi => "psi",
            Self::CBh => "c_bh",
            Self::Tau => "tau",
            Self::FnSpeed => "fn_speed",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Self::Rho => "s",
            Self::Beta => "1",
            Self::Psi => "tasks/s",
            Self::CBh => "bit/s",
            Self::Tau => "dB",
            Self::FnSpeed => "cycles/s",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

impl Default for Sweep {
    /// Latency targets from 1 to 8 ms on 20 points.
    fn default() -> Self {
        Self {
            variable: SweepVariable::Rho,
            values: (0..20).map(|i| 1e-3 + 7e-3 * f64::from(i) / 19.0).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Flags {
    pub cycle_convention: CycleConvention,
    pub formula_mode: RateFormula,
    pub coupling_mode: CouplingMode,
    pub uplink_numerator: UplinkNumerator,
    pub thinned_arrivals: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    network: NetworkSection,
    task: TaskProfile,
    hardware: HardwareProfile,
    tau: ThresholdSpec,
    modes: Vec<ModeSpec>,
    sweep: Sweep,
    mc: McConfig,
    flags: Flags,
    beta_search: BetaSearch,
    quadrature: QuadratureSpec,
}

impl Default for RawConfig {
    fn default() -> Self {
        Self {
            network: NetworkSection::default(),
            task: TaskProfile::reference(),
            hardware: HardwareProfile::reference(),
            tau: ThresholdSpec::Db(0.0),
            modes: vec![ModeSpec::Local, ModeSpec::Edge, ModeSpec::Hybrid(0.6)],
            sweep: Sweep::default(),
            mc: McConfig::default(),
            flags: Flags::default(),
            beta_search: BetaSearch::default(),
            quadrature: QuadratureSpec::default(),
        }
    }
}

/// Fully validated experiment description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub network: NetworkParams,
    pub task: TaskProfile,
    pub hardware: HardwareProfile,
    pub tau: SirThreshold,
    pub modes: Vec<CompressionMode>,
    pub sweep: Sweep,
    pub mc: McConfig,
    pub flags: Flags,
    pub beta_search: BetaSearch,
    pub quadrature: QuadratureSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        RawConfig::default().resolve().expect("defaults are valid")
    }
}

impl RawConfig {
    fn resolve(self) -> Result<ExperimentConfig, ConfigError> {
        let network = self.network.resolve()?;
        let wrap =
            |section: &str, r: crate::Result<()>| r.map_err(|e| ConfigError::Validation(format!("{section}: {e}")));
        wrap("task", self.task.validate())?;
        wrap("hardware", self.hardware.validate())?;
        wrap("mc", self.mc.validate())?;
        wrap("quadrature", self.quadrature.validate())?;
        let tau = self.tau.resolve()?;
        if self.modes.is_empty() {
            return invalid("modes: at least one compression mode is required");
        }
        let modes: Vec<CompressionMode> = self.modes.into_iter().map(Into::into).collect();
        for m in &modes {
            wrap("modes", m.validate())?;
        }
        if self.sweep.values.is_empty() {
            return invalid("sweep: values must not be empty");
        }
        if self.sweep.values.iter().any(|v| !v.is_finite()) || self.sweep.values.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("sweep: values must be finite and strictly ascending");
        }
        check_sweep_domain(&self.sweep)?;
        let s = &self.beta_search;
        if s.grid_points < 3 || !(s.refine_tol > 0.0) || !(s.tie_tol >= 0.0) {
            return invalid("beta_search: need grid_points >= 3, refine_tol > 0 and tie_tol >= 0");
        }
        Ok(ExperimentConfig {
            network,
            task: self.task,
            hardware: self.hardware,
            tau,
            modes,
            sweep: self.sweep,
            mc: self.mc,
            flags: self.flags,
            beta_search: self.beta_search,
            quadrature: self.quadrature,
        })
    }
}

fn check_sweep_domain(sweep: &Sweep) -> Result<(), ConfigError> {
    let ok = |v: f64| match sweep.variable {
        SweepVariable::Beta => (0.0..=1.0).contains(&v),
        SweepVariable::Tau => true,
        SweepVariable::Rho | SweepVariable::Psi | SweepVariable::CBh | SweepVariable::FnSpeed => v > 0.0,
    };
    match sweep.values.iter().find(|&&v| !ok(v)) {
        Some(v) => invalid(format!(
            "sweep: value {v} is outside the domain of {}",
            sweep.variable.as_str()
        )),
        None => Ok(()),
    }
}

impl ExperimentConfig {
    pub fn analysis_options(&self) -> AnalysisOptions {
        AnalysisOptions {
            cycle_convention: self.flags.cycle_convention,
            rate_formula: self.flags.formula_mode,
            uplink_numerator: self.flags.uplink_numerator,
            arrivals: if self.flags.thinned_arrivals {
                ArrivalModel::Thinned
            } else {
                ArrivalModel::Full
            },
            quadrature: self.quadrature,
        }
    }

    pub fn mc_config(&self) -> McConfig {
        McConfig {
            coupling_mode: self.flags.coupling_mode,
            ..self.mc
        }
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    raw.resolve()
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}
