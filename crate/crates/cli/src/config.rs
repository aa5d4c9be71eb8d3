//! Experiment configuration: per-experiment defaults, TOML files and flag overrides.
//!
//! A config file may hold keys at the top level, which apply to every
//! experiment, and one table per experiment named like the subcommand:
//!
//! ```toml
//! sites = 10
//!
//! [disorder-scan]
//! disorder = 4.0
//! realizations = 200
//! grid = { start = 0.01, stop = 100.0, count = 30, scale = "log" }
//! ```

use std::fmt;
use std::path::PathBuf;

use clap::ValueEnum;
use opentransport::{GridScale, GridSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    NessScan,
    WidthsScan,
    TransferTime,
    CurrentVsPump,
    MaxCurrentVsDephasing,
    ConductanceScan,
    SpectralScan,
    SeMeCompare,
    DisorderScan,
    LossScan,
    Table1,
    SuperradiantGamma,
}

impl Experiment {
    pub const ALL: [Experiment; 12] = [
        Experiment::NessScan,
        Experiment::WidthsScan,
        Experiment::TransferTime,
        Experiment::CurrentVsPump,
        Experiment::MaxCurrentVsDephasing,
        Experiment::ConductanceScan,
        Experiment::SpectralScan,
        Experiment::SeMeCompare,
        Experiment::DisorderScan,
        Experiment::LossScan,
        Experiment::Table1,
        Experiment::SuperradiantGamma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::NessScan => "ness-scan",
            Experiment::WidthsScan => "widths-scan",
            Experiment::TransferTime => "transfer-time",
            Experiment::CurrentVsPump => "current-vs-pump",
            Experiment::MaxCurrentVsDephasing => "max-current-vs-dephasing",
            Experiment::ConductanceScan => "conductance-scan",
            Experiment::SpectralScan => "spectral-scan",
            Experiment::SeMeCompare => "se-me-compare",
            Experiment::DisorderScan => "disorder-scan",
            Experiment::LossScan => "loss-scan",
            Experiment::Table1 => "table1",
            Experiment::SuperradiantGamma => "superradiant-gamma",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoKeyword {
    Auto,
}

/// A rate that is either fixed or derived at run time (see each experiment).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rate {
    Value(f64),
    Auto(AutoKeyword),
}

impl Rate {
    pub const AUTO: Rate = Rate::Auto(AutoKeyword::Auto);

    pub fn value(self) -> Option<f64> {
        match self {
            Rate::Value(v) => Some(v),
            Rate::Auto(_) => None,
        }
    }
}

impl std::str::FromStr for Rate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Rate::AUTO);
        }
        s.parse::<f64>().map(Rate::Value).map_err(|e| format!("expected a number or \"auto\": {e}"))
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rate::Value(v) => write!(f, "{v}"),
            Rate::Auto(_) => f.write_str("auto"),
        }
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub sites: usize,
    /// Energy unit used for reported columns; inputs are in units of the hopping.
    pub hopping: f64,
    pub gamma_in: Rate,
    pub gamma_out: Rate,
    pub gamma_phi: f64,
    pub gamma_loss: f64,
    pub disorder: f64,
    pub broadening: f64,
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid2: Option<GridSpec>,
    pub seed: u64,
    pub realizations: usize,
    pub max_qubits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridLayer {
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub count: Option<usize>,
    pub scale: Option<GridScale>,
}

impl GridLayer {
    fn apply(&self, grid: &mut GridSpec) {
        if let Some(v) = self.start {
            grid.start = v;
        }
        if let Some(v) = self.stop {
            grid.stop = v;
        }
        if let Some(v) = self.count {
            grid.count = v;
        }
        if let Some(v) = self.scale {
            grid.scale = v;
        }
    }

    fn full(grid: &GridSpec) -> Self {
        Self { start: Some(grid.start), stop: Some(grid.stop), count: Some(grid.count), scale: Some(grid.scale) }
    }
}

/// Partial settings from one source. Unset fields fall through to the layer below.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub sites: Option<usize>,
    pub hopping: Option<f64>,
    pub gamma_in: Option<Rate>,
    pub gamma_out: Option<Rate>,
    pub gamma_phi: Option<f64>,
    pub gamma_loss: Option<f64>,
    pub disorder: Option<f64>,
    pub broadening: Option<f64>,
    pub grid: Option<GridLayer>,
    pub grid2: Option<GridLayer>,
    pub seed: Option<u64>,
    pub realizations: Option<usize>,
    pub max_qubits: Option<usize>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    /// Defaults covering the parameter ranges of each figure.
    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = ExperimentConfig {
            experiment,
            sites: 10,
            hopping: 1.0,
            gamma_in: Rate::AUTO,
            gamma_out: Rate::AUTO,
            gamma_phi: 0.0,
            gamma_loss: 0.0,
            disorder: 0.0,
            broadening: 0.0,
            grid: GridSpec::log(0.2, 20.0, 100),
            grid2: None,
            seed: 0,
            realizations: 100,
            max_qubits: opentransport::many_body::DEFAULT_SITE_CAP,
            output: None,
        };
        match experiment {
            Experiment::NessScan => {
                c.grid = GridSpec::log(0.1, 10.0, 40);
                c.grid2 = Some(GridSpec::log(0.1, 10.0, 40));
            }
            Experiment::WidthsScan | Experiment::SuperradiantGamma | Experiment::Table1 => {}
            Experiment::TransferTime => c.grid = GridSpec::log(0.1, 10.0, 60),
            Experiment::CurrentVsPump => c.grid = GridSpec::log(1e-3, 100.0, 60),
            Experiment::MaxCurrentVsDephasing => c.grid = GridSpec::log(0.01, 100.0, 60),
            Experiment::ConductanceScan => c.broadening = 0.03,
            Experiment::SpectralScan => {
                c.broadening = 0.03;
                c.gamma_out = Rate::Value(2.0);
                c.grid = opentransport::transport::default_omega_grid(1.0);
            }
            Experiment::SeMeCompare => {
                c.sites = 4;
                c.gamma_out = Rate::Value(2.0);
                c.grid = GridSpec::log(1e-3, 10.0, 30);
            }
            Experiment::DisorderScan => {
                c.disorder = 4.0;
                c.grid = GridSpec::log(0.01, 100.0, 30);
            }
            Experiment::LossScan => c.grid = GridSpec::log(1e-4, 10.0, 40),
        }
        c
    }

    pub fn apply(&mut self, layer: &ConfigLayer) {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = layer.$field.clone() {
                    self.$field = v;
                }
            )*};
        }
        set!(sites, hopping, gamma_in, gamma_out, gamma_phi, gamma_loss, disorder, broadening, seed, realizations, max_qubits);
        if let Some(g) = &layer.grid {
            g.apply(&mut self.grid);
        }
        if let Some(g) = &layer.grid2 {
            let mut grid = self.grid2.unwrap_or(self.grid);
            g.apply(&mut grid);
            self.grid2 = Some(grid);
        }
        if layer.output.is_some() {
            self.output = layer.output.clone();
        }
    }

    /// Layer that reproduces this config exactly when applied to any base.
    pub fn as_layer(&self) -> ConfigLayer {
        ConfigLayer {
            sites: Some(self.sites),
            hopping: Some(self.hopping),
            gamma_in: Some(self.gamma_in),
            gamma_out: Some(self.gamma_out),
            gamma_phi: Some(self.gamma_phi),
            gamma_loss: Some(self.gamma_loss),
            disorder: Some(self.disorder),
            broadening: Some(self.broadening),
            grid: Some(GridLayer::full(&self.grid)),
            grid2: self.grid2.as_ref().map(GridLayer::full),
            seed: Some(self.seed),
            realizations: Some(self.realizations),
            max_qubits: Some(self.max_qubits),
            output: self.output.clone(),
        }
    }

    /// Config file text holding this config in its experiment's table.
    pub fn to_toml(&self) -> Result<String, ConfigError> {
        let mut doc = toml::Table::new();
        let layer = toml::Table::try_from(self.as_layer()).map_err(|e| ConfigError(e.to_string()))?;
        doc.insert(self.experiment.name().to_string(), toml::Value::Table(layer));
        toml::to_string(&doc).map_err(|e| ConfigError(e.to_string()))
    }

    /// Defaults for `experiment`, then the file's top-level keys, then its
    /// table for `experiment`.
    pub fn from_toml(text: &str, experiment: Experiment) -> Result<Self, ConfigError> {
        let mut cfg = Self::defaults(experiment);
        let (common, section) = parse_layers(text, experiment)?;
        cfg.apply(&common);
        if let Some(section) = section {
            cfg.apply(&section);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.sites == 0 {
            return Err(ConfigError("sites must be at least 1".into()));
        }
        if !(self.hopping > 0.0) || !self.hopping.is_finite() {
            return Err(ConfigError(format!("hopping must be positive, got {}", self.hopping)));
        }
        for (name, v) in [
            ("gamma_phi", self.gamma_phi),
            ("gamma_loss", self.gamma_loss),
            ("disorder", self.disorder),
            ("broadening", self.broadening),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(ConfigError(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        for (name, r) in [("gamma_in", self.gamma_in), ("gamma_out", self.gamma_out)] {
            if let Some(v) = r.value() {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(ConfigError(format!("{name} must be finite and non-negative, got {v}")));
                }
            }
        }
        if self.seed > i64::MAX as u64 {
            return Err(ConfigError(format!("seed must be below 2^63, got {}", self.seed)));
        }
        if self.realizations == 0 {
            return Err(ConfigError("realizations must be at least 1".into()));
        }
        self.grid.validate().map_err(|e| ConfigError(format!("grid: {e}")))?;
        if let Some(g) = &self.grid2 {
            g.validate().map_err(|e| ConfigError(format!("grid2: {e}")))?;
        }
        Ok(())
    }
}

fn parse_layers(text: &str, experiment: Experiment) -> Result<(ConfigLayer, Option<ConfigLayer>), ConfigError> {
    let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError(format!("config: {e}")))?;
    let mut common = toml::Table::new();
    let mut section = None;
    for (key, value) in doc {
        match Experiment::from_name(&key) {
            Some(e) => {
                let toml::Value::Table(t) = value else {
                    return Err(ConfigError(format!("config: [{key}] must be a table")));
                };
                if e == experiment {
                    section = Some(t);
                }
            }
            None => {
                common.insert(key, value);
            }
        }
    }
    let common: ConfigLayer = common.try_into().map_err(|e| ConfigError(format!("config: {e}")))?;
    let section = section
        .map(|t| t.try_into().map_err(|e| ConfigError(format!("config [{experiment}]: {e}"))))
        .transpose()?;
    Ok((common, section))
}
