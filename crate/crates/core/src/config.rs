//! TOML experiment files and the checked-in figure presets.
//!
//! ```toml
//! [params]
//! eps = 0.01
//! omega0 = 0.5
//! alpha = 0.0
//! d_re = 1.0
//! d_im = 0.0
//! mu0 = -1.0
//!
//! [source]
//! type = "gaussian"
//! params = { sigma = 1.0 }
//!
//! [initial_data]
//! type = "qss_multiple"
//! params = { factor = [-1.0, 0.0] }
//!
//! [sim]
//! half_length = 30.0
//! n_points = 601
//! mu_end = 1.0
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::DEFAULT_EXIT_THRESHOLD;
use crate::asymptotics::{HopfRegime, InitialData};
use crate::error::{Error, Result};
use crate::grid::{Grid, PhysParams};
use crate::qss::{QssExpansion, QssRegime};
use crate::solver::{DiffusionScheme, Experiment, DEFAULT_RECORD_DMU};
use crate::sources::SourceTerm;

/// Initial data as written in a config; cosine modes are given by their index `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialDataSpec {
    /// `factor * sqrt(eps) * I(x) / (mu0 + i w0)`
    QssMultiple { factor: Complex64 },
    /// `amplitude * cos(n pi x / l)`
    Cosine {
        n: u32,
        #[serde(default = "one")]
        amplitude: f64,
    },
    GaussianData { amplitude: f64, sigma: f64 },
    /// Real and imaginary parts on a uniform grid spanning the domain.
    Tabulated { re: Vec<f64>, im: Vec<f64> },
}

impl InitialDataSpec {
    pub fn resolve(&self, half_length: f64) -> Result<InitialData> {
        let data = match self {
            InitialDataSpec::QssMultiple { factor } => InitialData::QssMultiple { factor: *factor },
            InitialDataSpec::Cosine { n, amplitude } => {
                InitialData::cosine_mode(*n, half_length, *amplitude)
            }
            InitialDataSpec::GaussianData { amplitude, sigma } => InitialData::GaussianData {
                amplitude: *amplitude,
                sigma: *sigma,
            },
            InitialDataSpec::Tabulated { re, im } => {
                if re.len() != im.len() || re.len() < 2 {
                    return Err(Error::Config(
                        "tabulated data needs equal-length re/im arrays with at least 2 entries".into(),
                    ));
                }
                InitialData::Tabulated {
                    half_length,
                    values: re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect(),
                }
            }
        };
        data.validate()?;
        Ok(data)
    }
}

/// `dt = "auto"` or a positive number.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepSpec {
    Fixed(f64),
    #[default]
    #[serde(with = "auto_tag")]
    Auto,
}

mod auto_tag {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("auto")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s == "auto" {
            Ok(())
        } else {
            Err(de::Error::custom(format!("expected \"auto\" or a number, got {s:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub half_length: f64,
    /// Either `n_points` or `max_dx` fixes the grid; `n_points` wins.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_dx: Option<f64>,
    pub mu_end: f64,
    #[serde(default)]
    pub dt: StepSpec,
    #[serde(default = "record_dmu")]
    pub record_dmu: f64,
    #[serde(default)]
    pub diffusion: DiffusionScheme,
    #[serde(default = "yes")]
    pub cubic: bool,
    #[serde(default = "yes")]
    pub forcing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default = "exit_threshold")]
    pub exit_threshold: f64,
    #[serde(default = "base_case")]
    pub qss_regime: QssRegime,
    #[serde(default = "one_u8")]
    pub qss_order: u8,
    #[serde(default = "hopf_base")]
    pub hopf_regime: HopfRegime,
    /// Acceptable `|measured - predicted|` in comparison reports.
    #[serde(default = "tolerance")]
    pub tolerance: f64,
    /// Only points with `|x|` below this enter the report summary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare_half_width: Option<f64>,
    #[serde(default = "eps_scan")]
    pub eps_scan: Vec<f64>,
    /// `mu` values for the contour checks; empty means `[0.3, w0]`.
    #[serde(default)]
    pub verify_mu: Vec<f64>,
    #[serde(default)]
    pub verify_x: f64,
    /// `mu` at which QSS residuals are scanned.
    #[serde(default = "qss_mu")]
    pub qss_mu: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            exit_threshold: exit_threshold(),
            qss_regime: base_case(),
            qss_order: 1,
            hopf_regime: hopf_base(),
            tolerance: tolerance(),
            compare_half_width: None,
            eps_scan: eps_scan(),
            verify_mu: Vec::new(),
            verify_x: 0.0,
            qss_mu: qss_mu(),
        }
    }
}

fn one() -> f64 {
    1.0
}
fn one_u8() -> u8 {
    1
}
fn yes() -> bool {
    true
}
fn record_dmu() -> f64 {
    DEFAULT_RECORD_DMU
}
fn exit_threshold() -> f64 {
    DEFAULT_EXIT_THRESHOLD
}
fn base_case() -> QssRegime {
    QssRegime::BaseCase
}
fn hopf_base() -> HopfRegime {
    HopfRegime::Base
}
fn tolerance() -> f64 {
    0.05
}
fn eps_scan() -> Vec<f64> {
    vec![0.04, 0.02, 0.01, 0.005, 0.0025]
}
fn qss_mu() -> f64 {
    -0.5
}

/// One experiment file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: PhysParams,
    pub source: SourceTerm,
    pub initial_data: InitialDataSpec,
    pub sim: SimSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Effective config with every default spelled out.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let a = &self.analysis;
        if !(a.exit_threshold > 0.0) {
            return Err(Error::Config(format!("exit_threshold must be > 0, got {}", a.exit_threshold)));
        }
        if !(a.tolerance >= 0.0) {
            return Err(Error::Config(format!("tolerance must be >= 0, got {}", a.tolerance)));
        }
        self.experiment()?.validate()
    }

    pub fn grid(&self) -> Result<Grid> {
        let s = &self.sim;
        match (s.n_points, s.max_dx) {
            (Some(n), _) => Grid::new(s.half_length, n),
            (None, Some(h)) => Grid::with_max_spacing(s.half_length, h),
            (None, None) => Err(Error::Config("[sim] needs n_points or max_dx".into())),
        }
    }

    pub fn initial_data(&self) -> Result<InitialData> {
        self.initial_data.resolve(self.sim.half_length)
    }

    pub fn experiment(&self) -> Result<Experiment> {
        let s = &self.sim;
        let mut exp = Experiment::new(
            self.params,
            self.source,
            self.initial_data()?,
            self.grid()?,
            s.mu_end,
        );
        exp.dt = match s.dt {
            StepSpec::Auto => None,
            StepSpec::Fixed(dt) => Some(dt),
        };
        exp.record_dmu = s.record_dmu;
        exp.diffusion = s.diffusion;
        exp.cubic = s.cubic;
        exp.forcing = s.forcing;
        Ok(exp)
    }

    pub fn qss(&self) -> QssExpansion {
        QssExpansion::new(
            self.analysis.qss_regime,
            self.analysis.qss_order,
            self.source,
            self.params,
        )
    }
}

const PRESETS: &[(&str, &str)] = &[
    ("fig1", include_str!("../presets/fig1.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
    ("fig8", include_str!("../presets/fig8.toml")),
    ("fig9", include_str!("../presets/fig9.toml")),
    ("fig10", include_str!("../presets/fig10.toml")),
    ("fig12", include_str!("../presets/fig12.toml")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let text = preset_text(name).ok_or_else(|| {
        Error::Config(format!(
            "unknown preset {name:?}; available: {}",
            preset_names().join(", ")
        ))
    })?;
    ExperimentConfig::from_toml(text)
}
