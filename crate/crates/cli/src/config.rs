//! Scenario configuration (`covcd-config/1`). Angles are radians throughout.

use std::f64::consts::{FRAC_PI_4, TAU};
use std::path::{Path, PathBuf};

use covcd_core::qubit::{ConvexPovmSpec, QubitMeasurement};
use covcd_core::sampler::InstrumentPolicy;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA: &str = "covcd-config/1";

/// Largest accepted angle magnitude; larger values are taken to be degrees.
const MAX_ANGLE: f64 = TAU + 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Scan,
    Calibrate,
    Detector,
    SearchOptimal,
    Highdim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: String,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetConfig>,
    #[serde(default)]
    pub state: StateConfig,
    #[serde(default)]
    pub policy: InstrumentPolicy,
    #[serde(default)]
    pub shots: Shots,
    /// Alone-arm shots; defaults to `shots`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots_alone: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibrate: Option<CalibrateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector: Option<DetectorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub highdim: Option<HighdimConfig>,
}

/// Either `bloch` (with optional `bias`) or `convex`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    #[serde(default)]
    pub bias: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bloch: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convex: Option<ConvexPovmSpec>,
}

impl ProbeConfig {
    pub fn measurement(&self) -> Result<QubitMeasurement, CliError> {
        match (&self.bloch, &self.convex) {
            (Some(b), None) => Ok(QubitMeasurement::new(self.bias, *b)?),
            (None, Some(spec)) => {
                if self.bias != 0.0 {
                    return Err(CliError::config("probe.bias does not apply to a convex probe; use convex.bias_b0"));
                }
                check_angle("probe.convex.theta", spec.theta)?;
                Ok(ConvexPovmSpec::new(spec.theta, spec.gamma, spec.bias_b0)?.to_measurement()?)
            }
            _ => Err(CliError::config("probe needs exactly one of `bloch` or `convex`")),
        }
    }
}

/// Target of strength `gamma` along `(cos theta, 0, sin theta)`; one of `theta`, `theta_grid`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    #[serde(default)]
    pub bias: f64,
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_grid: Option<Grid>,
}

impl TargetConfig {
    pub fn thetas(&self) -> Result<Vec<f64>, CliError> {
        match (self.theta, &self.theta_grid) {
            (Some(t), None) => {
                check_angle("target.theta", t)?;
                Ok(vec![t])
            }
            (None, Some(g)) => g.values("target.theta_grid"),
            _ => Err(CliError::config("target needs exactly one of `theta` or `theta_grid`")),
        }
    }

    pub fn measurement(&self, theta: f64) -> Result<QubitMeasurement, CliError> {
        Ok(QubitMeasurement::in_xz_plane(self.gamma, theta, self.bias)?)
    }
}

/// `points` evenly spaced values from `start` to `stop`, `stop` included unless `endpoint` is false.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default = "yes")]
    pub endpoint: bool,
}

fn yes() -> bool {
    true
}

impl Grid {
    pub fn values(&self, field: &str) -> Result<Vec<f64>, CliError> {
        check_angle(field, self.start)?;
        check_angle(field, self.stop)?;
        if self.points == 0 {
            return Err(CliError::config(format!("{field}.points must be positive")));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let div = if self.endpoint { self.points - 1 } else { self.points } as f64;
        Ok((0..self.points).map(|i| self.start + (self.stop - self.start) * i as f64 / div).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum StateConfig {
    #[default]
    Optimal,
    Bloch([f64; 3]),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum StateRepr {
    Word(StateWord),
    Bloch {
        bloch: [f64; 3],
    },
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum StateWord {
    Optimal,
}

impl Serialize for StateConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            StateConfig::Optimal => StateRepr::Word(StateWord::Optimal),
            StateConfig::Bloch(bloch) => StateRepr::Bloch { bloch },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match StateRepr::deserialize(d)? {
            StateRepr::Word(StateWord::Optimal) => StateConfig::Optimal,
            StateRepr::Bloch { bloch } => StateConfig::Bloch(bloch),
        })
    }
}

/// Shot budget: a positive integer or `"exact"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Shots {
    #[default]
    Exact,
    Count(u64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ShotsRepr {
    Count(u64),
    Word(ExactWord),
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ExactWord {
    Exact,
}

impl Serialize for Shots {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Shots::Exact => ShotsRepr::Word(ExactWord::Exact),
            Shots::Count(n) => ShotsRepr::Count(n),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match ShotsRepr::deserialize(d)? {
            ShotsRepr::Count(n) => Shots::Count(n),
            ShotsRepr::Word(ExactWord::Exact) => Shots::Exact,
        })
    }
}

/// Scan of pure input states `r = (sin phi, 0, cos phi)` over `phi = 2 pi k / points`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    #[serde(default = "quarter_pi")]
    pub probe_theta: f64,
    #[serde(default = "one")]
    pub probe_gamma: f64,
    #[serde(default)]
    pub probe_bias: f64,
    #[serde(default)]
    pub target_theta: f64,
    #[serde(default = "one")]
    pub target_gamma: f64,
    #[serde(default)]
    pub target_bias: f64,
    #[serde(default = "sixty_four")]
    pub points: usize,
}

fn quarter_pi() -> f64 {
    FRAC_PI_4
}

fn one() -> f64 {
    1.0
}

fn sixty_four() -> usize {
    64
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            probe_theta: quarter_pi(),
            probe_gamma: 1.0,
            probe_bias: 0.0,
            target_theta: 0.0,
            target_gamma: 1.0,
            target_bias: 0.0,
            points: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    Circle,
    KnownTheta,
    UnknownTheta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateConfig {
    /// Scan CSV, relative to the config file.
    pub scan: PathBuf,
    pub method: FitMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_strength: Option<f64>,
    /// Bootstrap resamples; 0 disables.
    #[serde(default = "two_hundred")]
    pub bootstrap: usize,
}

fn two_hundred() -> usize {
    200
}

/// Either true noise (`eta`, `nu`) to simulate, or measured `d1`, `c2` to invert.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(default)]
    pub d1_err: f64,
    #[serde(default)]
    pub c2_err: f64,
}

/// Sharp probe `|0>` and target `cos(theta/2)|0> + sin(theta/2)|1>` of strength `target.gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HighdimConfig {
    pub dim: usize,
}

pub fn check_angle(field: &str, value: f64) -> Result<(), CliError> {
    if !value.is_finite() || value.abs() > MAX_ANGLE {
        return Err(CliError::config(format!("{field} = {value} is not an angle in radians")));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
        if cfg.schema != SCHEMA {
            return Err(CliError::config(format!("unsupported schema `{}`, expected `{SCHEMA}`", cfg.schema)));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn shots_alone(&self) -> Option<u64> {
        match self.shots {
            Shots::Exact => None,
            Shots::Count(n) => Some(self.shots_alone.unwrap_or(n)),
        }
    }

    /// Checks that mode-specific sections are present and shot counts are positive.
    pub fn validate(&self) -> Result<(), CliError> {
        if let Shots::Count(0) = self.shots {
            return Err(CliError::config("shots must be positive or \"exact\""));
        }
        if self.shots_alone == Some(0) {
            return Err(CliError::config("shots_alone must be positive"));
        }
        let need = |present: bool, what: &str| {
            if present {
                Ok(())
            } else {
                Err(CliError::config(format!("mode {:?} needs a `{what}` section", self.mode)))
            }
        };
        match self.mode {
            Mode::Scan => {
                need(self.probe.is_some(), "probe")?;
                need(self.target.is_some(), "target")
            }
            Mode::Calibrate => need(self.calibrate.is_some(), "calibrate"),
            Mode::Detector => need(self.detector.is_some(), "detector"),
            Mode::SearchOptimal => Ok(()),
            Mode::Highdim => {
                need(self.highdim.is_some(), "highdim")?;
                need(self.target.is_some(), "target")
            }
        }
    }
}
