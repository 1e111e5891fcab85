//! Sweep configuration: TOML file format, validation and built-in figure
//! presets.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lora_ser::{ChannelParams, McConfig, DEFAULT_EXACT_MAX_SF};
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{config_error, SweepError};

/// Quantity evaluated at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Mc,
    Exact,
    Integral,
    Upper,
    Lower,
    UpperExp,
    LowerExp,
    UpperRayleigh,
    LowerRayleigh,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::Mc,
        Method::Exact,
        Method::Integral,
        Method::Upper,
        Method::Lower,
        Method::UpperExp,
        Method::LowerExp,
        Method::UpperRayleigh,
        Method::LowerRayleigh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::Exact => "exact",
            Method::Integral => "integral",
            Method::Upper => "upper",
            Method::Lower => "lower",
            Method::UpperExp => "upper_exp",
            Method::LowerExp => "lower_exp",
            Method::UpperRayleigh => "upper_rayleigh",
            Method::LowerRayleigh => "lower_rayleigh",
        }
    }

    pub fn is_rayleigh_only(self) -> bool {
        matches!(self, Method::UpperRayleigh | Method::LowerRayleigh)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| {
                let known: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
                format!(
                    "unknown method `{s}` (expected one of {})",
                    known.join(", ")
                )
            })
    }
}

/// Inclusive grid `start, start + step, ..., <= stop` in dB.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DbRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl DbRange {
    pub fn validate(&self) -> Result<(), SweepError> {
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(config_error("ebn0_db", "start and stop must be finite"));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(config_error("ebn0_db.step", "must be > 0"));
        }
        if self.start > self.stop {
            return Err(config_error("ebn0_db", "start must not exceed stop"));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl FromStr for DbRange {
    type Err = String;

    /// `start:stop:step`, or a single value.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{p}` is not a number"))
        };
        match parts.as_slice() {
            [v] => {
                let v = num(v)?;
                Ok(DbRange {
                    start: v,
                    stop: v,
                    step: 1.0,
                })
            }
            [a, b, c] => Ok(DbRange {
                start: num(a)?,
                stop: num(b)?,
                step: num(c)?,
            }),
            _ => Err(format!("expected start:stop:step, got `{s}`")),
        }
    }
}

/// A normalized channel and the K-factor used to label it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPreset {
    pub k_factor: f64,
    pub channel: ChannelParams,
}

impl ChannelPreset {
    pub fn from_k_factor(k: f64) -> Result<Self, SweepError> {
        let channel = ChannelParams::from_k_factor(k)
            .map_err(|e| config_error("presets.k_factor", e.to_string()))?;
        Ok(Self {
            k_factor: k,
            channel,
        })
    }

    /// Mean and variance are rescaled so that `|μ|² + σ² = 1`.
    pub fn from_moments(mu: Complex64, sigma_h2: f64) -> Result<Self, SweepError> {
        let channel = ChannelParams::rician(mu, sigma_h2)
            .and_then(ChannelParams::normalized)
            .map_err(|e| config_error("presets", e.to_string()))?;
        Ok(Self {
            k_factor: channel.k_factor(),
            channel,
        })
    }

    pub fn is_rayleigh(&self) -> bool {
        self.channel.mu_h() == Complex64::new(0.0, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub sf_list: Vec<u32>,
    pub presets: Vec<ChannelPreset>,
    pub ebn0_db: DbRange,
    pub methods: Vec<Method>,
    pub mc: McConfig,
    pub output_path: PathBuf,
    pub plot_path: Option<PathBuf>,
    pub exact_max_sf: u32,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.sf_list.is_empty() {
            return Err(config_error("sf_list", "must not be empty"));
        }
        if let Some(sf) = self.sf_list.iter().find(|&&sf| !(1..=16).contains(&sf)) {
            return Err(config_error("sf_list", format!("SF {sf} outside 1..=16")));
        }
        if self.presets.is_empty() {
            return Err(config_error("presets", "must not be empty"));
        }
        if self.methods.is_empty() {
            return Err(config_error("methods", "must not be empty"));
        }
        self.ebn0_db.validate()?;
        self.mc
            .validate()
            .map_err(|e| config_error("mc", e.to_string()))?;
        if let Some(m) = self.methods.iter().find(|m| m.is_rayleigh_only()) {
            if let Some(p) = self.presets.iter().find(|p| !p.is_rayleigh()) {
                return Err(config_error(
                    "methods",
                    format!(
                        "`{m}` needs presets with zero channel mean, but one has K = {}",
                        p.k_factor
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, SweepError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let field = e
                .message()
                .split('`')
                .nth(1)
                .unwrap_or("config")
                .to_string();
            SweepError::Config {
                field,
                reason: e.to_string().trim().to_string(),
            }
        })?;
        raw.into_config()
    }

    pub fn from_file(path: &Path) -> Result<Self, SweepError> {
        let text = std::fs::read_to_string(path).map_err(|e| SweepError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_toml_str(&text)
    }

    /// Settings that regenerate one of the four reference figures.
    pub fn figure(n: u8) -> Result<Self, SweepError> {
        let text = match n {
            1 => include_str!("../configs/fig1.toml"),
            2 => include_str!("../configs/fig2.toml"),
            3 => include_str!("../configs/fig3.toml"),
            4 => include_str!("../configs/fig4.toml"),
            _ => return Err(config_error("figure", format!("{n} is not in 1..=4"))),
        };
        Self::from_toml_str(text)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPreset {
    k_factor: Option<f64>,
    mu_re: Option<f64>,
    mu_im: Option<f64>,
    sigma_h2: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMc {
    trials: Option<u64>,
    seed: Option<u64>,
    batch_size: Option<u64>,
    target_errors: Option<u64>,
    parallel_workers: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    sf_list: Vec<u32>,
    presets: Vec<RawPreset>,
    ebn0_db: DbRange,
    methods: Vec<String>,
    mc: Option<RawMc>,
    output_path: PathBuf,
    plot_path: Option<PathBuf>,
    exact_max_sf: Option<u32>,
}

pub const DEFAULT_TRIALS: u64 = 1_000_000;

impl RawPreset {
    fn resolve(&self) -> Result<ChannelPreset, SweepError> {
        let moments = self.mu_re.is_some() || self.mu_im.is_some() || self.sigma_h2.is_some();
        match (self.k_factor, moments) {
            (Some(k), false) => ChannelPreset::from_k_factor(k),
            (None, true) => {
                let sigma_h2 = self
                    .sigma_h2
                    .ok_or_else(|| config_error("presets.sigma_h2", "required with mu_re/mu_im"))?;
                let mu = Complex64::new(self.mu_re.unwrap_or(0.0), self.mu_im.unwrap_or(0.0));
                ChannelPreset::from_moments(mu, sigma_h2)
            }
            (Some(_), true) => Err(config_error(
                "presets",
                "give either k_factor or mu_re/mu_im/sigma_h2, not both",
            )),
            (None, false) => Err(config_error(
                "presets",
                "each preset needs k_factor or mu_re/mu_im/sigma_h2",
            )),
        }
    }
}

impl RawConfig {
    fn into_config(self) -> Result<SweepConfig, SweepError> {
        let presets = self
            .presets
            .iter()
            .map(RawPreset::resolve)
            .collect::<Result<Vec<_>, _>>()?;
        let methods = self
            .methods
            .iter()
            .map(|m| m.parse().map_err(|e| config_error("methods", e)))
            .collect::<Result<Vec<_>, _>>()?;
        let mut mc = McConfig::new(DEFAULT_TRIALS, 1);
        if let Some(raw) = self.mc {
            mc.trials = raw.trials.unwrap_or(mc.trials);
            mc.seed = raw.seed.unwrap_or(mc.seed);
            mc.batch_size = raw.batch_size.unwrap_or(mc.batch_size);
            mc.target_errors = raw.target_errors;
            mc.parallel_workers = raw.parallel_workers.unwrap_or(mc.parallel_workers);
        }
        let cfg = SweepConfig {
            sf_list: self.sf_list,
            presets,
            ebn0_db: self.ebn0_db,
            methods,
            mc,
            output_path: self.output_path,
            plot_path: self.plot_path,
            exact_max_sf: self.exact_max_sf.unwrap_or(DEFAULT_EXACT_MAX_SF),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
