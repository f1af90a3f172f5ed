//! Optional TOML defaults. Keys are the long flag names without dashes:
//!
//! ```toml
//! alpha = 0.041
//! beta = 0.0553
//! i0 = 21000
//! period = 54
//! order = "oc-then-co"
//! data-dir = "data/jhu"
//! country = "Israel"
//! from = 2020-06-01
//! k-max = 15
//! format = "json"
//! ```

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::NaiveDate;
use serde::Deserialize;

use crate::args::{DataArgs, Format, KernelArgs, Order, OutputArgs, ParamArgs};

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub r_open: Option<f64>,
    pub r_close: Option<f64>,
    pub i0: Option<f64>,
    pub period: Option<f64>,
    pub order: Option<Order>,
    pub step: Option<f64>,
    pub data_dir: Option<PathBuf>,
    pub country: Option<String>,
    pub from: Option<NaiveDate>,
    pub to: Option<NaiveDate>,
    pub k_min: Option<usize>,
    pub k_max: Option<usize>,
    pub smoothing: Option<usize>,
    pub kinds: Option<Vec<String>>,
    pub cycle_start: Option<NaiveDate>,
    pub cycle_days: Option<usize>,
    pub reference_cfr: Option<bool>,
    pub check: Option<bool>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub base_url: Option<String>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))
            .context("invalid config file")
    }

    pub fn params(&self, flags: &ParamArgs) -> ParamArgs {
        ParamArgs {
            alpha: flags.alpha.or(self.alpha),
            beta: flags.beta.or(self.beta),
            gamma: flags.gamma.or(self.gamma),
            r_open: flags.r_open.or(self.r_open),
            r_close: flags.r_close.or(self.r_close),
            i0: flags.i0.or(self.i0),
            period: flags.period.or(self.period),
        }
    }

    pub fn data(&self, flags: &DataArgs) -> DataArgs {
        DataArgs {
            data_dir: flags.data_dir.clone().or_else(|| self.data_dir.clone()),
            country: flags.country.clone().or_else(|| self.country.clone()),
            from: flags.from.or(self.from),
            to: flags.to.or(self.to),
        }
    }

    pub fn kernel(&self, flags: &KernelArgs) -> KernelArgs {
        KernelArgs {
            k_min: flags.k_min.or(self.k_min),
            k_max: flags.k_max.or(self.k_max),
            smoothing: flags.smoothing.or(self.smoothing),
        }
    }

    pub fn output(&self, flags: &OutputArgs) -> OutputArgs {
        OutputArgs {
            format: flags.format.or(self.format),
            out: flags.out.clone().or_else(|| self.out.clone()),
        }
    }
}
