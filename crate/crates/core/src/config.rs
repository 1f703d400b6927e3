//! Scenario files.
//!
//! A scenario is a flat TOML document: one `key = value` per line, axes as
//! arrays. Unknown keys are rejected. Example (the flat-mode comparison):
//!
//! ```toml
//! mode = "flat"
//! cells = [3]
//! users = [100]
//! snr_db = [0, 5, 10, 15, 20, 25, 30]
//! schedulers = ["dos-max", "maxsnr", "mingi"]
//! eta_i = [0.5]
//! interference_norm = "unit"
//! trials = 10000
//! seed = 1
//! ```
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `mode` | `"flat"` | `"flat"` or `"geometric"` |
//! | `cells`, `users` | required | K and N axes |
//! | `snr_db` | required in flat mode | received SNR axis |
//! | `tx_power_dbm` | required in geometric mode | transmit power axis |
//! | `schedulers` | required | any of `dos`, `dos-max`, `maxsnr`, `mingi`, `random` |
//! | `eta_i` | 0.1, 0.2, …, 2.5 | interference threshold axis |
//! | `epsilon` | 0.5 | `eta_tr = epsilon · log N` |
//! | `eta_tr` | unset | fixed desired-gain threshold, overrides `epsilon` |
//! | `eta_tr_log` | `"natural"` | `"natural"` or `"base2"` |
//! | `interference_norm` | `"snr"` | `"snr"`: threshold on `SNR·Σβ²|h|²`; `"unit"`: on `Σβ²|h|²` |
//! | `rate_scope` | `"all-cells"` | `"all-cells"` or `"center-cell"` |
//! | `trials` | 10000 | blocks per grid point |
//! | `seed` | 1 | master seed |
//! | `beta` | all ones | flat mode K×K amplitude matrix |
//! | `cell_radius_m` | 500 | geometric mode |
//! | `path_loss_exponent` | 3 | geometric mode |
//! | `shadowing_std_db` | 8 | geometric mode |
//! | `noise_dbm` | -104 | geometric mode |
//! | `out` | unset | output CSV path (the `--out` flag wins) |

use std::path::Path;

use serde::Deserialize;

use crate::channel::{BetaMatrix, PathLossModel};
use crate::error::{config_err, Error, Result};
use crate::harness::{
    default_eta_grid, ChannelMode, EtaTr, GeometricParams, PowerAxis, RateScope, SweepSpec,
};
use crate::scheduling::{InterferenceNorm, LogBase, SchedulerKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Flat,
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScopeName {
    #[default]
    AllCells,
    CenterCell,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub mode: Mode,
    pub cells: Vec<usize>,
    pub users: Vec<usize>,
    pub snr_db: Option<Vec<f64>>,
    pub tx_power_dbm: Option<Vec<f64>>,
    pub schedulers: Vec<SchedulerKind>,
    pub eta_i: Option<Vec<f64>>,
    pub epsilon: Option<f64>,
    pub eta_tr: Option<f64>,
    #[serde(default)]
    pub eta_tr_log: LogBase,
    #[serde(default)]
    pub interference_norm: InterferenceNorm,
    #[serde(default)]
    pub rate_scope: ScopeName,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub beta: Option<Vec<Vec<f64>>>,
    pub cell_radius_m: Option<f64>,
    pub path_loss_exponent: Option<f64>,
    pub shadowing_std_db: Option<f64>,
    pub noise_dbm: Option<f64>,
    pub out: Option<String>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Builds and validates the sweep described by this scenario.
    pub fn to_spec(&self) -> Result<SweepSpec> {
        let power = match self.mode {
            Mode::Flat => {
                if self.tx_power_dbm.is_some() {
                    return Err(config_err(
                        "field `tx_power_dbm` is only valid in geometric mode",
                    ));
                }
                let geometric_keys = [
                    ("cell_radius_m", self.cell_radius_m.is_some()),
                    ("path_loss_exponent", self.path_loss_exponent.is_some()),
                    ("shadowing_std_db", self.shadowing_std_db.is_some()),
                    ("noise_dbm", self.noise_dbm.is_some()),
                ];
                if let Some((key, _)) = geometric_keys.iter().find(|(_, set)| *set) {
                    return Err(config_err(format!(
                        "field `{key}` is only valid in geometric mode"
                    )));
                }
                PowerAxis::snr_db(
                    self.snr_db
                        .clone()
                        .ok_or_else(|| config_err("flat mode needs field `snr_db`"))?,
                )
            }
            Mode::Geometric => {
                if self.snr_db.is_some() {
                    return Err(config_err("field `snr_db` is only valid in flat mode"));
                }
                if self.beta.is_some() {
                    return Err(config_err("field `beta` is only valid in flat mode"));
                }
                PowerAxis::tx_power_dbm(
                    self.tx_power_dbm
                        .clone()
                        .ok_or_else(|| config_err("geometric mode needs field `tx_power_dbm`"))?,
                )
            }
        };

        let channel = match self.mode {
            Mode::Flat => ChannelMode::Flat {
                beta: self
                    .beta
                    .clone()
                    .map(BetaMatrix::new)
                    .transpose()
                    .map_err(|e| config_err(format!("field `beta`: {e}")))?,
            },
            Mode::Geometric => {
                let d = GeometricParams::table2();
                ChannelMode::Geometric(GeometricParams {
                    cell_radius_m: self.cell_radius_m.unwrap_or(d.cell_radius_m),
                    path_loss: PathLossModel {
                        exponent: self.path_loss_exponent.unwrap_or(d.path_loss.exponent),
                        shadow_std_db: self.shadowing_std_db.unwrap_or(d.path_loss.shadow_std_db),
                        reference_distance_m: 1.0,
                    },
                    noise_dbm: self.noise_dbm.unwrap_or(d.noise_dbm),
                })
            }
        };

        let eta_tr = match (self.eta_tr, self.epsilon) {
            (Some(_), Some(_)) => {
                return Err(config_err("set either `eta_tr` or `epsilon`, not both"));
            }
            (Some(v), None) => EtaTr::Fixed(v),
            (None, eps) => EtaTr::Epsilon {
                epsilon: eps.unwrap_or(0.5),
                base: self.eta_tr_log,
            },
        };

        let spec = SweepSpec {
            cells: self.cells.clone(),
            users: self.users.clone(),
            power,
            eta_i: self.eta_i.clone().unwrap_or_else(default_eta_grid),
            schedulers: self.schedulers.clone(),
            trials: self.trials.unwrap_or(10_000),
            master_seed: self.seed.unwrap_or(1),
            channel,
            eta_tr,
            norm: self.interference_norm,
            rate_scope: match self.rate_scope {
                ScopeName::AllCells => RateScope::AllCells,
                ScopeName::CenterCell => RateScope::CenterCell,
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}
