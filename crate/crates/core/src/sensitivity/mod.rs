//! Parameter sensitivities of both direct models, computed as exact
//! derivatives of the discrete schemes.
//!
//! Du Fort–Frankel sensitivities are taken with respect to the dimensionless
//! parameters (`c*`, `k*`, `hL*`) of the dimensionless sensor reading; RC
//! sensitivities are dimensional (`∂T2/∂c` etc.).

pub(crate) mod df;
mod rc;

use serde::{Deserialize, Serialize};

pub use crate::problem::ParameterKind;
pub use df::{df_sensor_with_sensitivity, solve_sensitivity_df};
pub use rc::{rc_sensor_with_sensitivity, rc_with_sensitivity, solve_sensitivity_rc};

/// Direct model used to explain the observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "DF")]
    DuFortFrankel,
    #[serde(rename = "RC")]
    Rc,
}

impl Model {
    pub fn label(self) -> &'static str {
        match self {
            Model::DuFortFrankel => "DF",
            Model::Rc => "RC",
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Model {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "df" => Ok(Model::DuFortFrankel),
            "rc" => Ok(Model::Rc),
            other => Err(crate::Error::InvalidInput(format!("unknown model '{other}' (expected df or rc)"))),
        }
    }
}

/// Sensor sensitivity series at the observation instants.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityTrace {
    /// s
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub model: Model,
    pub param: ParameterKind,
}
