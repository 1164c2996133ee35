//! Direct models of transient heat conduction through a wall, their exact
//! parameter sensitivities, a scalar Gauss least-squares estimator and a
//! Monte Carlo harness measuring how reliably each model recovers a known
//! parameter from noisy synthetic observations.

pub mod error;
pub mod estimation;
pub mod export;
pub mod problem;
pub mod reliability;
pub mod schedule;
pub mod sensitivity;
pub mod solvers;

pub use error::{Error, Result};
pub use problem::{
    celsius_to_kelvin, kelvin_to_celsius, nondimensionalize, DimensionlessProblem, ForcingSignal, ForcingTerm,
    Material, ParameterKind, ReferenceScales, WallProblem,
};
pub use schedule::ObservationSchedule;
pub use sensitivity::{Model, SensitivityTrace};
