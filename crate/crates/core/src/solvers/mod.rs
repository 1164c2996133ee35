//! Forward solvers: Du Fort–Frankel field model, lumped RC model and the
//! Crank–Nicolson reference used to synthesise observations.

pub mod dufort_frankel;
pub mod grid;
pub mod rc;
pub mod reference;

pub use dufort_frankel::{
    df_sensor_kelvin, df_step, solve_df, solve_df_levels, FieldTrace, LevelSelection, RobinBoundary,
    SchemeCoefficients,
};
pub use grid::{UniformGrid, PAPER_DT_S, PAPER_DX_M};
pub use rc::{rc_stability_limit, solve_rc, NodeTrace, RcDiscretization, RcSystemMatrices};
pub use reference::{crank_nicolson_sensor, solve_reference, solve_reference_with, ReferenceOptions, ReferenceTrace};

/// Steady temperature (K) at depth `x` of a wall with constant ambient
/// temperatures, from the series resistances `1/hL + L/k + 1/hR`.
pub fn steady_state_temperature(t_left: f64, t_right: f64, h_left: f64, h_right: f64, k: f64, l: f64, x: f64) -> f64 {
    let q = (t_right - t_left) / (1.0 / h_left + l / k + 1.0 / h_right);
    t_left + q * (1.0 / h_left + x / k)
}
