//! Exact derivative of the discrete Du Fort–Frankel march with respect to
//! one dimensionless parameter (`c*`, `k*` or `hL*`).
//!
//! Every update of the forward scheme is differentiated term by term, so the
//! tangent field `θ = ∂u/∂p` is the derivative of the discrete solution and
//! not of the continuous one.

use crate::error::Result;
use crate::problem::{DimensionlessProblem, ParameterKind};
use crate::schedule::{node_of, ObservationSchedule};
use crate::solvers::dufort_frankel::{march, RobinBoundary};
use crate::solvers::grid::UniformGrid;

use super::{Model, SensitivityTrace};

/// `∂λ/∂p` with `λ ∝ k*/c*`.
pub(crate) fn lambda_derivative(param: ParameterKind, lambda: f64, dp: &DimensionlessProblem) -> f64 {
    match param {
        ParameterKind::HeatCapacity => -lambda / dp.c_star,
        ParameterKind::Conductivity => lambda / dp.k_star,
        ParameterKind::SurfaceCoefficientLeft => 0.0,
    }
}

/// Derivative of the interior update. `u_new` is the forward level `n+1`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn interior_step(
    lambda: f64,
    dlambda: f64,
    u_cur: &[f64],
    u_old: &[f64],
    u_new: &[f64],
    th_cur: &[f64],
    th_old: &[f64],
    th_new: &mut [f64],
) {
    let n = u_cur.len();
    let den = 1.0 + lambda;
    for j in 1..n - 1 {
        let forced = dlambda * (u_cur[j + 1] + u_cur[j - 1] - u_old[j] - u_new[j]);
        th_new[j] = (forced + lambda * (th_cur[j + 1] + th_cur[j - 1]) + (1.0 - lambda) * th_old[j]) / den;
    }
}

/// Derivative of both discrete Robin relations at level `n+1`.
///
/// Left face: `a·u_0 = g(4u_1 - u_2) + Bi·hL*·u∞` with `g = k*/(2Δx*)` and
/// `a = 3g + Bi·hL*`, hence `a·θ_0 = g(4θ_1 - θ_2) + ∂g/∂p (4u_1 - u_2)
/// + ∂(Bi hL*)/∂p u∞ - ∂a/∂p u_0`. The right face depends on `k*` only.
pub(crate) fn apply_boundaries(
    param: ParameterKind,
    bc: &RobinBoundary,
    u: &[f64],
    th: &mut [f64],
    u_inf_left: f64,
) {
    let n = u.len();
    let g = bc.k_star / (2.0 * bc.dx_star);
    let dg = match param {
        ParameterKind::Conductivity => 1.0 / (2.0 * bc.dx_star),
        _ => 0.0,
    };
    let dexchange_left = match param {
        ParameterKind::SurfaceCoefficientLeft => bc.biot,
        _ => 0.0,
    };

    let a_left = 3.0 * g + bc.biot * bc.hl_star;
    let rhs_left = g * (4.0 * th[1] - th[2]) + dg * (4.0 * u[1] - u[2]) + dexchange_left * u_inf_left
        - (3.0 * dg + dexchange_left) * u[0];
    th[0] = rhs_left / a_left;

    let a_right = 3.0 * g + bc.biot * bc.hr_star;
    let rhs_right = g * (4.0 * th[n - 2] - th[n - 3]) + dg * (4.0 * u[n - 2] - u[n - 3]) - 3.0 * dg * u[n - 1];
    th[n - 1] = rhs_right / a_right;
}

/// Forward sensor series and its sensitivity, both dimensionless, at the
/// schedule instants, from a single march.
pub fn df_sensor_with_sensitivity(
    dp: &DimensionlessProblem,
    grid: &UniformGrid,
    param: ParameterKind,
    schedule: &ObservationSchedule,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let node = node_of(schedule.x_obs, dp.thickness, grid.nx)?;
    let levels = schedule.levels(grid.dt_star * dp.scales.time)?;
    if let Some(&last) = levels.last() {
        if last >= grid.nt {
            return Err(crate::Error::OffGrid(format!(
                "instant beyond the last level {}",
                grid.nt - 1
            )));
        }
    }
    let mut u_out = Vec::with_capacity(levels.len());
    let mut th_out = Vec::with_capacity(levels.len());
    let mut cursor = 0;
    march(dp, grid, Some(param), |n, u, th| {
        while cursor < levels.len() && levels[cursor] == n {
            u_out.push(u[node]);
            th_out.push(th[node]);
            cursor += 1;
        }
    })?;
    Ok((u_out, th_out))
}

/// Sensitivity of the dimensionless sensor reading to the dimensionless
/// parameter `param`, at the schedule instants.
pub fn solve_sensitivity_df(
    dp: &DimensionlessProblem,
    grid: &UniformGrid,
    param: ParameterKind,
    schedule: &ObservationSchedule,
) -> Result<SensitivityTrace> {
    let (_, values) = df_sensor_with_sensitivity(dp, grid, param, schedule)?;
    Ok(SensitivityTrace {
        times: schedule.instants.clone(),
        values,
        model: Model::DuFortFrankel,
        param,
    })
}
