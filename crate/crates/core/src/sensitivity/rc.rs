//! Exact derivative of the discrete RC march. Differentiating
//! `A·T^{n+1} = B·T^n + Q^{n+1}` gives
//!
//! ```text
//! A·X^{n+1} = B·X^n + ∂B/∂p·T^n + ∂Q/∂p - ∂A/∂p·T^{n+1}
//! ```
//!
//! with `X = ∂T/∂p` and `X^0 = 0`.

use crate::error::Result;
use crate::problem::{ParameterKind, WallProblem};
use crate::schedule::ObservationSchedule;
use crate::solvers::rc::{check_finite, mat_vec, RcDiscretization, RcSystemMatrices};

use super::{Model, SensitivityTrace};

/// `T2` and `∂T2/∂p` at every level.
pub fn rc_with_sensitivity(
    problem: &WallProblem,
    disc: &RcDiscretization,
    param: ParameterKind,
) -> Result<(Vec<f64>, Vec<f64>)> {
    problem.validate()?;
    disc.check_stability(&problem.material)?;
    let sys = RcSystemMatrices::assemble(problem, disc);
    let dsys = RcSystemMatrices::derivative(problem, disc, param);
    let steps = disc.steps(problem.horizon);

    let mut temp = [problem.initial_temperature; 3];
    let mut sens = [0.0; 3];
    let mut t2 = Vec::with_capacity(steps + 1);
    let mut x2 = Vec::with_capacity(steps + 1);
    t2.push(temp[1]);
    x2.push(sens[1]);
    for n in 0..steps {
        let t = (n + 1) as f64 * disc.dt;
        let q = RcSystemMatrices::forcing(problem, t);
        let bt = mat_vec(&sys.b, &temp);
        let next = sys.solve([bt[0] + q[0], bt[1] + q[1], bt[2] + q[2]]);

        let bx = mat_vec(&sys.b, &sens);
        let dbt = mat_vec(&dsys.b, &temp);
        let dq = RcSystemMatrices::forcing_derivative(problem, t, param);
        let dat = mat_vec(&dsys.a, &next);
        let rhs: [f64; 3] = std::array::from_fn(|i| bx[i] + dbt[i] + dq[i] - dat[i]);
        sens = sys.solve(rhs);
        temp = next;

        check_finite(&temp, n + 1)?;
        check_finite(&sens, n + 1)?;
        t2.push(temp[1]);
        x2.push(sens[1]);
    }
    Ok((t2, x2))
}

/// Forward `T2` series (K) and `∂T2/∂p` at the schedule instants.
pub fn rc_sensor_with_sensitivity(
    problem: &WallProblem,
    disc: &RcDiscretization,
    param: ParameterKind,
    schedule: &ObservationSchedule,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let levels = schedule.levels(disc.dt)?;
    let (t2, x2) = rc_with_sensitivity(problem, disc, param)?;
    let pick = |s: &[f64]| -> Result<Vec<f64>> {
        levels
            .iter()
            .map(|&n| {
                s.get(n)
                    .copied()
                    .ok_or_else(|| crate::Error::OffGrid(format!("level {n} beyond the RC horizon")))
            })
            .collect()
    };
    Ok((pick(&t2)?, pick(&x2)?))
}

/// Sensitivity of `T2` (K) to the dimensional parameter `param`.
pub fn solve_sensitivity_rc(
    problem: &WallProblem,
    disc: &RcDiscretization,
    param: ParameterKind,
    schedule: &ObservationSchedule,
) -> Result<SensitivityTrace> {
    let (_, values) = rc_sensor_with_sensitivity(problem, disc, param, schedule)?;
    Ok(SensitivityTrace {
        times: schedule.instants.clone(),
        values,
        model: Model::Rc,
        param,
    })
}
