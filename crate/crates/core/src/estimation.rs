//! Scalar parameter identification by Gauss iterations.
//!
//! The cost is the mean squared mismatch between the direct model and the
//! observations over the observation instants,
//!
//! ```text
//! J(p) = (1/K) Σ_k (u_dir(t_k; p) - u_obs,k)²
//! ```
//!
//! Linearising `u_dir` around `p_m` and asking `∂J/∂p` to vanish gives
//!
//! ```text
//! p_{m+1} = p_m + Σ_k S_k (u_obs,k - u_dir,k) / Σ_k S_k²,   S = ∂u_dir/∂p
//! ```
//!
//! Iterations stop once both the relative parameter change `γ1` and the
//! relative cost change `γ2` fall below their thresholds.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{nondimensionalize, ParameterKind, ReferenceScales, WallProblem};
use crate::reliability::ObservationSample;
use crate::schedule::ObservationSchedule;
use crate::sensitivity::{df_sensor_with_sensitivity, rc_sensor_with_sensitivity, Model};
use crate::solvers::{RcDiscretization, UniformGrid, PAPER_DT_S, PAPER_DX_M};

/// Parameters are projected onto `[POSITIVITY_FLOOR · p_apr, ∞)` after each
/// update.
pub const POSITIVITY_FLOOR: f64 = 1e-3;

/// Below `(RESIDUAL_FLOOR · rms(u_obs))²` the cost is round-off and its
/// relative change carries no information.
pub const RESIDUAL_FLOOR: f64 = 1e-11;

/// Step sizes of both direct models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    /// Du Fort–Frankel space step, m.
    pub df_dx: f64,
    /// Du Fort–Frankel time step, s.
    pub df_dt: f64,
    /// RC time step, s.
    pub rc_dt: f64,
}

impl Default for Discretization {
    fn default() -> Self {
        Self {
            df_dx: PAPER_DX_M,
            df_dt: PAPER_DT_S,
            rc_dt: PAPER_DT_S,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationOptions {
    pub eta1: f64,
    pub eta2: f64,
    pub max_iterations: usize,
    pub model: Model,
    pub param: ParameterKind,
    /// Starting value `p_apr`, in the parameter's physical unit.
    pub initial_guess: f64,
    pub discretization: Discretization,
    pub scales: ReferenceScales,
}

impl EstimationOptions {
    pub fn new(model: Model, param: ParameterKind, initial_guess: f64) -> Self {
        Self {
            eta1: 1e-6,
            eta2: 1e-6,
            max_iterations: 100,
            model,
            param,
            initial_guess,
            discretization: Discretization::default(),
            scales: ReferenceScales::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eta1 > 0.0 && self.eta2 > 0.0) {
            return Err(Error::invalid("stopping thresholds must be > 0"));
        }
        if self.max_iterations < 1 {
            return Err(Error::invalid("iteration cap must be >= 1"));
        }
        if !(self.initial_guess > 0.0 && self.initial_guess.is_finite()) {
            return Err(Error::invalid(format!("initial guess must be > 0, got {}", self.initial_guess)));
        }
        self.scales.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub m: usize,
    /// Parameter after update `m`.
    pub p: f64,
    /// Cost at `p`, K².
    #[serde(rename = "J")]
    pub cost: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub p_est: f64,
    pub p_apr: f64,
    pub p_real: Option<f64>,
    pub ratio: Option<f64>,
    #[serde(rename = "N_m")]
    pub iterations: usize,
    pub converged: bool,
    #[serde(rename = "wall_time_s")]
    pub wall_time: f64,
    pub history: Vec<IterationRecord>,
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::invalid("empty series"));
    }
    Ok(())
}

/// Mean squared mismatch over the observation instants.
pub fn cost(u_dir: &[f64], u_obs: &[f64]) -> Result<f64> {
    check_lengths(u_dir, u_obs)?;
    let sum: f64 = u_dir.iter().zip(u_obs).map(|(d, o)| (d - o) * (d - o)).sum();
    Ok(sum / u_dir.len() as f64)
}

/// One Gauss step from `p_m` with sensitivity series `s`.
pub fn gauss_update(p_m: f64, u_dir: &[f64], u_obs: &[f64], s: &[f64]) -> Result<f64> {
    check_lengths(u_dir, u_obs)?;
    check_lengths(u_dir, s)?;
    let ss: f64 = s.iter().map(|v| v * v).sum();
    if ss == 0.0 || !ss.is_finite() {
        return Err(Error::NonIdentifiable);
    }
    let sr: f64 = s.iter().zip(u_obs.iter().zip(u_dir)).map(|(s, (o, d))| s * (o - d)).sum();
    Ok(p_m + sr / ss)
}

/// `(γ1, γ2)`: relative change of the parameter and of the residual norm.
pub fn convergence_criteria(p_m: f64, p_m1: f64, res_m: f64, res_m1: f64) -> Result<(f64, f64)> {
    if p_m == 0.0 {
        return Err(Error::ZeroDenominator("gamma1 (p_m = 0)"));
    }
    if res_m == 0.0 {
        return Err(Error::ZeroDenominator("gamma2 (residual = 0)"));
    }
    Ok(((p_m1 - p_m).abs() / p_m.abs(), (res_m1 - res_m).abs() / res_m))
}

/// Sensor series (K) and its derivative with respect to the dimensional
/// parameter, for one direct model.
pub struct DirectModel<'a> {
    pub problem: &'a WallProblem,
    pub schedule: &'a ObservationSchedule,
    pub model: Model,
    pub param: ParameterKind,
    pub discretization: Discretization,
    pub scales: ReferenceScales,
}

impl DirectModel<'_> {
    pub fn evaluate(&self, p: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let problem = self.problem.with_parameter(self.param, p);
        match self.model {
            Model::DuFortFrankel => {
                let dp = nondimensionalize(&problem, &self.scales)?;
                let grid = UniformGrid::from_steps(&dp, self.discretization.df_dx, self.discretization.df_dt)?;
                let (u, theta) = df_sensor_with_sensitivity(&dp, &grid, self.param, self.schedule)?;
                let t_ref = self.scales.temperature;
                // ∂T/∂p = T_ref · ∂u/∂p* / p_ref
                let chain = t_ref / self.param.reference_value(&self.scales);
                Ok((
                    u.into_iter().map(|v| v * t_ref).collect(),
                    theta.into_iter().map(|v| v * chain).collect(),
                ))
            }
            Model::Rc => {
                let disc = RcDiscretization::new(&problem, self.discretization.rc_dt)?;
                rc_sensor_with_sensitivity(&problem, &disc, self.param, self.schedule)
            }
        }
    }
}

/// Gauss iterations from `opts.initial_guess` until both stopping criteria
/// hold or the iteration cap is reached.
pub fn estimate(problem: &WallProblem, obs: &ObservationSample, opts: &EstimationOptions) -> Result<EstimationResult> {
    let start = Instant::now();
    opts.validate()?;
    problem.validate()?;
    obs.schedule.check_within(problem.thickness, problem.horizon)?;
    if obs.values.len() != obs.schedule.len() {
        return Err(Error::LengthMismatch {
            left: obs.values.len(),
            right: obs.schedule.len(),
        });
    }
    let direct = DirectModel {
        problem,
        schedule: &obs.schedule,
        model: opts.model,
        param: opts.param,
        discretization: opts.discretization,
        scales: opts.scales,
    };

    let p_apr = opts.initial_guess;
    let p_floor = POSITIVITY_FLOOR * p_apr;
    let rms_obs = (obs.values.iter().map(|v| v * v).sum::<f64>() / obs.values.len() as f64).sqrt();
    let cost_floor = (RESIDUAL_FLOOR * rms_obs).powi(2);

    let mut p = p_apr;
    let (mut u, mut s) = direct.evaluate(p)?;
    let mut j = cost(&u, &obs.values)?;
    let mut history = Vec::new();
    let mut converged = false;

    for m in 1..=opts.max_iterations {
        let p_next = gauss_update(p, &u, &obs.values, &s)?.max(p_floor);
        let (u_next, s_next) = direct.evaluate(p_next)?;
        let j_next = cost(&u_next, &obs.values)?;
        let (gamma1, gamma2) = if j <= cost_floor && j_next <= cost_floor {
            (convergence_criteria(p, p_next, 1.0, 1.0)?.0, 0.0)
        } else {
            convergence_criteria(p, p_next, j.max(cost_floor), j_next)?
        };
        history.push(IterationRecord {
            m,
            p: p_next,
            cost: j_next,
            gamma1,
            gamma2,
        });
        p = p_next;
        u = u_next;
        s = s_next;
        j = j_next;
        if gamma1 <= opts.eta1 && gamma2 <= opts.eta2 {
            converged = true;
            break;
        }
    }

    Ok(EstimationResult {
        p_est: p,
        p_apr,
        p_real: obs.p_real,
        ratio: obs.p_real.map(|r| p / r),
        iterations: history.len(),
        converged,
        wall_time: start.elapsed().as_secs_f64(),
        history,
    })
}
