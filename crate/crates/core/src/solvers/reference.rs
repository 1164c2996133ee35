//! High-accuracy reference solution of the continuous wall problem, used
//! only to synthesise observations.
//!
//! Crank–Nicolson in time, centred differences in space with ghost-node
//! Robin faces (second order everywhere). The starting grid is four times
//! finer than the Du Fort–Frankel paper grid in both space and time; both
//! steps are then halved until two successive solutions differ by less than
//! the requested accuracy at every observation instant.

use crate::error::{Error, Result};
use crate::problem::DimensionlessProblem;
use crate::schedule::ObservationSchedule;
use crate::solvers::grid::{PAPER_DT_S, PAPER_DX_M};

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTrace {
    /// Observation instants, s.
    pub times: Vec<f64>,
    /// Sensor temperatures, K.
    pub values: Vec<f64>,
    /// Largest change between the last two refinements, K.
    pub accuracy_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceOptions {
    /// Minimum refinement factor relative to the paper grid.
    pub base_refinement: usize,
    pub max_doublings: usize,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self {
            base_refinement: 4,
            max_doublings: 3,
        }
    }
}

/// Tridiagonal system `(I - τ/2 M)` factored for the Thomas algorithm.
struct Factored {
    lower: Vec<f64>,
    upper_mod: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl Factored {
    fn new(lower: &[f64], diag: &[f64], upper: &[f64]) -> Self {
        let n = diag.len();
        let mut upper_mod = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev_c = 0.0;
        for i in 0..n {
            let pivot = diag[i] - if i > 0 { lower[i] * prev_c } else { 0.0 };
            inv_pivot[i] = 1.0 / pivot;
            prev_c = upper[i] * inv_pivot[i];
            upper_mod[i] = prev_c;
        }
        Self {
            lower: lower.to_vec(),
            upper_mod,
            inv_pivot,
        }
    }

    fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper_mod[i] * rhs[i + 1];
        }
    }
}

/// Method-of-lines operator `dw/dt* = M w + g(t*)` for `w = u - u0`.
struct Operator {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    beta_left: f64,
    beta_right: f64,
}

impl Operator {
    fn new(dp: &DimensionlessProblem, intervals: usize) -> Self {
        let n = intervals + 1;
        let h = 1.0 / intervals as f64;
        let d = dp.fourier * dp.k_star / dp.c_star / (h * h);
        let beta_left = 2.0 * dp.fourier * dp.biot * dp.hl_star / (dp.c_star * h);
        let beta_right = 2.0 * dp.fourier * dp.biot * dp.hr_star / (dp.c_star * h);
        let mut lower = vec![d; n];
        let mut diag = vec![-2.0 * d; n];
        let mut upper = vec![d; n];
        lower[0] = 0.0;
        upper[n - 1] = 0.0;
        upper[0] = 2.0 * d;
        lower[n - 1] = 2.0 * d;
        diag[0] -= beta_left;
        diag[n - 1] -= beta_right;
        Self {
            lower,
            diag,
            upper,
            beta_left,
            beta_right,
        }
    }

    fn source(&self, dp: &DimensionlessProblem, t_star: f64) -> (f64, f64) {
        (
            self.beta_left * (dp.u_inf_left(t_star) - dp.u0),
            self.beta_right * (dp.u_inf_right(t_star) - dp.u0),
        )
    }

    fn factor(&self, tau: f64) -> Factored {
        let half = 0.5 * tau;
        let lower: Vec<f64> = self.lower.iter().map(|v| -half * v).collect();
        let diag: Vec<f64> = self.diag.iter().map(|v| 1.0 - half * v).collect();
        let upper: Vec<f64> = self.upper.iter().map(|v| -half * v).collect();
        Factored::new(&lower, &diag, &upper)
    }
}

/// Crank–Nicolson sensor series (K) on `intervals` cells with a time step no
/// larger than `max_dt` seconds; steps are shrunk to land on each instant.
pub fn crank_nicolson_sensor(
    dp: &DimensionlessProblem,
    intervals: usize,
    max_dt: f64,
    schedule: &ObservationSchedule,
) -> Result<Vec<f64>> {
    if intervals < 2 || !(max_dt > 0.0) {
        return Err(Error::invalid("reference grid needs >= 2 cells and a positive step"));
    }
    let n = intervals + 1;
    let op = Operator::new(dp, intervals);
    let x_star = schedule.x_obs / dp.thickness;
    if !(0.0..=1.0).contains(&x_star) {
        return Err(Error::invalid(format!("sensor position {} m outside the wall", schedule.x_obs)));
    }
    let q = x_star * intervals as f64;
    let j0 = (q.floor() as usize).min(intervals - 1);
    let frac = q - j0 as f64;
    let sensor = |w: &[f64]| dp.to_kelvin(dp.u0 + (1.0 - frac) * w[j0] + frac * w[j0 + 1]);

    let t_ref = dp.scales.time;
    let mut w = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut t_prev = 0.0_f64;
    let mut factored: Option<(f64, Factored)> = None;
    let mut out = Vec::with_capacity(schedule.len());

    for &t_obs in &schedule.instants {
        let span = t_obs - t_prev;
        if span > 0.0 {
            let substeps = ((span / max_dt) - 1e-9).ceil().max(1.0) as usize;
            let tau = span / substeps as f64 / t_ref;
            let reuse = matches!(&factored, Some((tau0, _)) if ((tau0 - tau) / tau).abs() < 1e-12);
            if !reuse {
                factored = Some((tau, op.factor(tau)));
            }
            let (_, lhs) = factored.as_ref().expect("factored above");
            let half = 0.5 * tau;
            for s in 0..substeps {
                let ta = t_prev / t_ref + s as f64 * tau;
                let (gl0, gr0) = op.source(dp, ta);
                let (gl1, gr1) = op.source(dp, ta + tau);
                for i in 0..n {
                    let mut mw = op.diag[i] * w[i];
                    if i > 0 {
                        mw += op.lower[i] * w[i - 1];
                    }
                    if i + 1 < n {
                        mw += op.upper[i] * w[i + 1];
                    }
                    rhs[i] = w[i] + half * mw;
                }
                rhs[0] += half * (gl0 + gl1);
                rhs[n - 1] += half * (gr0 + gr1);
                lhs.solve_in_place(&mut rhs);
                std::mem::swap(&mut w, &mut rhs);
            }
            if let Some(node) = w.iter().position(|v| !v.is_finite()) {
                return Err(Error::Instability { level: 0, node });
            }
        }
        out.push(sensor(&w));
        t_prev = t_obs;
    }
    Ok(out)
}

pub fn solve_reference(
    dp: &DimensionlessProblem,
    schedule: &ObservationSchedule,
    accuracy_target: f64,
) -> Result<ReferenceTrace> {
    solve_reference_with(dp, schedule, accuracy_target, &ReferenceOptions::default())
}

pub fn solve_reference_with(
    dp: &DimensionlessProblem,
    schedule: &ObservationSchedule,
    accuracy_target: f64,
    opts: &ReferenceOptions,
) -> Result<ReferenceTrace> {
    if !(accuracy_target > 0.0) {
        return Err(Error::invalid("reference accuracy target must be > 0"));
    }
    schedule.check_within(dp.thickness, dp.tf_star * dp.scales.time)?;
    let refine = opts.base_refinement.max(1) as f64;
    let base_cells = ((dp.thickness / PAPER_DX_M * refine) - 1e-9).ceil().max(8.0) as usize;
    let base_dt = PAPER_DT_S / refine;

    let mut coarse = crank_nicolson_sensor(dp, base_cells, base_dt, schedule)?;
    let mut last_change = f64::INFINITY;
    for d in 1..=opts.max_doublings {
        let scale = 1usize << d;
        let fine = crank_nicolson_sensor(dp, base_cells * scale, base_dt / scale as f64, schedule)?;
        last_change = fine
            .iter()
            .zip(&coarse)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if last_change < accuracy_target {
            return Ok(ReferenceTrace {
                times: schedule.instants.clone(),
                values: fine,
                accuracy_estimate: last_change,
            });
        }
        coarse = fine;
    }
    Err(Error::ReferenceNotConverged {
        target: accuracy_target,
        doublings: opts.max_doublings,
        last_change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{nondimensionalize, ForcingSignal, Material, ReferenceScales, WallProblem};

    #[test]
    fn thomas_solves_a_small_system() {
        // [2 1 0; 1 3 1; 0 1 2] x = [3 5 3]  ->  x = [1 1 1]
        let f = Factored::new(&[0.0, 1.0, 1.0], &[2.0, 3.0, 2.0], &[1.0, 1.0, 0.0]);
        let mut rhs = vec![3.0, 5.0, 3.0];
        f.solve_in_place(&mut rhs);
        for v in rhs {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn equilibrium_trace_is_constant() {
        let mut p = WallProblem::paper(Material::from_catalogue(3).unwrap(), 15.0);
        p.forcing_left = ForcingSignal::Constant { baseline: 293.15 };
        p.forcing_right = ForcingSignal::Constant { baseline: 293.15 };
        p.horizon = 3600.0;
        let dp = nondimensionalize(&p, &ReferenceScales::default()).unwrap();
        let s = ObservationSchedule::uniform(0.11, 360.0, 11).unwrap();
        let r = solve_reference(&dp, &s, 1e-6).unwrap();
        assert_eq!(r.accuracy_estimate, 0.0);
        assert!(r.values.iter().all(|v| (v - 293.15).abs() < 1e-12));
    }

    #[test]
    fn rejects_non_positive_target() {
        let p = WallProblem::paper(Material::from_catalogue(3).unwrap(), 15.0);
        let dp = nondimensionalize(&p, &ReferenceScales::default()).unwrap();
        assert!(solve_reference(&dp, &ObservationSchedule::paper(), 0.0).is_err());
    }

    #[test]
    fn unreachable_target_is_an_error() {
        let mut p = WallProblem::paper(Material::from_catalogue(3).unwrap(), 15.0);
        p.horizon = 3600.0;
        let dp = nondimensionalize(&p, &ReferenceScales::default()).unwrap();
        let s = ObservationSchedule::uniform(0.11, 360.0, 11).unwrap();
        let opts = ReferenceOptions {
            base_refinement: 1,
            max_doublings: 1,
        };
        assert!(matches!(
            solve_reference_with(&dp, &s, 1e-15, &opts),
            Err(Error::ReferenceNotConverged { .. })
        ));
    }
}
