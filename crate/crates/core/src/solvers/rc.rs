//! Lumped three-node (R2C) wall model in dimensional variables.
//!
//! `T1`, `T3` sit on the faces and `T2` inside the wall. The interior node is
//! marched with explicit Euler,
//!
//! ```text
//! T2^{n+1} = T2^n + k Δt / (c ℓ²) · (T3^n - 2 T2^n + T1^n),   ℓ = L/2
//! ```
//!
//! then the face nodes follow from the first-order Robin relations at the
//! new level, which together read `A·T^{n+1} = B·T^n + Q^{n+1}`.

use crate::error::{Error, Result};
use crate::problem::{Material, ParameterKind, WallProblem};
use crate::schedule::ObservationSchedule;
use crate::solvers::grid::PAPER_DT_S;

pub type Mat3 = [[f64; 3]; 3];

/// Largest explicit Euler step keeping the interior update stable:
/// `ℓ² c / (2k)`.
pub fn rc_stability_limit(material: &Material, half_thickness: f64) -> f64 {
    0.5 * half_thickness * half_thickness * material.heat_capacity / material.conductivity
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcDiscretization {
    /// ℓ = L/2, m.
    pub half_thickness: f64,
    /// s
    pub dt: f64,
}

impl RcDiscretization {
    pub fn new(problem: &WallProblem, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("RC time step must be > 0, got {dt}")));
        }
        Ok(Self {
            half_thickness: problem.half_thickness(),
            dt,
        })
    }

    pub fn paper(problem: &WallProblem) -> Self {
        Self {
            half_thickness: problem.half_thickness(),
            dt: PAPER_DT_S,
        }
    }

    pub fn check_stability(&self, material: &Material) -> Result<()> {
        let limit = rc_stability_limit(material, self.half_thickness);
        if self.dt > limit {
            return Err(Error::StabilityLimit { dt: self.dt, limit });
        }
        Ok(())
    }

    pub fn steps(&self, horizon: f64) -> usize {
        (horizon / self.dt - 1e-9).ceil().max(1.0) as usize
    }
}

/// Coefficient arrays of `A·T^{n+1} = B·T^n + Q^{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcSystemMatrices {
    pub a: Mat3,
    pub b: Mat3,
}

impl RcSystemMatrices {
    pub fn assemble(problem: &WallProblem, disc: &RcDiscretization) -> Self {
        let (k, c) = (problem.material.conductivity, problem.material.heat_capacity);
        let ell = disc.half_thickness;
        let g = k / ell;
        let r = k * disc.dt / (c * ell * ell);
        Self {
            a: [
                [problem.h_left + g, -g, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, -g, problem.h_right + g],
            ],
            b: [[0.0; 3], [r, 1.0 - 2.0 * r, r], [0.0; 3]],
        }
    }

    /// Entry-wise derivatives `∂A/∂p`, `∂B/∂p`.
    pub fn derivative(problem: &WallProblem, disc: &RcDiscretization, param: ParameterKind) -> Self {
        let (k, c) = (problem.material.conductivity, problem.material.heat_capacity);
        let ell = disc.half_thickness;
        let r = k * disc.dt / (c * ell * ell);
        let zero = [[0.0; 3]; 3];
        match param {
            ParameterKind::HeatCapacity => {
                let dr = -r / c;
                Self {
                    a: zero,
                    b: [[0.0; 3], [dr, -2.0 * dr, dr], [0.0; 3]],
                }
            }
            ParameterKind::Conductivity => {
                let dg = 1.0 / ell;
                let dr = r / k;
                Self {
                    a: [[dg, -dg, 0.0], [0.0; 3], [0.0, -dg, dg]],
                    b: [[0.0; 3], [dr, -2.0 * dr, dr], [0.0; 3]],
                }
            }
            ParameterKind::SurfaceCoefficientLeft => Self {
                a: [[1.0, 0.0, 0.0], [0.0; 3], [0.0; 3]],
                b: zero,
            },
        }
    }

    /// Forcing vector `Q` at time `t` (s).
    pub fn forcing(problem: &WallProblem, t: f64) -> [f64; 3] {
        [
            problem.h_left * problem.forcing_left.eval(t),
            0.0,
            problem.h_right * problem.forcing_right.eval(t),
        ]
    }

    pub fn forcing_derivative(problem: &WallProblem, t: f64, param: ParameterKind) -> [f64; 3] {
        match param {
            ParameterKind::SurfaceCoefficientLeft => [problem.forcing_left.eval(t), 0.0, 0.0],
            _ => [0.0; 3],
        }
    }

    /// Solves `A·x = rhs`, using that the middle row of `A` is the identity
    /// row and the face rows only couple to the middle node.
    pub fn solve(&self, rhs: [f64; 3]) -> [f64; 3] {
        let a = &self.a;
        let x2 = rhs[1];
        [(rhs[0] - a[0][1] * x2) / a[0][0], x2, (rhs[2] - a[2][1] * x2) / a[2][2]]
    }
}

pub(crate) fn mat_vec(m: &Mat3, v: &[f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

/// Temperatures of the three nodes at every time level.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTrace {
    /// s
    pub times: Vec<f64>,
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    pub t3: Vec<f64>,
    pub dt: f64,
}

impl NodeTrace {
    /// The interior node `T2` at the schedule instants. The RC model has a
    /// single interior node, so the sensor position is not used.
    pub fn sensor_series(&self, schedule: &ObservationSchedule) -> Result<Vec<f64>> {
        schedule
            .levels(self.dt)?
            .into_iter()
            .map(|n| {
                self.t2
                    .get(n)
                    .copied()
                    .ok_or_else(|| Error::OffGrid(format!("level {n} beyond the RC horizon")))
            })
            .collect()
    }
}

pub(crate) fn check_finite(state: &[f64; 3], level: usize) -> Result<()> {
    match state.iter().position(|v| !v.is_finite()) {
        Some(node) => Err(Error::Instability { level, node }),
        None => Ok(()),
    }
}

pub fn solve_rc(problem: &WallProblem, disc: &RcDiscretization) -> Result<NodeTrace> {
    problem.validate()?;
    disc.check_stability(&problem.material)?;
    let sys = RcSystemMatrices::assemble(problem, disc);
    let steps = disc.steps(problem.horizon);

    let t0 = problem.initial_temperature;
    let mut state = [t0; 3];
    let mut out = NodeTrace {
        times: Vec::with_capacity(steps + 1),
        t1: Vec::with_capacity(steps + 1),
        t2: Vec::with_capacity(steps + 1),
        t3: Vec::with_capacity(steps + 1),
        dt: disc.dt,
    };
    let mut push = |t: f64, s: &[f64; 3]| {
        out.times.push(t);
        out.t1.push(s[0]);
        out.t2.push(s[1]);
        out.t3.push(s[2]);
    };
    push(0.0, &state);
    for n in 0..steps {
        let t = (n + 1) as f64 * disc.dt;
        let q = RcSystemMatrices::forcing(problem, t);
        let bt = mat_vec(&sys.b, &state);
        state = sys.solve([bt[0] + q[0], bt[1] + q[1], bt[2] + q[2]]);
        check_finite(&state, n + 1)?;
        push(t, &state);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ForcingSignal;
    use approx::assert_relative_eq;

    #[test]
    fn stability_limits() {
        let brick = Material::from_catalogue(3).unwrap();
        assert_relative_eq!(rc_stability_limit(&brick, 0.11), 9075.0, max_relative = 1e-12);
        let insulation = Material::from_catalogue(1).unwrap();
        assert_relative_eq!(rc_stability_limit(&insulation, 0.11), 6050.0, max_relative = 1e-12);
        let mut prev = f64::INFINITY;
        for k in [1.0, 10.0, 1e3, 1e6, 1e12] {
            let m = Material::new(0, 1.5e6, k, "x").unwrap();
            let lim = rc_stability_limit(&m, 0.11);
            assert!(lim < prev);
            prev = lim;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn structured_solve_matches_cramer() {
        let p = WallProblem::paper(Material::from_catalogue(4).unwrap(), 7.0);
        let sys = RcSystemMatrices::assemble(&p, &RcDiscretization::paper(&p));
        let rhs = [3.0, -1.25, 0.5];
        let x = sys.solve(rhs);
        let det = |m: &Mat3| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let d = det(&sys.a);
        assert!(d.abs() > 0.0);
        for col in 0..3 {
            let mut m = sys.a;
            for row in 0..3 {
                m[row][col] = rhs[row];
            }
            assert_relative_eq!(x[col], det(&m) / d, max_relative = 1e-12);
        }
        assert_eq!(sys.a[1], [0.0, 1.0, 0.0]);
    }

    #[test]
    fn rejects_unstable_step() {
        let p = WallProblem::paper(Material::from_catalogue(3).unwrap(), 15.0);
        let disc = RcDiscretization::new(&p, 10_000.0).unwrap();
        assert!(matches!(solve_rc(&p, &disc), Err(Error::StabilityLimit { .. })));
    }

    #[test]
    fn equilibrium_is_preserved() {
        let mut p = WallProblem::paper(Material::from_catalogue(3).unwrap(), 15.0);
        p.forcing_left = ForcingSignal::Constant { baseline: 293.15 };
        p.forcing_right = ForcingSignal::Constant { baseline: 293.15 };
        let trace = solve_rc(&p, &RcDiscretization::paper(&p)).unwrap();
        assert_eq!(trace.t2.len(), 20_001);
        for s in [&trace.t1, &trace.t2, &trace.t3] {
            for v in s.iter() {
                assert_relative_eq!(*v, 293.15, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn first_entries_are_initial_temperature() {
        let p = WallProblem::paper(Material::from_catalogue(5).unwrap(), 15.0);
        let trace = solve_rc(&p, &RcDiscretization::paper(&p)).unwrap();
        assert_eq!((trace.t1[0], trace.t2[0], trace.t3[0]), (293.15, 293.15, 293.15));
        let series = trace.sensor_series(&ObservationSchedule::paper()).unwrap();
        assert_eq!(series.len(), 201);
        assert_eq!(series[1], trace.t2[100]);
    }
}
