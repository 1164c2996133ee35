//! Du Fort–Frankel three-level explicit scheme for the dimensionless wall
//! problem, with second-order one-sided Robin boundaries.
//!
//! The interior update replaces `u_j^n` by the average of levels `n+1` and
//! `n-1` in the forward-time centred-space scheme:
//!
//! ```text
//! u_j^{n+1} = ( λ u_{j+1}^n + λ u_{j-1}^n + (1 - λ) u_j^{n-1} ) / (1 + λ)
//! λ = 2 Fo (k*/c*) Δt* / Δx*²
//! ```
//!
//! Boundary nodes are recovered after each interior update from
//! `k* ∂u/∂x* = ± Bi h* (u - u∞)` with the stencil
//! `(-3u_0 + 4u_1 - u_2) / (2Δx*)` (mirrored on the right face), so both
//! boundaries are written at the new level `n+1`.
//!
//! The march needs two starting levels. The first step uses `u^{-1} := u^0`;
//! with a uniform initial field this leaves the interior of level 1 equal to
//! the initial field.

use crate::error::{Error, Result};
use crate::problem::{DimensionlessProblem, ParameterKind};
use crate::schedule::{node_of, ObservationSchedule};
use crate::sensitivity::df as tangent;
use crate::solvers::grid::UniformGrid;

/// The single coefficient of the interior update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeCoefficients {
    pub lambda: f64,
}

impl SchemeCoefficients {
    pub fn new(dp: &DimensionlessProblem, grid: &UniformGrid) -> Self {
        Self {
            lambda: 2.0 * dp.fourier * (dp.k_star / dp.c_star) * grid.dt_star / (grid.dx_star * grid.dx_star),
        }
    }
}

/// Interior update of one level. Only entries `1..n-1` of `next` are written.
pub fn df_step(lambda: f64, prev: &[f64], prev_prev: &[f64], next: &mut [f64]) {
    let n = prev.len();
    debug_assert!(prev_prev.len() == n && next.len() == n);
    let den = 1.0 + lambda;
    for j in 1..n - 1 {
        next[j] = (lambda * prev[j + 1] + lambda * prev[j - 1] + (1.0 - lambda) * prev_prev[j]) / den;
    }
}

/// Discretised Robin conditions at both faces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinBoundary {
    pub k_star: f64,
    pub biot: f64,
    pub hl_star: f64,
    pub hr_star: f64,
    pub dx_star: f64,
}

impl RobinBoundary {
    pub fn new(dp: &DimensionlessProblem, grid: &UniformGrid) -> Self {
        Self {
            k_star: dp.k_star,
            biot: dp.biot,
            hl_star: dp.hl_star,
            hr_star: dp.hr_star,
            dx_star: grid.dx_star,
        }
    }

    fn solve(&self, h_star: f64, near: f64, far: f64, u_inf: f64) -> f64 {
        let g = self.k_star / (2.0 * self.dx_star);
        let exchange = self.biot * h_star;
        let den = 3.0 * g + exchange;
        assert!(den > 0.0, "degenerate Robin denominator {den}");
        (g * (4.0 * near - far) + exchange * u_inf) / den
    }

    /// Value at `x* = 0` from the two nearest interior nodes.
    pub fn left_value(&self, u2: f64, u3: f64, u_inf: f64) -> f64 {
        self.solve(self.hl_star, u2, u3, u_inf)
    }

    /// Value at `x* = 1` from the two nearest interior nodes.
    pub fn right_value(&self, u_nm1: f64, u_nm2: f64, u_inf: f64) -> f64 {
        self.solve(self.hr_star, u_nm1, u_nm2, u_inf)
    }

    pub fn apply(&self, field: &mut [f64], u_inf_left: f64, u_inf_right: f64) {
        let n = field.len();
        field[0] = self.left_value(field[1], field[2], u_inf_left);
        field[n - 1] = self.right_value(field[n - 2], field[n - 3], u_inf_right);
    }
}

/// Which time levels a solve keeps.
#[derive(Debug, Clone, PartialEq)]
pub enum LevelSelection {
    All,
    /// Sorted, deduplicated level indices.
    Levels(Vec<usize>),
}

impl LevelSelection {
    pub fn levels(mut levels: Vec<usize>) -> Self {
        levels.sort_unstable();
        levels.dedup();
        LevelSelection::Levels(levels)
    }
}

/// Dimensionless temperature fields at a set of recorded levels.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTrace {
    pub grid: UniformGrid,
    pub levels: Vec<usize>,
    /// Dimensionless times of the recorded levels.
    pub times: Vec<f64>,
    pub fields: Vec<Vec<f64>>,
}

impl FieldTrace {
    pub fn node_series(&self, node: usize) -> Vec<f64> {
        self.fields.iter().map(|f| f[node]).collect()
    }

    /// Sensor series (dimensionless) at the schedule's position and instants.
    /// The sensor must sit on a node and each instant on a recorded level.
    pub fn sensor_series(&self, dp: &DimensionlessProblem, schedule: &ObservationSchedule) -> Result<Vec<f64>> {
        let node = node_of(schedule.x_obs, dp.thickness, self.grid.nx)?;
        let dt = self.grid.dt_star * dp.scales.time;
        schedule
            .levels(dt)?
            .into_iter()
            .map(|level| {
                self.levels
                    .binary_search(&level)
                    .map(|i| self.fields[i][node])
                    .map_err(|_| Error::OffGrid(format!("level {level} was not recorded")))
            })
            .collect()
    }
}

/// Time march shared by the forward solve and the sensitivity solve.
///
/// `visit(level, u, theta)` sees every level; `theta` is empty unless a
/// sensitivity parameter is given. The march itself runs on `u - u0`; stencil
/// and closures are affine with unit weight sum, so the shift is exact and
/// keeps round-off proportional to the excursion rather than to `u`.
pub(crate) fn march<F>(
    dp: &DimensionlessProblem,
    grid: &UniformGrid,
    sensitivity: Option<ParameterKind>,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(usize, &[f64], &[f64]),
{
    let nx = grid.nx;
    if nx < super::grid::MIN_NODES {
        return Err(Error::invalid(format!("grid needs at least 5 nodes, got {nx}")));
    }
    let lambda = SchemeCoefficients::new(dp, grid).lambda;
    let bc = RobinBoundary::new(dp, grid);

    let u0 = dp.u0;
    let mut u_old = vec![0.0; nx];
    let mut u_cur = vec![0.0; nx];
    let mut u_new = vec![0.0; nx];
    let mut shown = vec![u0; nx];
    let nth = if sensitivity.is_some() { nx } else { 0 };
    let mut th_old = vec![0.0; nth];
    let mut th_cur = vec![0.0; nth];
    let mut th_new = vec![0.0; nth];

    visit(0, &shown, &th_cur);
    for n in 0..grid.nt - 1 {
        df_step(lambda, &u_cur, &u_old, &mut u_new);
        let t = grid.time_star(n + 1);
        let (ul, ur) = (dp.u_inf_left(t) - u0, dp.u_inf_right(t) - u0);
        bc.apply(&mut u_new, ul, ur);

        if let Some(param) = sensitivity {
            let dlambda = tangent::lambda_derivative(param, lambda, dp);
            tangent::interior_step(lambda, dlambda, &u_cur, &u_old, &u_new, &th_cur, &th_old, &mut th_new);
            tangent::apply_boundaries(param, &bc, &u_new, &mut th_new, ul);
        }

        if let Some(node) = u_new.iter().chain(th_new.iter()).position(|v| !v.is_finite()) {
            return Err(Error::Instability {
                level: n + 1,
                node: node % nx,
            });
        }
        for (s, v) in shown.iter_mut().zip(&u_new) {
            *s = u0 + v;
        }
        visit(n + 1, &shown, &th_new);

        std::mem::swap(&mut u_old, &mut u_cur);
        std::mem::swap(&mut u_cur, &mut u_new);
        std::mem::swap(&mut th_old, &mut th_cur);
        std::mem::swap(&mut th_cur, &mut th_new);
    }
    Ok(())
}

/// Full march keeping every level.
pub fn solve_df(dp: &DimensionlessProblem, grid: &UniformGrid) -> Result<FieldTrace> {
    solve_df_levels(dp, grid, &LevelSelection::All)
}

pub fn solve_df_levels(dp: &DimensionlessProblem, grid: &UniformGrid, keep: &LevelSelection) -> Result<FieldTrace> {
    let mut levels = Vec::new();
    let mut fields = Vec::new();
    let mut cursor = 0;
    march(dp, grid, None, |n, u, _| {
        let wanted = match keep {
            LevelSelection::All => true,
            LevelSelection::Levels(ls) => {
                if cursor < ls.len() && ls[cursor] == n {
                    cursor += 1;
                    true
                } else {
                    false
                }
            }
        };
        if wanted {
            levels.push(n);
            fields.push(u.to_vec());
        }
    })?;
    if let LevelSelection::Levels(ls) = keep {
        if levels.len() != ls.len() {
            return Err(Error::OffGrid(format!(
                "requested levels beyond the last level {}",
                grid.nt - 1
            )));
        }
    }
    let times = levels.iter().map(|&n| grid.time_star(n)).collect();
    Ok(FieldTrace {
        grid: *grid,
        levels,
        times,
        fields,
    })
}

/// Sensor series in Kelvin at the schedule instants.
pub fn df_sensor_kelvin(
    dp: &DimensionlessProblem,
    grid: &UniformGrid,
    schedule: &ObservationSchedule,
) -> Result<Vec<f64>> {
    let dt = grid.dt_star * dp.scales.time;
    let trace = solve_df_levels(dp, grid, &LevelSelection::levels(schedule.levels(dt)?))?;
    Ok(trace
        .sensor_series(dp, schedule)?
        .into_iter()
        .map(|u| dp.to_kelvin(u))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{celsius_to_kelvin, nondimensionalize, ForcingSignal, Material, ReferenceScales, WallProblem};
    use approx::assert_relative_eq;

    #[test]
    fn step_with_unit_lambda() {
        let prev = [0.0, 4.0, 5.0, 2.0, 0.0];
        let prev_prev = [0.0, 0.0, 7.0, 0.0, 0.0];
        let mut next = [0.0; 5];
        df_step(1.0, &prev, &prev_prev, &mut next);
        assert_eq!(next[2], 3.0);
    }

    #[test]
    fn constant_field_is_a_fixed_point() {
        for lambda in [0.01, 0.5, 0.99174, 1.0, 7.3, 120.0] {
            let c = 1.073_219;
            let prev = [c; 7];
            let mut next = [0.0; 7];
            df_step(lambda, &prev, &prev, &mut next);
            for v in &next[1..6] {
                assert_relative_eq!(*v, c, max_relative = 1e-15);
            }
        }
    }

    #[test]
    fn step_on_paper_grid() {
        let lambda = 0.99174;
        let prev = [1.1, 1.1, 1.1];
        let prev_prev = [0.0, 1.0, 0.0];
        let mut next = [0.0; 3];
        df_step(lambda, &prev, &prev_prev, &mut next);
        let expected = (2.0 * 0.99174 * 1.1 + 0.00826 * 1.0) / 1.99174;
        assert_relative_eq!(next[1], expected, max_relative = 1e-14);
    }

    #[test]
    fn lambda_for_brick_on_paper_grid() {
        let dp = nondimensionalize(
            &WallProblem::paper(Material::from_catalogue(3).unwrap(), 15.0),
            &ReferenceScales::default(),
        )
        .unwrap();
        let grid = UniformGrid::paper(&dp).unwrap();
        let lambda = SchemeCoefficients::new(&dp, &grid).lambda;
        // 2 * (3600 / 72600) * 1e-3 / 1e-4
        assert_relative_eq!(lambda, 0.991_735_537_190_082_6, max_relative = 1e-12);
    }

    fn bc(hl_star: f64) -> RobinBoundary {
        RobinBoundary {
            k_star: 1.0,
            biot: 1.1,
            hl_star,
            hr_star: 1.0,
            dx_star: 0.01,
        }
    }

    #[test]
    fn adiabatic_left_face() {
        let v = bc(0.0).left_value(1.05, 1.04, 9.0);
        assert_relative_eq!(v, (4.0 * 1.05 - 1.04) / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn equilibrium_boundary() {
        let v = bc(3.0).left_value(1.1, 1.1, 1.1);
        assert_relative_eq!(v, 1.1, max_relative = 1e-15);
        let v = bc(3.0).right_value(0.9, 0.9, 0.9);
        assert_relative_eq!(v, 0.9, max_relative = 1e-15);
    }

    #[test]
    fn robin_scalar_equation() {
        // (3/(2·0.01) + 3.3)·u1 = (4·1.05 − 1.04)/(2·0.01) + 3.3·1.10
        let expected = ((4.0 * 1.05 - 1.04) / 0.02 + 3.3 * 1.10) / (150.0 + 3.3);
        assert_relative_eq!(bc(3.0).left_value(1.05, 1.04, 1.10), expected, max_relative = 1e-14);
        // residual of the discrete Robin condition itself
        let u1 = bc(3.0).left_value(1.05, 1.04, 1.10);
        let flux = (-1.04 + 4.0 * 1.05 - 3.0 * u1) / 0.02;
        assert!((flux - 1.1 * 3.0 * (u1 - 1.10)).abs() < 1e-12);
    }

    fn constant_problem(material: u32, tl: f64, tr: f64, t0: f64) -> WallProblem {
        let mut p = WallProblem::paper(Material::from_catalogue(material).unwrap(), 15.0);
        p.initial_temperature = t0;
        p.forcing_left = ForcingSignal::Constant { baseline: tl };
        p.forcing_right = ForcingSignal::Constant { baseline: tr };
        p
    }

    #[test]
    fn equilibrium_is_preserved() {
        let t0 = celsius_to_kelvin(20.0);
        let mut p = constant_problem(3, t0, t0, t0);
        p.horizon = 3600.0;
        let dp = nondimensionalize(&p, &ReferenceScales::default()).unwrap();
        let grid = UniformGrid::paper(&dp).unwrap();
        let trace = solve_df(&dp, &grid).unwrap();
        assert_eq!(trace.fields.len(), grid.nt);
        for f in &trace.fields {
            for v in f {
                assert_relative_eq!(*v, dp.u0, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn first_level_is_initial_field() {
        let p = WallProblem::paper(Material::from_catalogue(2).unwrap(), 15.0);
        let dp = nondimensionalize(&p, &ReferenceScales::default()).unwrap();
        let grid = UniformGrid::paper(&dp).unwrap();
        let trace = solve_df_levels(&dp, &grid, &LevelSelection::levels(vec![0, 1, 100])).unwrap();
        assert!(trace.fields[0].iter().all(|&v| v == dp.u0));
        // bootstrap leaves the interior of level 1 untouched
        assert!(trace.fields[1][1..100].iter().all(|&v| (v - dp.u0).abs() < 1e-15));
    }

    #[test]
    fn missing_levels_are_reported() {
        let p = WallProblem::paper(Material::from_catalogue(2).unwrap(), 15.0);
        let dp = nondimensionalize(&p, &ReferenceScales::default()).unwrap();
        let grid = UniformGrid::paper(&dp).unwrap();
        assert!(solve_df_levels(&dp, &grid, &LevelSelection::levels(vec![0, grid.nt + 3])).is_err());
    }
}
