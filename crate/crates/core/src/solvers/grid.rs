use crate::error::{Error, Result};
use crate::problem::DimensionlessProblem;

/// Paper discretisation: Δx = 2.2 mm, Δt = 3.6 s.
pub const PAPER_DX_M: f64 = 2.2e-3;
pub const PAPER_DT_S: f64 = 3.6;

/// Smallest node count: the one-sided boundary stencils use three nodes on
/// each side.
pub const MIN_NODES: usize = 5;

/// Uniform space-time grid in dimensionless units on `[0, 1] × [0, tf*]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    pub dx_star: f64,
    pub dt_star: f64,
    pub nx: usize,
    pub nt: usize,
}

impl UniformGrid {
    /// Grid with `nx` nodes and enough levels of size `dt_star` to cover
    /// `tf_star`.
    pub fn new(nx: usize, dt_star: f64, tf_star: f64) -> Result<Self> {
        if nx < MIN_NODES {
            return Err(Error::invalid(format!("grid needs at least {MIN_NODES} nodes, got {nx}")));
        }
        if !(dt_star > 0.0 && dt_star.is_finite()) || !(tf_star > 0.0) {
            return Err(Error::invalid("time step and horizon must be > 0"));
        }
        let steps = (tf_star / dt_star - 1e-9).ceil().max(1.0) as usize;
        Ok(Self {
            dx_star: 1.0 / (nx - 1) as f64,
            dt_star,
            nx,
            nt: steps + 1,
        })
    }

    /// Grid from dimensional steps; `dx` (m) must divide the wall thickness.
    pub fn from_steps(dp: &DimensionlessProblem, dx: f64, dt: f64) -> Result<Self> {
        if !(dx > 0.0 && dt > 0.0) {
            return Err(Error::invalid("space and time steps must be > 0"));
        }
        let cells = dp.thickness / dx;
        let n = cells.round();
        if (cells - n).abs() > 1e-9 * n.max(1.0) {
            return Err(Error::invalid(format!(
                "space step {dx} m does not divide the thickness {} m",
                dp.thickness
            )));
        }
        Self::new(n as usize + 1, dt / dp.scales.time, dp.tf_star)
    }

    pub fn paper(dp: &DimensionlessProblem) -> Result<Self> {
        Self::from_steps(dp, PAPER_DX_M, PAPER_DT_S)
    }

    pub fn time_star(&self, level: usize) -> f64 {
        level as f64 * self.dt_star
    }

    /// Same horizon with the space step divided by `space` and the time step
    /// divided by `time`.
    pub fn refined(&self, space: usize, time: usize) -> Result<Self> {
        let tf = (self.nt - 1) as f64 * self.dt_star;
        Self::new((self.nx - 1) * space + 1, self.dt_star / time as f64, tf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{nondimensionalize, Material, ReferenceScales, WallProblem};

    #[test]
    fn paper_grid() {
        let dp = nondimensionalize(
            &WallProblem::paper(Material::from_catalogue(3).unwrap(), 15.0),
            &ReferenceScales::default(),
        )
        .unwrap();
        let g = UniformGrid::paper(&dp).unwrap();
        assert_eq!(g.nx, 101);
        assert_eq!(g.nt, 20_001);
        assert!((g.dx_star - 0.01).abs() < 1e-15);
        assert!((g.dt_star - 1e-3).abs() < 1e-15);
        assert!(((g.nt - 1) as f64 * g.dt_star - dp.tf_star).abs() < 1e-9);
    }

    #[test]
    fn rejects_small_or_misaligned_grids() {
        assert!(UniformGrid::new(4, 1e-3, 1.0).is_err());
        let dp = nondimensionalize(
            &WallProblem::paper(Material::from_catalogue(3).unwrap(), 15.0),
            &ReferenceScales::default(),
        )
        .unwrap();
        assert!(UniformGrid::from_steps(&dp, 0.003, 3.6).is_err());
    }
}
