//! Observation schedule and the strict mapping of sensor position and
//! observation instants onto solver grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack used when deciding that an instant falls on a time level
/// or a position falls on a node.
const ALIGN_TOL: f64 = 1e-9;

/// Sensor location and measurement instants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSchedule {
    /// Sensor position, m.
    pub x_obs: f64,
    /// Strictly increasing measurement times, s.
    pub instants: Vec<f64>,
}

impl ObservationSchedule {
    pub fn new(x_obs: f64, instants: Vec<f64>) -> Result<Self> {
        let s = Self { x_obs, instants };
        if s.instants.len() < 2 {
            return Err(Error::invalid("an observation schedule needs at least 2 instants"));
        }
        if s.instants.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::invalid("observation instants must be finite and >= 0"));
        }
        if s.instants.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("observation instants must be strictly increasing"));
        }
        Ok(s)
    }

    /// `count` instants spaced by `interval`, starting at 0.
    pub fn uniform(x_obs: f64, interval: f64, count: usize) -> Result<Self> {
        if !(interval > 0.0) {
            return Err(Error::invalid("observation interval must be > 0"));
        }
        Self::new(x_obs, (0..count).map(|k| k as f64 * interval).collect())
    }

    /// Mid-wall sensor, one reading every 360 s for 20 h (K = 201).
    pub fn paper() -> Self {
        Self::uniform(0.11, 360.0, 201).expect("static schedule is valid")
    }

    pub fn len(&self) -> usize {
        self.instants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instants.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.instants.last().expect("schedule is never empty")
    }

    /// Checks that the schedule fits a wall of thickness `l` over `horizon` s.
    pub fn check_within(&self, l: f64, horizon: f64) -> Result<()> {
        if !(0.0..=l).contains(&self.x_obs) {
            return Err(Error::invalid(format!("sensor position {} m outside [0, {l}]", self.x_obs)));
        }
        if self.last() > horizon * (1.0 + ALIGN_TOL) {
            return Err(Error::invalid(format!(
                "last observation instant {} s beyond the horizon {horizon} s",
                self.last()
            )));
        }
        Ok(())
    }

    /// Time-level index of every instant for a march with step `dt` (s).
    /// Instants that are not exact multiples of `dt` are rejected.
    pub fn levels(&self, dt: f64) -> Result<Vec<usize>> {
        self.instants.iter().map(|&t| level_of(t, dt)).collect()
    }
}

pub fn level_of(t: f64, dt: f64) -> Result<usize> {
    let q = t / dt;
    let n = q.round();
    if (q - n).abs() > ALIGN_TOL * n.max(1.0) {
        return Err(Error::OffGrid(format!(
            "instant {t} s is not a multiple of the time step {dt} s"
        )));
    }
    Ok(n as usize)
}

/// Zero-based node index of position `x` (m) on `nx` uniformly spaced nodes
/// spanning `[0, l]`. Positions between nodes are rejected.
pub fn node_of(x: f64, l: f64, nx: usize) -> Result<usize> {
    if !(0.0..=l).contains(&x) {
        return Err(Error::OffGrid(format!("position {x} m outside [0, {l}] m")));
    }
    let q = x / l * (nx - 1) as f64;
    let j = q.round();
    if (q - j).abs() > ALIGN_TOL * j.max(1.0) {
        return Err(Error::OffGrid(format!(
            "position {x} m does not fall on a node of the {nx}-node grid"
        )));
    }
    Ok(j as usize)
}
