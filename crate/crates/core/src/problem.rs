//! Physical description of the wall problem and its dimensionless form.
//!
//! Temperatures are carried in Kelvin everywhere inside the crate. Celsius only
//! appears at the file and command-line boundary (see [`celsius_to_kelvin`]).
//!
//! The heat capacity `c` is a *volumetric* heat capacity in J/(m³·K): the
//! diffusion equation `c ∂T/∂t = k ∂²T/∂x²` carries no density factor.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO_CELSIUS: f64 = 273.15;

/// Baseline of the reference forcings, 20 °C.
pub const PAPER_BASELINE_K: f64 = 293.15;

pub fn celsius_to_kelvin(v: f64) -> f64 {
    v + ZERO_CELSIUS
}

pub fn kelvin_to_celsius(v: f64) -> f64 {
    v - ZERO_CELSIUS
}

/// A homogeneous wall material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub id: u32,
    /// Volumetric heat capacity, J/(m³·K).
    pub heat_capacity: f64,
    /// Thermal conductivity, W/(m·K).
    pub conductivity: f64,
    pub name: String,
}

impl Material {
    pub fn new(id: u32, heat_capacity: f64, conductivity: f64, name: impl Into<String>) -> Result<Self> {
        if !(heat_capacity > 0.0 && heat_capacity.is_finite()) {
            return Err(Error::invalid(format!("heat capacity must be > 0, got {heat_capacity}")));
        }
        if !(conductivity > 0.0 && conductivity.is_finite()) {
            return Err(Error::invalid(format!("conductivity must be > 0, got {conductivity}")));
        }
        Ok(Self {
            id,
            heat_capacity,
            conductivity,
            name: name.into(),
        })
    }

    /// The five reference materials (insulation, wood, brick, concrete, stone).
    pub fn catalogue() -> Vec<Material> {
        [
            (1, 5e-2, 5e-2, "insulation"),
            (2, 5e-1, 5e-1, "wood"),
            (3, 1.5, 1.0, "brick"),
            (4, 2.0, 1.5, "concrete"),
            (5, 2.5, 2.5, "stone"),
        ]
        .into_iter()
        .map(|(id, c_mj, k, name)| Material {
            id,
            heat_capacity: c_mj * 1e6,
            conductivity: k,
            name: name.to_string(),
        })
        .collect()
    }

    pub fn from_catalogue(id: u32) -> Result<Material> {
        Self::catalogue()
            .into_iter()
            .find(|m| m.id == id)
            .ok_or_else(|| Error::invalid(format!("unknown material id {id} (expected 1..=5)")))
    }
}

/// One term of a custom ambient-temperature signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ForcingTerm {
    /// `amplitude · sin(2π t / period)`
    Sine { amplitude: f64, period: f64 },
    /// `amplitude · tanh(t / time_constant)`
    Tanh { amplitude: f64, time_constant: f64 },
}

impl ForcingTerm {
    fn eval(&self, t: f64) -> f64 {
        match *self {
            ForcingTerm::Sine { amplitude, period } => amplitude * (2.0 * PI * t / period).sin(),
            ForcingTerm::Tanh {
                amplitude,
                time_constant,
            } => amplitude * (t / time_constant).tanh(),
        }
    }

    fn validate(&self) -> Result<()> {
        let (a, s) = match *self {
            ForcingTerm::Sine { amplitude, period } => (amplitude, period),
            ForcingTerm::Tanh {
                amplitude,
                time_constant,
            } => (amplitude, time_constant),
        };
        if !a.is_finite() || !(s > 0.0 && s.is_finite()) {
            return Err(Error::invalid("forcing term needs a finite amplitude and a positive period"));
        }
        Ok(())
    }
}

/// Ambient temperature imposed at one face of the wall, in Kelvin, as a
/// closed-form function of time in seconds.
#[derive(Debug, Clone, PartialEq)]
pub enum ForcingSignal {
    Constant { baseline: f64 },
    /// `T0 + 10 sin(2πt / 20 h) + 10 sin(2πt / 2 h)`
    PaperLeft { baseline: f64 },
    /// `T0 + 20 tanh(t / 4 h) − 10 sin(2πt / 4 h)`
    PaperRight { baseline: f64 },
    SumOfTerms { baseline: f64, terms: Vec<ForcingTerm> },
}

impl ForcingSignal {
    pub fn paper_left() -> Self {
        ForcingSignal::PaperLeft {
            baseline: PAPER_BASELINE_K,
        }
    }

    pub fn paper_right() -> Self {
        ForcingSignal::PaperRight {
            baseline: PAPER_BASELINE_K,
        }
    }

    pub fn baseline(&self) -> f64 {
        match self {
            ForcingSignal::Constant { baseline }
            | ForcingSignal::PaperLeft { baseline }
            | ForcingSignal::PaperRight { baseline }
            | ForcingSignal::SumOfTerms { baseline, .. } => *baseline,
        }
    }

    /// Temperature in K at time `t` (s).
    pub fn eval(&self, t: f64) -> f64 {
        const HOUR: f64 = 3600.0;
        match self {
            ForcingSignal::Constant { baseline } => *baseline,
            ForcingSignal::PaperLeft { baseline } => {
                baseline
                    + 10.0 * (2.0 * PI / (20.0 * HOUR) * t).sin()
                    + 10.0 * (2.0 * PI / (2.0 * HOUR) * t).sin()
            }
            ForcingSignal::PaperRight { baseline } => {
                baseline + 20.0 * (t / (4.0 * HOUR)).tanh() - 10.0 * (2.0 * PI / (4.0 * HOUR) * t).sin()
            }
            ForcingSignal::SumOfTerms { baseline, terms } => {
                baseline + terms.iter().map(|term| term.eval(t)).sum::<f64>()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let b = self.baseline();
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::invalid(format!("forcing baseline must be a positive Kelvin value, got {b}")));
        }
        if let ForcingSignal::SumOfTerms { terms, .. } = self {
            terms.iter().try_for_each(ForcingTerm::validate)?;
        }
        Ok(())
    }
}

/// The three parameters that can be identified, one at a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterKind {
    HeatCapacity,
    Conductivity,
    SurfaceCoefficientLeft,
}

impl ParameterKind {
    pub const ALL: [ParameterKind; 3] = [
        ParameterKind::HeatCapacity,
        ParameterKind::Conductivity,
        ParameterKind::SurfaceCoefficientLeft,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            ParameterKind::HeatCapacity => "c",
            ParameterKind::Conductivity => "k",
            ParameterKind::SurfaceCoefficientLeft => "hL",
        }
    }

    /// Reference value used to make this parameter dimensionless.
    pub fn reference_value(self, scales: &ReferenceScales) -> f64 {
        match self {
            ParameterKind::HeatCapacity => scales.heat_capacity,
            ParameterKind::Conductivity => scales.conductivity,
            ParameterKind::SurfaceCoefficientLeft => scales.surface_coefficient,
        }
    }
}

impl std::str::FromStr for ParameterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c" | "heat_capacity" | "capacity" => Ok(ParameterKind::HeatCapacity),
            "k" | "conductivity" => Ok(ParameterKind::Conductivity),
            "hl" | "h_l" | "surface_coefficient_left" => Ok(ParameterKind::SurfaceCoefficientLeft),
            other => Err(Error::invalid(format!("unknown parameter '{other}' (expected c, k or hL)"))),
        }
    }
}

/// Wall geometry, surface exchange, initial state and ambient forcing.
#[derive(Debug, Clone, PartialEq)]
pub struct WallProblem {
    /// Thickness L, m.
    pub thickness: f64,
    /// Surface heat transfer coefficients, W/(m²·K).
    pub h_left: f64,
    pub h_right: f64,
    /// Uniform initial temperature, K.
    pub initial_temperature: f64,
    pub forcing_left: ForcingSignal,
    pub forcing_right: ForcingSignal,
    /// Time horizon, s.
    pub horizon: f64,
    pub material: Material,
}

impl WallProblem {
    /// The 22 cm wall driven by the reference forcings over 20 h, `h_R = 5`.
    pub fn paper(material: Material, h_left: f64) -> Self {
        Self {
            thickness: 0.22,
            h_left,
            h_right: 5.0,
            initial_temperature: PAPER_BASELINE_K,
            forcing_left: ForcingSignal::paper_left(),
            forcing_right: ForcingSignal::paper_right(),
            horizon: 72_000.0,
            material,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.thickness) {
            return Err(Error::invalid(format!("wall thickness must be > 0, got {}", self.thickness)));
        }
        if !(self.h_left >= 0.0 && self.h_left.is_finite()) || !(self.h_right >= 0.0 && self.h_right.is_finite())
        {
            return Err(Error::invalid("surface coefficients must be >= 0"));
        }
        if !positive(self.initial_temperature) {
            return Err(Error::invalid("initial temperature must be a positive Kelvin value"));
        }
        if !positive(self.horizon) {
            return Err(Error::invalid(format!("time horizon must be > 0, got {}", self.horizon)));
        }
        if !positive(self.material.heat_capacity) || !positive(self.material.conductivity) {
            return Err(Error::invalid("material properties must be > 0"));
        }
        self.forcing_left.validate()?;
        self.forcing_right.validate()
    }

    pub fn half_thickness(&self) -> f64 {
        self.thickness / 2.0
    }

    pub fn parameter(&self, kind: ParameterKind) -> f64 {
        match kind {
            ParameterKind::HeatCapacity => self.material.heat_capacity,
            ParameterKind::Conductivity => self.material.conductivity,
            ParameterKind::SurfaceCoefficientLeft => self.h_left,
        }
    }

    /// Copy of the problem with one parameter replaced.
    pub fn with_parameter(&self, kind: ParameterKind, value: f64) -> Self {
        let mut out = self.clone();
        match kind {
            ParameterKind::HeatCapacity => out.material.heat_capacity = value,
            ParameterKind::Conductivity => out.material.conductivity = value,
            ParameterKind::SurfaceCoefficientLeft => out.h_left = value,
        }
        out
    }
}

/// Reference scales of the dimensionless formulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceScales {
    /// s
    pub time: f64,
    /// K
    pub temperature: f64,
    /// W/(m·K)
    pub conductivity: f64,
    /// J/(m³·K)
    pub heat_capacity: f64,
    /// W/(m²·K)
    pub surface_coefficient: f64,
}

impl Default for ReferenceScales {
    fn default() -> Self {
        Self {
            time: 3600.0,
            temperature: 273.15,
            conductivity: 1.0,
            heat_capacity: 1.5e6,
            surface_coefficient: 5.0,
        }
    }
}

impl ReferenceScales {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.time,
            self.temperature,
            self.conductivity,
            self.heat_capacity,
            self.surface_coefficient,
        ];
        if all.iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::invalid("reference scales must all be strictly positive"))
        }
    }
}

/// The problem in dimensionless variables `u = T/T_ref`, `x* = x/L`,
/// `t* = t/t_ref`.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionlessProblem {
    pub k_star: f64,
    pub c_star: f64,
    pub hl_star: f64,
    pub hr_star: f64,
    pub fourier: f64,
    pub biot: f64,
    pub u0: f64,
    pub tf_star: f64,
    pub scales: ReferenceScales,
    /// Wall thickness, m; kept for mapping sensor positions.
    pub thickness: f64,
    forcing_left: ForcingSignal,
    forcing_right: ForcingSignal,
}

impl DimensionlessProblem {
    pub fn u_inf_left(&self, t_star: f64) -> f64 {
        self.forcing_left.eval(t_star * self.scales.time) / self.scales.temperature
    }

    pub fn u_inf_right(&self, t_star: f64) -> f64 {
        self.forcing_right.eval(t_star * self.scales.time) / self.scales.temperature
    }

    pub fn to_kelvin(&self, u: f64) -> f64 {
        u * self.scales.temperature
    }

    pub fn to_dimensionless(&self, temperature: f64) -> f64 {
        temperature / self.scales.temperature
    }

    /// Dimensionless value of parameter `kind`.
    pub fn parameter(&self, kind: ParameterKind) -> f64 {
        match kind {
            ParameterKind::HeatCapacity => self.c_star,
            ParameterKind::Conductivity => self.k_star,
            ParameterKind::SurfaceCoefficientLeft => self.hl_star,
        }
    }
}

pub fn nondimensionalize(problem: &WallProblem, scales: &ReferenceScales) -> Result<DimensionlessProblem> {
    problem.validate()?;
    scales.validate()?;
    let l = problem.thickness;
    Ok(DimensionlessProblem {
        k_star: problem.material.conductivity / scales.conductivity,
        c_star: problem.material.heat_capacity / scales.heat_capacity,
        hl_star: problem.h_left / scales.surface_coefficient,
        hr_star: problem.h_right / scales.surface_coefficient,
        fourier: scales.time * scales.conductivity / (scales.heat_capacity * l * l),
        biot: scales.surface_coefficient * l / scales.conductivity,
        u0: problem.initial_temperature / scales.temperature,
        tf_star: problem.horizon / scales.time,
        scales: *scales,
        thickness: l,
        forcing_left: problem.forcing_left.clone(),
        forcing_right: problem.forcing_right.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn brick() -> Material {
        Material::from_catalogue(3).unwrap()
    }

    #[test]
    fn brick_with_default_scales() {
        let dp = nondimensionalize(&WallProblem::paper(brick(), 15.0), &ReferenceScales::default()).unwrap();
        assert_relative_eq!(dp.k_star, 1.0);
        assert_relative_eq!(dp.c_star, 1.0);
        assert_relative_eq!(dp.hl_star, 3.0);
        assert_relative_eq!(dp.hr_star, 1.0);
        // 3600 / (1.5e6 * 0.0484) evaluated by hand: 3600 / 72600
        assert_relative_eq!(dp.fourier, 3600.0 / 72_600.0, max_relative = 1e-14);
        assert_relative_eq!(dp.fourier, 0.049_586_776_859_504_13, max_relative = 1e-12);
        assert_relative_eq!(dp.biot, 1.1, max_relative = 1e-14);
        assert_relative_eq!(dp.tf_star, 20.0);
        assert_relative_eq!(dp.u0, 293.15 / 273.15);
    }

    #[test]
    fn reference_values_scale_to_one() {
        let s = ReferenceScales::default();
        let m = Material::new(9, s.heat_capacity, s.conductivity, "ref").unwrap();
        let dp = nondimensionalize(&WallProblem::paper(m, s.surface_coefficient), &s).unwrap();
        assert_eq!((dp.k_star, dp.c_star, dp.hl_star), (1.0, 1.0, 1.0));
    }

    #[test]
    fn insulation_ratios() {
        let m = Material::from_catalogue(1).unwrap();
        let dp = nondimensionalize(&WallProblem::paper(m, 15.0), &ReferenceScales::default()).unwrap();
        assert_relative_eq!(dp.k_star, 0.05, max_relative = 1e-14);
        assert_relative_eq!(dp.c_star, 1.0 / 30.0, max_relative = 1e-14);
    }

    #[test]
    fn rejects_bad_geometry_and_scales() {
        let mut p = WallProblem::paper(brick(), 15.0);
        p.thickness = 0.0;
        assert!(nondimensionalize(&p, &ReferenceScales::default()).is_err());
        let p = WallProblem::paper(brick(), 15.0);
        let s = ReferenceScales {
            time: -1.0,
            ..Default::default()
        };
        assert!(nondimensionalize(&p, &s).is_err());
        assert!(Material::new(1, 0.0, 1.0, "x").is_err());
        assert!(Material::new(1, 1.0, -1.0, "x").is_err());
        assert!(Material::from_catalogue(6).is_err());
    }

    #[test]
    fn paper_forcings() {
        let left = ForcingSignal::paper_left();
        let right = ForcingSignal::paper_right();
        assert_eq!(left.eval(0.0), 293.15);
        assert_eq!(right.eval(0.0), 293.15);
        // tanh(1) = 0.7615941559557649, sin(2π) ≈ -2.4e-16
        assert_relative_eq!(right.eval(4.0 * 3600.0), 293.15 + 20.0 * 0.761_594_155_955_764_9, epsilon = 1e-12);
    }

    #[test]
    fn custom_terms_match_paper_left() {
        let custom = ForcingSignal::SumOfTerms {
            baseline: PAPER_BASELINE_K,
            terms: vec![
                ForcingTerm::Sine {
                    amplitude: 10.0,
                    period: 72_000.0,
                },
                ForcingTerm::Sine {
                    amplitude: 10.0,
                    period: 7_200.0,
                },
            ],
        };
        for i in 0..500 {
            let t = i as f64 * 137.0;
            assert_relative_eq!(custom.eval(t), ForcingSignal::paper_left().eval(t), epsilon = 1e-12);
        }
    }

    #[test]
    fn forcing_is_continuous_on_a_sampled_grid() {
        for f in [ForcingSignal::paper_left(), ForcingSignal::paper_right()] {
            for i in 0..2000 {
                let t = i as f64 * 36.0;
                let jump = (f.eval(t + 1e-6) - f.eval(t)).abs();
                assert!(jump < 1e-6, "jump {jump} at t={t}");
            }
        }
    }

    #[test]
    fn celsius_round_trip() {
        assert_eq!(celsius_to_kelvin(20.0), 293.15);
        assert_eq!(celsius_to_kelvin(0.0), 273.15);
        for v in [-40.0, -1.5, 0.0, 20.0, 37.25, 1000.0] {
            assert_relative_eq!(kelvin_to_celsius(celsius_to_kelvin(v)), v, epsilon = 1e-12);
        }
    }

    #[test]
    fn dimensionless_forcing_commutes_with_scaling() {
        let s = ReferenceScales::default();
        let p = WallProblem::paper(brick(), 15.0);
        let dp = nondimensionalize(&p, &s).unwrap();
        for i in 0..100 {
            let t = i as f64 * 700.0;
            assert_relative_eq!(dp.u_inf_left(t / s.time) * s.temperature, p.forcing_left.eval(t), max_relative = 1e-14);
            assert_relative_eq!(dp.u_inf_right(t / s.time) * s.temperature, p.forcing_right.eval(t), max_relative = 1e-14);
        }
    }

    #[test]
    fn parameter_names_parse() {
        assert_eq!("c".parse::<ParameterKind>().unwrap(), ParameterKind::HeatCapacity);
        assert_eq!("hL".parse::<ParameterKind>().unwrap(), ParameterKind::SurfaceCoefficientLeft);
        assert!("rho".parse::<ParameterKind>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn temperature_round_trip(t in 1.0f64..2000.0, tref in 1.0f64..1000.0) {
                let s = ReferenceScales { temperature: tref, ..Default::default() };
                let dp = nondimensionalize(&WallProblem::paper(Material::from_catalogue(3).unwrap(), 15.0), &s).unwrap();
                let back = dp.to_kelvin(dp.to_dimensionless(t));
                prop_assert!((back - t).abs() <= 4.0 * f64::EPSILON * t);
            }

            #[test]
            fn fourier_and_biot_two_paths(l in 0.01f64..1.0) {
                let mut p = WallProblem::paper(Material::from_catalogue(3).unwrap(), 15.0);
                p.thickness = l;
                let dp = nondimensionalize(&p, &ReferenceScales::default()).unwrap();
                // second path: diffusive time over reference time, exchange over conduction
                let diffusive_time = 1.5e6 * l * l / 1.0;
                prop_assert!((dp.fourier - 3600.0 / diffusive_time).abs() <= 1e-12 * dp.fourier);
                prop_assert!((dp.biot - (1.0 / 1.0) / (1.0 / (5.0 * l))).abs() <= 1e-12 * dp.biot);
            }
        }
    }
}
