mod common;

use common::{central_difference, constant_problem, direct, relative_l2};
use heatident::estimation::{DirectModel, Discretization};
use heatident::sensitivity::{solve_sensitivity_df, solve_sensitivity_rc};
use heatident::solvers::{RcDiscretization, UniformGrid};
use heatident::{
    celsius_to_kelvin, nondimensionalize, ForcingSignal, ForcingTerm, Material, Model, ObservationSchedule,
    ParameterKind, ReferenceScales, WallProblem,
};

fn custom_problem() -> WallProblem {
    let mut p = WallProblem::paper(Material::from_catalogue(2).unwrap(), 8.0);
    p.forcing_left = ForcingSignal::SumOfTerms {
        baseline: celsius_to_kelvin(12.0),
        terms: vec![
            ForcingTerm::Sine {
                amplitude: 6.0,
                period: 5400.0,
            },
            ForcingTerm::Tanh {
                amplitude: 4.0,
                time_constant: 9000.0,
            },
        ],
    };
    p.forcing_right = ForcingSignal::Constant {
        baseline: celsius_to_kelvin(26.0),
    };
    p.h_right = 3.0;
    p.horizon = 36_000.0;
    p
}

#[test]
fn oracle_on_custom_forcing_and_grid() {
    let p = custom_problem();
    let s = ObservationSchedule::uniform(0.044, 720.0, 51).unwrap();
    for model in [Model::DuFortFrankel, Model::Rc] {
        for param in ParameterKind::ALL {
            let mut d = direct(&p, &s, model, param);
            d.discretization = Discretization {
                df_dx: 2.75e-3,
                df_dt: 7.2,
                rc_dt: 7.2,
            };
            let p0 = p.parameter(param);
            let (_, sens) = d.evaluate(p0).unwrap();
            let fd = central_difference(&d, p0, 1e-6);
            let err = relative_l2(&sens, &fd);
            assert!(err < 1e-4, "{model} {}: {err:e}", param.symbol());
        }
    }
}

#[test]
fn sensitivity_vanishes_at_equilibrium() {
    let t0 = celsius_to_kelvin(20.0);
    let s = ObservationSchedule::uniform(0.11, 360.0, 21).unwrap();
    for m in Material::catalogue() {
        let p = constant_problem(m, 15.0, t0, t0, t0, 7200.0);
        let dp = nondimensionalize(&p, &ReferenceScales::default()).unwrap();
        let grid = UniformGrid::paper(&dp).unwrap();
        for param in ParameterKind::ALL {
            // p·∂T/∂p in K
            let df = solve_sensitivity_df(&dp, &grid, param, &s).unwrap();
            let scale = dp.to_kelvin(dp.parameter(param));
            let worst = df.values.iter().map(|v| (v * scale).abs()).fold(0.0, f64::max);
            assert!(worst < 1e-9, "DF {param:?}: {worst:e}");
            let rc = solve_sensitivity_rc(&p, &RcDiscretization::paper(&p), param, &s).unwrap();
            let worst = rc.values.iter().map(|v| (v * p.parameter(param)).abs()).fold(0.0, f64::max);
            assert!(worst < 1e-9, "RC {param:?}: {worst:e}");
        }
    }
}

#[test]
fn finite_difference_error_is_second_order_in_eps() {
    let p = WallProblem::paper(Material::from_catalogue(3).unwrap(), 15.0);
    let s = ObservationSchedule::paper();
    for model in [Model::DuFortFrankel, Model::Rc] {
        for param in ParameterKind::ALL {
            let d: DirectModel<'_> = direct(&p, &s, model, param);
            let p0 = p.parameter(param);
            let (_, sens) = d.evaluate(p0).unwrap();
            // large steps so truncation dominates round-off
            let e1 = relative_l2(&central_difference(&d, p0, 2e-2), &sens);
            let e2 = relative_l2(&central_difference(&d, p0, 4e-2), &sens);
            let ratio = e2 / e1;
            assert!((3.0..5.0).contains(&ratio), "{model} {}: {e1:e} -> {e2:e}", param.symbol());
        }
    }
}

#[test]
fn df_dimensionless_and_dimensional_sensitivities_agree() {
    let p = WallProblem::paper(Material::from_catalogue(4).unwrap(), 15.0);
    let s = ObservationSchedule::paper();
    let scales = ReferenceScales::default();
    let dp = nondimensionalize(&p, &scales).unwrap();
    let grid = UniformGrid::paper(&dp).unwrap();
    for param in ParameterKind::ALL {
        let star = solve_sensitivity_df(&dp, &grid, param, &s).unwrap();
        let (_, dim) = direct(&p, &s, Model::DuFortFrankel, param).evaluate(p.parameter(param)).unwrap();
        let factor = scales.temperature / param.reference_value(&scales);
        for (a, b) in star.values.iter().zip(&dim) {
            assert!((a * factor - b).abs() <= 1e-12 * b.abs().max(1e-300));
        }
    }
}
