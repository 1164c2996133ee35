//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use heatident::estimation::{DirectModel, Discretization};
use heatident::{ForcingSignal, Material, Model, ObservationSchedule, ParameterKind, ReferenceScales, WallProblem};

/// Linear steady profile through the three series resistances
/// `1/hL`, `L/k`, `1/hR`, written out from the flux balance.
pub fn steady_profile(tl: f64, tr: f64, hl: f64, hr: f64, k: f64, l: f64, x: f64) -> f64 {
    // unknown face temperatures a (x=0) and b (x=L):
    //   hL (tl - a) = k (a - b) / L = hR (b - tr)
    let r_total = 1.0 / hl + l / k + 1.0 / hr;
    let flux = (tl - tr) / r_total;
    let a = tl - flux / hl;
    let b = tr + flux / hr;
    a + (b - a) * x / l
}

pub fn constant_problem(material: Material, h_left: f64, t0: f64, tl: f64, tr: f64, horizon: f64) -> WallProblem {
    let mut p = WallProblem::paper(material, h_left);
    p.initial_temperature = t0;
    p.forcing_left = ForcingSignal::Constant { baseline: tl };
    p.forcing_right = ForcingSignal::Constant { baseline: tr };
    p.horizon = horizon;
    p
}

pub fn direct<'a>(problem: &'a WallProblem, schedule: &'a ObservationSchedule, model: Model, param: ParameterKind) -> DirectModel<'a> {
    DirectModel {
        problem,
        schedule,
        model,
        param,
        discretization: Discretization::default(),
        scales: ReferenceScales::default(),
    }
}

/// Central difference of the forward sensor series with relative step `eps`.
pub fn central_difference(d: &DirectModel<'_>, p: f64, eps: f64) -> Vec<f64> {
    let h = eps * p;
    let (up, _) = d.evaluate(p + h).unwrap();
    let (dn, _) = d.evaluate(p - h).unwrap();
    up.iter().zip(&dn).map(|(a, b)| (a - b) / (2.0 * h)).collect()
}

pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// `‖a - b‖ / ‖b - base‖`: error relative to the signal's excursion.
pub fn relative_l2_deviation(a: &[f64], b: &[f64], base: f64) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| (y - base).powi(2)).sum();
    (num / den).sqrt()
}
