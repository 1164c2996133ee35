use heatident::estimation::{estimate, EstimationOptions};
use heatident::reliability::{case_presets, run_case_study, CaseConfig, CaseId, ObservationSample, ReliabilityReport};
use heatident::solvers::ReferenceTrace;
use heatident::Model;

fn small(case: CaseId, samples: usize, seed: u64) -> CaseConfig {
    let mut cfg = case_presets(case);
    cfg.samples = samples;
    cfg.base_seed = seed;
    cfg
}

/// Report JSON with every wall-time field removed.
fn timeless(report: &ReliabilityReport) -> String {
    fn strip(v: &mut serde_json::Value) {
        match v {
            serde_json::Value::Object(m) => {
                m.remove("wall_time");
                m.remove("wall_time_s");
                m.values_mut().for_each(strip);
            }
            serde_json::Value::Array(a) => a.iter_mut().for_each(strip),
            _ => {}
        }
    }
    let mut v = serde_json::to_value(report).unwrap();
    strip(&mut v);
    serde_json::to_string(&v).unwrap()
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    let mut cfg = small(CaseId::Surface, 6, 99);
    cfg.rows.truncate(2);
    let models = [Model::DuFortFrankel, Model::Rc];
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| run_case_study(&cfg, &models)).unwrap();
    let b = four.install(|| run_case_study(&cfg, &models)).unwrap();
    assert_eq!(timeless(&a), timeless(&b));
    let c = one.install(|| run_case_study(&small(CaseId::Surface, 6, 98), &models)).unwrap();
    assert_ne!(timeless(&a), timeless(&c));
}

#[test]
fn both_models_see_the_same_observations() {
    let mut cfg = small(CaseId::Conductivity, 3, 5);
    cfg.rows.truncate(1);
    let report = run_case_study(&cfg, &[Model::DuFortFrankel, Model::Rc]).unwrap();
    let df = report.entry("1", Model::DuFortFrankel).unwrap();
    let rc = report.entry("1", Model::Rc).unwrap();
    let reference = &report.references[0];
    let trace = ReferenceTrace {
        times: reference.times.clone(),
        values: reference.values.clone(),
        accuracy_estimate: reference.accuracy_estimate,
    };
    let problem = cfg.rows[0].problem();
    for (d, r) in df.samples.iter().zip(&rc.samples) {
        assert_eq!((d.sample, d.seed), (r.sample, r.seed));
        // replaying the sample reproduces both estimates exactly
        let obs = ObservationSample::from_reference(&trace, &cfg.schedule, cfg.sigma_obs, d.seed, df.p_real).unwrap();
        for (model, rec) in [(Model::DuFortFrankel, d), (Model::Rc, r)] {
            let opts = EstimationOptions::new(model, cfg.param, cfg.guess_factor * df.p_real);
            let again = estimate(&problem, &obs, &opts).unwrap();
            assert_eq!(again.p_est, rec.result.as_ref().unwrap().p_est);
        }
    }
}

#[test]
fn standard_error_shrinks_with_sample_count() {
    let mut cfg = small(CaseId::Capacity, 100, 2024);
    cfg.rows.retain(|r| r.label == "3");
    let r100 = run_case_study(&cfg, &[Model::Rc]).unwrap();
    cfg.samples = 400;
    let r400 = run_case_study(&cfg, &[Model::Rc]).unwrap();
    let se = |r: &ReliabilityReport| {
        let s = r.entries[0].ratio.unwrap();
        s.std / (s.n as f64).sqrt()
    };
    let factor = se(&r400) / se(&r100);
    assert!((0.3..=0.7).contains(&factor), "standard-error ratio {factor}");
    assert_eq!(r400.entries[0].failures, 0);
}

#[test]
fn noiseless_study_has_zero_spread() {
    let mut cfg = small(CaseId::Capacity, 3, 0);
    cfg.rows.truncate(1);
    cfg.sigma_obs = 0.0;
    let report = run_case_study(&cfg, &[Model::DuFortFrankel]).unwrap();
    let ratio = report.entries[0].ratio.unwrap();
    assert_eq!(ratio.std, 0.0);
    // only the DF discretisation error separates it from the truth
    assert!((ratio.mean - 1.0).abs() < 1e-2, "{}", ratio.mean);
}

#[test]
fn invalid_configurations_are_rejected() {
    let mut cfg = small(CaseId::Capacity, 0, 0);
    assert!(run_case_study(&cfg, &[Model::Rc]).unwrap_err().is_validation());
    cfg.samples = 1;
    assert!(run_case_study(&cfg, &[]).unwrap_err().is_validation());
    cfg.sigma_obs = -0.1;
    assert!(run_case_study(&cfg, &[Model::Rc]).unwrap_err().is_validation());
}
