//! Monte Carlo reliability studies.
//!
//! For each configuration row, observations are synthesised once from the
//! reference solver at the real parameter value. Every sample adds its own
//! Gaussian noise to that trace, and every requested direct model is then
//! fitted to the *same* noisy sample. The ratio `p_est / p_real`, the
//! number of Gauss iterations and the wall time are aggregated per row and
//! per model.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{estimate, Discretization, EstimationOptions, EstimationResult};
use crate::problem::{nondimensionalize, Material, ParameterKind, ReferenceScales, WallProblem};
use crate::schedule::ObservationSchedule;
use crate::sensitivity::Model;
use crate::solvers::{solve_reference, ReferenceTrace};

/// Reference accuracy requested when no noise is added, K.
pub const NOISELESS_REFERENCE_TARGET: f64 = 1e-3;

/// One synthetic measurement series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSample {
    pub schedule: ObservationSchedule,
    /// Noisy sensor temperatures, K.
    pub values: Vec<f64>,
    /// Noise standard deviation, K.
    pub sigma_obs: f64,
    pub seed: u64,
    pub p_real: Option<f64>,
    /// Realised noise draws, K.
    pub noise: Vec<f64>,
}

impl ObservationSample {
    /// Measured data with no known generating parameter.
    pub fn measured(schedule: ObservationSchedule, values: Vec<f64>) -> Result<Self> {
        if values.len() != schedule.len() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: schedule.len(),
            });
        }
        let n = values.len();
        Ok(Self {
            schedule,
            values,
            sigma_obs: 0.0,
            seed: 0,
            p_real: None,
            noise: vec![0.0; n],
        })
    }

    /// Adds `N(0, sigma²)` noise drawn from a ChaCha8 stream seeded with
    /// `seed` to a reference trace.
    pub fn from_reference(
        reference: &ReferenceTrace,
        schedule: &ObservationSchedule,
        sigma_obs: f64,
        seed: u64,
        p_real: f64,
    ) -> Result<Self> {
        if !(sigma_obs >= 0.0 && sigma_obs.is_finite()) {
            return Err(Error::invalid(format!("sigma_obs must be >= 0, got {sigma_obs}")));
        }
        if reference.values.len() != schedule.len() {
            return Err(Error::LengthMismatch {
                left: reference.values.len(),
                right: schedule.len(),
            });
        }
        if sigma_obs > 0.0 && reference.accuracy_estimate >= sigma_obs / 10.0 {
            return Err(Error::ReferenceAccuracy {
                estimate: reference.accuracy_estimate,
                limit: sigma_obs / 10.0,
            });
        }
        let noise = gaussian_noise(sigma_obs, seed, schedule.len());
        let values = reference.values.iter().zip(&noise).map(|(r, e)| r + e).collect();
        Ok(Self {
            schedule: schedule.clone(),
            values,
            sigma_obs,
            seed,
            p_real: Some(p_real),
            noise,
        })
    }
}

/// `n` i.i.d. `N(0, sigma²)` draws. The stream depends on `seed` only.
pub fn gaussian_noise(sigma: f64, seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sigma * z
        })
        .collect()
}

/// Reference accuracy to request for a given noise level.
pub fn reference_target(sigma_obs: f64) -> f64 {
    if sigma_obs > 0.0 {
        sigma_obs / 10.0
    } else {
        NOISELESS_REFERENCE_TARGET
    }
}

/// Reference solve at `p_real` followed by noise.
pub fn generate_observation_sample(
    problem: &WallProblem,
    param: ParameterKind,
    p_real: f64,
    schedule: &ObservationSchedule,
    sigma_obs: f64,
    seed: u64,
    scales: &ReferenceScales,
) -> Result<ObservationSample> {
    let problem = problem.with_parameter(param, p_real);
    let dp = nondimensionalize(&problem, scales)?;
    let reference = solve_reference(&dp, schedule, reference_target(sigma_obs))?;
    ObservationSample::from_reference(&reference, schedule, sigma_obs, seed, p_real)
}

/// Seed of sample `index`; independent of execution order.
pub fn sample_seed(base_seed: u64, index: u64) -> u64 {
    base_seed ^ index
}

/// Mean and population standard deviation (1/n).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStatistics {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

pub fn summarize(values: &[f64]) -> Result<SummaryStatistics> {
    if values.is_empty() {
        return Err(Error::invalid("cannot summarise an empty list"));
    }
    // Welford
    let (mut mean, mut m2) = (0.0, 0.0);
    for (i, &v) in values.iter().enumerate() {
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let n = values.len();
    Ok(SummaryStatistics {
        mean,
        std: (m2 / n as f64).max(0.0).sqrt(),
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseId {
    #[serde(rename = "A")]
    Capacity,
    #[serde(rename = "B")]
    Conductivity,
    #[serde(rename = "C")]
    Surface,
}

impl CaseId {
    pub fn letter(self) -> &'static str {
        match self {
            CaseId::Capacity => "A",
            CaseId::Conductivity => "B",
            CaseId::Surface => "C",
        }
    }

    pub fn param(self) -> ParameterKind {
        match self {
            CaseId::Capacity => ParameterKind::HeatCapacity,
            CaseId::Conductivity => ParameterKind::Conductivity,
            CaseId::Surface => ParameterKind::SurfaceCoefficientLeft,
        }
    }
}

impl std::str::FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" | "A_CAPACITY" => Ok(CaseId::Capacity),
            "B" | "B_CONDUCTIVITY" => Ok(CaseId::Conductivity),
            "C" | "C_SURFACE" => Ok(CaseId::Surface),
            other => Err(Error::invalid(format!("unknown case '{other}' (expected A, B or C)"))),
        }
    }
}

/// One configuration of a case study: a material and a left coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRow {
    /// Material id (cases A, B) or case number (case C).
    pub label: String,
    pub material: Material,
    pub h_left: f64,
}

impl CaseRow {
    pub fn problem(&self) -> WallProblem {
        WallProblem::paper(self.material.clone(), self.h_left)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseConfig {
    pub case: CaseId,
    pub param: ParameterKind,
    pub rows: Vec<CaseRow>,
    pub samples: usize,
    /// K
    pub sigma_obs: f64,
    /// `p_apr = guess_factor · p_real`
    pub guess_factor: f64,
    pub base_seed: u64,
    pub schedule: ObservationSchedule,
    pub discretization: Discretization,
    pub eta1: f64,
    pub eta2: f64,
    pub max_iterations: usize,
}

/// Default number of samples per row.
pub const DEFAULT_SAMPLES: usize = 100;

pub fn case_presets(case: CaseId) -> CaseConfig {
    let rows = match case {
        CaseId::Capacity | CaseId::Conductivity => Material::catalogue()
            .into_iter()
            .map(|m| CaseRow {
                label: m.id.to_string(),
                material: m,
                h_left: 15.0,
            })
            .collect(),
        CaseId::Surface => [0.5, 5.0, 10.0, 15.0]
            .into_iter()
            .enumerate()
            .map(|(i, h)| CaseRow {
                label: (i + 1).to_string(),
                material: Material::from_catalogue(3).expect("brick is in the catalogue"),
                h_left: h,
            })
            .collect(),
    };
    CaseConfig {
        case,
        param: case.param(),
        rows,
        samples: DEFAULT_SAMPLES,
        sigma_obs: 0.2,
        guess_factor: 0.1,
        base_seed: 0,
        schedule: ObservationSchedule::paper(),
        discretization: Discretization::default(),
        eta1: 1e-6,
        eta2: 1e-6,
        max_iterations: 100,
    }
}

impl CaseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::invalid("sample count must be >= 1"));
        }
        if !(self.sigma_obs >= 0.0) {
            return Err(Error::invalid("sigma_obs must be >= 0"));
        }
        if !(self.guess_factor > 0.0) {
            return Err(Error::invalid("guess factor must be > 0"));
        }
        if self.rows.is_empty() {
            return Err(Error::invalid("case has no configuration rows"));
        }
        Ok(())
    }

    fn options(&self, model: Model, p_real: f64) -> EstimationOptions {
        EstimationOptions {
            eta1: self.eta1,
            eta2: self.eta2,
            max_iterations: self.max_iterations,
            discretization: self.discretization,
            ..EstimationOptions::new(model, self.param, self.guess_factor * p_real)
        }
    }
}

/// Outcome of one model on one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample: usize,
    pub seed: u64,
    pub result: Option<EstimationResult>,
    pub error: Option<String>,
}

/// Aggregates for one (row, model) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub case: CaseId,
    pub model: Model,
    pub config_row: String,
    pub p_real: f64,
    #[serde(rename = "N_s")]
    pub n_samples: usize,
    pub ratio: Option<SummaryStatistics>,
    pub iterations: Option<SummaryStatistics>,
    pub wall_time: Option<SummaryStatistics>,
    pub failures: usize,
    pub non_converged: usize,
    pub reference_accuracy: f64,
    pub samples: Vec<SampleRecord>,
}

/// Noise-free trace that generated the observations of one row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowReference {
    pub config_row: String,
    /// s
    pub times: Vec<f64>,
    /// K
    pub values: Vec<f64>,
    pub accuracy_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityReport {
    pub config: CaseConfig,
    pub models: Vec<Model>,
    pub entries: Vec<ReportEntry>,
    pub references: Vec<RowReference>,
}

impl ReliabilityReport {
    pub fn entry(&self, row: &str, model: Model) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| e.config_row == row && e.model == model)
    }
}

fn aggregate(
    config: &CaseConfig,
    row: &CaseRow,
    model: Model,
    p_real: f64,
    reference_accuracy: f64,
    samples: Vec<SampleRecord>,
) -> ReportEntry {
    let ok: Vec<&EstimationResult> = samples.iter().filter_map(|s| s.result.as_ref()).collect();
    let stat = |f: &dyn Fn(&EstimationResult) -> f64| {
        let v: Vec<f64> = ok.iter().map(|r| f(r)).collect();
        summarize(&v).ok()
    };
    ReportEntry {
        case: config.case,
        model,
        config_row: row.label.clone(),
        p_real,
        n_samples: samples.len(),
        ratio: stat(&|r| r.p_est / p_real),
        iterations: stat(&|r| r.iterations as f64),
        wall_time: stat(&|r| r.wall_time),
        failures: samples.len() - ok.len(),
        non_converged: ok.iter().filter(|r| !r.converged).count(),
        reference_accuracy,
        samples,
    }
}

/// Runs every row of `config` with every model in `models`, on the current
/// rayon pool. Results do not depend on the number of worker threads.
pub fn run_case_study(config: &CaseConfig, models: &[Model]) -> Result<ReliabilityReport> {
    config.validate()?;
    if models.is_empty() {
        return Err(Error::invalid("no model requested"));
    }
    let scales = ReferenceScales::default();
    let mut entries = Vec::new();
    let mut references = Vec::new();
    for row in &config.rows {
        let problem = row.problem();
        problem.validate()?;
        config.schedule.check_within(problem.thickness, problem.horizon)?;
        let p_real = problem.parameter(config.param);
        let dp = nondimensionalize(&problem, &scales)?;
        let reference = solve_reference(&dp, &config.schedule, reference_target(config.sigma_obs))?;

        let per_sample: Vec<Vec<SampleRecord>> = (0..config.samples)
            .into_par_iter()
            .map(|s| {
                let seed = sample_seed(config.base_seed, s as u64);
                let obs = ObservationSample::from_reference(&reference, &config.schedule, config.sigma_obs, seed, p_real);
                models
                    .iter()
                    .map(|&model| {
                        let outcome = obs
                            .as_ref()
                            .map_err(|e| e.to_string())
                            .and_then(|o| estimate(&problem, o, &config.options(model, p_real)).map_err(|e| e.to_string()));
                        let (result, error) = match outcome {
                            Ok(r) => (Some(r), None),
                            Err(e) => (None, Some(e)),
                        };
                        SampleRecord {
                            sample: s,
                            seed,
                            result,
                            error,
                        }
                    })
                    .collect()
            })
            .collect();

        for (mi, &model) in models.iter().enumerate() {
            let records: Vec<SampleRecord> = per_sample.iter().map(|recs| recs[mi].clone()).collect();
            entries.push(aggregate(config, row, model, p_real, reference.accuracy_estimate, records));
        }
        references.push(RowReference {
            config_row: row.label.clone(),
            times: reference.times,
            values: reference.values,
            accuracy_estimate: reference.accuracy_estimate,
        });
    }
    Ok(ReliabilityReport {
        config: config.clone(),
        models: models.to_vec(),
        entries,
        references,
    })
}
