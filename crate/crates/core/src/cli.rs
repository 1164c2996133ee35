use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use heatident::estimation::{estimate, DirectModel, Discretization, EstimationOptions};
use heatident::export::{
    fmt_sig17, read_observation_csv, write_field_csv, write_history_csv, write_json,
    write_sensitivity_csv, write_sensor_csv, write_table_csv, ProblemDescriptor, TemperatureUnit,
};
use heatident::reliability::{
    case_presets, generate_observation_sample, run_case_study, CaseId, ReliabilityReport, DEFAULT_SAMPLES,
};
use heatident::solvers::{solve_df_levels, solve_rc, solve_reference, LevelSelection, RcDiscretization, UniformGrid};
use heatident::{nondimensionalize, Error, Material, Model, ObservationSchedule, ParameterKind, ReferenceScales, WallProblem};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "heatident", version = VERSION, about = "Wall heat-conduction models and parameter-estimation reliability studies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve one direct problem and write the sensor trace.
    Simulate(SimulateArgs),
    /// Estimate one parameter from measured or synthetic observations.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo reliability study for case A, B or C.
    Study(StudyArgs),
    /// Print the tool version.
    Version,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverChoice {
    Df,
    Rc,
    Reference,
}

#[derive(Args, Debug, Clone)]
pub struct ProblemArgs {
    /// JSON problem descriptor; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Case preset (A: c, B: k, C: hL).
    #[arg(long)]
    pub case: Option<String>,
    /// Material id from the catalogue (1..=5).
    #[arg(long)]
    pub material: Option<u32>,
    /// Left surface heat transfer coefficient, W/(m²·K).
    #[arg(long)]
    pub hl: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "df")]
    pub model: SolverChoice,
    #[arg(long, default_value = "out")]
    pub output: PathBuf,
    /// Write temperatures in Kelvin instead of Celsius.
    #[arg(long)]
    pub kelvin: bool,
    /// Also write every node at the observation instants.
    #[arg(long)]
    pub full_field: bool,
    /// Accuracy target of the reference solver, K.
    #[arg(long, default_value_t = 1e-3)]
    pub sigma_check: f64,
    /// Also write the sensitivity to this parameter (c, k or hL).
    #[arg(long)]
    pub sensitivity: Option<String>,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value = "df")]
    pub model: String,
    /// Parameter to estimate: c, k or hL (defaults to the case parameter).
    #[arg(long)]
    pub param: Option<String>,
    /// Observation CSV with columns t_s and T_C (or T_K).
    #[arg(long, conflicts_with = "synthetic")]
    pub obs: Option<PathBuf>,
    /// Sensor position of --obs, m.
    #[arg(long)]
    pub x_obs: Option<f64>,
    /// Generate observations from the reference solver at the configured
    /// parameter value.
    #[arg(long)]
    pub synthetic: bool,
    /// Noise standard deviation of synthetic observations, K.
    #[arg(long, default_value_t = 0.2)]
    pub sigma: f64,
    #[arg(long, env = "HEATIDENT_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Initial guess as a multiple of the configured parameter value.
    #[arg(long, default_value_t = 0.1)]
    pub guess_factor: f64,
    /// Initial guess in physical units; overrides --guess-factor.
    #[arg(long)]
    pub initial_guess: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub max_iterations: usize,
    #[arg(long, default_value = "out")]
    pub output: PathBuf,
    #[arg(long)]
    pub kelvin: bool,
}

#[derive(Args, Debug)]
pub struct StudyArgs {
    /// A (heat capacity), B (conductivity) or C (surface coefficient).
    pub case: String,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Comma-separated direct models.
    #[arg(long, default_value = "df,rc")]
    pub models: String,
    #[arg(long, env = "HEATIDENT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.2)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.1)]
    pub guess_factor: f64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub kelvin: bool,
}

/// Written next to every output; enough to replay the run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub config_path: Option<String>,
    pub config: serde_json::Value,
    pub base_seed: Option<u64>,
    pub tool_version: &'static str,
    pub timestamp: String,
    pub outputs: Vec<String>,
    pub partial: bool,
    pub details: serde_json::Value,
}

impl RunManifest {
    fn new(command: &str, config_path: Option<&Path>, config: serde_json::Value, base_seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            argv: std::env::args().collect(),
            config_path: config_path.map(|p| p.display().to_string()),
            config,
            base_seed,
            tool_version: VERSION,
            timestamp: chrono::Utc::now().to_rfc3339(),
            outputs: Vec::new(),
            partial: false,
            details: json!({}),
        }
    }

    fn write(&self, dir: &Path) -> anyhow::Result<()> {
        write_json(&dir.join("manifest.json"), self)?;
        Ok(())
    }
}

fn unit(kelvin: bool) -> TemperatureUnit {
    if kelvin {
        TemperatureUnit::Kelvin
    } else {
        TemperatureUnit::Celsius
    }
}

fn validation(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidInput(msg.into()).into()
}

/// Builds the problem from the descriptor (if any) and flag overrides.
fn resolve_problem(args: &ProblemArgs) -> anyhow::Result<(WallProblem, ReferenceScales, Option<ProblemDescriptor>, Option<CaseId>)> {
    let case = args.case.as_deref().map(str::parse::<CaseId>).transpose()?;
    let descriptor = args
        .config
        .as_deref()
        .map(|p| ProblemDescriptor::read(p).map_err(|e| validation(format!("{}: {e}", p.display()))))
        .transpose()?;
    let mut problem = match &descriptor {
        Some(d) => d.to_problem()?,
        None => WallProblem::paper(Material::from_catalogue(3)?, 15.0),
    };
    if let Some(id) = args.material {
        problem.material = Material::from_catalogue(id)?;
    }
    if let Some(h) = args.hl {
        problem.h_left = h;
    }
    problem.validate()?;
    let scales = descriptor.as_ref().map(ProblemDescriptor::scales).unwrap_or_default();
    Ok((problem, scales, descriptor, case))
}

fn schedule_for(descriptor: Option<&ProblemDescriptor>) -> anyhow::Result<ObservationSchedule> {
    Ok(match descriptor {
        Some(d) => d.schedule()?,
        None => ObservationSchedule::paper(),
    })
}

fn config_snapshot(problem: &WallProblem, scales: &ReferenceScales, schedule: &ObservationSchedule) -> serde_json::Value {
    let mut d = ProblemDescriptor::from_problem(problem, Some(*scales));
    let interval = schedule.instants.get(1).copied().unwrap_or(0.0) - schedule.instants[0];
    d.observation = Some(heatident::export::ScheduleSpec {
        x_m: schedule.x_obs,
        interval_s: interval,
        count: schedule.len(),
    });
    serde_json::to_value(d).unwrap_or_default()
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate_cmd(a),
        Command::Study(a) => study(a),
        Command::Version => {
            println!("heatident {VERSION}");
            Ok(())
        }
    }
}

fn simulate(a: SimulateArgs) -> anyhow::Result<()> {
    let (problem, scales, descriptor, _) = resolve_problem(&a.problem)?;
    let schedule = schedule_for(descriptor.as_ref())?;
    schedule.check_within(problem.thickness, problem.horizon)?;
    let sensitivity = a.sensitivity.as_deref().map(str::parse::<ParameterKind>).transpose()?;
    if a.model == SolverChoice::Reference && (a.full_field || sensitivity.is_some()) {
        return Err(validation("the reference solver only produces the sensor trace"));
    }
    std::fs::create_dir_all(&a.output).with_context(|| format!("creating {}", a.output.display()))?;
    let unit = unit(a.kelvin);
    let disc = Discretization::default();
    let mut manifest = RunManifest::new(
        "simulate",
        a.problem.config.as_deref(),
        config_snapshot(&problem, &scales, &schedule),
        None,
    );

    let (sensor, details) = match a.model {
        SolverChoice::Df => {
            let dp = nondimensionalize(&problem, &scales)?;
            let grid = UniformGrid::from_steps(&dp, disc.df_dx, disc.df_dt)?;
            let levels = schedule.levels(disc.df_dt)?;
            let trace = solve_df_levels(&dp, &grid, &LevelSelection::levels(levels))?;
            let sensor: Vec<f64> = trace.sensor_series(&dp, &schedule)?.into_iter().map(|u| dp.to_kelvin(u)).collect();
            if a.full_field {
                let fields: Vec<Vec<f64>> = trace
                    .fields
                    .iter()
                    .map(|f| f.iter().map(|u| dp.to_kelvin(*u)).collect())
                    .collect();
                write_field_csv(&a.output.join("field.csv"), &schedule.instants, &fields, unit)?;
                manifest.outputs.push("field.csv".into());
            }
            (sensor, json!({"model": "DF", "nx": grid.nx, "nt": grid.nt, "dx_m": disc.df_dx, "dt_s": disc.df_dt}))
        }
        SolverChoice::Rc => {
            let rc = RcDiscretization::new(&problem, disc.rc_dt)?;
            let trace = solve_rc(&problem, &rc)?;
            let sensor = trace.sensor_series(&schedule)?;
            if a.full_field {
                let fields: Vec<Vec<f64>> = schedule
                    .levels(rc.dt)?
                    .into_iter()
                    .map(|n| vec![trace.t1[n], trace.t2[n], trace.t3[n]])
                    .collect();
                write_field_csv(&a.output.join("field.csv"), &schedule.instants, &fields, unit)?;
                manifest.outputs.push("field.csv".into());
            }
            (sensor, json!({"model": "RC", "dt_s": rc.dt}))
        }
        SolverChoice::Reference => {
            let dp = nondimensionalize(&problem, &scales)?;
            let r = solve_reference(&dp, &schedule, a.sigma_check)?;
            (r.values, json!({"model": "reference", "accuracy_target_K": a.sigma_check, "accuracy_estimate": r.accuracy_estimate}))
        }
    };
    write_sensor_csv(&a.output.join("sensor.csv"), &schedule.instants, &sensor, unit)?;
    manifest.outputs.insert(0, "sensor.csv".into());

    if let Some(param) = sensitivity {
        let model = if a.model == SolverChoice::Rc { Model::Rc } else { Model::DuFortFrankel };
        let direct = DirectModel {
            problem: &problem,
            schedule: &schedule,
            model,
            param,
            discretization: disc,
            scales,
        };
        let (_, s) = direct.evaluate(problem.parameter(param))?;
        write_sensitivity_csv(&a.output.join("sensitivity.csv"), &schedule.instants, &s)?;
        manifest.outputs.push("sensitivity.csv".into());
    }
    manifest.details = details;
    manifest.write(&a.output)?;
    eprintln!("wrote {} values to {}", sensor.len(), a.output.join("sensor.csv").display());
    Ok(())
}

fn estimate_cmd(a: EstimateArgs) -> anyhow::Result<()> {
    let (problem, scales, descriptor, case) = resolve_problem(&a.problem)?;
    let model: Model = a.model.parse()?;
    let param = match (&a.param, case) {
        (Some(p), _) => p.parse()?,
        (None, Some(c)) => c.param(),
        (None, None) => return Err(validation("--param (c, k or hL) or --case is required")),
    };
    if !(a.guess_factor > 0.0) {
        return Err(validation("--guess-factor must be > 0"));
    }
    let nominal = problem.parameter(param);
    let obs = match (&a.obs, a.synthetic) {
        (Some(path), false) => {
            let x = a
                .x_obs
                .or(descriptor.as_ref().and_then(|d| d.observation.map(|o| o.x_m)))
                .unwrap_or(0.11);
            let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            read_observation_csv(file, x)?
        }
        (None, true) => {
            let schedule = schedule_for(descriptor.as_ref())?;
            generate_observation_sample(&problem, param, nominal, &schedule, a.sigma, a.seed, &scales)?
        }
        _ => return Err(validation("exactly one of --obs or --synthetic is required")),
    };
    let initial = a.initial_guess.unwrap_or(a.guess_factor * nominal);
    let opts = EstimationOptions {
        scales,
        max_iterations: a.max_iterations,
        ..EstimationOptions::new(model, param, initial)
    };
    let result = estimate(&problem, &obs, &opts)?;

    std::fs::create_dir_all(&a.output).with_context(|| format!("creating {}", a.output.display()))?;
    let unit = unit(a.kelvin);
    write_json(&a.output.join("result.json"), &result)?;
    write_history_csv(&a.output.join("history.csv"), &result.history)?;
    write_sensor_csv(&a.output.join("observations.csv"), &obs.schedule.instants, &obs.values, unit)?;
    let direct = DirectModel {
        problem: &problem,
        schedule: &obs.schedule,
        model,
        param,
        discretization: opts.discretization,
        scales,
    };
    let (fit, _) = direct.evaluate(result.p_est)?;
    write_sensor_csv(&a.output.join("fit.csv"), &obs.schedule.instants, &fit, unit)?;

    let mut manifest = RunManifest::new(
        "estimate",
        a.problem.config.as_deref(),
        config_snapshot(&problem, &scales, &obs.schedule),
        a.synthetic.then_some(a.seed),
    );
    manifest.outputs = ["result.json", "history.csv", "observations.csv", "fit.csv"].map(String::from).to_vec();
    manifest.details = json!({
        "model": model,
        "param": param,
        "initial_guess": initial,
        "observations": match &a.obs { Some(p) => p.display().to_string(), None => "synthetic".into() },
        "sigma_obs": a.synthetic.then_some(a.sigma),
        "converged": result.converged,
    });
    manifest.write(&a.output)?;

    println!(
        "{} {} estimate: {} (N_m = {}, converged = {}){}",
        model,
        param.symbol(),
        result.p_est,
        result.iterations,
        result.converged,
        result.ratio.map(|r| format!(", ratio = {r:.4}")).unwrap_or_default()
    );
    Ok(())
}

fn parse_models(s: &str) -> anyhow::Result<Vec<Model>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let m: Model = part.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(validation("--models needs at least one of df, rc"));
    }
    Ok(out)
}

fn study(a: StudyArgs) -> anyhow::Result<()> {
    let case: CaseId = a.case.parse()?;
    let models = parse_models(&a.models)?;
    let mut config = case_presets(case);
    config.samples = a.samples;
    config.base_seed = a.seed;
    config.sigma_obs = a.sigma;
    config.guess_factor = a.guess_factor;
    config.validate()?;
    if a.jobs == Some(0) {
        return Err(validation("--jobs must be >= 1"));
    }
    let out = a.output.clone().unwrap_or_else(|| PathBuf::from(format!("study_{}", case.letter())));
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;

    let report = match a.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(|| run_case_study(&config, &models))?,
        None => run_case_study(&config, &models)?,
    };

    write_json(&out.join("report.json"), &report)?;
    write_table_csv(std::io::BufWriter::new(std::fs::File::create(out.join("table.csv"))?), &report)?;
    write_plot_data(&out, &report, unit(a.kelvin))?;

    let failures: usize = report.entries.iter().map(|e| e.failures).sum();
    let mut manifest = RunManifest::new("study", None, serde_json::to_value(&config)?, Some(config.base_seed));
    manifest.outputs = [
        "report.json",
        "table.csv",
        "plot_ratio.csv",
        "plot_iterations.csv",
        "plot_gamma.csv",
        "plot_temperature.csv",
    ]
    .map(String::from)
    .to_vec();
    manifest.partial = failures > 0;
    manifest.details = json!({
        "case": case,
        "models": models,
        "jobs": a.jobs,
        "failed_estimations": failures,
    });
    manifest.write(&out)?;

    let mut stdout = std::io::stdout().lock();
    write_table_csv(&mut stdout, &report)?;
    if failures > 0 {
        eprintln!("warning: {failures} estimations failed; see report.json");
    }
    Ok(())
}

/// CSV inputs for the ratio, iteration, convergence and temperature
/// figures.
fn write_plot_data(dir: &Path, report: &ReliabilityReport, unit: TemperatureUnit) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(dir.join("plot_ratio.csv"))?;
    w.write_record(["material_or_case", "p_real", "model", "p_est_E", "ratio_E", "ratio_sigma"])?;
    for e in &report.entries {
        let (m, s) = e.ratio.map_or((String::new(), String::new()), |r| (fmt_sig17(r.mean), fmt_sig17(r.std)));
        let p = e.ratio.map_or(String::new(), |r| fmt_sig17(r.mean * e.p_real));
        w.write_record([e.config_row.clone(), fmt_sig17(e.p_real), e.model.label().into(), p, m, s])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("plot_iterations.csv"))?;
    w.write_record(["material_or_case", "model", "Nm_E", "Nm_sigma", "tcpu_E", "tcpu_sigma"])?;
    for e in &report.entries {
        let pair = |s: Option<heatident::reliability::SummaryStatistics>| {
            s.map_or([String::new(), String::new()], |s| [fmt_sig17(s.mean), fmt_sig17(s.std)])
        };
        let [ne, ns] = pair(e.iterations);
        let [te, ts] = pair(e.wall_time);
        w.write_record([e.config_row.clone(), e.model.label().into(), ne, ns, te, ts])?;
    }
    w.flush()?;

    // mean criteria over the samples still iterating at step m
    let mut w = csv::Writer::from_path(dir.join("plot_gamma.csv"))?;
    w.write_record(["material_or_case", "model", "m", "gamma1_E", "gamma2_E", "samples"])?;
    for e in &report.entries {
        let results: Vec<_> = e.samples.iter().filter_map(|s| s.result.as_ref()).collect();
        let depth = results.iter().map(|r| r.history.len()).max().unwrap_or(0);
        for m in 0..depth {
            let at: Vec<_> = results.iter().filter_map(|r| r.history.get(m)).collect();
            let n = at.len() as f64;
            let g1 = at.iter().map(|h| h.gamma1).sum::<f64>() / n;
            let g2 = at.iter().map(|h| h.gamma2).sum::<f64>() / n;
            w.write_record([
                e.config_row.clone(),
                e.model.label().into(),
                (m + 1).to_string(),
                fmt_sig17(g1),
                fmt_sig17(g2),
                at.len().to_string(),
            ])?;
        }
    }
    w.flush()?;

    // first sample's observations, the reference and each model at its
    // mean estimate
    let cfg = &report.config;
    let scales = ReferenceScales::default();
    let mut header = vec!["material_or_case".to_string(), "t_s".into(), format!("obs_{}", unit.column())];
    header.push(format!("reference_{}", unit.column()));
    for m in &report.models {
        header.push(format!("{}_{}", m.label(), unit.column()));
    }
    let mut w = csv::Writer::from_path(dir.join("plot_temperature.csv"))?;
    w.write_record(&header)?;
    for (row, reference) in cfg.rows.iter().zip(&report.references) {
        let problem = row.problem();
        let noise = heatident::reliability::gaussian_noise(
            cfg.sigma_obs,
            heatident::reliability::sample_seed(cfg.base_seed, 0),
            reference.values.len(),
        );
        let mut columns = vec![
            reference.values.iter().zip(&noise).map(|(r, e)| r + e).collect::<Vec<_>>(),
            reference.values.clone(),
        ];
        for &model in &report.models {
            let entry = report.entry(&row.label, model);
            let series = match entry.and_then(|e| e.ratio.map(|r| r.mean * e.p_real)) {
                Some(p) => DirectModel {
                    problem: &problem,
                    schedule: &cfg.schedule,
                    model,
                    param: cfg.param,
                    discretization: cfg.discretization,
                    scales,
                }
                .evaluate(p)
                .map(|(t, _)| t)
                .unwrap_or_else(|_| vec![f64::NAN; reference.values.len()]),
                None => vec![f64::NAN; reference.values.len()],
            };
            columns.push(series);
        }
        for (k, t) in reference.times.iter().enumerate() {
            let mut rec = vec![row.label.clone(), fmt_sig17(*t)];
            rec.extend(columns.iter().map(|c| fmt_sig17(unit.from_kelvin(c[k]))));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// 2 for usage and validation problems, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return if e.is_validation() { 2 } else { 1 };
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() || cause.downcast_ref::<csv::Error>().is_some() {
            return 2;
        }
    }
    1
}
