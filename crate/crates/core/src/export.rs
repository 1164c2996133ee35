//! File formats: the JSON problem descriptor, CSV traces and tables, and the
//! observation CSV reader.
//!
//! Floating-point values are written with 17 significant digits so that a
//! file read back reproduces the exact `f64`.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::IterationRecord;
use crate::problem::{
    celsius_to_kelvin, kelvin_to_celsius, ForcingSignal, ForcingTerm, Material, ReferenceScales, WallProblem,
};
use crate::reliability::{ObservationSample, ReliabilityReport};
use crate::schedule::ObservationSchedule;

pub fn fmt_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemperatureUnit {
    Kelvin,
    Celsius,
}

impl TemperatureUnit {
    pub fn column(self) -> &'static str {
        match self {
            TemperatureUnit::Kelvin => "T_K",
            TemperatureUnit::Celsius => "T_C",
        }
    }

    /// Converts a Kelvin value to this unit.
    pub fn from_kelvin(self, v: f64) -> f64 {
        match self {
            TemperatureUnit::Kelvin => v,
            TemperatureUnit::Celsius => kelvin_to_celsius(v),
        }
    }

    pub fn to_kelvin(self, v: f64) -> f64 {
        match self {
            TemperatureUnit::Kelvin => v,
            TemperatureUnit::Celsius => celsius_to_kelvin(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    pub id: u32,
    #[serde(rename = "c_MJ_per_m3K")]
    pub c_mj_per_m3k: f64,
    #[serde(rename = "k_W_per_mK")]
    pub k_w_per_mk: f64,
    #[serde(default)]
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallSpec {
    #[serde(rename = "L_m")]
    pub l_m: f64,
    #[serde(rename = "hL")]
    pub h_left: f64,
    #[serde(rename = "hR")]
    pub h_right: f64,
    #[serde(rename = "T0_C")]
    pub t0_c: f64,
    pub tf_s: f64,
}

/// Ambient signal as written in a descriptor; baselines in °C, amplitudes
/// in K (equal to °C differences).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForcingSpec {
    Constant {
        #[serde(rename = "baseline_C")]
        baseline_c: f64,
    },
    PaperLeft {
        #[serde(rename = "baseline_C")]
        baseline_c: f64,
    },
    PaperRight {
        #[serde(rename = "baseline_C")]
        baseline_c: f64,
    },
    SumOfTerms {
        #[serde(rename = "baseline_C")]
        baseline_c: f64,
        terms: Vec<ForcingTerm>,
    },
}

impl ForcingSpec {
    pub fn to_signal(&self) -> ForcingSignal {
        match self {
            ForcingSpec::Constant { baseline_c } => ForcingSignal::Constant {
                baseline: celsius_to_kelvin(*baseline_c),
            },
            ForcingSpec::PaperLeft { baseline_c } => ForcingSignal::PaperLeft {
                baseline: celsius_to_kelvin(*baseline_c),
            },
            ForcingSpec::PaperRight { baseline_c } => ForcingSignal::PaperRight {
                baseline: celsius_to_kelvin(*baseline_c),
            },
            ForcingSpec::SumOfTerms { baseline_c, terms } => ForcingSignal::SumOfTerms {
                baseline: celsius_to_kelvin(*baseline_c),
                terms: terms.clone(),
            },
        }
    }

    pub fn from_signal(signal: &ForcingSignal) -> Self {
        let b = kelvin_to_celsius(signal.baseline());
        match signal {
            ForcingSignal::Constant { .. } => ForcingSpec::Constant { baseline_c: b },
            ForcingSignal::PaperLeft { .. } => ForcingSpec::PaperLeft { baseline_c: b },
            ForcingSignal::PaperRight { .. } => ForcingSpec::PaperRight { baseline_c: b },
            ForcingSignal::SumOfTerms { terms, .. } => ForcingSpec::SumOfTerms {
                baseline_c: b,
                terms: terms.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcingPair {
    pub left: ForcingSpec,
    pub right: ForcingSpec,
}

/// Sensor position and uniformly spaced instants `0, Δ, …, (count-1)·Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub x_m: f64,
    pub interval_s: f64,
    pub count: usize,
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        Self {
            x_m: 0.11,
            interval_s: 360.0,
            count: 201,
        }
    }
}

impl ScheduleSpec {
    pub fn build(&self) -> Result<ObservationSchedule> {
        ObservationSchedule::uniform(self.x_m, self.interval_s, self.count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDescriptor {
    pub material: MaterialSpec,
    pub wall: WallSpec,
    pub forcing: ForcingPair,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<ReferenceScales>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observation: Option<ScheduleSpec>,
}

impl ProblemDescriptor {
    pub fn from_problem(problem: &WallProblem, scales: Option<ReferenceScales>) -> Self {
        Self {
            material: MaterialSpec {
                id: problem.material.id,
                c_mj_per_m3k: problem.material.heat_capacity / 1e6,
                k_w_per_mk: problem.material.conductivity,
                name: problem.material.name.clone(),
            },
            wall: WallSpec {
                l_m: problem.thickness,
                h_left: problem.h_left,
                h_right: problem.h_right,
                t0_c: kelvin_to_celsius(problem.initial_temperature),
                tf_s: problem.horizon,
            },
            forcing: ForcingPair {
                left: ForcingSpec::from_signal(&problem.forcing_left),
                right: ForcingSpec::from_signal(&problem.forcing_right),
            },
            scales,
            observation: None,
        }
    }

    pub fn to_problem(&self) -> Result<WallProblem> {
        let m = &self.material;
        let material = Material::new(m.id, m.c_mj_per_m3k * 1e6, m.k_w_per_mk, m.name.clone())?;
        let problem = WallProblem {
            thickness: self.wall.l_m,
            h_left: self.wall.h_left,
            h_right: self.wall.h_right,
            initial_temperature: celsius_to_kelvin(self.wall.t0_c),
            forcing_left: self.forcing.left.to_signal(),
            forcing_right: self.forcing.right.to_signal(),
            horizon: self.wall.tf_s,
            material,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn scales(&self) -> ReferenceScales {
        self.scales.unwrap_or_default()
    }

    pub fn schedule(&self) -> Result<ObservationSchedule> {
        self.observation.unwrap_or_default().build()
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Writes a header and rows of numbers.
pub fn write_numeric_csv<W: Write>(out: W, header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| fmt_sig17(*v)))?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// `t_s,T_K` (or `t_s,T_C`) sensor series.
pub fn write_sensor_csv(path: &Path, times: &[f64], kelvin: &[f64], unit: TemperatureUnit) -> Result<()> {
    if times.len() != kelvin.len() {
        return Err(Error::LengthMismatch {
            left: times.len(),
            right: kelvin.len(),
        });
    }
    let header = vec!["t_s".to_string(), unit.column().to_string()];
    let rows = times.iter().zip(kelvin).map(|(t, v)| vec![*t, unit.from_kelvin(*v)]);
    write_numeric_csv(create(path)?, &header, rows)
}

/// `t_s,node_0,…,node_N` full field, one row per stored level.
pub fn write_field_csv(path: &Path, times: &[f64], fields_kelvin: &[Vec<f64>], unit: TemperatureUnit) -> Result<()> {
    if times.len() != fields_kelvin.len() {
        return Err(Error::LengthMismatch {
            left: times.len(),
            right: fields_kelvin.len(),
        });
    }
    let nodes = fields_kelvin.first().map_or(0, Vec::len);
    let mut header = vec!["t_s".to_string()];
    header.extend((0..nodes).map(|j| format!("node_{j}")));
    let rows = times.iter().zip(fields_kelvin).map(|(t, f)| {
        let mut row = Vec::with_capacity(nodes + 1);
        row.push(*t);
        row.extend(f.iter().map(|v| unit.from_kelvin(*v)));
        row
    });
    write_numeric_csv(create(path)?, &header, rows)
}

/// `t_s,dudp` sensitivity series.
pub fn write_sensitivity_csv(path: &Path, times: &[f64], values: &[f64]) -> Result<()> {
    if times.len() != values.len() {
        return Err(Error::LengthMismatch {
            left: times.len(),
            right: values.len(),
        });
    }
    let header = vec!["t_s".to_string(), "dudp".to_string()];
    write_numeric_csv(create(path)?, &header, times.iter().zip(values).map(|(t, v)| vec![*t, *v]))
}

/// `m,p,J,gamma1,gamma2`
pub fn write_history_csv(path: &Path, history: &[IterationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["m", "p", "J", "gamma1", "gamma2"])?;
    for r in history {
        w.write_record([
            r.m.to_string(),
            fmt_sig17(r.p),
            fmt_sig17(r.cost),
            fmt_sig17(r.gamma1),
            fmt_sig17(r.gamma2),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const TABLE_HEADER: [&str; 8] = [
    "material_or_case",
    "model",
    "ratio_E",
    "ratio_sigma",
    "Nm_E",
    "Nm_sigma",
    "tcpu_E",
    "tcpu_sigma",
];

/// One row per (configuration, model); empty cells when every sample
/// failed.
pub fn write_table_csv<W: Write>(out: W, report: &ReliabilityReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TABLE_HEADER)?;
    let pair = |s: Option<crate::reliability::SummaryStatistics>| match s {
        Some(s) => [fmt_sig17(s.mean), fmt_sig17(s.std)],
        None => [String::new(), String::new()],
    };
    for e in &report.entries {
        let [re, rs] = pair(e.ratio);
        let [ne, ns] = pair(e.iterations);
        let [te, ts] = pair(e.wall_time);
        w.write_record([e.config_row.clone(), e.model.label().to_string(), re, rs, ne, ns, te, ts])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `t_s` and one of `T_C` / `T_K`; values are returned in Kelvin.
pub fn read_observation_csv<R: Read>(input: R, x_obs: f64) -> Result<ObservationSample> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = r.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let t_col = col("t_s").ok_or_else(|| Error::invalid("observation CSV needs a 't_s' column"))?;
    let (v_col, unit) = match (col("T_C"), col("T_K")) {
        (Some(c), None) => (c, TemperatureUnit::Celsius),
        (None, Some(c)) => (c, TemperatureUnit::Kelvin),
        _ => return Err(Error::invalid("observation CSV needs exactly one of 'T_C' or 'T_K'")),
    };
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |c: usize| -> Result<f64> {
            let s = rec.get(c).unwrap_or("");
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::invalid(format!("row {}: '{s}' is not a finite number", i + 1)))
        };
        times.push(field(t_col)?);
        values.push(unit.to_kelvin(field(v_col)?));
    }
    if times.is_empty() {
        return Err(Error::invalid("observation CSV has no data rows"));
    }
    ObservationSample::measured(ObservationSchedule::new(x_obs, times)?, values)
}
