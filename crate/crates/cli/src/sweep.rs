//! Grid evaluation: 1-D/2-D sweeps over detuning, two-photon split or time.
//!
//! Every grid point is evaluated independently; failures become NaN rows
//! with the error recorded, never aborts. Row order is deterministic with
//! axis2 fastest.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;

use squeezesim::gaussian::{self, build_model, fmt_g17, minimal_variance, variances};
use squeezesim::params::{derive_rates, predict_optimal_time, PhysicalParams};

use crate::{Config, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisName {
    DeltaBig,
    DeltaBar,
    Time,
}

impl AxisName {
    fn label(self) -> &'static str {
        match self {
            AxisName::DeltaBig => "delta_big",
            AxisName::DeltaBar => "delta_bar",
            AxisName::Time => "t",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Axis {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn parse(spec: &str) -> Result<Axis, Failure> {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 4 {
            return Err(Failure::config(format!(
                "axis spec '{spec}' must be name:min:max:points"
            )));
        }
        let name = match parts[0] {
            "delta_big" => AxisName::DeltaBig,
            "delta_bar" => AxisName::DeltaBar,
            "t" => AxisName::Time,
            other => {
                return Err(Failure::config(format!(
                    "unknown axis '{other}', expected delta_big, delta_bar or t"
                )))
            }
        };
        let min: f64 = parts[1]
            .parse()
            .map_err(|_| Failure::config(format!("bad axis min '{}'", parts[1])))?;
        let max: f64 = parts[2]
            .parse()
            .map_err(|_| Failure::config(format!("bad axis max '{}'", parts[2])))?;
        let points: usize = parts[3]
            .parse()
            .map_err(|_| Failure::config(format!("bad axis points '{}'", parts[3])))?;
        if points < 2 {
            return Err(Failure::config("each axis needs at least 2 points"));
        }
        if !(min < max) {
            return Err(Failure::config("axis min must be < max"));
        }
        Ok(Axis { name, min, max, points })
    }

    fn value(&self, k: usize) -> f64 {
        self.min + (self.max - self.min) * k as f64 / (self.points - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    MinVar,
    VarYPlus,
    NTotal,
    TStar,
}

impl OutputKind {
    fn label(self) -> &'static str {
        match self {
            OutputKind::MinVar => "min_var",
            OutputKind::VarYPlus => "var_y_plus",
            OutputKind::NTotal => "n_total",
            OutputKind::TStar => "t_star",
        }
    }
}

pub fn parse_outputs(spec: &str) -> Result<Vec<OutputKind>, Failure> {
    spec.split(',')
        .map(|s| match s.trim() {
            "min_var" => Ok(OutputKind::MinVar),
            "var_y_plus" => Ok(OutputKind::VarYPlus),
            "n_total" => Ok(OutputKind::NTotal),
            "t_star" => Ok(OutputKind::TStar),
            other => Err(Failure::config(format!("unknown output '{other}'"))),
        })
        .collect()
}

struct Point {
    values: Vec<f64>, // axis values, outer first
}

/// min_var is the minimum over the evolved trajectory; var_y_plus and
/// n_total are taken at the final time; t_star is the closed-form optimum.
fn eval_point(
    base: &PhysicalParams,
    axes: &[Axis],
    point: &Point,
    outputs: &[OutputKind],
    t_final: Option<f64>,
    dt_user: Option<f64>,
) -> (Vec<f64>, String) {
    let nan_row = |err: String| (vec![f64::NAN; outputs.len()], err.replace(',', ";"));
    let mut p = base.clone();
    let mut horizon = t_final;
    for (axis, &v) in axes.iter().zip(point.values.iter()) {
        match axis.name {
            AxisName::DeltaBig => p.delta_big = v,
            AxisName::DeltaBar => {
                p.delta1 = base.delta1 + v;
                p.delta2 = base.delta2 - v;
            }
            AxisName::Time => horizon = Some(v),
        }
    }
    let d = match derive_rates(&p) {
        Ok(d) => d,
        Err(e) => return nan_row(e.to_string()),
    };
    let t_star = predict_optimal_time(&d);
    let horizon = match horizon {
        Some(t) => t,
        None => match &t_star {
            Ok(t) => 1.5 * t,
            Err(e) => return nan_row(format!("no horizon: {e}")),
        },
    };
    let m = match build_model(&p, &d) {
        Ok(m) => m,
        Err(e) => return nan_row(e.to_string()),
    };
    let dt = dt_user.unwrap_or_else(|| {
        let b = 0.5 * m.max_step();
        let by_horizon = if horizon > 0.0 { horizon / 2000.0 } else { 1e-3 };
        if b.is_finite() { b.min(by_horizon) } else { by_horizon }
    });
    let states = match gaussian::evolve(&m, horizon, dt) {
        Ok(s) => s,
        Err(e) => return nan_row(e.to_string()),
    };
    let last = states.last().unwrap();
    let row: Vec<f64> = outputs
        .iter()
        .map(|o| match o {
            OutputKind::MinVar => states
                .iter()
                .map(minimal_variance)
                .fold(f64::INFINITY, f64::min),
            OutputKind::VarYPlus => variances(last).y_plus,
            OutputKind::NTotal => match gaussian::excitations(last) {
                Ok((a, b)) => a + b,
                Err(_) => f64::NAN,
            },
            OutputKind::TStar => t_star.as_ref().map(|t| *t).unwrap_or(f64::NAN),
        })
        .collect();
    (row, String::new())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_sweep(
    cfg: &Config,
    axis1: &str,
    axis2: Option<&str>,
    outputs: &str,
    t_final: Option<f64>,
    dt: Option<f64>,
    jobs: usize,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let a1 = Axis::parse(axis1)?;
    let a2 = axis2.map(Axis::parse).transpose()?;
    let outputs = parse_outputs(outputs)?;
    let axes: Vec<Axis> = std::iter::once(a1).chain(a2).collect();

    // axis2 fastest
    let mut grid = Vec::new();
    for i in 0..a1.points {
        match a2 {
            Some(a2) => {
                for j in 0..a2.points {
                    grid.push(Point { values: vec![a1.value(i), a2.value(j)] });
                }
            }
            None => grid.push(Point { values: vec![a1.value(i)] }),
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure { code: 1, msg: e.to_string() })?;
    let rows: Vec<(Vec<f64>, String)> = pool.install(|| {
        grid.par_iter()
            .map(|pt| eval_point(&cfg.params, &axes, pt, &outputs, t_final, dt))
            .collect()
    });

    let mut buf = Vec::new();
    let header: Vec<String> = axes
        .iter()
        .map(|a| a.name.label().to_string())
        .chain(outputs.iter().map(|o| o.label().to_string()))
        .chain(std::iter::once("error".to_string()))
        .collect();
    writeln!(buf, "{}", header.join(","))?;
    for (pt, (vals, err)) in grid.iter().zip(rows.iter()) {
        let cols: Vec<String> = pt
            .values
            .iter()
            .chain(vals.iter())
            .map(|x| fmt_g17(*x))
            .chain(std::iter::once(err.clone()))
            .collect();
        writeln!(buf, "{}", cols.join(","))?;
    }
    match out {
        Some(path) => fs::write(path, &buf)?,
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(())
}
