//! Command-line surface: config ingestion, single evolutions, parameter
//! sweeps, optimum finding and engine/oracle cross-validation.
//!
//! Exit codes: 0 ok, 1 comparison failure, 2 config error, 3 oracle guard,
//! 4 numerical guard.

mod sweep;

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{ArgGroup, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use squeezesim::error::Error as CoreError;
use squeezesim::gaussian::{self, build_model, GaussianState};
use squeezesim::params::{
    derive_rates, predict_optimal_detuning, predict_optimal_time, regime_check,
    PhysicalParams, DEFAULT_REGIME_THRESHOLD,
};
use squeezesim::fock;

pub const EXIT_COMPARISON: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ORACLE_GUARD: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub msg: String,
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_CONFIG, msg: msg.into() }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::CutoffTooSmall { .. } => EXIT_ORACLE_GUARD,
            CoreError::StepSize { .. }
            | CoreError::NegativeOccupancy { .. }
            | CoreError::TraceDrift { .. } => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        };
        Failure { code, msg: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 1, msg: format!("io error: {e}") }
    }
}

/// Top-level configuration document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    pub params: PhysicalParams,
}

pub fn load_config(path: &PathBuf) -> Result<Config, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    let cfg: Config = serde_json::from_str(&text)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    if cfg.schema_version != 1 {
        return Err(Failure::config(format!(
            "unsupported schema_version {}, expected 1",
            cfg.schema_version
        )));
    }
    cfg.params.validate().map_err(Failure::from)?;
    Ok(cfg)
}

#[derive(Parser, Debug)]
#[command(name = "squeezesim", about = "Two-mode squeezing simulator for light-mediated atomic pair generation", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Print derived rates, regime report and closed-form optima as JSON.
    Derive {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Factor demanded of each ">>" inequality.
        #[arg(long, default_value_t = DEFAULT_REGIME_THRESHOLD)]
        regime_threshold: f64,
    },
    /// Integrate one trajectory and emit the time-series CSV.
    #[command(group(ArgGroup::new("engine").args(["ideal", "gaussian", "oracle"])))]
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        t_final: f64,
        /// Integrator step; defaults to half the stability bound.
        #[arg(long)]
        dt: Option<f64>,
        /// Closed-form lossless columns on the same grid.
        #[arg(long)]
        ideal: bool,
        /// Covariance engine (default).
        #[arg(long)]
        gaussian: bool,
        /// Truncated Fock oracle; requires --cutoff.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        cutoff: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a 1-D or 2-D grid and emit one CSV row per point.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Axis as name:min:max:points with name in {delta_big, delta_bar, t}.
        #[arg(long)]
        axis1: String,
        #[arg(long)]
        axis2: Option<String>,
        /// Comma-separated subset of {min_var, var_y_plus, n_total, t_star}.
        #[arg(long, default_value = "min_var")]
        outputs: String,
        /// Horizon for points without a time axis; defaults to 1.5 t*.
        #[arg(long)]
        t_final: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Worker threads for the grid; 0 means one per core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validate the covariance engine against the Fock oracle.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        cutoff: usize,
        #[arg(long)]
        t_final: f64,
        /// Oracle integrator step; defaults to t_final/2000.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_output(out: Option<PathBuf>, data: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, data)?,
        None => std::io::stdout().write_all(data)?,
    }
    Ok(())
}

fn cmd_derive(
    config: PathBuf,
    out: Option<PathBuf>,
    regime_threshold: f64,
) -> Result<(), Failure> {
    let cfg = load_config(&config)?;
    let d = derive_rates(&cfg.params)?;
    let regime = regime_check(&cfg.params, regime_threshold);
    let optimum = predict_optimal_detuning(&cfg.params).ok();
    let (t_star, t_star_error) = match predict_optimal_time(&d) {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let report = serde_json::json!({
        "derived_rates": d,
        "regime_report": regime,
        "optimal_detuning": optimum,
        "t_star": t_star,
        "t_star_error": t_star_error,
    });
    let mut text = serde_json::to_string_pretty(&report)
        .map_err(|e| Failure { code: 1, msg: e.to_string() })?;
    text.push('\n');
    write_output(out, text.as_bytes())
}

fn cmd_evolve(
    config: PathBuf,
    t_final: f64,
    dt: Option<f64>,
    ideal: bool,
    oracle: bool,
    cutoff: Option<usize>,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let cfg = load_config(&config)?;
    let d = derive_rates(&cfg.params)?;
    let m = build_model(&cfg.params, &d)?;
    let dt = dt.unwrap_or_else(|| {
        let b = 0.5 * m.max_step();
        if b.is_finite() { b } else { t_final.max(1e-3) / 1000.0 }
    });
    if !(dt > 0.0) {
        return Err(Failure::config(format!("dt must be > 0, got {dt}")));
    }
    let mut buf = Vec::new();
    if ideal {
        let xi = m.xi;
        let n_steps = if t_final > 0.0 { (t_final / dt - 1e-12).ceil().max(1.0) as usize } else { 0 };
        let mut states = vec![GaussianState::ideal(0.0, 0.0)];
        let mut t = 0.0;
        for k in 0..n_steps {
            t = if k + 1 == n_steps { t_final } else { t + dt };
            states.push(GaussianState::ideal(t, xi * t));
        }
        gaussian::write_series_csv(&mut buf, &states, xi)?;
        write_output(out, &buf)?;
    } else if oracle {
        let cutoff = cutoff
            .ok_or_else(|| Failure::config("--oracle requires --cutoff"))?;
        let series = fock::oracle_evolve(&m, t_final, dt, cutoff, 1)?;
        let states: Vec<GaussianState> = series
            .states
            .iter()
            .map(|st| {
                let (mean, cov) = st.moments();
                GaussianState::from_mode_cov(st.time, mean, cov)
            })
            .collect();
        gaussian::write_series_csv(&mut buf, &states, m.xi)?;
        write_output(out, &buf)?;
        if series.flagged {
            return Err(Failure {
                code: EXIT_ORACLE_GUARD,
                msg: format!(
                    "truncation health violated: top-layer population {:.3e} >= 1e-6",
                    series.max_top_layer
                ),
            });
        }
    } else {
        let states = gaussian::evolve(&m, t_final, dt)?;
        gaussian::write_series_csv(&mut buf, &states, m.xi)?;
        write_output(out, &buf)?;
    }
    Ok(())
}

fn cmd_validate(
    config: PathBuf,
    cutoff: usize,
    t_final: f64,
    dt: Option<f64>,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let cfg = load_config(&config)?;
    let d = derive_rates(&cfg.params)?;
    let m = build_model(&cfg.params, &d)?;
    let dt_oracle = dt.unwrap_or(t_final / 2000.0);
    let dt_engine = (0.5 * m.max_step()).min(t_final / 2000.0);
    let report = fock::compare_engine_oracle(&m, t_final, dt_engine, dt_oracle, cutoff)?;
    let mut text = serde_json::to_string_pretty(&report)
        .map_err(|e| Failure { code: 1, msg: e.to_string() })?;
    text.push('\n');
    write_output(out, text.as_bytes())?;
    if report.truncation_flagged {
        return Err(Failure {
            code: EXIT_ORACLE_GUARD,
            msg: format!(
                "truncation health violated: top-layer population {:.3e} >= 1e-6",
                report.max_top_layer
            ),
        });
    }
    if !report.overall_pass {
        let failing: Vec<String> = report
            .moments
            .iter()
            .filter(|r| !r.pass)
            .map(|r| r.name.clone())
            .chain(
                report
                    .fourth_cumulants
                    .iter()
                    .filter(|c| !c.pass)
                    .map(|c| format!("cumulant {}", c.name)),
            )
            .collect();
        return Err(Failure {
            code: EXIT_COMPARISON,
            msg: format!("comparison failed: {}", failing.join(", ")),
        });
    }
    Ok(())
}

fn run() -> Result<(), Failure> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Derive { config, out, regime_threshold } => {
            cmd_derive(config, out, regime_threshold)
        }
        Cmd::Evolve { config, t_final, dt, ideal, gaussian: _, oracle, cutoff, out } => {
            cmd_evolve(config, t_final, dt, ideal, oracle, cutoff, out)
        }
        Cmd::Sweep { config, axis1, axis2, outputs, t_final, dt, jobs, out } => {
            let cfg = load_config(&config)?;
            sweep::cmd_sweep(&cfg, &axis1, axis2.as_deref(), &outputs, t_final, dt, jobs, out)
        }
        Cmd::Validate { config, cutoff, t_final, dt, out } => {
            cmd_validate(config, cutoff, t_final, dt, out)
        }
    }
}

fn main() {
    match run() {
        Ok(()) => {}
        Err(f) => {
            eprintln!("error: {}", f.msg);
            std::process::exit(f.code);
        }
    }
}
