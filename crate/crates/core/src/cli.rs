//! Command-line front end.
//!
//! Exit codes: 0 success, 1 domain error (structured JSON on stdout),
//! 2 usage error, 3 failed verification.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::atlas::{boundary_overlay, raster, time_contours, GridSpec};
use crate::characteristics::emit_characteristic;
use crate::dynamics::integrate;
use crate::error::EscapeError;
use crate::geometry::{ScaledState, VehicleConfig};
use crate::oracle::{summarize, verify, SampleSpec, VerifySettings};
use crate::output;
use crate::strategy::solve;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "dubins-escape",
    version,
    about = "Minimum-time escape of a turn-rate-limited vehicle from a circular region"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// Distance from the region center
    #[arg(long)]
    pub r: f64,
    /// Heading relative to the outward radial direction (radians unless --deg)
    #[arg(long, allow_negative_numbers = true)]
    pub theta: f64,
    /// Minimum turn radius
    #[arg(long = "R")]
    pub turn_radius: f64,
    /// Region radius
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    /// Speed
    #[arg(long, default_value_t = 1.0)]
    pub ve: f64,
    /// Read angles in degrees
    #[arg(long)]
    pub deg: bool,
}

impl StateArgs {
    fn theta_rad(&self) -> f64 {
        if self.deg {
            self.theta.to_radians()
        } else {
            self.theta
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrajectoryFormat {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the optimal strategy and report escape time and geometry (JSON)
    Solve {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the closed-loop optimal trajectory
    Trajectory {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long = "dt-max", default_value_t = 0.01)]
        dt_max: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = TrajectoryFormat::Csv)]
        format: TrajectoryFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rasterize strategy regions and escape times over (r, theta)
    Map {
        #[arg(long)]
        nr: usize,
        #[arg(long)]
        ntheta: usize,
        #[arg(long = "R")]
        turn_radius: f64,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long, default_value_t = 1.0)]
        ve: f64,
        /// Emit level sets of the escape time at these levels instead of the field
        #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with_all = ["pgm", "boundary"])]
        contours: Option<Vec<f64>>,
        /// Emit the analytic regime boundary instead of the field
        #[arg(long, conflicts_with = "pgm")]
        boundary: bool,
        /// Samples per branch of the boundary curve
        #[arg(long = "boundary-samples", default_value_t = 1024)]
        boundary_samples: usize,
        /// Emit the strategy raster as binary PGM instead of CSV
        #[arg(long)]
        pgm: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a retrograde characteristic from the boundary (scaled units)
    Characteristics {
        #[arg(long = "theta-f", allow_negative_numbers = true)]
        theta_f: f64,
        #[arg(long = "R")]
        turn_radius: f64,
        #[arg(long = "tau-max", default_value_t = 2.0)]
        tau_max: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        deg: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check closed-form times against integration and a brute-force path search
    Verify {
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long = "r-min", default_value_t = 0.05)]
        r_min: f64,
        #[arg(long = "r-max", default_value_t = 0.99)]
        r_max: f64,
        #[arg(
            long = "theta-min",
            default_value_t = 0.0,
            allow_negative_numbers = true
        )]
        theta_min: f64,
        #[arg(long = "theta-max", default_value_t = std::f64::consts::PI, allow_negative_numbers = true)]
        theta_max: f64,
        #[arg(long = "R-min", default_value_t = 0.05)]
        r_turn_min: f64,
        #[arg(long = "R-max", default_value_t = 3.0)]
        r_turn_max: f64,
        #[arg(long = "n-grid", default_value_t = 2000)]
        n_grid: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long = "dt-max", default_value_t = 0.05)]
        dt_max: f64,
        /// Write the per-sample report array (JSON) to this path
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Domain(EscapeError),
    Io(String),
}

impl From<EscapeError> for Failure {
    fn from(e: EscapeError) -> Self {
        Failure::Domain(e)
    }
}

fn finite(name: &str, values: &[f64]) -> Result<(), Failure> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{name} must be finite")))
    }
}

fn emit(out: &Option<PathBuf>, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(path) => {
            fs::write(path, bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
        }
        None => stdout
            .write_all(bytes)
            .map_err(|e| Failure::Io(e.to_string())),
    }
}

fn json_bytes(v: &serde_json::Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s.into_bytes()
}

fn execute(cmd: Command, stdout: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Solve { state, out } => {
            finite(
                "state",
                &[state.r, state.theta, state.turn_radius, state.rho, state.ve],
            )?;
            let config = VehicleConfig::new(state.rho, state.turn_radius, state.ve)?;
            let theta = state.theta_rad();
            let d = solve(ScaledState::new(state.r, theta)?, &config)?;
            let v =
                output::decision_json(state.r, theta, state.turn_radius, state.rho, state.ve, &d);
            emit(&out, &json_bytes(&v), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Trajectory {
            state,
            dt_max,
            tol,
            format,
            out,
        } => {
            finite(
                "state",
                &[state.r, state.theta, state.turn_radius, state.rho, state.ve],
            )?;
            if !(dt_max > 0.0 && tol > 0.0) {
                return Err(Failure::Usage("--dt-max and --tol must be positive".into()));
            }
            let config = VehicleConfig::new(state.rho, state.turn_radius, state.ve)?;
            let theta = state.theta_rad();
            // validates the start like the solver does
            solve(ScaledState::new(state.r, theta)?, &config)?;
            let start = ScaledState::new(state.r / config.rho, theta)?;
            let mut traj = integrate(start, config.scaled_turn_radius(), dt_max, tol)?;
            let (k_len, k_time) = (config.rho, config.time_scale());
            if k_len != 1.0 || k_time != 1.0 {
                for s in &mut traj.samples {
                    s.t *= k_time;
                    s.r *= k_len;
                    s.x *= k_len;
                    s.y *= k_len;
                }
                for e in &mut traj.events {
                    e.t *= k_time;
                    e.state.r *= k_len;
                }
                traj.t_escape *= k_time;
            }
            let bytes = match format {
                TrajectoryFormat::Csv => output::trajectory_csv(&traj).into_bytes(),
                TrajectoryFormat::Json => {
                    json_bytes(&serde_json::to_value(&traj).expect("serializes"))
                }
            };
            emit(&out, &bytes, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Map {
            nr,
            ntheta,
            turn_radius,
            rho,
            ve,
            contours,
            boundary,
            boundary_samples,
            pgm,
            out,
        } => {
            finite("map parameters", &[turn_radius, rho, ve])?;
            if nr < 2 || ntheta < 2 {
                return Err(Failure::Usage(
                    "--nr and --ntheta must be at least 2".into(),
                ));
            }
            if boundary_samples < 2 {
                return Err(Failure::Usage(
                    "--boundary-samples must be at least 2".into(),
                ));
            }
            if let Some(levels) = &contours {
                finite("contour levels", levels)?;
            }
            VehicleConfig::new(rho, turn_radius, ve)?;
            let spec = GridSpec {
                nr,
                ntheta,
                turn_radius,
                rho,
                ve,
            };
            let bytes = if boundary {
                output::curves_csv(&boundary_overlay(turn_radius, rho, boundary_samples)?)
                    .into_bytes()
            } else {
                let grid = raster(&spec)?;
                if pgm {
                    output::strategy_pgm(&grid)
                } else if let Some(levels) = contours {
                    output::contours_csv(&time_contours(&grid, &levels)).into_bytes()
                } else {
                    output::field_csv(&grid).into_bytes()
                }
            };
            emit(&out, &bytes, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Characteristics {
            theta_f,
            turn_radius,
            tau_max,
            tol,
            deg,
            out,
        } => {
            finite(
                "characteristic parameters",
                &[theta_f, turn_radius, tau_max, tol],
            )?;
            let theta_f = if deg { theta_f.to_radians() } else { theta_f };
            let path = emit_characteristic(theta_f, turn_radius, tau_max, tol)?;
            emit(&out, output::characteristic_csv(&path).as_bytes(), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Verify {
            count,
            seed,
            r_min,
            r_max,
            theta_min,
            theta_max,
            r_turn_min,
            r_turn_max,
            n_grid,
            tol,
            dt_max,
            report,
            out,
        } => {
            finite(
                "sampling ranges",
                &[
                    r_min, r_max, theta_min, theta_max, r_turn_min, r_turn_max, tol, dt_max,
                ],
            )?;
            if count == 0 || n_grid < 100 {
                return Err(Failure::Usage(
                    "--count must be >= 1 and --n-grid >= 100".into(),
                ));
            }
            if !(r_min < r_max && theta_min < theta_max && r_turn_min < r_turn_max) {
                return Err(Failure::Usage("sampling ranges must be non-empty".into()));
            }
            let spec = SampleSpec {
                count,
                seed,
                r_range: (r_min, r_max),
                theta_range: (theta_min, theta_max),
                turn_radius_range: (r_turn_min, r_turn_max),
            };
            let settings = VerifySettings {
                n_grid,
                dt_max,
                tol,
                ..VerifySettings::default()
            };
            let reports = verify(&spec, &settings)?;
            if let Some(path) = &report {
                fs::write(path, json_bytes(&output::verify_report_json(&reports)))
                    .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            }
            let summary = summarize(&reports);
            emit(
                &out,
                &json_bytes(&output::verify_summary_json(&summary)),
                stdout,
            )?;
            Ok(if summary.failed == 0 {
                EXIT_OK
            } else {
                EXIT_VERIFY_FAILED
            })
        }
    }
}

/// Parse `args` (including the program name) and run the subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Domain(e)) => {
            let v = json!({"error": e.code(), "message": e.to_string()});
            let _ = stdout.write_all(&json_bytes(&v));
            EXIT_DOMAIN
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_DOMAIN
        }
    }
}
