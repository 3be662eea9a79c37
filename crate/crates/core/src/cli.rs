//! Command-line front end.
//!
//! Exit codes: 0 success, 1 other failure (I/O, failed self-check), 2 config
//! or usage error, 3 convergence failure, 4 contact or pull-in reached at a
//! requested operating point.

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::checks;
use crate::error::Error;
use crate::geometry::{section_properties, DeviceConfig, SectionProperties, DEFAULT_SERIES_TOL};
use crate::io::{load_config, write_curve, write_shape};
use crate::solver::{
    find_pullin, fixed_point, solve_for_voltage, sweep, EquilibriumPoint, Model, SolverOptions,
    ThetaGrid,
};
use crate::QuadratureRule;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_CONTACT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "micromirror",
    version,
    about = "Tilt-voltage curves, bending and pull-in of torsional micromirrors"
)]
struct Cli {
    #[command(flatten)]
    solver: SolverArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Relative tolerance on the equivalent load between iterations.
    #[arg(long, global = true, default_value_t = 1e-8)]
    load_tol: f64,

    /// Maximum fixed-point iterations per tilt.
    #[arg(long, global = true, default_value_t = 100)]
    max_iter: usize,

    /// Under-relaxation factor of the load update, in (0, 1].
    #[arg(long, global = true, default_value_t = 1.0)]
    relax: f64,

    /// Simpson nodes per electrode segment (odd, at least 3).
    #[arg(long, global = true, default_value_t = 65)]
    quad_points: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Bending,
    Rigid,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Bending => Model::Bending,
            ModelArg::Rigid => Model::Rigid,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tilt-voltage curve as CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Largest tilt in rad; defaults to 0.98 of the geometric limit.
        #[arg(long)]
        theta_max: Option<f64>,
        #[arg(long, value_enum, default_value = "bending")]
        model: ModelArg,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pull-in voltage, tilt and vertical displacement.
    Pullin {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "bending")]
        model: ModelArg,
    },
    /// Deformed shape of the beam axis as CSV.
    Shape {
        #[arg(long)]
        config: PathBuf,
        /// Tilt in rad.
        #[arg(long, conflicts_with = "voltage", required_unless_present = "voltage")]
        theta: Option<f64>,
        /// Applied voltage in V; solved on the stable branch.
        #[arg(long)]
        voltage: Option<f64>,
        #[arg(long, default_value_t = 201)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the numerical self-checks against a device.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Parses `args` (including the program name) and runs the command, writing
/// results to `stdout` and diagnostics to `stderr`. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Parse(_)
        | Error::Usage(_)
        | Error::InvalidGrid(_)
        | Error::NonPositiveTorque(_) => {
            EXIT_USAGE
        }
        Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
        Error::Contact { .. } | Error::BeyondPullIn { .. } | Error::NoPullIn { .. } => EXIT_CONTACT,
        Error::SingularSystem | Error::OutOfDomain { .. } | Error::Io(_) | Error::Csv(_) => {
            EXIT_FAILURE
        }
    }
}

fn options(args: &SolverArgs) -> Result<SolverOptions, Error> {
    let usage = Error::Usage;
    if !(args.load_tol > 0.0) {
        return Err(usage(format!("--load-tol must be positive, got {}", args.load_tol)));
    }
    if args.max_iter == 0 {
        return Err(usage("--max-iter must be at least 1".into()));
    }
    if !(args.relax > 0.0 && args.relax <= 1.0) {
        return Err(usage(format!("--relax must lie in (0, 1], got {}", args.relax)));
    }
    let rule = QuadratureRule::new(args.quad_points).ok_or_else(|| {
        usage(format!(
            "--quad-points must be odd and at least 3, got {}",
            args.quad_points
        ))
    })?;
    Ok(SolverOptions {
        load_rel_tol: args.load_tol,
        max_iterations: args.max_iter,
        relaxation: args.relax,
        rule,
        ..Default::default()
    })
}

fn load(path: &PathBuf) -> Result<(DeviceConfig, SectionProperties), Error> {
    let config = load_config(path).map_err(|e| match e {
        // a missing or unreadable config file is a usage error
        Error::Io(io) => Error::Usage(format!("cannot read {}: {io}", path.display())),
        other => other,
    })?;
    let props = section_properties(&config, DEFAULT_SERIES_TOL);
    Ok((config, props))
}

fn output(path: &Option<PathBuf>, stdout: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> crate::Result<()>) -> crate::Result<()> {
    match path {
        Some(p) => {
            let mut file = File::create(p)?;
            f(&mut file)
        }
        None => f(stdout),
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Error> {
    let mut opts = options(&cli.solver)?;
    match cli.command {
        Command::Sweep {
            config,
            points,
            theta_max,
            model,
            out,
        } => {
            let (config, props) = load(&config)?;
            opts.grid = ThetaGrid {
                points,
                theta_min: None,
                theta_max,
            };
            let grid = opts.grid.thetas(&config);
            let curve = sweep(&config, &props, &grid, &opts, model.into())?;
            output(&out, stdout, |w| write_curve(&curve, w))?;
            if let Some(t) = &curve.truncated {
                writeln!(
                    stderr,
                    "note: curve ends before theta = {:.6e} rad: {}",
                    t.theta, t.reason
                )?;
            }
            let unconverged = curve.points.iter().filter(|p| !p.converged).count();
            if unconverged > 0 {
                writeln!(stderr, "warning: {unconverged} points did not converge")?;
                return Ok(EXIT_NOT_CONVERGED);
            }
            Ok(EXIT_OK)
        }
        Command::Pullin { config, model } => {
            let (config, props) = load(&config)?;
            let r = find_pullin(&config, &props, &opts, model.into())?;
            writeln!(stdout, "model      {}", r.model)?;
            writeln!(stdout, "V_PI       {:.6} V", r.v_pullin)?;
            writeln!(
                stdout,
                "theta_PI   {:.9e} rad ({:.6} deg)",
                r.theta_pullin,
                r.theta_pullin.to_degrees()
            )?;
            writeln!(stdout, "u_max_PI   {:.6e} m", r.u_max_pullin)?;
            writeln!(
                stdout,
                "theta_PI/theta_geo {:.6}",
                r.theta_pullin / config.theta_geo()
            )?;
            Ok(EXIT_OK)
        }
        Command::Shape {
            config,
            theta,
            voltage,
            samples,
            out,
        } => {
            let (config, props) = load(&config)?;
            let point: EquilibriumPoint = match (theta, voltage) {
                (Some(theta), _) => {
                    let geo = config.theta_geo();
                    if !(theta > 0.0 && theta < geo) {
                        return Err(Error::Usage(format!(
                            "--theta must lie in (0, {geo:e}) rad"
                        )));
                    }
                    fixed_point(&config, &props, theta, &opts)?
                }
                (None, Some(v)) => solve_for_voltage(&config, &props, v, &opts)?,
                (None, None) => unreachable!("clap requires --theta or --voltage"),
            };
            if !point.converged {
                return Err(Error::NotConverged {
                    theta: point.theta,
                    iterations: point.iterations,
                });
            }
            output(&out, stdout, |w| write_shape(&point.shape.sample(samples), w))?;
            writeln!(
                stderr,
                "theta = {:.9e} rad ({:.6} deg), V = {:.6} V, w_eq = {:.6e} N/m, u_max = {:.6e} m",
                point.theta,
                point.theta.to_degrees(),
                point.voltage,
                point.w_eq,
                point.u_max()
            )?;
            Ok(EXIT_OK)
        }
        Command::Check { config } => {
            let (config, props) = load(&config)?;
            let outcomes = checks::run_all(&config, &props, &opts);
            for c in &outcomes {
                writeln!(
                    stdout,
                    "[{}] {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                )?;
            }
            Ok(if outcomes.iter().all(|c| c.passed) {
                EXIT_OK
            } else {
                EXIT_FAILURE
            })
        }
    }
}
