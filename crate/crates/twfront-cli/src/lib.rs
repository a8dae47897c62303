//! Command-line surface of the traveling-wave toolkit.
//!
//! Subcommands: `check`, `solve`, `profile`, `classify`, `simulate`,
//! `sweep`, `verify`. Exit codes: 0 success, 1 usage error, 2 certified
//! NoSolution, 3 inconclusive regime, 4 numerical failure.
//!
//! Data outputs are CSV; reports are JSON. Data files never carry
//! timestamps; each written file is accompanied by a `<file>.manifest.json`
//! with the tool version, resolved configuration, tolerances in effect and
//! wall-clock duration, so outputs are byte-reproducible while runs stay
//! attributable.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use twfront::asymptotics;
use twfront::config::ProblemConfig;
use twfront::criteria::{self, Verdict};
use twfront::error::Error as TwError;
use twfront::frontsim::{self, SimConfig};
use twfront::model::signed_power;
use twfront::oracle;
use twfront::profile::{self, EdgeValue, XiGrid};
use twfront::shooting::{self, SolveOptions, SolveStatus};
use twfront::Problem;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NO_SOLUTION: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "twfront",
    version,
    about = "Traveling waves of p-Laplacian reaction-diffusion-convection equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Problem description file (TOML).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output file for the subcommand's data or report.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Bisection tolerance on the wave speed.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_c: f64,

    /// Local error tolerance of the ODE stepper.
    #[arg(long, global = true, default_value_t = 1e-11)]
    tol_ode: f64,

    /// Suppress the manifest summary on stderr.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the existence/nonexistence criteria into a verdict.
    Check,
    /// Find the wave speed by shooting and monotone bisection.
    Solve(SolveArgs),
    /// Reconstruct the wave profile on a uniform grid.
    Profile(ProfileArgs),
    /// Classify the wave-edge behavior from the coefficient exponents.
    Classify,
    /// Evolve the PDE and fit the empirical front speed.
    Simulate(SimulateArgs),
    /// Solve along a parameter axis, one row per grid point.
    Sweep(SweepArgs),
    /// Run the inequality and constant-consistency oracle campaigns.
    Verify,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Write the reduced solution y(u) as CSV.
    #[arg(long, value_name = "FILE")]
    emit_y: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    xi_min: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    xi_max: f64,
    #[arg(long, default_value_t = 0.01)]
    xi_step: f64,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Domain half-width.
    #[arg(long = "L", default_value_t = 50.0)]
    half_width: f64,
    #[arg(long, default_value_t = 4000)]
    cells: usize,
    #[arg(long, default_value_t = 0.45)]
    cfl: f64,
    #[arg(long, default_value_t = 100.0)]
    t_end: f64,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Parameter axis: p, g0 or convection-scale.
    #[arg(long)]
    axis: String,
    #[arg(long, allow_hyphen_values = true)]
    from: f64,
    #[arg(long, allow_hyphen_values = true)]
    to: f64,
    #[arg(long)]
    steps: usize,
}

/// Parse `argv` and run; never panics on user error.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let started = Instant::now();
    match run(&cli, started) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("twfront: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &TwError) -> i32 {
    match e {
        TwError::Config(_) | TwError::Domain(_) | TwError::InvalidProblem(_) => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

fn load_problem(cli: &Cli) -> Result<(Problem, ProblemConfig, PathBuf), TwError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| TwError::Config("--config <FILE> is required".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| TwError::Config(format!("cannot read {}: {e}", path.display())))?;
    let parsed = ProblemConfig::from_toml(&text)?;
    let problem = parsed.to_problem()?;
    Ok((problem, parsed, path.clone()))
}

fn config_json(cfg: &ProblemConfig) -> Value {
    json!({
        "p": cfg.p,
        "theta": cfg.theta,
        "diffusion": {"d0": cfg.diffusion.d0, "alpha": cfg.diffusion.alpha, "beta": cfg.diffusion.beta},
        "reaction": {"g0": cfg.reaction.g0, "sigma": cfg.reaction.sigma, "gamma": cfg.reaction.gamma},
        "convection": {"coeffs": cfg.convection.coeffs},
    })
}

fn manifest(cli: &Cli, subcommand: &str, cfg: Option<&ProblemConfig>, started: Instant) -> Value {
    json!({
        "subcommand": subcommand,
        "version": env!("CARGO_PKG_VERSION"),
        "config_path": cli.config.as_ref().map(|p| p.display().to_string()),
        "config": cfg.map(config_json),
        "tolerances": {"tol_c": cli.tol_c, "tol_ode": cli.tol_ode},
        "duration_seconds": started.elapsed().as_secs_f64(),
    })
}

fn write_with_manifest(path: &Path, data: &str, manifest: &Value) -> Result<(), TwError> {
    fs::write(path, data)
        .map_err(|e| TwError::Config(format!("cannot write {}: {e}", path.display())))?;
    let mut manifest_path = path.as_os_str().to_owned();
    manifest_path.push(".manifest.json");
    fs::write(&manifest_path, format!("{:#}\n", manifest))
        .map_err(|e| TwError::Config(format!("cannot write manifest: {e}")))?;
    Ok(())
}

fn emit(cli: &Cli, subcommand: &str, cfg: Option<&ProblemConfig>, data: &str, started: Instant) -> Result<(), TwError> {
    let man = manifest(cli, subcommand, cfg, started);
    match &cli.out {
        Some(path) => write_with_manifest(path, data, &man)?,
        None => {
            println!("{}", data.trim_end_matches('\n'));
            if !cli.quiet {
                eprintln!("{man}");
            }
        }
    }
    Ok(())
}

fn solve_options(cli: &Cli) -> SolveOptions {
    SolveOptions { tol_c: cli.tol_c, tol_ode: cli.tol_ode, ..SolveOptions::default() }
}

fn edge_str(v: &EdgeValue, sign: &str) -> String {
    match v {
        EdgeValue::Finite(x) => format!("{x}"),
        EdgeValue::Infinite => format!("{sign}inf"),
    }
}

fn run(cli: &Cli, started: Instant) -> Result<i32, TwError> {
    match &cli.command {
        Command::Check => {
            let (problem, cfg, _) = load_problem(cli)?;
            let report = criteria::evaluate(&problem)?;
            let data = serde_json::to_string_pretty(&report)
                .map_err(|e| TwError::Config(e.to_string()))?;
            emit(cli, "check", Some(&cfg), &data, started)?;
            Ok(match report.verdict {
                Verdict::Exists => EXIT_OK,
                Verdict::NoSolution => EXIT_NO_SOLUTION,
                Verdict::Inconclusive => EXIT_INCONCLUSIVE,
            })
        }

        Command::Solve(args) => {
            let (problem, cfg, _) = load_problem(cli)?;
            let wave = shooting::find_wave_speed(&problem, &solve_options(cli))?;
            let report = criteria::evaluate(&problem)?;

            let invariants = wave.outcome.as_ref().map(|outcome| {
                let pci = problem.p_conj() * report.integral;
                let flux_theta = problem.convective_flux(problem.theta()).unwrap_or(f64::NAN);
                let c = wave.c_star.unwrap_or(f64::NAN);
                json!({
                    "positive_on_interior": outcome.interior_positive(),
                    "y_theta": outcome.y_theta(),
                    "y_theta_bound_p_conj_integral": pci,
                    "y_theta_below_bound": outcome.y_theta() < pci,
                    "root_identity_error": (outcome.z_theta() - c * problem.theta() - flux_theta).abs(),
                    "below_speed_bound": c < wave.shifted_bound,
                })
            });
            let data_json = json!({
                "status": match wave.status {
                    SolveStatus::Found => "found",
                    SolveStatus::NoSolution => "no_solution",
                    SolveStatus::InconclusiveRegime => "inconclusive",
                },
                "c_star": wave.c_star,
                "bracket": [wave.bracket.0, wave.bracket.1],
                "iterations": wave.iterations,
                "residual": wave.residual,
                "c_upper": report.c_upper,
                "verdict": report.verdict,
                "invariants": invariants,
            });
            let data = serde_json::to_string_pretty(&data_json)
                .map_err(|e| TwError::Config(e.to_string()))?;

            if let (Some(path), Some(outcome)) = (&args.emit_y, &wave.outcome) {
                let mut csv = String::from("u,y,y_pow_1_over_pconj\n");
                for &(u, y) in outcome.samples() {
                    let z = y.powf(1.0 / problem.p_conj());
                    let _ = writeln!(csv, "{u},{y},{z}");
                }
                write_with_manifest(path, &csv, &manifest(cli, "solve", Some(&cfg), started))?;
            }
            emit(cli, "solve", Some(&cfg), &data, started)?;
            Ok(match wave.status {
                SolveStatus::Found => EXIT_OK,
                SolveStatus::NoSolution => EXIT_NO_SOLUTION,
                SolveStatus::InconclusiveRegime => EXIT_INCONCLUSIVE,
            })
        }

        Command::Profile(args) => {
            let (problem, cfg, _) = load_problem(cli)?;
            let wave = shooting::find_wave_speed(&problem, &solve_options(cli))?;
            if wave.status == SolveStatus::NoSolution {
                eprintln!("twfront: no wave exists for this instance");
                return Ok(EXIT_NO_SOLUTION);
            }
            let grid = XiGrid { xi_min: args.xi_min, xi_max: args.xi_max, xi_step: args.xi_step };
            let table = profile::build_profile(&problem, &wave, grid)?;

            let mut csv = String::new();
            let _ = writeln!(
                csv,
                "# {{\"xi1\": \"{}\", \"xi2\": \"{}\", \"c_star\": {}}}",
                edge_str(&table.xi1, "-"),
                edge_str(&table.xi2, "+"),
                table.c_star
            );
            csv.push_str("xi,u,du_dxi,flux\n");
            for row in &table.rows {
                let flux = if row.u > 0.0 && row.u < 1.0 {
                    problem.diffusion(row.u).unwrap_or(f64::NAN)
                        * signed_power(row.du_dxi, problem.p() - 1.0)
                } else {
                    0.0
                };
                let _ = writeln!(csv, "{},{},{},{}", row.xi, row.u, row.du_dxi, flux);
            }
            emit(cli, "profile", Some(&cfg), &csv, started)?;
            Ok(if wave.status == SolveStatus::Found { EXIT_OK } else { EXIT_INCONCLUSIVE })
        }

        Command::Classify => {
            let (problem, cfg, _) = load_problem(cli)?;
            let p = problem.p();
            let alpha = problem.diffusion_spec().alpha;
            let beta = problem.diffusion_spec().beta;
            let gamma = problem.reaction_spec().gamma;
            let (at_zero, slope) = asymptotics::classify_zero(p, alpha)?;
            let (at_one, region) = asymptotics::classify_one(p, beta, gamma)?;
            let data_json = json!({
                "at_zero": at_zero,
                "slope_at_xi2": slope,
                "at_one": at_one,
                "region_at_one": region,
                "slope_at_xi1_zero": at_one == asymptotics::Support::FiniteEdge,
                "boundary_warning": asymptotics::near_boundary_zero(p, alpha)
                    || asymptotics::near_boundary_one(p, beta, gamma),
            });
            let data = serde_json::to_string_pretty(&data_json)
                .map_err(|e| TwError::Config(e.to_string()))?;
            emit(cli, "classify", Some(&cfg), &data, started)?;
            Ok(EXIT_OK)
        }

        Command::Simulate(args) => {
            let (problem, cfg, _) = load_problem(cli)?;
            let config = SimConfig {
                half_width: args.half_width,
                cells: args.cells,
                cfl: args.cfl,
                t_end: args.t_end,
                ..SimConfig::default()
            };
            let sim = frontsim::simulate(&problem, &config)?;
            let mut csv = String::from("t,x_front\n");
            for &(t, xf) in &sim.front_positions {
                let _ = writeln!(csv, "{t},{xf}");
            }
            let _ = writeln!(
                csv,
                "# {{\"fitted_speed\": {}, \"fit_rms\": {}, \"support_speed\": {}}}",
                sim.fitted_speed, sim.fit_rms, sim.support_speed
            );
            emit(cli, "simulate", Some(&cfg), &csv, started)?;
            Ok(EXIT_OK)
        }

        Command::Sweep(args) => {
            let (_, cfg, _) = load_problem(cli)?;
            let data = run_sweep(&cfg, args, &solve_options(cli))?;
            emit(cli, "sweep", Some(&cfg), &data, started)?;
            Ok(EXIT_OK)
        }

        Command::Verify => {
            let data = run_verify()?;
            emit(cli, "verify", None, &data, started)?;
            Ok(EXIT_OK)
        }
    }
}

fn instantiate_on_axis(cfg: &ProblemConfig, axis: &str, value: f64) -> Result<Problem, TwError> {
    let mut cfg = cfg.clone();
    match axis {
        "p" => cfg.p = value,
        "g0" => cfg.reaction.g0 = value,
        "convection-scale" => {
            for c in &mut cfg.convection.coeffs {
                *c *= value;
            }
        }
        other => {
            return Err(TwError::Config(format!(
                "unknown sweep axis `{other}` (expected p, g0 or convection-scale)"
            )))
        }
    }
    cfg.to_problem()
}

fn run_sweep(cfg: &ProblemConfig, args: &SweepArgs, opts: &SolveOptions) -> Result<String, TwError> {
    if args.steps < 2 {
        return Err(TwError::Config("sweep needs at least 2 steps".into()));
    }
    let values: Vec<f64> = (0..args.steps)
        .map(|i| args.from + (args.to - args.from) * i as f64 / (args.steps - 1) as f64)
        .collect();

    let threads = std::env::var("TWFRONT_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| TwError::Config(format!("worker pool: {e}")))?;

    use rayon::prelude::*;
    let rows: Vec<String> = pool.install(|| {
        values
            .par_iter()
            .map(|&value| {
                // Row-local failures are recorded in the row, never abort
                // the sweep.
                let row = (|| -> Result<String, TwError> {
                    let problem = instantiate_on_axis(cfg, &args.axis, value)?;
                    let wave = shooting::find_wave_speed(&problem, opts)?;
                    let (status, c_str) = match wave.status {
                        SolveStatus::Found => ("found", format!("{}", wave.c_star.unwrap())),
                        SolveStatus::InconclusiveRegime => {
                            ("inconclusive", format!("{}", wave.c_star.unwrap()))
                        }
                        SolveStatus::NoSolution => ("no_solution", String::new()),
                    };
                    let (xi1, xi2, region) = if wave.status == SolveStatus::NoSolution {
                        (String::new(), String::new(), String::new())
                    } else {
                        let (xi1, xi2) = profile::edge_positions(&problem, &wave)?;
                        let region = asymptotics::classify_one(
                            problem.p(),
                            problem.diffusion_spec().beta,
                            problem.reaction_spec().gamma,
                        )
                        .map(|(_, r)| format!("{r:?}"))
                        .unwrap_or_default();
                        (edge_str(&xi1, "-"), edge_str(&xi2, "+"), region)
                    };
                    Ok(format!("{value},{status},{c_str},{xi1},{xi2},{region}"))
                })();
                row.unwrap_or_else(|e| {
                    let kind = format!("{e}");
                    let kind = kind.split(':').next().unwrap_or("error").replace(',', ";");
                    format!("{value},error:{kind},,,,")
                })
            })
            .collect()
    });

    let mut data = String::from("value,status,c_star,xi1,xi2,region\n");
    for row in rows {
        data.push_str(&row);
        data.push('\n');
    }
    Ok(data)
}

fn run_verify() -> Result<String, TwError> {
    let mut out = String::new();
    let mut all_ok = true;

    // Truncated-binomial inequality campaign.
    let report = oracle::power_sum_campaign(100_000, 0x7F4A_11CE);
    let ok = report.violations == 0;
    all_ok &= ok;
    let _ = writeln!(
        out,
        "power-sum inequality: samples={} violations={} worst_margin={:.3e} [{}]",
        report.samples_tested,
        report.violations,
        report.worst_margin,
        if ok { "PASS" } else { "FAIL" }
    );

    // Golden-section constant against the closed form on an r grid.
    let mut worst = 0.0f64;
    for i in 0..50 {
        let r = 1.02 + 0.96 * i as f64 / 49.0;
        let diff = (oracle::power_sum_ratio_max(r)? - {
            let t1 = (r - 1.0).powf(1.0 / (r - 2.0));
            (1.0 + r * t1 + t1.powf(r)) / (1.0 + t1).powf(r)
        })
        .abs();
        worst = worst.max(diff);
    }
    let ok = worst <= 1e-10;
    all_ok &= ok;
    let _ = writeln!(
        out,
        "sharp-constant search: r_values=50 worst_diff={worst:.3e} [{}]",
        if ok { "PASS" } else { "FAIL" }
    );

    // Consistency of the existence constant across its derivations.
    let mut worst = 0.0f64;
    for i in 0..50 {
        let p = 1.05 + (20.0 - 1.05) * i as f64 / 49.0;
        if (p - 2.0).abs() < 1e-3 {
            continue;
        }
        worst = worst.max(oracle::existence_constant_consistency(p)?);
    }
    let ok = worst <= 1e-9;
    all_ok &= ok;
    let _ = writeln!(
        out,
        "existence-constant consistency: p_values=50 worst_diff={worst:.3e} [{}]",
        if ok { "PASS" } else { "FAIL" }
    );

    // Zero-speed clearance over a randomized family in hypothesis range.
    let report = oracle::zero_speed_clearance_campaign(100, 11)?;
    let ok = report.violations == 0;
    all_ok &= ok;
    let _ = writeln!(
        out,
        "zero-speed clearance: instances={} violations={} worst_margin={:.3e} [{}]",
        report.samples_tested,
        report.violations,
        report.worst_margin,
        if ok { "PASS" } else { "FAIL" }
    );

    if !all_ok {
        return Err(TwError::QuadratureFailure(format!(
            "verification campaign reported failures:\n{out}"
        )));
    }
    Ok(out.trim_end().to_string())
}
