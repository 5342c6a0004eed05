//! Command-line front end: fidelity curves, channel evaluation, the Choi-cone
//! optimizer and the universality check, all emitting CSV.
//!
//! Exit codes: 0 success (or UNIVERSAL verdict), 1 NON-UNIVERSAL verdict,
//! 2 config error, 3 input-file error, 4 total optimizer failure.

use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use qushift::channel::{compose, KrausChannel};
use qushift::fidelity::{
    average_fidelity_kernel, average_fidelity_monte_carlo_task, average_fidelity_quadrature_task,
    closed_form_fidelity, fidelity_kernel_task, universality_spread, FidelityEstimate, Method,
    SchemeId, UNIVERSALITY_THRESHOLD,
};
use qushift::optimize::{eta_optimal, sdp_optimize, SDP_DEFAULT_MAX_ITER};
use qushift::quad::QuadratureSpec;
use qushift::qubit::ShiftTask;
use qushift::specfile::load_channel;
use qushift::Error;

/// Documented default seed: fixed, never time-derived.
const DEFAULT_SEED: u64 = 7;

#[derive(Parser)]
#[command(name = "qushift", version, about = "Universal single-qubit shift maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fidelity-versus-k curve for one or more schemes
    Curve(CurveArgs),
    /// Evaluate a channel spec file at a single k
    Eval(EvalArgs),
    /// Maximize average fidelity over all CPTP maps on a k grid
    Optimize(OptimizeArgs),
    /// Universality (theta, phi independence) check of a channel spec
    Check(CheckArgs),
}

#[derive(Args)]
struct CommonQuad {
    /// Gauss-Legendre order in cos(theta)
    #[arg(long = "quad-theta", default_value_t = 32)]
    quad_theta: usize,
    /// Number of uniform phi nodes
    #[arg(long = "quad-phi", default_value_t = 64)]
    quad_phi: usize,
}

#[derive(Args)]
struct CurveArgs {
    /// k grid as start:stop:steps (radians, steps = number of points)
    #[arg(long = "k-grid")]
    k_grid: Option<String>,
    /// Single k in radians (alternative to --k-grid)
    #[arg(long)]
    k: Option<f64>,
    /// Comma-separated schemes: identity,unot,mp1,mp2,mp3,optimal,eta:<v>
    #[arg(long, default_value = "optimal")]
    scheme: String,
    /// closed | quadrature | mc | kernel
    #[arg(long, default_value = "quadrature")]
    method: String,
    /// Monte Carlo sample count
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Additional phi shift l; composes a z-rotation onto each channel
    #[arg(long, default_value_t = 0.0)]
    l: f64,
    #[command(flatten)]
    quad: CommonQuad,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Channel spec JSON file
    spec: PathBuf,
    #[arg(long)]
    k: f64,
    #[arg(long, default_value = "quadrature")]
    method: String,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    l: f64,
    #[command(flatten)]
    quad: CommonQuad,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long = "k-grid")]
    k_grid: Option<String>,
    #[arg(long)]
    k: Option<f64>,
    /// Objective-change convergence tolerance
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    quad: CommonQuad,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Channel spec JSON file
    spec: PathBuf,
    #[arg(long)]
    k: f64,
    /// Spread threshold for the UNIVERSAL verdict
    #[arg(long, default_value_t = UNIVERSALITY_THRESHOLD)]
    threshold: f64,
    #[command(flatten)]
    quad: CommonQuad,
}

fn fmt(x: f64) -> String {
    // 17 significant digits
    format!("{x:.16e}")
}

fn config_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn input_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(3)
}

fn parse_k_grid(grid: &Option<String>, single: Option<f64>) -> Result<Vec<f64>, String> {
    match (grid, single) {
        (Some(_), Some(_)) => Err("give either --k or --k-grid, not both".into()),
        (None, Some(k)) => Ok(vec![k]),
        (None, None) => Err("missing --k or --k-grid".into()),
        (Some(g), None) => {
            let parts: Vec<&str> = g.split(':').collect();
            if parts.len() != 3 {
                return Err(format!("--k-grid '{g}' is not start:stop:steps"));
            }
            let start: f64 = parts[0].parse().map_err(|_| format!("--k-grid start '{}'", parts[0]))?;
            let stop: f64 = parts[1].parse().map_err(|_| format!("--k-grid stop '{}'", parts[1]))?;
            let steps: usize = parts[2].parse().map_err(|_| format!("--k-grid steps '{}'", parts[2]))?;
            if steps < 1 {
                return Err("--k-grid steps must be >= 1".into());
            }
            if steps == 1 {
                return Ok(vec![start]);
            }
            Ok((0..steps)
                .map(|i| start + (stop - start) * i as f64 / (steps - 1) as f64)
                .collect())
        }
    }
}

fn parse_method(s: &str) -> Result<Method, String> {
    match s {
        "closed" => Ok(Method::Closed),
        "quadrature" => Ok(Method::Quadrature),
        "mc" => Ok(Method::MonteCarlo),
        "kernel" => Ok(Method::Kernel),
        _ => Err(format!("--method '{s}' (expected closed|quadrature|mc|kernel)")),
    }
}

fn make_quad(q: &CommonQuad) -> Result<QuadratureSpec, String> {
    QuadratureSpec::new(q.quad_theta, q.quad_phi).map_err(|e| format!("--quad-theta/--quad-phi: {e}"))
}

/// One fidelity evaluation of a concrete channel; --l composes a z-rotation
/// and shifts the target accordingly.
fn eval_channel(
    ch: &KrausChannel,
    task: ShiftTask,
    method: Method,
    quad: &QuadratureSpec,
    samples: u64,
    seed: u64,
) -> Result<FidelityEstimate, Error> {
    let effective = if task.l != 0.0 {
        compose(ch, &KrausChannel::z_rotation(task.l))
    } else {
        ch.clone()
    };
    match method {
        Method::Closed => Err(Error::NoClosedForm),
        Method::Quadrature => average_fidelity_quadrature_task(&effective, task, quad),
        Method::MonteCarlo => average_fidelity_monte_carlo_task(&effective, task, samples, seed),
        Method::Kernel => {
            let kernel = fidelity_kernel_task(task, quad);
            average_fidelity_kernel(&effective, &kernel)
        }
    }
}

fn write_out(out: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(p) => std::fs::write(p, content).map_err(|e| format!("cannot write {}: {e}", p.display())),
    }
}

const CURVE_HEADER: &str = "k,scheme,method,F,stderr,n_samples,seed\n";

fn run_curve(args: &CurveArgs) -> ExitCode {
    let ks = match parse_k_grid(&args.k_grid, args.k) {
        Ok(v) => v,
        Err(m) => return config_error(&m),
    };
    let method = match parse_method(&args.method) {
        Ok(m) => m,
        Err(m) => return config_error(&m),
    };
    let quad = match make_quad(&args.quad) {
        Ok(q) => q,
        Err(m) => return config_error(&m),
    };
    if method == Method::MonteCarlo && args.samples < 100 {
        return config_error("--samples must be >= 100 for method mc");
    }
    let schemes: Result<Vec<SchemeId>, Error> =
        args.scheme.split(',').map(SchemeId::parse).collect();
    let schemes = match schemes {
        Ok(s) if !s.is_empty() => s,
        Ok(_) => return config_error("--scheme: need at least one scheme"),
        Err(e) => return config_error(&format!("--scheme: {e}")),
    };

    let mut csv = String::from(CURVE_HEADER);
    for &k in &ks {
        let task = match ShiftTask::new(k, args.l.rem_euclid(std::f64::consts::TAU)) {
            Ok(t) => t,
            Err(e) => return config_error(&format!("--k/--k-grid: {e}")),
        };
        for scheme in &schemes {
            let est = match method {
                Method::Closed => match closed_form_fidelity(*scheme, k) {
                    Ok(v) => FidelityEstimate::deterministic(v, Method::Closed).unwrap(),
                    Err(e) => return config_error(&format!("--scheme {}: {e}", scheme.label())),
                },
                _ => {
                    let ch = match scheme.channel(k, &quad) {
                        Ok(c) => c,
                        Err(e) => return config_error(&format!("--scheme {}: {e}", scheme.label())),
                    };
                    match eval_channel(&ch, task, method, &quad, args.samples, args.seed) {
                        Ok(est) => est,
                        Err(e) => return config_error(&format!("--method: {e}")),
                    }
                }
            };
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                fmt(k),
                scheme.label(),
                est.method.as_str(),
                fmt(est.value),
                fmt(est.stderr),
                est.n_samples,
                args.seed
            ));
        }
    }
    match write_out(&args.out, &csv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(m) => input_error(&m),
    }
}

fn run_eval(args: &EvalArgs) -> ExitCode {
    let method = match parse_method(&args.method) {
        Ok(m) => m,
        Err(m) => return config_error(&m),
    };
    if method == Method::Closed {
        return config_error("--method closed requires a named scheme; use the curve command");
    }
    let quad = match make_quad(&args.quad) {
        Ok(q) => q,
        Err(m) => return config_error(&m),
    };
    let task = match ShiftTask::new(args.k, args.l.rem_euclid(std::f64::consts::TAU)) {
        Ok(t) => t,
        Err(e) => return config_error(&format!("--k: {e}")),
    };
    let ch = match load_channel(&args.spec) {
        Ok(c) => c,
        Err(e) => return input_error(&e.to_string()),
    };
    let est = match eval_channel(&ch, task, method, &quad, args.samples, args.seed) {
        Ok(e) => e,
        Err(e) => return config_error(&e.to_string()),
    };
    print!("{CURVE_HEADER}");
    println!(
        "{},{},{},{},{},{},{}",
        fmt(args.k),
        args.spec.display(),
        est.method.as_str(),
        fmt(est.value),
        fmt(est.stderr),
        est.n_samples,
        args.seed
    );
    ExitCode::SUCCESS
}

fn run_optimize(args: &OptimizeArgs) -> ExitCode {
    let ks = match parse_k_grid(&args.k_grid, args.k) {
        Ok(v) => v,
        Err(m) => return config_error(&m),
    };
    let quad = match make_quad(&args.quad) {
        Ok(q) => q,
        Err(m) => return config_error(&m),
    };
    let mut csv = String::from("k,f_sdp,f_universal,gap,tp_residual,min_eig,iterations,converged\n");
    let mut any_converged = false;
    for &k in &ks {
        let f_universal = match eta_optimal(k) {
            Ok((_, f)) => f,
            Err(e) => return config_error(&format!("--k/--k-grid: {e}")),
        };
        let kernel = fidelity_kernel_task(ShiftTask { k, l: 0.0 }, &quad);
        let r = sdp_optimize(&kernel, args.tol, SDP_DEFAULT_MAX_ITER);
        any_converged |= r.converged;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt(k),
            fmt(r.value),
            fmt(f_universal),
            fmt(r.value - f_universal),
            fmt(r.tp_residual),
            fmt(r.min_eigenvalue),
            r.iterations,
            r.converged
        ));
    }
    if let Err(m) = write_out(&args.out, &csv) {
        return input_error(&m);
    }
    if any_converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(4)
    }
}

fn run_check(args: &CheckArgs) -> ExitCode {
    let quad = match make_quad(&args.quad) {
        Ok(q) => q,
        Err(m) => return config_error(&m),
    };
    if !(0.0..=std::f64::consts::PI).contains(&args.k) {
        return config_error(&format!("--k: k = {} not in [0, pi]", args.k));
    }
    let ch = match load_channel(&args.spec) {
        Ok(c) => c,
        Err(e) => return input_error(&e.to_string()),
    };
    let (spread, mean) =
        match universality_spread(&ch, args.k, quad.n_theta.max(16), quad.n_phi.max(32)) {
            Ok(r) => r,
            Err(e) => return config_error(&e.to_string()),
        };
    let universal = spread < args.threshold;
    println!("spread = {}", fmt(spread));
    println!("mean = {}", fmt(mean));
    println!("verdict = {}", if universal { "UNIVERSAL" } else { "NON-UNIVERSAL" });
    std::io::stdout().flush().ok();
    if universal {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Curve(a) => run_curve(a),
        Command::Eval(a) => run_eval(a),
        Command::Optimize(a) => run_optimize(a),
        Command::Check(a) => run_check(a),
    }
}
