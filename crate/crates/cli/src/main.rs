//! `qtomo`: prior-biased quantum state estimation from sample means.
//!
//! Exit codes: 0 applicable/weak-criterion/prior-confirmed, 1 malformed or
//! invalid input, 2 insufficient data (N ≤ N_min), 3 infeasible targets,
//! 4 failed self-check or analytic/dense mismatch.

mod schema;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qtomo_core::diagnostics::{run_identity_checks, CheckOptions};
use qtomo_core::evidence::{run_evidence_with, EvidenceInput, EvidenceOptions, Status};
use qtomo_core::fourqubit::{compare_with_pipeline, AnalyticReport, CORRELATION_BOUND};
use qtomo_core::sampling::simulate_dataset;

const EXIT_OK: u8 = 0;
const EXIT_BAD_INPUT: u8 = 1;
const EXIT_INSUFFICIENT: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_CHECK_FAILED: u8 = 4;

#[derive(Parser)]
#[command(
    name = "qtomo",
    version,
    about = "Prior-biased state estimation for quantum tomography",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a state from a prior, an observable set, and measured means
    Estimate(EstimateArgs),
    /// Draw synthetic sample means from a known state
    Simulate(SimulateArgs),
    /// Reproduce the built-in four-qubit example analytically and densely
    Fourqubit(FourqubitArgs),
    /// Run the identity and cross-check suite
    Check(CheckArgs),
}

#[derive(Args)]
struct EstimateArgs {
    /// Prior state file (dense matrix JSON)
    #[arg(long)]
    prior: PathBuf,
    /// Observable set file (Pauli terms or dense matrices)
    #[arg(long)]
    observables: PathBuf,
    /// Dataset file with N and per-observable sample means
    #[arg(long)]
    data: PathBuf,
    /// Report output path
    #[arg(long)]
    out: PathBuf,
    /// Sharpness threshold below which the run is flagged weak-criterion
    #[arg(long, default_value_t = qtomo_core::evidence::DEFAULT_CRITERION_THRESHOLD)]
    criterion_threshold: f64,
    /// Per-degree-of-freedom tolerance under which the prior is confirmed
    #[arg(long, default_value_t = qtomo_core::evidence::DEFAULT_PRIOR_TOL)]
    prior_tol: f64,
}

#[derive(Args)]
struct SimulateArgs {
    /// True state file (dense matrix JSON)
    #[arg(long)]
    truth: PathBuf,
    /// Observable set file
    #[arg(long)]
    observables: PathBuf,
    /// Shots per observable
    #[arg(short = 'N', long = "sample-size")]
    sample_size: u64,
    /// Generator seed
    #[arg(long)]
    seed: u64,
    /// Dataset output path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FourqubitArgs {
    /// Prior correlation strength c(σ)
    #[arg(long = "c-prior", default_value_t = -0.02, allow_hyphen_values = true)]
    c_prior: f64,
    /// Measured correlation strength c
    #[arg(long = "c-data", default_value_t = -0.025, allow_hyphen_values = true)]
    c_data: f64,
    /// Sample size
    #[arg(short = 'N', long = "sample-size", default_value_t = 10_000)]
    sample_size: u64,
}

#[derive(Args)]
struct CheckArgs {
    /// Dimension range for the estimate-equivalence check, e.g. 2..16
    #[arg(long = "dim-sweep")]
    dim_sweep: Option<String>,
    /// Test hook: shift beta in one leg of each identity (negative control)
    #[arg(long, default_value_t = 0.0, hide = true)]
    inject_beta_perturbation: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Estimate(args) => run_estimate(&args),
        Command::Simulate(args) => run_simulate(&args),
        Command::Fourqubit(args) => run_fourqubit(&args),
        Command::Check(args) => run_check(&args),
    };
    ExitCode::from(code)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| {
        format!(
            "{}: parse error at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        )
    })
}

fn status_exit(status: Status) -> u8 {
    match status {
        Status::Applicable | Status::WeakCriterion | Status::PriorConfirmed => EXIT_OK,
        Status::InsufficientData => EXIT_INSUFFICIENT,
    }
}

fn run_estimate(args: &EstimateArgs) -> u8 {
    // parse everything before any computation starts
    let prior_file: schema::MatrixFile = match read_json(&args.prior) {
        Ok(v) => v,
        Err(e) => return bad_input(&e),
    };
    let entries: Vec<schema::ObservableEntry> = match read_json(&args.observables) {
        Ok(v) => v,
        Err(e) => return bad_input(&e),
    };
    let dataset: schema::DatasetFile = match read_json(&args.data) {
        Ok(v) => v,
        Err(e) => return bad_input(&e),
    };

    let prior = match prior_file.to_density_matrix() {
        Ok(p) => p,
        Err(e) => return bad_input(&format!("{}: {e}", args.prior.display())),
    };
    let set = match schema::parse_observable_set(&entries) {
        Ok(s) => s,
        Err(e) => return bad_input(&format!("{}: {e}", args.observables.display())),
    };
    let means = match dataset.aligned_means(&set) {
        Ok(m) => m,
        Err(e) => return bad_input(&format!("{}: {e}", args.data.display())),
    };
    let input = match EvidenceInput::new(prior, set, means, dataset.sample_size) {
        Ok(i) => i,
        Err(e) => return bad_input(&e.to_string()),
    };
    let options = EvidenceOptions {
        criterion_threshold: args.criterion_threshold,
        prior_tol: args.prior_tol,
    };
    let report = match run_evidence_with(&input, &options) {
        Ok(r) => r,
        Err(e) if e.is_infeasible() => {
            eprintln!("infeasible: {e}");
            return EXIT_INFEASIBLE;
        }
        Err(e) => return bad_input(&e.to_string()),
    };

    let document = schema::render_report(
        &report,
        input.set(),
        input.sample_size(),
        args.criterion_threshold,
        args.prior_tol,
    );
    if let Err(e) = fs::write(&args.out, document) {
        eprintln!("{}: {e}", args.out.display());
        return EXIT_BAD_INPUT;
    }
    let provenance = match (&dataset.seed, &dataset.truth_label) {
        (Some(seed), Some(truth)) => format!(" (data: seed {seed}, truth {truth})"),
        (Some(seed), None) => format!(" (data: seed {seed})"),
        (None, Some(truth)) => format!(" (data: truth {truth})"),
        (None, None) => String::new(),
    };
    println!(
        "status {} | S = {} | N_min = {} | report written to {}{provenance}",
        report.status.label(),
        schema::fmt_float(report.s_data.nats()),
        schema::fmt_float(report.n_min),
        args.out.display()
    );
    if let Some(s) = &report.scalars {
        println!(
            "alpha0 = {} | beta = {} | criterion = {}",
            schema::fmt_float(s.alpha0),
            schema::fmt_float(s.beta),
            schema::fmt_float(s.criterion)
        );
    }
    status_exit(report.status)
}

fn bad_input(message: &str) -> u8 {
    eprintln!("error: {message}");
    EXIT_BAD_INPUT
}

fn run_simulate(args: &SimulateArgs) -> u8 {
    let truth_file: schema::MatrixFile = match read_json(&args.truth) {
        Ok(v) => v,
        Err(e) => return bad_input(&e),
    };
    let entries: Vec<schema::ObservableEntry> = match read_json(&args.observables) {
        Ok(v) => v,
        Err(e) => return bad_input(&e),
    };
    let truth = match truth_file.to_density_matrix() {
        Ok(t) => t,
        Err(e) => return bad_input(&format!("{}: {e}", args.truth.display())),
    };
    let set = match schema::parse_observable_set(&entries) {
        Ok(s) => s,
        Err(e) => return bad_input(&format!("{}: {e}", args.observables.display())),
    };
    let mut dataset = match simulate_dataset(&truth, &set, args.sample_size, args.seed) {
        Ok(d) => d,
        Err(e) => return bad_input(&e.to_string()),
    };
    dataset.truth_label = args
        .truth
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned());
    let document = schema::render_dataset(&dataset, &set);
    if let Err(e) = fs::write(&args.out, document) {
        eprintln!("{}: {e}", args.out.display());
        return EXIT_BAD_INPUT;
    }
    println!(
        "simulated {} means at N = {} (seed {}) into {}",
        set.len(),
        args.sample_size,
        args.seed,
        args.out.display()
    );
    EXIT_OK
}

fn report_row(name: &str, analytic: f64, numeric: f64) {
    let dev = if analytic == numeric {
        0.0
    } else {
        (analytic - numeric).abs() / analytic.abs().max(numeric.abs())
    };
    println!("{name:<14} {analytic:>20.12} {numeric:>20.12} {dev:>12.2e}");
}

fn print_comparison(analytic: &AnalyticReport, numeric: &AnalyticReport) {
    println!(
        "{:<14} {:>20} {:>20} {:>12}",
        "", "analytic", "dense", "rel.dev"
    );
    report_row("lambda_prior", analytic.lambda_prior, numeric.lambda_prior);
    report_row("lambda_data", analytic.lambda_data, numeric.lambda_data);
    report_row("Z_prior", analytic.z_prior, numeric.z_prior);
    report_row("Z_data", analytic.z_data, numeric.z_data);
    report_row("S_data", analytic.s_data, numeric.s_data);
    report_row("N_min", analytic.n_min, numeric.n_min);
    if let (Some(a), Some(n)) = (&analytic.tail, &numeric.tail) {
        report_row("alpha0", a.alpha0, n.alpha0);
        report_row("beta", a.beta, n.beta);
        report_row("lambda_e", a.lambda_e, n.lambda_e);
        report_row("x_e", a.x_e, n.x_e);
        report_row("J2_e", a.j2_e, n.j2_e);
        report_row("c_e", a.c_e, n.c_e);
    }
    println!(
        "{:<14} {:>20} {:>20}",
        "status",
        analytic.status.label(),
        numeric.status.label()
    );
}

fn run_fourqubit(args: &FourqubitArgs) -> u8 {
    for (name, value) in [("--c-prior", args.c_prior), ("--c-data", args.c_data)] {
        if !(-CORRELATION_BOUND < value && value < CORRELATION_BOUND) {
            return bad_input(&format!(
                "{name} = {value} outside the open interval ({:.6}, {:.6}) \
                 required by the dense full-rank pipeline",
                -CORRELATION_BOUND, CORRELATION_BOUND
            ));
        }
    }
    if args.sample_size < 1 {
        return bad_input("-N must be at least 1");
    }
    let comparison = match compare_with_pipeline(args.c_prior, args.c_data, args.sample_size) {
        Ok(c) => c,
        Err(e) => return bad_input(&e.to_string()),
    };
    println!(
        "four-qubit example: c_prior = {}, c_data = {}, N = {}, r = 48",
        args.c_prior, args.c_data, args.sample_size
    );
    print_comparison(&comparison.analytic, &comparison.numeric);
    println!(
        "max relative deviation {:.3e} (bound 1.0e-5)",
        comparison.max_relative_deviation
    );
    if comparison.report.status == Status::InsufficientData {
        println!("sample too small: N <= N_min; keeping the prior bias");
        return EXIT_INSUFFICIENT;
    }
    if !comparison.status_match || comparison.max_relative_deviation > 1e-5 {
        eprintln!("analytic and dense results disagree");
        return EXIT_CHECK_FAILED;
    }
    EXIT_OK
}

fn parse_dim_sweep(text: &str) -> Result<Vec<usize>, String> {
    let (lo, hi) = text
        .split_once("..")
        .ok_or_else(|| format!("--dim-sweep `{text}`: expected a..b"))?;
    let lo: usize = lo.trim().parse().map_err(|_| format!("bad start `{lo}`"))?;
    let hi: usize = hi.trim().parse().map_err(|_| format!("bad end `{hi}`"))?;
    if lo < 2 || hi < lo || hi > 64 {
        return Err(format!("--dim-sweep {lo}..{hi}: need 2 <= a <= b <= 64"));
    }
    Ok((lo..=hi).collect())
}

fn run_check(args: &CheckArgs) -> u8 {
    let mut options = CheckOptions {
        beta_perturbation: args.inject_beta_perturbation,
        ..Default::default()
    };
    if let Some(sweep) = &args.dim_sweep {
        options.dims = match parse_dim_sweep(sweep) {
            Ok(d) => d,
            Err(e) => return bad_input(&e),
        };
    }
    let results = match run_identity_checks(&options) {
        Ok(r) => r,
        Err(e) => return bad_input(&e.to_string()),
    };
    let mut all_passed = true;
    for r in &results {
        println!(
            "{} {:<70} measured {:>10.3e}  bound {:>8.1e}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.measured,
            r.bound
        );
        all_passed &= r.passed;
    }
    if all_passed {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}
