use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use edr_core::bounds::{evaluate_relation, EdrInputs, Relation};
use edr_core::estimators::{
    cascade_distribution, derive_seed, estimate_from_counts, sample_shots, weak_probe_disturbance, weak_probe_error,
    EstimateMode, WeakProbe, DEFAULT_PROBE_STRENGTH,
};
use edr_core::fock::{restrict_to_single_photon, stokes_operator, FockSpace};
use edr_core::instruments::{imperfect_pbs_instrument, vpbs_instrument};
use edr_core::linalg::{expectation, ComplexMatrix};
use edr_core::qubit::{parse_state_literal, sigma_x, sigma_y, sigma_z, Observable, QubitPure};
use edr_core::sweep::{emit_table, format_number, run_sweep, SweepConfig, TableFormat};
use edr_core::EdrError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_IO: u8 = 3;

/// Error and disturbance of generalized qubit measurements.
#[derive(Debug, Parser)]
#[command(name = "edr-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep the measurement strength and write a table of estimates and bounds.
    Sweep(SweepArgs),
    /// Evaluate every relation for one (eps, eta, C) point.
    Bounds(BoundsArgs),
    /// Simulate one photon-counting run and print the estimates.
    Shots(ShotsArgs),
    /// Check that the single-photon Stokes operators reduce to the Pauli matrices.
    FockCheck(FockArgs),
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Override a configuration key after loading, e.g. `--set seed=3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: TableFormat,
    /// Output file; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    eta: f64,
    /// Commutator bound C (or D for mixed states).
    #[arg(long = "C", value_name = "C")]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma_a: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma_b: f64,
    /// Commutator term of Ozawa's first relation; ozawa0 is skipped without it.
    #[arg(long)]
    cross: Option<f64>,
    /// Bloch direction of A as `x,y,z`.
    #[arg(long, default_value = "0,0,1", value_parser = parse_vector)]
    a: [f64; 3],
    /// Bloch direction of B as `x,y,z`.
    #[arg(long, default_value = "1,0,0", value_parser = parse_vector)]
    b: [f64; 3],
}

#[derive(Debug, Args)]
struct ShotsArgs {
    #[arg(long)]
    theta: f64,
    #[arg(long, default_value_t = 1_000_000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_PROBE_STRENGTH)]
    probe_strength: f64,
    /// Signal state: H, V, D, A, L, R or `[re,im],[re,im]`.
    #[arg(long, default_value = "L")]
    state: String,
    #[arg(long, default_value_t = 0.0)]
    extinction: f64,
}

#[derive(Debug, Args)]
struct FockArgs {
    /// Photons per mode kept in the truncated space.
    #[arg(long, default_value_t = 2)]
    cutoff: usize,
    /// Random polarization states for the Poincare-sphere check.
    #[arg(long, default_value_t = 100)]
    samples: usize,
}

fn parse_format(s: &str) -> Result<TableFormat, String> {
    s.parse().map_err(|e: EdrError| e.to_string())
}

fn parse_vector(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("'{p}': {e}")))
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|_| format!("expected three components, got '{s}'"))
}

fn exit_code(e: &EdrError) -> u8 {
    match e {
        EdrError::Config(_) | EdrError::InvalidInput(_) | EdrError::MissingInput(_) => EXIT_CONFIG,
        EdrError::Io { .. } => EXIT_IO,
        _ => EXIT_NUMERICAL,
    }
}

fn sweep(args: SweepArgs) -> edr_core::Result<()> {
    let cfg = SweepConfig::load(&args.config, &args.overrides)?;
    let rows = run_sweep(&cfg)?;
    emit_table(&rows, args.format, args.output.as_deref())
}

fn bounds(args: BoundsArgs) -> edr_core::Result<()> {
    let inputs = EdrInputs {
        eps: args.eps,
        eta: args.eta,
        sigma_a: args.sigma_a,
        sigma_b: args.sigma_b,
        c: args.c,
        bloch_a: Some(args.a),
        bloch_b: Some(args.b),
        ozawa_cross: args.cross,
    };
    println!("{:<18} {:>16} {:>16} {:>16}  status", "relation", "lhs", "rhs", "slack");
    for relation in Relation::ALL {
        if relation == Relation::Ozawa0 && args.cross.is_none() {
            continue;
        }
        let r = evaluate_relation(relation, &inputs)?;
        let status = match (r.satisfied, r.out_of_model) {
            (_, true) => "out-of-model",
            (true, false) => "holds",
            (false, false) => "violated",
        };
        println!(
            "{:<18} {:>16} {:>16} {:>16}  {status}",
            relation.name(),
            format_number(r.lhs),
            format_number(r.rhs),
            format_number(r.slack)
        );
    }
    Ok(())
}

fn shots(args: ShotsArgs) -> edr_core::Result<()> {
    let psi = parse_state_literal(&args.state)?.density();
    let (a, b) = (Observable::sigma_z(), Observable::sigma_x());
    let inst = if args.extinction > 0.0 {
        imperfect_pbs_instrument(args.theta, args.extinction)?
    } else {
        vpbs_instrument(args.theta)?
    };
    let probe_a = WeakProbe::with_strength(a, args.probe_strength)?;
    let probe_b = WeakProbe::with_strength(b.clone(), args.probe_strength)?;
    let dist_a = cascade_distribution(&probe_a, &inst, &b, &psi)?;
    let dist_b = cascade_distribution(&probe_b, &inst, &b, &psi)?;
    let rec_a = sample_shots(&dist_a, args.shots, derive_seed(args.seed, &[0, 0]))?;
    let rec_b = sample_shots(&dist_b, args.shots, derive_seed(args.seed, &[0, 1]))?;
    let (eps, eps_se) = estimate_from_counts(&rec_a, &dist_a.axes, probe_a.strength(), EstimateMode::Error)?;
    let (eta, eta_se) = estimate_from_counts(&rec_b, &dist_b.axes, probe_b.strength(), EstimateMode::Disturbance)?;
    let eps_exact = weak_probe_error(&dist_a, probe_a.strength(), None)?;
    let eta_exact = weak_probe_disturbance(&dist_b, probe_b.strength(), None)?;
    println!("theta      {}", format_number(args.theta));
    println!("s          {}", format_number((2.0 * args.theta).cos()));
    println!("shots      {}", args.shots);
    println!("seed       {}", args.seed);
    println!(
        "eps        {} +- {}  (exact {})",
        format_number(eps),
        format_number(eps_se),
        format_number(eps_exact)
    );
    println!(
        "eta        {} +- {}  (exact {})",
        format_number(eta),
        format_number(eta_se),
        format_number(eta_exact)
    );
    println!("counts_eps {}", join(&rec_a.counts));
    println!("counts_eta {}", join(&rec_b.counts));
    Ok(())
}

fn join(counts: &[u64]) -> String {
    counts.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

fn fock_check(args: FockArgs) -> edr_core::Result<bool> {
    let space = FockSpace::new(args.cutoff);
    let ops = (0..4)
        .map(|k| stokes_operator(k, &space))
        .collect::<edr_core::Result<Vec<_>>>()?;
    let mut ok = true;
    let targets = [
        ("s0", ComplexMatrix::identity(2)),
        ("s1", sigma_z()),
        ("s2", sigma_x()),
        ("s3", sigma_y()),
    ];
    for (op, (name, pauli)) in ops.iter().zip(targets) {
        let exact = restrict_to_single_photon(op, &space)? == pauli;
        ok &= exact;
        println!("{name} restriction exact: {exact}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst = 0.0f64;
    for _ in 0..args.samples {
        let q = QubitPure::random(&mut rng);
        let rho = ComplexMatrix::projector(&space.single_photon(q.alpha(), q.beta())?);
        let s: Vec<f64> = ops.iter().map(|op| expectation(&rho, op).re).collect();
        worst = worst.max((s[1] * s[1] + s[2] * s[2] + s[3] * s[3] - s[0] * s[0]).abs());
    }
    let sphere = worst < 1e-12;
    ok &= sphere;
    println!(
        "poincare identity max deviation over {} states: {worst:e}",
        args.samples
    );
    println!("{}", if ok { "fock-check passed" } else { "fock-check FAILED" });
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Sweep(a) => sweep(a).map(|_| true),
        Command::Bounds(a) => bounds(a).map(|_| true),
        Command::Shots(a) => shots(a).map(|_| true),
        Command::FockCheck(a) => fock_check(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_NUMERICAL),
        Err(e) => {
            eprintln!("edr-lab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
