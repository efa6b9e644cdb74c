//! Command-line driver: code generation, Monte-Carlo experiments,
//! correction-gain curves and the built-in verification suites.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mn_ldpc::code::build_code;
use mn_ldpc::harness::{
    parse_rate, run_dp_curve, run_experiment, write_curve_csv, write_stats_csv, write_trials_csv,
    DpCurveOptions, ExperimentConfig,
};
use mn_ldpc::selftest;

#[derive(Parser)]
#[command(
    name = "mn-ldpc",
    about = "MacKay-Neal LDPC codes over GF(2^m): parallel vs. sequential BP decoding experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a code and write its A and B matrices to text files.
    GenCode(GenCodeArgs),
    /// Run a Monte-Carlo schedule-comparison experiment.
    Experiment(ExperimentArgs),
    /// Run an experiment and emit the per-bin correction-gain curve.
    DpCurve(DpCurveArgs),
    /// Run the built-in oracle suites (field axioms, check-node
    /// enumeration, tree posterior exactness).
    Selftest,
}

#[derive(Args)]
struct GenCodeArgs {
    /// Field size q (power of two).
    #[arg(long)]
    q: usize,
    /// Source block length in symbols.
    #[arg(long)]
    n: usize,
    /// Code rate N/M, e.g. 1/3.
    #[arg(long, default_value = "1/3")]
    rate: String,
    /// Nonzero entries per column of A.
    #[arg(long, default_value_t = 3)]
    col_weight: usize,
    /// Construction seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output paths: <A.mtx> <B.mtx>.
    #[arg(long, num_args = 2, value_names = ["A_MTX", "B_MTX"])]
    out: Vec<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config file (key = value lines).
    #[arg(long)]
    config: PathBuf,
    /// Output statistics CSV.
    #[arg(long)]
    out: PathBuf,
    /// Optional per-trial log CSV.
    #[arg(long)]
    trials_log: Option<PathBuf>,
}

#[derive(Args)]
struct DpCurveArgs {
    /// Experiment config file (schedules must be `both`).
    #[arg(long)]
    config: PathBuf,
    /// Output curve CSV.
    #[arg(long)]
    out: PathBuf,
    /// Bin width over the correct fraction P.
    #[arg(long, default_value_t = 0.02)]
    bin_width: f64,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> mn_ldpc::Result<ExitCode> {
    match cli.command {
        Command::GenCode(args) => {
            let rate = parse_rate(&args.rate)
                .ok_or_else(|| mn_ldpc::Error::Config(format!("bad rate `{}`", args.rate)))?;
            let code = build_code(args.q, args.n, rate, args.col_weight, args.seed)?;
            code.a().save(&args.out[0])?;
            code.b().save(&args.out[1])?;
            println!(
                "wrote A ({}x{}, {} entries) to {} and B ({}x{}, {} entries) to {}",
                code.a().rows(),
                code.a().cols(),
                code.a().nnz(),
                args.out[0].display(),
                code.b().rows(),
                code.b().cols(),
                code.b().nnz(),
                args.out[1].display(),
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Experiment(args) => {
            let cfg = ExperimentConfig::from_file(&args.config)?;
            let run = run_experiment(&cfg)?;
            write_stats_csv(&run.stats, &args.out)?;
            if let Some(log) = &args.trials_log {
                write_trials_csv(&run.trials, log)?;
            }
            println!(
                "{} trials ({} paired): <t_sus> = {:.2}, <t_pus> = {:.2}, ratio of means = {:.3}",
                run.stats.trials,
                run.stats.paired_trials,
                run.stats.mean_t_sus,
                run.stats.mean_t_pus,
                run.stats.ratio_of_means,
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::DpCurve(args) => {
            let cfg = ExperimentConfig::from_file(&args.config)?;
            let opts = DpCurveOptions {
                bin_width: args.bin_width,
                ..DpCurveOptions::default()
            };
            let curve = run_dp_curve(&cfg, opts)?;
            write_curve_csv(&curve, &args.out)?;
            println!(
                "{} reported bins written to {}",
                curve.bins.len(),
                args.out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest => {
            let mut all_passed = true;
            for report in selftest::run_all() {
                let status = if report.passed { "PASS" } else { "FAIL" };
                println!("{status}  {}: {}", report.name, report.detail);
                all_passed &= report.passed;
            }
            Ok(if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
