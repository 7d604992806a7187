use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use netsteer_experiments::{
    cmd_activation_sweep, cmd_claims_demo, cmd_nlhs, cmd_verify_swap, with_threads, AxesPreset, EtaSpec,
    ExperimentError, ExperimentReport, Fixture, Format, NlhsOptions, PatternName, Range, SweepSpec, THREADS_ENV,
};

#[derive(Parser)]
#[command(name = "netsteer", version, about = "Network steering experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Output file; the report goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads for grid experiments.
    #[arg(long, env = THREADS_ENV)]
    threads: Option<usize>,
    /// Seed for randomised checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Clone)]
struct Grid {
    #[arg(long, default_value_t = 0.0)]
    omega_min: f64,
    #[arg(long, default_value_t = 1.0)]
    omega_max: f64,
    #[arg(long)]
    omega_steps: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    eta_min: f64,
    #[arg(long, default_value_t = 1.0)]
    eta_max: f64,
    #[arg(long)]
    eta_steps: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the DEW swap identity on an (eta, omega) grid.
    VerifySwap {
        #[command(flatten)]
        grid: Grid,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep the activation of network steering from unsteerable sources.
    Activation {
        /// Parties on the line (n - 1 sources).
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Put eta on the unsteerability boundary (2/3)(1 - omega) instead of a grid axis.
        #[arg(long)]
        boundary: bool,
        #[command(flatten)]
        grid: Grid,
        #[command(flatten)]
        common: Common,
    },
    /// Network steering from a steerable Werner state and a classical source.
    ClaimsDemo {
        #[arg(long)]
        omega: f64,
        #[arg(long, value_enum, default_value_t = AxesPreset::Zx)]
        axes: AxesPreset,
        #[command(flatten)]
        common: Common,
    },
    /// Build and check the NLHS model of a fixture.
    Nlhs {
        fixture: PathBuf,
        /// Override the fixture's pattern.
        #[arg(long, value_enum)]
        pattern: Option<PatternName>,
        /// Also round-trip through the separable realization.
        #[arg(long)]
        realize: bool,
        /// Random local models to check for soundness.
        #[arg(long, default_value_t = 0)]
        fuzz: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn sweep(grid: &Grid, boundary: bool, n: usize, default_steps: usize) -> Result<SweepSpec, ExperimentError> {
    let omega = Range::new(grid.omega_min, grid.omega_max, grid.omega_steps.unwrap_or(default_steps))?;
    let eta = if boundary {
        EtaSpec::Boundary
    } else {
        EtaSpec::Grid(Range::new(grid.eta_min, grid.eta_max, grid.eta_steps.unwrap_or(default_steps))?)
    };
    SweepSpec::new(eta, omega, n)
}

fn run(cli: Cli) -> Result<(ExperimentReport, Common), ExperimentError> {
    match cli.command {
        Command::VerifySwap { grid, common } => {
            let mut spec = sweep(&grid, false, 3, 21)?;
            spec.out = common.out.clone();
            spec.format = common.format;
            let mut r = with_threads(common.threads, || cmd_verify_swap(&spec))??;
            r.input("seed", common.seed);
            Ok((r, common))
        }
        Command::Activation { n, boundary, grid, common } => {
            let mut spec = sweep(&grid, boundary, n, if boundary { 1001 } else { 101 })?;
            spec.out = common.out.clone();
            spec.format = common.format;
            let mut r = with_threads(common.threads, || cmd_activation_sweep(&spec))??;
            r.input("seed", common.seed);
            Ok((r, common))
        }
        Command::ClaimsDemo { omega, axes, common } => {
            let mut r = cmd_claims_demo(omega, axes)?;
            r.input("seed", common.seed);
            Ok((r, common))
        }
        Command::Nlhs { fixture, pattern, realize, fuzz, common } => {
            let mut f = Fixture::load(&fixture)?;
            if let Some(p) = pattern {
                f.pattern = p;
            }
            let opts = NlhsOptions { realize, fuzz, seed: common.seed };
            let r = with_threads(common.threads, || cmd_nlhs(&f, opts))??;
            Ok((r, common))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((report, common)) => {
            match &common.out {
                Some(path) => {
                    if let Err(e) = report.write(path, common.format) {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                }
                None => print!("{}", report.render(common.format)),
            }
            eprint!("{}", report.summary());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
