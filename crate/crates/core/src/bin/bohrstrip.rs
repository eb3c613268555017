use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bohrstrip::experiments::{
    run_bounds, run_boundedness_experiment, run_convergence_experiment, run_divergence_experiment,
    run_full_verification, run_structural_verification, Format, TabularReport,
};
use bohrstrip::kronecker::{demonstrate_large_partial_sum, DeltaSchedule, DemoConfig, WitnessMode};
use bohrstrip::{parse_profile, ConstructionParams, Error, Exponent};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bohrstrip", version, about = "Build the level-by-level Dirichlet series and run its experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Number of prime blocks per level.
    #[arg(long = "M", default_value_t = 2)]
    m: usize,
    /// Block exponents rho_1,...,rho_M (fractions like 3/4 are exact).
    #[arg(long, default_value = "1,1")]
    rho: String,
    /// Decay exponent X; defaults to (rho_1+...+rho_M)(M+1)/(2M).
    #[arg(long = "X")]
    x: Option<String>,
    /// Largest level.
    #[arg(long = "Lmax", default_value_t = 5)]
    lmax: u32,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Global,
    Local,
    Auto,
}

#[derive(Subcommand)]
enum Command {
    /// Abscissa bounds as exact fractions.
    #[command(after_help = "CSV columns: quantity,value,exact")]
    Bounds(Common),
    /// Every invariant suite over levels 1..=Lmax.
    #[command(after_help = "CSV columns: name,passed,detail")]
    Verify {
        #[command(flatten)]
        common: Common,
        /// Only the structural checks, streaming levels above this many products.
        #[arg(long)]
        structural: Option<usize>,
    },
    /// Sampled |P_L(sigma + it)| against the per-level bound.
    #[command(after_help = "CSV columns: L,maxAbs,weightedMax,bound,holds")]
    Bounded {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Random t values per level.
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Exact per-level sums of |a_n| n^{-sigma}.
    #[command(after_help = "CSV columns: L,levelSum,cumulative,reference,ratio")]
    Diverge {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.2)]
        sigma: f64,
    },
    /// Greedy signs and the partial sums at s = -epsilon.
    #[command(
        after_help = "CSV columns: L,d_L,reBeta,imBeta,absOmega,term,running,boundaryRe,boundaryIm,boundaryAbs,mismatch"
    )]
    Converge(Common),
    /// Large partial sum on the imaginary axis via simultaneous approximation.
    #[command(
        after_help = "CSV columns: L,witnessValue,globalWitnessValue,residualMax,delta,errorBudget,qRe,qIm"
    )]
    Kronecker {
        #[command(flatten)]
        common: Common,
        /// Target size K; levels used are ceil(2^{M+1} K).
        #[arg(long = "K", default_value_t = 0.125)]
        k: f64,
        /// Fixed tolerance for every level instead of the geometric schedule.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long = "tMax", default_value_t = 1e5)]
        t_max: f64,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
        /// Random starts of the sup-norm search per level.
        #[arg(long, default_value_t = 16)]
        starts: usize,
    },
}

fn params(c: &Common) -> bohrstrip::Result<ConstructionParams> {
    let p = ConstructionParams::new(c.m, parse_profile(&c.rho)?, c.lmax)?;
    match &c.x {
        Some(x) => p.with_decay(x.parse::<Exponent>()?),
        None => Ok(p),
    }
}

fn emit<R: TabularReport>(report: &R, c: &Common) -> bohrstrip::Result<bool> {
    let format = match c.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    };
    match &c.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            report.write_format(format, &mut w)?;
            w.flush()?;
        }
        None => report.write_format(format, io::stdout().lock())?,
    }
    Ok(report.passed())
}

fn run(cli: Cli) -> bohrstrip::Result<bool> {
    match cli.command {
        Command::Bounds(c) => emit(&run_bounds(&params(&c)?), &c),
        Command::Verify { common, structural } => {
            let p = params(&common)?;
            let report = match structural {
                Some(limit) => run_structural_verification(&p, common.lmax, limit)?,
                None => run_full_verification(&p, common.lmax, common.seed)?,
            };
            emit(&report, &common)
        }
        Command::Bounded { common, sigma, samples } => {
            emit(&run_boundedness_experiment(&params(&common)?, sigma, samples, common.seed)?, &common)
        }
        Command::Diverge { common, sigma } => emit(&run_divergence_experiment(&params(&common)?, sigma)?, &common),
        Command::Converge(c) => emit(&run_convergence_experiment(&params(&c)?, c.seed)?, &c),
        Command::Kronecker {
            common,
            k,
            delta,
            t_max,
            mode,
            starts,
        } => {
            let mut cfg = DemoConfig::new(k).with_t_max(t_max).with_seed(common.seed).with_mode(match mode {
                Mode::Global => WitnessMode::Global,
                Mode::Local => WitnessMode::Local,
                Mode::Auto => WitnessMode::Auto,
            });
            cfg.starts = starts;
            if let Some(d) = delta {
                cfg.schedule = DeltaSchedule::Constant(d);
            }
            emit(&demonstrate_large_partial_sum(&params(&common)?, &cfg)?, &common)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("bohrstrip: one or more assertions failed");
            ExitCode::from(1)
        }
        Err(
            e @ (Error::InvalidParams(_)
            | Error::NonPositiveEpsilon(_)
            | Error::Precondition(_)
            | Error::Capacity(_)
            | Error::IndexOutOfRange { .. }
            | Error::DimensionMismatch { .. }),
        ) => {
            eprintln!("bohrstrip: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("bohrstrip: {e}");
            ExitCode::from(1)
        }
    }
}
