//! Batch experiment driver. Exit codes: 0 ok, 1 property violation detected,
//! 2 invalid input.

mod commands;
mod setspec;

use clap::{Args, Parser, Subcommand};
use commands::{cmd_poly, cmd_scan, cmd_simulate, cmd_weyl, CommandOutput, Format, SimulateConfig};
use quaddiff::iterate::IterationParams;
use quaddiff::poly::QuadraticPoly;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "quaddiff",
    version,
    about = "Difference-free sets under quadratic polynomial images: reports, scans, exponential sums, and iteration traces"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct OutputOpts {
    /// Output format
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Factorization, intersectivity decision, and the root/auxiliary table
    Poly {
        /// Quadratic as "a2,a1,a0"
        #[arg(long)]
        poly: String,
        /// Table size: d runs over 1..=n
        #[arg(long, default_value_t = 20)]
        n: u64,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Greedy and exact extremal sizes with density bounds over an N range
    Scan {
        #[arg(long)]
        poly: String,
        /// N values: "a:b", "a:b:step", or "a,b,c"
        #[arg(long)]
        n_range: String,
        /// Largest N solved exactly by branch-and-bound
        #[arg(long, default_value_t = 64)]
        exact_cap: u64,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Weighted exponential-sum diagnostics over a modulus range
    Weyl {
        #[arg(long)]
        poly: String,
        /// Moduli L: "a:b", "a:b:step", or "a,b,c" (snapped to multiples of 30)
        #[arg(long)]
        n_range: String,
        /// Emit the per-frequency table instead of per-modulus summaries
        /// (requires a single modulus in --n-range)
        #[arg(long, default_value_t = false)]
        detail: bool,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Density-increment trace and spectral blow-up report (JSON)
    Simulate {
        #[arg(long)]
        poly: String,
        /// Ambient interval bound N
        #[arg(long)]
        n: u64,
        /// Set spec: `progression:u,step,len` | `random:density[,seed]` |
        /// `greedy[:a2,a1,a0]` | `list:x1,x2,…` | a file path
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 4.0)]
        q_threshold: f64,
        #[arg(long, default_value_t = 0.05)]
        c0: f64,
        #[arg(long, default_value_t = 1e-5)]
        c1: f64,
        /// Override the shortest interval the outer loop iterates on
        #[arg(long)]
        min_length: Option<u64>,
        /// Override the per-step density gain target
        #[arg(long)]
        increment_gain: Option<f64>,
        /// Skip the difference-freeness precondition and per-step checks
        #[arg(long, default_value_t = false)]
        skip_difference_check: bool,
        /// Chain this many blow-up rounds, feeding each output family forward
        #[arg(long, default_value_t = 1)]
        blowup_rounds: u32,
        #[command(flatten)]
        output: OutputOpts,
    },
}

fn parse_poly(s: &str) -> Result<QuadraticPoly, String> {
    s.parse::<QuadraticPoly>()
}

fn parse_range(s: &str) -> Result<Vec<u64>, String> {
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(format!("range must be start:end[:step], got {s:?}"));
        }
        let start: u64 = parts[0].parse().map_err(|e| format!("bad start: {e}"))?;
        let end: u64 = parts[1].parse().map_err(|e| format!("bad end: {e}"))?;
        let step: u64 = if parts.len() == 3 {
            parts[2].parse().map_err(|e| format!("bad step: {e}"))?
        } else {
            1
        };
        if step == 0 || end < start {
            return Err(format!("empty or invalid range {s:?}"));
        }
        Ok((start..=end).step_by(step as usize).collect())
    } else {
        s.split(',')
            .map(|p| p.trim().parse::<u64>().map_err(|e| format!("bad value: {e}")))
            .collect()
    }
}

fn emit(output: &OutputOpts, result: CommandOutput) -> ExitCode {
    match &output.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &result.text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{}", result.text),
    }
    if result.violations > 0 {
        eprintln!("warning: {} property violation(s) detected", result.violations);
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn run() -> Result<(OutputOpts, CommandOutput), String> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Poly { poly, n, output } => {
            let f = parse_poly(&poly)?;
            if n == 0 {
                return Err("table size must be positive".into());
            }
            Ok((output.clone(), cmd_poly(&f, n, output.format)?))
        }
        Cmd::Scan {
            poly,
            n_range,
            exact_cap,
            epsilon,
            output,
        } => {
            let f = parse_poly(&poly)?;
            let ns = parse_range(&n_range)?;
            Ok((output.clone(), cmd_scan(&f, &ns, exact_cap, epsilon, output.format)?))
        }
        Cmd::Weyl {
            poly,
            n_range,
            detail,
            output,
        } => {
            let f = parse_poly(&poly)?;
            let ls = parse_range(&n_range)?;
            if detail {
                if ls.len() != 1 {
                    return Err("--detail needs a single modulus in --n-range".into());
                }
                return Ok((output.clone(), commands::cmd_weyl_detail(&f, ls[0])?));
            }
            Ok((output.clone(), cmd_weyl(&f, &ls, output.format)?))
        }
        Cmd::Simulate {
            poly,
            n,
            set,
            seed,
            epsilon,
            q_threshold,
            c0,
            c1,
            min_length,
            increment_gain,
            skip_difference_check,
            blowup_rounds,
            output,
        } => {
            if output.format == Format::Csv {
                return Err("simulate emits JSON traces; use --format json".into());
            }
            let f = parse_poly(&poly)?;
            if n == 0 {
                return Err("N must be positive".into());
            }
            let mut params =
                IterationParams::new(epsilon, q_threshold).map_err(|e| e.to_string())?;
            params.c0 = c0;
            params.c1 = c1;
            params.min_length = min_length;
            params.increment_gain = increment_gain;
            params.check_difference_free = !skip_difference_check;
            params.validate().map_err(|e| e.to_string())?;
            let elements = setspec::parse_set_spec(&set, n, &f, seed)?;
            let cfg = SimulateConfig {
                set_spec: set,
                n,
                seed,
                blowup_rounds,
                params,
            };
            Ok((output, cmd_simulate(&elements, &f, &cfg)?))
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok((output, result)) => emit(&output, result),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
