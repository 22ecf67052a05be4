use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use loewner_carpet::io::{self, Check};
use loewner_carpet::substitution::parse_rule_seq;
use loewner_carpet::{CarpetError, Rational};

#[derive(Parser)]
#[command(name = "carpet", version, about = "Build and check finite levels of thin Loewner carpets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build levels from a rule sequence, or from a plan for (Q, Q').
    Build {
        /// Comma-separated rules, e.g. `basic` or `S16,C1`; one rule repeats.
        #[arg(long)]
        rules: Option<String>,
        #[arg(long = "Q", requires = "q_prime")]
        q: Option<f64>,
        #[arg(long = "Qp")]
        q_prime: Option<f64>,
        #[arg(long)]
        levels: u32,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Re-check a run directory and print a CSV report.
    Verify {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "all")]
        checks: String,
        #[arg(long, alias = "level")]
        levels: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write one level as SVG.
    Render {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, alias = "levels")]
        level: u32,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Choose parameters and frequencies for target dimensions.
    Dims {
        #[arg(long = "Q")]
        q: f64,
        #[arg(long = "Qp")]
        q_prime: f64,
        /// Length of the emitted rule sequence.
        #[arg(long, default_value_t = 64)]
        levels: usize,
    },
    /// Evaluate h_inf_bar of a profile CSV.
    Invariant {
        #[arg(long)]
        profile: PathBuf,
        /// Comma-separated rationals in (0, 1], e.g. `1/2,1/32`.
        #[arg(long)]
        t: String,
    },
    /// Modulus monotonicity table for one level of a run.
    Modulus {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, alias = "levels")]
        level: u32,
        #[arg(long = "Q")]
        q: f64,
        #[arg(long, default_value_t = 50)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Strong-A-infinity bands for one drawn level.
    Ainfty {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, alias = "levels")]
        level: u32,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 512)]
        resolution: usize,
        /// Also write the raster as PGM.
        #[arg(long)]
        pgm: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("CARPET_THREADS") {
        let n: usize = v.parse().with_context(|| format!("CARPET_THREADS={v:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn build(rules: Option<String>, q: Option<(f64, f64)>, levels: u32, out: &Path, seed: u64) -> anyhow::Result<()> {
    let (rules, plan) = match (rules, q) {
        (Some(r), None) => {
            let mut rules = parse_rule_seq(&r)?;
            if rules.len() == 1 {
                rules = vec![rules[0]; levels as usize];
            }
            if rules.len() != levels as usize {
                bail!(CarpetError::InvalidParameter(format!("{} rules for {levels} levels", rules.len())));
            }
            (rules, None)
        }
        (None, Some((q, qp))) => {
            let dims = io::cmd_dims(q, qp, levels as usize)?;
            let plan = dims.plan.context("plan parameters exceed 64 bits")?;
            (plan.rules()?, Some(plan))
        }
        _ => bail!(CarpetError::InvalidParameter("give exactly one of --rules or --Q/--Qp".to_string())),
    };
    let manifest = io::cmd_build(&rules, plan, out, seed)?;
    eprintln!("built {} levels into {}", manifest.levels, out.display());
    Ok(())
}

/// Returns whether every check passed.
fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Build { rules, q, q_prime, levels, out, seed } => {
            build(rules, q.zip(q_prime), levels, &out, seed)?;
        }
        Command::Verify { out, checks, levels, seed } => {
            let rows = io::cmd_verify(&out, &Check::parse_list(&checks)?, levels, seed)?;
            io::write_report(&rows, std::io::stdout().lock())?;
            return Ok(rows.iter().all(|r| r.passed()));
        }
        Command::Render { out, level, svg } => {
            let text = io::cmd_render(&out, level)?;
            match svg {
                Some(p) => std::fs::write(&p, text).with_context(|| p.display().to_string())?,
                None => std::io::stdout().lock().write_all(text.as_bytes())?,
            }
        }
        Command::Dims { q, q_prime, levels } => print_json(&io::cmd_dims(q, q_prime, levels)?)?,
        Command::Invariant { profile, t } => {
            let ts = t
                .split(',')
                .map(|s| s.trim().parse::<Rational>().map_err(|e| CarpetError::InvalidParameter(format!("t {s:?}: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            println!("t,h_inf_bar");
            for (t, v) in io::cmd_invariant(&profile, &ts)? {
                println!("{t},{v}");
            }
        }
        Command::Modulus { out, level, q, pairs, seed } => {
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            for row in io::cmd_modulus(&out, level, q, pairs, seed)? {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        Command::Ainfty { out, level, beta, resolution, pgm, seed } => {
            print_json(&io::cmd_ainfty(&out, level, beta, resolution, seed, pgm.as_deref())?)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| run(cli));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = matches!(e.downcast_ref::<CarpetError>(), Some(CarpetError::InvalidParameter(_)));
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
