//! `lgp`: run evolution experiments, enumerate tiny program spaces and
//! evaluate the closed-form bounds, writing CSV with a provenance line.
//!
//! Exit codes: 0 on success, 1 on bad input, I/O failure or an enumeration
//! guard refusal, 2 when an oracle verification fails.

mod commands;
mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use commands::{BoundQuery, Output};
use config::{EvolveConfig, GridConfig, OracleConfig, OneOrMany, ParamSettings, SampleConfig, Seeds, StudyConfig};

#[derive(Parser)]
#[command(name = "lgp", version, about = "Linear genetic programming experiments and bound calculations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run a single seed instead of the configured list.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file, or directory for commands that write several files.
    /// Without it the main CSV goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve on one problem per seed and step size; writes per-seed traces
    /// and a mean/std aggregate per generation.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        problem: Option<String>,
        /// Step sizes, comma separated.
        #[arg(long, value_delimiter = ',')]
        u: Vec<usize>,
        #[arg(long)]
        variant: Option<String>,
    },
    /// Mean RSE of random programs by size.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        problem: Option<String>,
    },
    /// Moving-rate bound and hitting time over a (u, d, m) grid.
    Grid {
        #[command(flatten)]
        common: Common,
        /// Step sizes, comma separated.
        #[arg(long, value_delimiter = ',')]
        u: Vec<usize>,
    },
    /// Compare instruction-set variants across problems.
    Study {
        #[command(flatten)]
        common: Common,
        /// Restrict to a single problem.
        #[arg(long)]
        problem: Option<String>,
        #[arg(long)]
        u: Option<usize>,
        /// Compare only `default` against this variant.
        #[arg(long)]
        variant: Option<String>,
    },
    /// Enumerate a tiny program space and run the exact checks.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Halve the fitness constant; the certificate should then fail.
        #[arg(long)]
        negative_control: bool,
    },
    /// Evaluate one closed-form bound.
    Bounds {
        #[command(subcommand)]
        query: BoundQuery,
        #[arg(long, global = true)]
        gamma: Option<usize>,
        #[arg(long, global = true)]
        gamma_out: Option<usize>,
        #[arg(long, global = true)]
        n: Option<u64>,
        #[arg(long, global = true)]
        m_star: Option<usize>,
        #[arg(long, global = true)]
        max_len: Option<usize>,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
}

fn seeds_override(seeds: &mut Seeds, seed: Option<u64>) {
    if let Some(s) = seed {
        *seeds = Seeds::List(vec![s]);
    }
}

fn run(cli: Cli) -> Result<(Output, Option<PathBuf>, bool)> {
    match cli.command {
        Command::Evolve { common, problem, u, variant } => {
            let mut cfg: EvolveConfig = config::load(common.config.as_deref())?;
            seeds_override(&mut cfg.seeds, common.seed);
            if let Some(p) = problem {
                cfg.problem = p;
            }
            if let Some(v) = variant {
                cfg.variant = v;
            }
            if !u.is_empty() {
                cfg.u = OneOrMany::Many(u);
            }
            Ok((commands::evolve(&cfg)?, common.out, true))
        }
        Command::Sample { common, problem } => {
            let mut cfg: SampleConfig = config::load(common.config.as_deref())?;
            seeds_override(&mut cfg.seeds, common.seed);
            if let Some(p) = problem {
                cfg.problem = p;
            }
            Ok((commands::sample(&cfg)?, common.out, false))
        }
        Command::Grid { common, u } => {
            let mut cfg: GridConfig = config::load(common.config.as_deref())?;
            if !u.is_empty() {
                cfg.u = u;
            }
            Ok((commands::grid_cmd(&cfg)?, common.out, false))
        }
        Command::Study { common, problem, u, variant } => {
            let mut cfg: StudyConfig = config::load(common.config.as_deref())?;
            seeds_override(&mut cfg.seeds, common.seed);
            if let Some(p) = problem {
                cfg.problems = vec![p];
            }
            if let Some(u) = u {
                cfg.u = u;
            }
            if let Some(v) = variant {
                cfg.variants = vec!["default".into(), v];
                cfg.variants.dedup();
            }
            Ok((commands::study(&cfg)?, common.out, false))
        }
        Command::Oracle { common, negative_control } => {
            let mut cfg: OracleConfig = config::load(common.config.as_deref())?;
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            cfg.negative_control |= negative_control;
            Ok((commands::oracle(&cfg)?, common.out, true))
        }
        Command::Bounds { query, gamma, gamma_out, n, m_star, max_len, out } => {
            let d = ParamSettings::default();
            let params = ParamSettings {
                gamma: gamma.unwrap_or(d.gamma),
                gamma_out: gamma_out.unwrap_or(d.gamma_out),
                n: n.unwrap_or(d.n),
                m_star: m_star.unwrap_or(d.m_star),
                max_len: max_len.unwrap_or(d.max_len),
            };
            Ok((commands::bounds(&params, &query)?, out, false))
        }
    }
}

/// Print the first artifact, or write every artifact under `out` (a
/// directory for multi-file commands, otherwise a file path).
fn emit(output: &Output, out: Option<&Path>, directory: bool) -> Result<()> {
    let Some(out) = out else {
        let first = output.artifacts.first().context("command produced no output")?;
        std::io::stdout().write_all(output.render(first).as_bytes())?;
        return Ok(());
    };
    if directory {
        std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        for a in &output.artifacts {
            let path = out.join(&a.name);
            std::fs::write(&path, output.render(a)).with_context(|| format!("writing {}", path.display()))?;
        }
    } else {
        if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        let first = output.artifacts.first().context("command produced no output")?;
        std::fs::write(out, output.render(first)).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli).and_then(|(output, out, directory)| {
        emit(&output, out.as_deref(), directory)?;
        Ok(output)
    });
    match result {
        Ok(output) => {
            for note in &output.notes {
                eprintln!("{note}");
            }
            if output.failed {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
