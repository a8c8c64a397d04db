//! Command-line entry point.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use pime_core::envsim::PlantKind;

use crate::compare::{compare, write_comparison};
use crate::config::ExperimentConfig;
use crate::episode::Controller;
use crate::error::Result;
use crate::evaluate::evaluate;
use crate::io::{load_weights, read_report};
use crate::train::{train, RunFiles};

#[derive(Debug, Parser)]
#[command(name = "pime", version, about = "Prior-aided, integrator-extended PPO for set-point control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a policy and write diagnostics, checkpoints and final weights.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's out_dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate trained weights or the prior alone on held-out models.
    Eval(EvalArgs),
    /// Merge evaluation reports into one comparison table.
    Compare {
        #[arg(long, num_args = 1.., required = true)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the default configuration for a plant.
    ExportConfig {
        #[arg(long)]
        plant: PlantKind,
    },
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Evaluate the prior controller alone.
    #[arg(long, conflicts_with = "weights", required_unless_present = "weights")]
    prior: bool,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 50)]
    models: usize,
    #[arg(long)]
    out: PathBuf,
    /// Seed of the evaluation model draws; defaults to the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Label written into the report.
    #[arg(long)]
    label: Option<String>,
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Train { config, seed, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            let outcome = train(&cfg, Some(&cfg.out_dir))?;
            let files = RunFiles { dir: cfg.out_dir.clone() };
            println!(
                "trained {} iterations ({} steps); final mean return {:.4}; weights {}",
                outcome.diagnostics.len(),
                cfg.total_steps,
                outcome.final_mean_return(10),
                files.final_weights().display()
            );
        }
        Command::Eval(a) => {
            let cfg = ExperimentConfig::load(&a.config)?;
            let seed = a.seed.unwrap_or(cfg.seed);
            let loaded = a.weights.as_deref().map(load_weights).transpose()?;
            let (ctrl, default_label) = match &loaded {
                Some((policy, _)) => (Controller::from_config(&cfg, Some(policy)), "policy"),
                None => (Controller::prior_only(cfg.prior), "prior"),
            };
            let label = a.label.as_deref().unwrap_or(default_label);
            let ev = evaluate(&cfg, &ctrl, a.models, seed, label)?;
            ev.write(&a.out, seed)?;
            let r = ev.report.mean_return();
            println!(
                "{label}: {} models, return {:.4} +- {:.4}, tracked {:.1}% of segments",
                a.models,
                r.mean,
                r.std,
                100.0 * ev.report.fraction_tracked(cfg.settle_band)
            );
        }
        Command::Compare { reports, out } => {
            let loaded = reports.iter().map(|p| read_report(p)).collect::<Result<Vec<_>>>()?;
            let rows = compare(&loaded)?;
            write_comparison(&out, &rows)?;
        }
        Command::ExportConfig { plant } => {
            print!("{}", ExperimentConfig::default_for(plant).to_text());
        }
    }
    Ok(())
}
