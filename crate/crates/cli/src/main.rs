use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use softsense::commands::{self, Ctx};
use softsense::config::ExperimentConfig;
use softsense::output::{config_hash, OutRoot};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "softsense", version, about = "Soft-sensor experiment runner")]
struct Cli {
    /// Experiment config (TOML).
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config and the environment.
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    /// Seed override.
    #[arg(short, long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(short, long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate simulator datasets and write them as CSV.
    Simulate,
    /// Static models: tune on each training segment, evaluate on the
    /// following test rows.
    Offline,
    /// Adaptive models over the streaming part of the dataset.
    Online,
    /// Re-run the statistical comparison on stored prediction traces.
    Compare {
        /// Trace JSON files, or directories to scan for them.
        paths: Vec<PathBuf>,
        /// Reference trace name; defaults to the first input.
        #[arg(long)]
        reference: Option<String>,
        /// Allow traces from different configs.
        #[arg(long)]
        force: bool,
    },
    /// Parse and validate the config, then exit.
    ValidateConfig,
}

fn load_ctx(cli: &Cli) -> Result<(ExperimentConfig, String)> {
    let path = cli
        .config
        .as_ref()
        .context("--config is required for this command")?;
    let raw = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let config = ExperimentConfig::parse(&raw)
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok((config, config_hash(&raw)))
}

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring the thread pool")?;
    }
    if let Command::Compare {
        paths,
        reference,
        force,
    } = &cli.command
    {
        let out = OutRoot::resolve(cli.out.as_deref(), None);
        return commands::cmd_compare(paths, reference.as_deref(), *force, &out);
    }

    let (config, hash) = load_ctx(&cli)?;
    if let Command::ValidateConfig = cli.command {
        return commands::cmd_validate(&config, &hash);
    }
    config
        .validate()
        .map_err(|errs| anyhow::anyhow!("invalid config:\n  {}", errs.join("\n  ")))?;
    let out = OutRoot::resolve(cli.out.as_deref(), config.out_dir.as_deref());
    let seed = cli.seed.unwrap_or(config.seed);
    let ctx = Ctx {
        config,
        hash,
        out,
        seed,
    };
    match cli.command {
        Command::Simulate => commands::cmd_simulate(&ctx),
        Command::Offline => commands::cmd_offline(&ctx),
        Command::Online => commands::cmd_online(&ctx),
        Command::Compare { .. } | Command::ValidateConfig => unreachable!(),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
