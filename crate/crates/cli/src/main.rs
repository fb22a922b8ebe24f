use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use smadp_cli::config::{parse_config, parse_config_str, render_config, ConfigError, RunConfig};
use smadp_cli::{execute, output, presets, CliError, Overrides};

#[derive(Parser)]
#[command(
    name = "smadp",
    version,
    about = "Monte-Carlo benchmarks for sparsity-aware set-membership adaptive filters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML config file (or a preset name).
    Run {
        config: String,
        /// Number of Monte-Carlo trials.
        #[arg(long)]
        runs: Option<usize>,
        /// Master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write an SVG chart.
        #[arg(long)]
        svg: bool,
    },
    /// List the built-in presets.
    Presets,
    /// Print a preset as an explicit config document.
    Describe { preset: String },
}

fn load(config: &str) -> Result<RunConfig, ConfigError> {
    let path = Path::new(config);
    if !path.exists() && presets::preset(config).is_some() {
        return parse_config_str(&format!("preset = \"{config}\""));
    }
    parse_config(path)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            runs,
            seed,
            out,
            svg,
        } => {
            let mut cfg = load(&config)?;
            Overrides {
                runs,
                seed,
                out,
                svg,
            }
            .apply(&mut cfg)?;
            let artifacts = execute(&cfg)?;
            print!("{}", output::report(&artifacts.curves, &cfg.experiment));
            println!("wrote {}", artifacts.curves_csv.display());
            println!("wrote {}", artifacts.summary_csv.display());
            if let Some(svg) = artifacts.svg {
                println!("wrote {}", svg.display());
            }
        }
        Command::Presets => {
            for name in presets::PRESET_NAMES {
                println!("{name:10} {}", presets::summary(name).unwrap_or_default());
            }
        }
        Command::Describe { preset } => {
            if presets::preset(&preset).is_none() {
                return Err(ConfigError::Semantic(format!(
                    "unknown preset `{preset}` (expected one of {})",
                    presets::PRESET_NAMES.join(", ")
                ))
                .into());
            }
            let cfg = parse_config_str(&format!("preset = \"{preset}\""))?;
            println!("# {}", presets::summary(&preset).unwrap_or_default());
            print!("{}", render_config(&cfg));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
