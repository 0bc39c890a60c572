use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use memnet::scenario::{exit_code, generate, run_scenario, ScenarioConfig, Snapshot, Summary};
use memnet::Error;

#[derive(Parser)]
#[command(name = "memnet", version, about = "Self-organizing memristive network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Build the configured network and write its snapshot.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario and write its artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Render a snapshot to SVG.
    Render {
        snapshot: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Draw the DC current map instead of memristances.
        #[arg(long)]
        currents: bool,
    },
    /// Run one scenario for several seeds concurrently, each in `<out>/seed-<n>`.
    Batch {
        #[arg(long)]
        config: PathBuf,
        /// Seeds as `a..b` (end exclusive) or a comma list.
        #[arg(long)]
        seeds: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn load(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig, Error> {
    let cfg = ScenarioConfig::load(path)?;
    Ok(match seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    })
}

fn print(summary: &Summary, format: Format) {
    match format {
        Format::Text => print!("{}", summary.to_text()),
        Format::Structured => print!("{}", summary.to_json()),
    }
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, Error> {
    let bad = || Error::InvalidConfig(format!("cannot parse seeds {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        return Ok((a..b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Generate { config, seed, out } => {
            let cfg = load(&config, seed)?;
            let dir = out.unwrap_or_else(|| cfg.output_dir());
            for f in generate(&cfg, &dir)? {
                println!("wrote {}", dir.join(f).display());
            }
        }
        Command::Run {
            config,
            seed,
            out,
            format,
        } => {
            let cfg = load(&config, seed)?;
            let dir = out.unwrap_or_else(|| cfg.output_dir());
            print(&run_scenario(&cfg, &dir)?, format);
        }
        Command::Render { snapshot, out, currents } => {
            let svg = Snapshot::load(&snapshot)?.render(currents)?;
            std::fs::write(&out, svg).map_err(|e| Error::Io {
                path: out.display().to_string(),
                message: e.to_string(),
            })?;
        }
        Command::Batch {
            config,
            seeds,
            out,
            format,
        } => {
            let base = load(&config, None)?;
            let root = out.unwrap_or_else(|| base.output_dir());
            let seeds = parse_seeds(&seeds)?;
            let results: Vec<Result<Summary, Error>> = std::thread::scope(|s| {
                let handles: Vec<_> = seeds
                    .iter()
                    .map(|&seed| {
                        let cfg = base.clone().with_seed(seed);
                        let dir = root.join(format!("seed-{seed}"));
                        s.spawn(move || run_scenario(&cfg, &dir))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("scenario thread panicked"))
                    .collect()
            });
            let mut first_err = None;
            for (seed, r) in seeds.iter().zip(results) {
                match r {
                    Ok(summary) => print(&summary, format),
                    Err(e) => {
                        eprintln!("seed {seed}: {e}");
                        first_err.get_or_insert(e);
                    }
                }
            }
            if let Some(e) = first_err {
                return Err(e);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
