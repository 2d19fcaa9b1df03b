use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ffmirror::compare::{compare_tables, ParsedTable, ToleranceSpec};
use ffmirror::presets::{preset, PRESETS};
use ffmirror::{configure_workers, run_config, HarnessError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "ffmirror", version, about = "Monitored and feedforward entanglement experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a TOML scenario config.
    Run {
        config: PathBuf,
        /// Output directory [default: out/<name>]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a figure preset.
    Preset {
        name: String,
        /// Use the published scale instead of the desk-scaled default.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the preset config instead of running it.
        #[arg(long)]
        show: bool,
    },
    /// Compare two CSV tables column by column.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Tolerance: `1e-6`, or `measure=tol,...` with optional `*=tol`.
        #[arg(long)]
        tol: String,
        /// Compare column A of the first table with column B of the second.
        #[arg(long = "pair", value_name = "A=B")]
        pairs: Vec<String>,
    },
    /// List the available presets.
    ListPresets,
}

fn run_and_report(cfg: &ScenarioConfig, out: Option<PathBuf>) -> Result<(), HarnessError> {
    let out = out.unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
    for path in run_config(cfg, &out)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<ExitCode, HarnessError> {
    match cli.command {
        Command::Run { config, out } => {
            configure_workers()?;
            run_and_report(&ScenarioConfig::load(&config)?, out)?;
        }
        Command::Preset { name, full, out, show } => {
            let cfg = preset(&name, full)?;
            if show {
                print!("{}", cfg.to_toml());
            } else {
                configure_workers()?;
                run_and_report(&cfg, out)?;
            }
        }
        Command::Compare { a, b, tol, pairs } => {
            let tol = ToleranceSpec::parse(&tol)?;
            let pairs = pairs
                .iter()
                .map(|p| {
                    p.split_once('=')
                        .map(|(x, y)| (x.to_string(), y.to_string()))
                        .ok_or_else(|| HarnessError::Config(format!("--pair expects A=B, got `{p}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let report = compare_tables(&ParsedTable::read(&a)?, &ParsedTable::read(&b)?, &tol, &pairs)?;
            for c in &report.columns {
                let name = if c.column_a == c.column_b { c.column_a.clone() } else { format!("{}~{}", c.column_a, c.column_b) };
                println!(
                    "{} {name}: max deviation {:.3e}, tolerance {:.3e}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.max_deviation,
                    c.tolerance
                );
            }
            println!("{} rows compared", report.rows);
            if !report.pass() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::ListPresets => {
            for (name, about) in PRESETS {
                println!("{name:<8} {about}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("ffmirror: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
