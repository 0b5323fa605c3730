use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tlsme::figure::{reproduce_figure, sweep, Vary};
use tlsme::runner::{run_scenario, summarize, summary_path, write_csv_file, write_json};
use tlsme::validate::{render_table, run_all, Status, ValidateOptions};
use tlsme::{CliError, ScenarioConfig};

/// Driven, damped two-level system: exact and perturbative master equations.
#[derive(Parser)]
#[command(name = "tlsme", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and write its CSV and summary.
    Run {
        config: PathBuf,
        /// CSV path; defaults to the config's `output` or `<config>.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce a figure (`fig2`) or a single panel (`fig2a`).
    Figure {
        id: String,
        #[arg(long, default_value = "figures")]
        out: PathBuf,
    },
    /// Run a scenario once per value of one parameter.
    Sweep {
        config: PathBuf,
        /// PARAM=lo:hi:n
        #[arg(long)]
        vary: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite and print a pass/fail table.
    Validate {
        /// Grid for the convergence and Markovian checks on t ∈ [0, 10].
        #[arg(long, default_value_t = 10_000)]
        n_steps: usize,
        /// Debug hook: negate γ(t) in the exact equation.
        #[arg(long)]
        flip_gamma_sign: bool,
        /// Emit JSON instead of a tab-separated table.
        #[arg(long)]
        json: bool,
    },
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(value) = std::env::var("TLSME_THREADS") {
        let n: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| {
                CliError::config(
                    "TLSME_THREADS",
                    format!("expected a positive integer, got `{value}`"),
                )
            })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config("TLSME_THREADS", e.to_string()))?;
    }
    Ok(())
}

fn default_csv(config: &ScenarioConfig, path: &std::path::Path, out: Option<PathBuf>) -> PathBuf {
    out.or_else(|| config.output.clone())
        .unwrap_or_else(|| path.with_extension("csv"))
}

fn execute(command: Command) -> Result<ExitCode, CliError> {
    configure_threads()?;
    match command {
        Command::Run { config, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let scenario = cfg.validate()?;
            let csv = default_csv(&cfg, &config, out);
            let run = run_scenario(&scenario)?;
            write_csv_file(&run, &csv)?;
            let summary = summarize(&run, Some(&csv));
            write_json(&summary, &summary_path(&csv))?;
            for m in &summary.methods {
                println!(
                    "{}\t{}\t{:.3}s",
                    m.method,
                    if m.physical { "physical" } else { "unphysical" },
                    m.runtime_s
                );
            }
            println!("wrote {}", csv.display());
        }
        Command::Figure { id, out } => {
            let runs = reproduce_figure(&id, &out)?;
            for r in &runs {
                println!("wrote {}", r.csv.display());
            }
        }
        Command::Sweep { config, vary, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let vary: Vary = vary.parse()?;
            let csv = default_csv(&cfg, &config, out);
            for path in sweep(&cfg, &vary, &csv)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Validate {
            n_steps,
            flip_gamma_sign,
            json,
        } => {
            let checks = run_all(&ValidateOptions {
                n_steps,
                flip_gamma_sign,
            });
            if json {
                println!("{}", serde_json::to_string_pretty(&checks)?);
            } else {
                print!("{}", render_table(&checks));
            }
            if checks.iter().any(|c| c.status != Status::Pass) {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
