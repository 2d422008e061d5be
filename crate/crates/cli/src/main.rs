use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use metric_lab::CenterSelection;
use metric_lab_cli::{certify_document, load_bundle, run_experiment, CliError, CliResult, Format, RunOptions};

#[derive(Parser)]
#[command(name = "metric-lab", version, about = "Empirical checks of potential and singular-integral inequalities on metric measure spaces")]
struct Cli {
    /// Overrides the global seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Multiplies every zero threshold.
    #[arg(long, global = true)]
    tolerance_scale: Option<f64>,
    /// Directory for cached distance matrices.
    #[arg(long, global = true, env = "METRIC_LAB_CACHE")]
    cache: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check of an experiment config and write a report bundle.
    Run {
        config: PathBuf,
        /// Bundle directory, replacing `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export a bundle as JSON, per-point CSV tables or a text summary.
    Report {
        bundle: PathBuf,
        #[arg(long, value_enum, default_value = "summary-text")]
        format: Format,
        /// Output directory; defaults to `<bundle>/export`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the Ahlfors certificate of a space document.
    Certify {
        space: PathBuf,
        #[arg(long)]
        r_min: Option<f64>,
        #[arg(long)]
        r_max: Option<f64>,
        /// Use every point as a center instead of the interior ones.
        #[arg(long)]
        all_centers: bool,
    },
}

fn execute(cli: Cli) -> CliResult<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    }
    match cli.command {
        Command::Run { config, out } => {
            if let Some(t) = cli.tolerance_scale {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(CliError::Config(format!("--tolerance-scale must be positive, got {t}")));
                }
            }
            let opts = RunOptions {
                seed: cli.seed,
                tolerance_scale: cli.tolerance_scale,
                cache_dir: cli.cache,
                output: out,
            };
            let summary = run_experiment(&config, &opts)?;
            println!("{}", summary.bundle.display());
            summary.verdict()
        }
        Command::Report { bundle, format, out } => {
            let b = load_bundle(&bundle)?;
            let out = out.unwrap_or_else(|| b.dir.join("export"));
            let written = b.emit(format, &out)?;
            if format == Format::SummaryText {
                print!("{}", b.summary());
            } else {
                for p in written {
                    println!("{}", p.display());
                }
            }
            Ok(())
        }
        Command::Certify { space, r_min, r_max, all_centers } => {
            let centers = if all_centers { CenterSelection::All } else { CenterSelection::Interior };
            let value = certify_document(&space, cli.cache.as_deref(), r_min, r_max, centers)?;
            println!("{}", serde_json::to_string_pretty(&value).expect("json"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("metric-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
