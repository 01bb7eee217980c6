use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lutnas_cli::{commands, CliError, CliResult, TableFormat};

#[derive(Parser)]
#[command(
    name = "lutnas",
    version,
    about = "Latency-aware multi-objective architecture search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Markdown,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run a search described by a TOML config.
    Search {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "run")]
        out: PathBuf,
    },
    /// Print parameter and multiply-add counts of a chromosome.
    Stats {
        chromosome: String,
        #[arg(long, default_value_t = 1000)]
        classes: u32,
    },
    /// Print the layer table of a decoded chromosome.
    ExportArch {
        chromosome: String,
        #[arg(long, value_enum, default_value = "markdown")]
        format: Format,
        #[arg(long, default_value_t = 1000)]
        classes: u32,
    },
    /// Predict latency of a chromosome from a lookup table.
    Predict {
        chromosome: String,
        #[arg(long)]
        lut: PathBuf,
    },
    /// Check a lookup table file.
    ValidateLut { path: PathBuf },
    /// Write plot data (front scatter, hypervolume, params histogram) for a run.
    ParetoReport {
        run_dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(command: Command) -> CliResult<String> {
    match command {
        Command::Search { config, out } => {
            let report = commands::search(&config, &out)?;
            Ok(format!(
                "front: {} models, selected: {}, evaluations: {} ({} unique), wrote {}\n",
                report.front.len(),
                report.selected.len(),
                report.total_evaluations,
                report.unique_evaluations,
                out.display()
            ))
        }
        Command::Stats {
            chromosome,
            classes,
        } => commands::stats(&chromosome, classes),
        Command::ExportArch {
            chromosome,
            format,
            classes,
        } => {
            let format = match format {
                Format::Markdown => TableFormat::Markdown,
                Format::Csv => TableFormat::Csv,
            };
            commands::export_arch(&chromosome, format, classes)
        }
        Command::Predict { chromosome, lut } => commands::predict(&chromosome, &lut),
        Command::ValidateLut { path } => commands::validate_lut(&path),
        Command::ParetoReport { run_dir, out } => {
            let report = commands::pareto_report(&run_dir, out.as_deref())?;
            let mut text = String::new();
            for p in &report.written {
                text.push_str(&format!("wrote {}\n", p.display()));
            }
            text.push_str(&format!(
                "mean params of final population: {:.0}\n",
                report.mean_params
            ));
            Ok(text)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CliError::exit_code(&e) as u8)
        }
    }
}
