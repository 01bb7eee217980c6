use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lutnas_core::arch_table;
use lutnas_core::search_space::INPUT_RESOLUTION;
use lutnas_core::{
    decode_architecture, evolve, model_stats, Chromosome, GenerationRecord, Individual,
    LatencyTable, SearchOutcome,
};
use serde::Serialize;

use crate::artifacts::{self, ArchiveRow, FrontRow, GenerationLine, PopulationRow};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub fn parse_chromosome(text: &str) -> CliResult<Chromosome> {
    text.parse::<Chromosome>()
        .map_err(|e| CliError::Validation(format!("cannot parse chromosome: {e}")))
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectedModel {
    pub chromosome: String,
    pub accuracy: f64,
    pub latency_ms: f64,
    pub params: u64,
    pub madds: u64,
    pub blocks: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub generations: Vec<GenerationRecord>,
    pub front: Vec<FrontRow>,
    pub selected: Vec<SelectedModel>,
    pub total_evaluations: usize,
    pub unique_evaluations: usize,
    pub wall_time_s: f64,
}

/// Final front sorted by latency, then chromosome.
pub fn sorted_front(outcome: &SearchOutcome) -> Vec<Individual> {
    let mut front = outcome.final_front();
    front.sort_by(|a, b| {
        a.objectives
            .latency_ms
            .total_cmp(&b.objectives.latency_ms)
            .then(a.chromosome.cmp(&b.chromosome))
    });
    front
}

fn write(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::write(&path, e))
}

fn selected_markdown(selected: &[SelectedModel], num_classes: u32) -> CliResult<String> {
    let mut out = String::from("# Selected models\n");
    for (i, m) in selected.iter().enumerate() {
        let chromosome = parse_chromosome(&m.chromosome)?;
        let _ = write!(
            out,
            "\n## Model {}\n\nchromosome: {}\naccuracy: {}\nlatency: {:.4} ms\nparams: {} ({:.1}M)\nMAdds: {} ({:.0}M)\n\n",
            i + 1,
            m.chromosome,
            m.accuracy,
            m.latency_ms,
            m.params,
            m.params as f64 / 1e6,
            m.madds,
            m.madds as f64 / 1e6,
        );
        out.push_str(&arch_table::to_markdown(&decode_architecture(
            &chromosome,
            num_classes,
        )));
    }
    Ok(out)
}

/// Runs a search from a config file and writes every artifact into `out`.
pub fn search(config_path: &Path, out: &Path) -> CliResult<RunReport> {
    let run = RunConfig::load(config_path)?.into_run(config_path)?;
    let started = Instant::now();
    let outcome = evolve(&run.search, run.evaluator.as_ref(), &run.lut)?;
    let wall_time_s = started.elapsed().as_secs_f64();

    std::fs::create_dir_all(out).map_err(|e| CliError::write(out, e))?;
    let front = sorted_front(&outcome);
    let selected = outcome
        .selected
        .iter()
        .map(|i| {
            let arch = decode_architecture(&i.chromosome, run.search.num_classes);
            let stats = model_stats(&arch, INPUT_RESOLUTION)?;
            Ok(SelectedModel {
                chromosome: i.chromosome.to_string(),
                accuracy: i.objectives.accuracy,
                latency_ms: i.objectives.latency_ms,
                params: stats.params,
                madds: stats.madds,
                blocks: i.chromosome.choices().map(|c| c.to_string()).collect(),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    write(
        out,
        artifacts::FRONT_CSV,
        &artifacts::csv_string(front.iter().map(FrontRow::from))?,
    )?;
    write(
        out,
        artifacts::GENERATIONS_JSONL,
        &artifacts::jsonl_string(&outcome.log),
    )?;
    write(
        out,
        artifacts::FINAL_POPULATION_CSV,
        &artifacts::csv_string(outcome.final_population.iter().map(PopulationRow::from))?,
    )?;
    write(
        out,
        artifacts::ARCHIVE_CSV,
        &artifacts::csv_string(outcome.archive.iter().map(ArchiveRow::from))?,
    )?;
    write(
        out,
        artifacts::SELECTED_MD,
        &selected_markdown(&selected, run.search.num_classes)?,
    )?;

    let report = RunReport {
        config: run.config,
        generations: outcome.log.clone(),
        front: front.iter().map(FrontRow::from).collect(),
        selected,
        total_evaluations: outcome.total_evaluations(),
        unique_evaluations: outcome.unique_evaluations,
        wall_time_s,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write(out, artifacts::REPORT_JSON, &json)?;
    Ok(report)
}

pub fn stats(chromosome: &str, num_classes: u32) -> CliResult<String> {
    let m = parse_chromosome(chromosome)?;
    if num_classes == 0 {
        return Err(CliError::Validation("classes must be positive".into()));
    }
    let s = model_stats(&decode_architecture(&m, num_classes), INPUT_RESOLUTION)?;
    Ok(format!(
        "params: {} ({:.1}M)\nMAdds: {} ({:.1}M)\n{:.1}M params, {:.0}M MAdds\n",
        s.params,
        s.params as f64 / 1e6,
        s.madds,
        s.madds as f64 / 1e6,
        s.params as f64 / 1e6,
        s.madds as f64 / 1e6,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableFormat {
    #[default]
    Markdown,
    Csv,
}

pub fn export_arch(chromosome: &str, format: TableFormat, num_classes: u32) -> CliResult<String> {
    let m = parse_chromosome(chromosome)?;
    let arch = decode_architecture(&m, num_classes);
    Ok(match format {
        TableFormat::Markdown => arch_table::to_markdown(&arch),
        TableFormat::Csv => arch_table::to_csv(&arch),
    })
}

fn load_lut(path: &Path) -> CliResult<LatencyTable> {
    LatencyTable::load(path).map_err(|e| CliError::in_file(path, e))
}

pub fn predict(chromosome: &str, lut_path: &Path) -> CliResult<String> {
    let m = parse_chromosome(chromosome)?;
    let lut = load_lut(lut_path)?;
    Ok(format!("{:.4} ms\n", lut.predict(&m)))
}

pub fn validate_lut(lut_path: &Path) -> CliResult<String> {
    let lut = load_lut(lut_path)?;
    let (lo, hi) = lut.bounds(|_| (0..12).collect());
    Ok(format!(
        "{}: valid; overhead {:.4} ms, predictions span {:.4} to {:.4} ms\n",
        lut_path.display(),
        lut.overhead_ms(),
        lo,
        hi
    ))
}

pub const HISTOGRAM_BIN: u64 = 250_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub bin_start_params: u64,
    pub bin_end_params: u64,
    pub count: usize,
}

pub fn params_histogram(params: &[u64]) -> Vec<HistogramBin> {
    let (Some(lo), Some(hi)) = (params.iter().min(), params.iter().max()) else {
        return Vec::new();
    };
    (lo / HISTOGRAM_BIN..=hi / HISTOGRAM_BIN)
        .map(|b| HistogramBin {
            bin_start_params: b * HISTOGRAM_BIN,
            bin_end_params: (b + 1) * HISTOGRAM_BIN,
            count: params.iter().filter(|&&p| p / HISTOGRAM_BIN == b).count(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoReport {
    pub written: Vec<PathBuf>,
    pub mean_params: f64,
}

/// Turns a finished run directory into plot-ready CSVs written to `out`
/// (the run directory itself by default).
pub fn pareto_report(run_dir: &Path, out: Option<&Path>) -> CliResult<ParetoReport> {
    let names = [
        artifacts::FRONT_CSV,
        artifacts::GENERATIONS_JSONL,
        artifacts::FINAL_POPULATION_CSV,
    ];
    let present: Vec<&str> = names
        .iter()
        .copied()
        .filter(|n| run_dir.join(n).is_file())
        .collect();
    if present.is_empty() {
        return Err(CliError::Validation(format!(
            "{}: no run artifacts found",
            run_dir.display()
        )));
    }
    if let Some(missing) = names.iter().find(|n| !present.contains(n)) {
        return Err(CliError::Validation(format!(
            "{}: incomplete run, {missing} is missing",
            run_dir.display()
        )));
    }
    let front_path = run_dir.join(artifacts::FRONT_CSV);
    let front: Vec<FrontRow> = artifacts::read_csv(&front_path)?;
    for row in &front {
        artifacts::parse_chromosome_cell(&front_path, &row.chromosome)?;
    }
    let generations: Vec<GenerationLine> =
        artifacts::read_jsonl(&run_dir.join(artifacts::GENERATIONS_JSONL))?;
    let population: Vec<PopulationRow> =
        artifacts::read_csv(&run_dir.join(artifacts::FINAL_POPULATION_CSV))?;
    if population.is_empty() {
        return Err(CliError::Validation(format!(
            "{}: final population is empty",
            run_dir.join(artifacts::FINAL_POPULATION_CSV).display()
        )));
    }

    #[derive(Serialize)]
    struct ScatterRow<'a> {
        latency_ms: f64,
        accuracy: f64,
        params: u64,
        chromosome: &'a str,
    }
    #[derive(Serialize)]
    struct HvRow {
        generation: usize,
        hypervolume: f64,
        archive_hypervolume: f64,
    }

    let out = out.unwrap_or(run_dir);
    std::fs::create_dir_all(out).map_err(|e| CliError::write(out, e))?;
    let scatter = artifacts::csv_string(front.iter().map(|r| ScatterRow {
        latency_ms: r.latency_ms,
        accuracy: r.accuracy,
        params: r.params,
        chromosome: &r.chromosome,
    }))?;
    let hv = artifacts::csv_string(generations.iter().map(|g| HvRow {
        generation: g.generation,
        hypervolume: g.hypervolume,
        archive_hypervolume: g.archive_hypervolume,
    }))?;
    let params: Vec<u64> = population.iter().map(|r| r.params).collect();
    let histogram = artifacts::csv_string(params_histogram(&params))?;

    let mut written = Vec::new();
    for (name, body, header) in [
        (
            artifacts::FRONT_SCATTER_CSV,
            scatter,
            "latency_ms,accuracy,params,chromosome\n",
        ),
        (
            artifacts::HYPERVOLUME_CSV,
            hv,
            "generation,hypervolume,archive_hypervolume\n",
        ),
        (
            artifacts::PARAMS_HISTOGRAM_CSV,
            histogram,
            "bin_start_params,bin_end_params,count\n",
        ),
    ] {
        // serde writes no header for an empty row set
        let body = if body.is_empty() {
            header.to_string()
        } else {
            body
        };
        write(out, name, &body)?;
        written.push(out.join(name));
    }
    Ok(ParetoReport {
        written,
        mean_params: params.iter().sum::<u64>() as f64 / params.len() as f64,
    })
}
