//! Files written by `search` and read back by `pareto-report`.

use std::path::Path;

use lutnas_core::{ArchiveEntry, Chromosome, GenerationRecord, Individual};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const FRONT_CSV: &str = "front.csv";
pub const GENERATIONS_JSONL: &str = "generations.jsonl";
pub const FINAL_POPULATION_CSV: &str = "final_population.csv";
pub const ARCHIVE_CSV: &str = "archive.csv";
pub const SELECTED_MD: &str = "selected.md";
pub const REPORT_JSON: &str = "report.json";

pub const FRONT_SCATTER_CSV: &str = "front_scatter.csv";
pub const HYPERVOLUME_CSV: &str = "hypervolume.csv";
pub const PARAMS_HISTOGRAM_CSV: &str = "params_histogram.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontRow {
    pub chromosome: String,
    pub accuracy: f64,
    pub latency_ms: f64,
    pub params: u64,
}

impl From<&Individual> for FrontRow {
    fn from(i: &Individual) -> Self {
        FrontRow {
            chromosome: i.chromosome.to_string(),
            accuracy: i.objectives.accuracy,
            latency_ms: i.objectives.latency_ms,
            params: i.objectives.params,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationRow {
    pub chromosome: String,
    pub accuracy: f64,
    pub latency_ms: f64,
    pub params: u64,
    pub rank: usize,
    pub crowding: f64,
}

impl From<&Individual> for PopulationRow {
    fn from(i: &Individual) -> Self {
        PopulationRow {
            chromosome: i.chromosome.to_string(),
            accuracy: i.objectives.accuracy,
            latency_ms: i.objectives.latency_ms,
            params: i.objectives.params,
            rank: i.rank.unwrap_or_default(),
            crowding: i.crowding.unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveRow {
    pub generation: usize,
    pub chromosome: String,
    pub accuracy: f64,
    pub latency_ms: f64,
    pub params: u64,
}

impl From<&ArchiveEntry> for ArchiveRow {
    fn from(e: &ArchiveEntry) -> Self {
        ArchiveRow {
            generation: e.generation,
            chromosome: e.chromosome.to_string(),
            accuracy: e.objectives.accuracy,
            latency_ms: e.objectives.latency_ms,
            params: e.objectives.params,
        }
    }
}

/// The subset of [`GenerationRecord`] needed to rebuild reports.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct GenerationLine {
    pub generation: usize,
    pub hypervolume: f64,
    pub archive_hypervolume: f64,
}

pub fn csv_string<T: Serialize>(rows: impl IntoIterator<Item = T>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| CliError::Runtime(format!("csv encoding failed: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Runtime(format!("csv encoding failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn jsonl_string(records: &[GenerationRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::read(path, e))?;
    let mut rows = Vec::new();
    for (i, row) in r.deserialize().enumerate() {
        rows.push(
            row.map_err(|e| {
                CliError::Validation(format!("{} row {}: {e}", path.display(), i + 1))
            })?,
        );
    }
    Ok(rows)
}

pub fn read_jsonl(path: &Path) -> CliResult<Vec<GenerationLine>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| {
                CliError::Validation(format!("{} line {}: {e}", path.display(), i + 1))
            })
        })
        .collect()
}

pub fn parse_chromosome_cell(path: &Path, text: &str) -> CliResult<Chromosome> {
    text.parse()
        .map_err(|e| CliError::Validation(format!("{}: chromosome {text:?}: {e}", path.display())))
}
