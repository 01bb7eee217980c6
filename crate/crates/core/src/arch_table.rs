//! Row-per-layer architecture tables (markdown or CSV) and a reader that
//! recovers the chromosome from one.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::search_space::{
    index_of_choice, ArchitectureSpec, BlockChoice, Chromosome, LayerRow, Op, FIRST_SEARCHABLE_ROW,
    NUM_LAYERS, SKELETON,
};

pub const COLUMNS: [&str; 7] = ["Input", "Ops", "t", "c", "SE", "NL", "s"];
pub const NUM_ROWS: usize = NUM_LAYERS + 6;

const NONE: &str = "-";
const CHECK: &str = "✓";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchRow {
    pub input: String,
    pub ops: String,
    pub t: String,
    pub c: String,
    pub se: String,
    pub nl: String,
    pub s: String,
}

impl ArchRow {
    pub fn cells(&self) -> [&str; 7] {
        [
            &self.input,
            &self.ops,
            &self.t,
            &self.c,
            &self.se,
            &self.nl,
            &self.s,
        ]
    }
}

fn row(layer: &LayerRow) -> ArchRow {
    let input = format!("{}²×{}", layer.input_size, layer.op.in_channels());
    let dash = || NONE.to_string();
    match layer.op {
        Op::Conv {
            kernel,
            out_channels,
            stride,
            nonlinearity,
            ..
        } => ArchRow {
            input,
            ops: format!("conv2d, {kernel}×{kernel}"),
            t: dash(),
            c: out_channels.to_string(),
            se: dash(),
            nl: nonlinearity.label().into(),
            s: stride.to_string(),
        },
        Op::Bottleneck {
            expansion,
            kernel,
            out_channels,
            stride,
            se,
            nonlinearity,
            ..
        } => ArchRow {
            input,
            ops: format!("bneck, {kernel}×{kernel}"),
            t: expansion.to_string(),
            c: out_channels.to_string(),
            se: if se { CHECK.into() } else { dash() },
            nl: nonlinearity.label().into(),
            s: stride.to_string(),
        },
        Op::GlobalPool { .. } => ArchRow {
            ops: format!("avgpool, {0}×{0}", layer.input_size),
            input,
            t: dash(),
            c: dash(),
            se: dash(),
            nl: "HS".into(),
            s: dash(),
        },
        Op::PooledConv {
            out_channels,
            nonlinearity,
            ..
        } => ArchRow {
            input,
            ops: "conv2d, 1×1".into(),
            t: dash(),
            c: out_channels.to_string(),
            se: dash(),
            nl: nonlinearity.label().into(),
            s: "1".into(),
        },
        Op::Classifier { num_classes, .. } => ArchRow {
            input,
            ops: "conv2d, 1×1".into(),
            t: dash(),
            c: num_classes.to_string(),
            se: dash(),
            nl: dash(),
            s: dash(),
        },
    }
}

pub fn arch_rows(arch: &ArchitectureSpec) -> Vec<ArchRow> {
    arch.layers().iter().map(row).collect()
}

pub fn to_markdown(arch: &ArchitectureSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "| {} |", COLUMNS.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(COLUMNS.len()));
    for r in arch_rows(arch) {
        let _ = writeln!(out, "| {} |", r.cells().join(" | "));
    }
    out
}

pub fn to_csv(arch: &ArchitectureSpec) -> String {
    let quote = |cell: &str| {
        if cell.contains(',') {
            format!("\"{cell}\"")
        } else {
            cell.to_string()
        }
    };
    let mut out = String::new();
    let _ = writeln!(out, "{}", COLUMNS.join(","));
    for r in arch_rows(arch) {
        let cells: Vec<String> = r.cells().iter().map(|c| quote(c)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

fn split_csv(line: &str) -> Vec<String> {
    let mut cells = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for ch in line.chars() {
        match ch {
            '"' => quoted = !quoted,
            ',' if !quoted => cells.push(std::mem::take(&mut cur)),
            _ => cur.push(ch),
        }
    }
    cells.push(cur);
    cells.into_iter().map(|c| c.trim().to_string()).collect()
}

fn split_markdown(line: &str) -> Vec<String> {
    line.trim()
        .trim_start_matches('|')
        .trim_end_matches('|')
        .split('|')
        .map(|c| c.trim().to_string())
        .collect()
}

/// Data rows of a markdown or CSV table, header and separator removed.
fn data_rows(text: &str) -> Result<Vec<Vec<String>>> {
    let mut rows = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let cells = if line.starts_with('|') {
            split_markdown(line)
        } else {
            split_csv(line)
        };
        if cells
            .iter()
            .all(|c| c.chars().all(|ch| matches!(ch, '-' | ':')))
            || cells[0] == COLUMNS[0]
        {
            continue;
        }
        if cells.len() != COLUMNS.len() {
            return Err(Error::ArchTable(format!(
                "expected {} columns, found {} in {line:?}",
                COLUMNS.len(),
                cells.len()
            )));
        }
        rows.push(cells);
    }
    Ok(rows)
}

fn kernel_of(ops: &str, layer: usize) -> Result<u32> {
    let bad = || {
        Error::ArchTable(format!(
            "layer {}: cannot read a bneck kernel from {ops:?}",
            layer + 1
        ))
    };
    let size = ops.strip_prefix("bneck,").ok_or_else(bad)?.trim();
    let (k1, k2) = size.split_once(['×', 'x']).ok_or_else(bad)?;
    let k: u32 = k1.trim().parse().map_err(|_| bad())?;
    if k2.trim().parse::<u32>().ok() != Some(k) {
        return Err(bad());
    }
    Ok(k)
}

/// Recovers the chromosome from a table written by [`to_markdown`] or
/// [`to_csv`]. Channels and strides must match the fixed skeleton.
pub fn parse_arch_table(text: &str) -> Result<Chromosome> {
    let rows = data_rows(text)?;
    if rows.len() != NUM_ROWS {
        return Err(Error::ArchTable(format!(
            "expected {NUM_ROWS} rows, found {}",
            rows.len()
        )));
    }
    let mut genes = [0u8; NUM_LAYERS];
    for (i, cells) in rows[FIRST_SEARCHABLE_ROW..FIRST_SEARCHABLE_ROW + NUM_LAYERS]
        .iter()
        .enumerate()
    {
        let kernel = kernel_of(&cells[1], i)?;
        let expansion: u32 = cells[2].parse().map_err(|_| {
            Error::ArchTable(format!("layer {}: bad expansion {:?}", i + 1, cells[2]))
        })?;
        let se = match cells[4].as_str() {
            CHECK | "SE" | "yes" | "true" => true,
            "-" | "–" | "" | "no" | "false" => false,
            other => {
                return Err(Error::ArchTable(format!(
                    "layer {}: bad SE cell {other:?}",
                    i + 1
                )))
            }
        };
        let skeleton = SKELETON[i];
        if cells[3] != skeleton.out_channels.to_string() || cells[6] != skeleton.stride.to_string()
        {
            return Err(Error::ArchTable(format!(
                "layer {}: channels {} / stride {} differ from the skeleton ({} / {})",
                i + 1,
                cells[3],
                cells[6],
                skeleton.out_channels,
                skeleton.stride
            )));
        }
        genes[i] = index_of_choice(BlockChoice {
            expansion,
            kernel,
            se,
        })? as u8;
    }
    Chromosome::new(genes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search_space::{decode_architecture, presets};

    #[test]
    fn model_a_rows() {
        let rows = arch_rows(&decode_architecture(&presets::MODEL_A, 1000));
        assert_eq!(rows.len(), 20);
        assert_eq!(
            rows[0].cells(),
            ["224²×3", "conv2d, 3×3", "-", "16", "-", "HS", "2"]
        );
        assert_eq!(
            rows[2].cells(),
            ["112²×16", "bneck, 5×5", "6", "24", "-", "RE", "2"]
        );
        assert_eq!(
            rows[7].cells(),
            ["28²×40", "bneck, 3×3", "6", "80", "✓", "HS", "2"]
        );
        assert_eq!(
            rows[17].cells(),
            ["7²×960", "avgpool, 7×7", "-", "-", "-", "HS", "-"]
        );
        assert_eq!(
            rows[19].cells(),
            ["1²×1280", "conv2d, 1×1", "-", "1000", "-", "-", "-"]
        );
    }

    #[test]
    fn round_trips() {
        for m in [
            presets::MODEL_A,
            presets::MODEL_B,
            presets::MODEL_C,
            Chromosome::uniform(0).unwrap(),
        ] {
            let arch = decode_architecture(&m, 1000);
            assert_eq!(parse_arch_table(&to_markdown(&arch)).unwrap(), m);
            assert_eq!(parse_arch_table(&to_csv(&arch)).unwrap(), m);
        }
    }

    #[test]
    fn truncated_table_rejected() {
        let md = to_markdown(&decode_architecture(&presets::MODEL_A, 1000));
        let short: String = md.lines().take(10).collect::<Vec<_>>().join("\n");
        assert!(matches!(parse_arch_table(&short), Err(Error::ArchTable(_))));
    }
}
