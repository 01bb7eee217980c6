//! Layer-wise latency lookup table and additive latency prediction.
//!
//! File format (UTF-8 CSV):
//!
//! ```text
//! overhead_ms,1.25
//! layer1,0.31,0.35,...   (12 values, choices 0..11)
//! ...
//! layer14,...
//! ```

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::error::{Error, Result};
use crate::search_space::{
    decode_architecture, Chromosome, CHOICES, DEFAULT_NUM_CLASSES, FIRST_SEARCHABLE_ROW,
    INPUT_RESOLUTION, NUM_CHOICES, NUM_LAYERS,
};
use crate::stats;

/// Per-layer, per-choice latency in milliseconds plus a constant overhead
/// covering the stem, the tail and fixed framework cost.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyTable {
    entries: [[f64; NUM_CHOICES]; NUM_LAYERS],
    overhead_ms: f64,
}

/// One problem found while validating a table.
#[derive(Debug, Clone, PartialEq)]
pub enum LutViolation {
    MissingOverhead,
    BadOverheadLine {
        found: String,
    },
    BadOverheadValue {
        text: String,
    },
    NegativeOverhead(f64),
    RowCount {
        found: usize,
    },
    RowLabel {
        row: usize,
        found: String,
    },
    ColumnCount {
        layer: usize,
        found: usize,
    },
    Unparseable {
        layer: usize,
        choice: usize,
        text: String,
    },
    Negative {
        layer: usize,
        choice: usize,
        value: f64,
    },
    NonFinite {
        layer: usize,
        choice: usize,
    },
}

impl fmt::Display for LutViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LutViolation::MissingOverhead => {
                f.write_str("line 1: missing 'overhead_ms,<float>' header")
            }
            LutViolation::BadOverheadLine { found } => {
                write!(f, "line 1: expected 'overhead_ms,<float>', found {found:?}")
            }
            LutViolation::BadOverheadValue { text } => {
                write!(f, "line 1: cannot parse overhead {text:?}")
            }
            LutViolation::NegativeOverhead(v) => write!(f, "line 1: negative overhead {v}"),
            LutViolation::RowCount { found } => {
                write!(f, "expected 14 layer rows, found {found}")
            }
            LutViolation::RowLabel { row, found } => {
                write!(
                    f,
                    "layer row {row}: expected label 'layer{row}', found {found:?}"
                )
            }
            LutViolation::ColumnCount { layer, found } => {
                write!(f, "layer {layer}: expected 12 values, found {found}")
            }
            LutViolation::Unparseable {
                layer,
                choice,
                text,
            } => {
                write!(f, "layer {layer}, choice {choice}: cannot parse {text:?}")
            }
            LutViolation::Negative {
                layer,
                choice,
                value,
            } => {
                write!(
                    f,
                    "layer {layer}, choice {choice}: negative latency {value}"
                )
            }
            LutViolation::NonFinite { layer, choice } => {
                write!(f, "layer {layer}, choice {choice}: latency is not finite")
            }
        }
    }
}

/// All violations found in a table document.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct LutError {
    pub violations: Vec<LutViolation>,
}

impl fmt::Display for LutError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "invalid latency table ({} problems)",
            self.violations.len()
        )?;
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}

impl LatencyTable {
    pub fn new(entries: [[f64; NUM_CHOICES]; NUM_LAYERS], overhead_ms: f64) -> Result<Self> {
        let mut violations = Vec::new();
        if !(overhead_ms.is_finite() && overhead_ms >= 0.0) {
            violations.push(LutViolation::NegativeOverhead(overhead_ms));
        }
        for (i, row) in entries.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    violations.push(LutViolation::NonFinite {
                        layer: i + 1,
                        choice: j,
                    });
                } else if v < 0.0 {
                    violations.push(LutViolation::Negative {
                        layer: i + 1,
                        choice: j,
                        value: v,
                    });
                }
            }
        }
        if !violations.is_empty() {
            return Err(LutError { violations }.into());
        }
        Ok(LatencyTable {
            entries,
            overhead_ms,
        })
    }

    /// Every cell set to `cell_ms`.
    pub fn constant(cell_ms: f64, overhead_ms: f64) -> Result<Self> {
        LatencyTable::new([[cell_ms; NUM_CHOICES]; NUM_LAYERS], overhead_ms)
    }

    /// Deterministic stand-in for a measured table: each cell costs time
    /// proportional to the block's multiply-adds at 224x224, plus a fixed
    /// charge for an SE block. The overhead covers the constant stem and tail
    /// at the same rate plus `fixed_ms`.
    pub fn madds_proxy(ms_per_mmadd: f64, se_ms: f64, fixed_ms: f64) -> Result<Self> {
        let to_ms = |madds: u64| madds as f64 / 1e6 * ms_per_mmadd;
        let mut entries = [[0.0; NUM_CHOICES]; NUM_LAYERS];
        let mut overhead_madds = 0;
        for (j, choice) in CHOICES.iter().enumerate() {
            let arch = decode_architecture(&Chromosome::uniform(j as u8)?, DEFAULT_NUM_CLASSES);
            let rows = arch.layers();
            for (i, row) in rows[FIRST_SEARCHABLE_ROW..FIRST_SEARCHABLE_ROW + NUM_LAYERS]
                .iter()
                .enumerate()
            {
                let se = if choice.se { se_ms } else { 0.0 };
                entries[i][j] = to_ms(stats::layer_madds(row).total()) + se;
            }
            if j == 0 {
                let searchable: u64 = rows[FIRST_SEARCHABLE_ROW..FIRST_SEARCHABLE_ROW + NUM_LAYERS]
                    .iter()
                    .map(|r| stats::layer_madds(r).total())
                    .sum();
                overhead_madds = stats::count_madds(&arch, INPUT_RESOLUTION)? - searchable;
            }
        }
        LatencyTable::new(entries, to_ms(overhead_madds) + fixed_ms)
    }

    /// The proxy used when no measured table is supplied: 0.04 ms per
    /// million multiply-adds, 0.05 ms per SE block, 1 ms fixed.
    pub fn reference_proxy() -> Self {
        LatencyTable::madds_proxy(0.04, 0.05, 1.0).expect("proxy cells are finite and non-negative")
    }

    pub fn entry(&self, layer: usize, choice: usize) -> f64 {
        self.entries[layer][choice]
    }

    pub fn entries(&self) -> &[[f64; NUM_CHOICES]; NUM_LAYERS] {
        &self.entries
    }

    pub fn overhead_ms(&self) -> f64 {
        self.overhead_ms
    }

    pub fn with_entry(&self, layer: usize, choice: usize, value: f64) -> Result<Self> {
        let mut entries = self.entries;
        entries[layer][choice] = value;
        LatencyTable::new(entries, self.overhead_ms)
    }

    pub fn with_overhead(&self, overhead_ms: f64) -> Result<Self> {
        LatencyTable::new(self.entries, overhead_ms)
    }

    /// Every cell and the overhead multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let entries = self.entries.map(|row| row.map(|v| v * factor));
        LatencyTable::new(entries, self.overhead_ms * factor)
    }

    /// Overhead plus the selected cell of every layer, summed in layer order.
    pub fn predict(&self, chromosome: &Chromosome) -> f64 {
        let mut total = self.overhead_ms;
        for (row, &g) in self.entries.iter().zip(chromosome.genes()) {
            total += row[g as usize];
        }
        total
    }

    /// Smallest and largest prediction over chromosomes whose layer `i`
    /// takes one of `allowed(i)`.
    pub fn bounds(&self, allowed: impl Fn(usize) -> Vec<u8>) -> (f64, f64) {
        let (mut lo, mut hi) = (self.overhead_ms, self.overhead_ms);
        for (i, row) in self.entries.iter().enumerate() {
            let values = allowed(i).into_iter().map(|g| row[g as usize]);
            let (min, max) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                (a.min(v), b.max(v))
            });
            lo += min;
            hi += max;
        }
        (lo, hi)
    }

    pub fn parse(text: &str) -> Result<Self, LutError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let mut violations = Vec::new();

        let mut overhead = 0.0;
        match lines.next() {
            None => violations.push(LutViolation::MissingOverhead),
            Some(line) => match line.split_once(',') {
                Some(("overhead_ms", value)) => match value.trim().parse::<f64>() {
                    Ok(v) if v.is_finite() && v >= 0.0 => overhead = v,
                    Ok(v) if v.is_finite() => violations.push(LutViolation::NegativeOverhead(v)),
                    _ => violations.push(LutViolation::BadOverheadValue {
                        text: value.trim().to_string(),
                    }),
                },
                _ => violations.push(LutViolation::BadOverheadLine {
                    found: line.to_string(),
                }),
            },
        }

        let rows: Vec<&str> = lines.collect();
        if rows.len() != NUM_LAYERS {
            violations.push(LutViolation::RowCount { found: rows.len() });
        }
        let mut entries = [[0.0; NUM_CHOICES]; NUM_LAYERS];
        for (i, line) in rows.iter().enumerate().take(NUM_LAYERS) {
            let layer = i + 1;
            let mut fields = line.split(',').map(str::trim);
            let label = fields.next().unwrap_or_default();
            if label != format!("layer{layer}") {
                violations.push(LutViolation::RowLabel {
                    row: layer,
                    found: label.to_string(),
                });
            }
            let values: Vec<&str> = fields.collect();
            if values.len() != NUM_CHOICES {
                violations.push(LutViolation::ColumnCount {
                    layer,
                    found: values.len(),
                });
            }
            for (j, text) in values.iter().enumerate().take(NUM_CHOICES) {
                match text.parse::<f64>() {
                    Ok(v) if !v.is_finite() => {
                        violations.push(LutViolation::NonFinite { layer, choice: j })
                    }
                    Ok(v) if v < 0.0 => violations.push(LutViolation::Negative {
                        layer,
                        choice: j,
                        value: v,
                    }),
                    Ok(v) => entries[i][j] = v,
                    Err(_) => violations.push(LutViolation::Unparseable {
                        layer,
                        choice: j,
                        text: text.to_string(),
                    }),
                }
            }
        }

        if violations.is_empty() {
            Ok(LatencyTable {
                entries,
                overhead_ms: overhead,
            })
        } else {
            Err(LutError { violations })
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("overhead_ms,{}\n", self.overhead_ms);
        for (i, row) in self.entries.iter().enumerate() {
            out.push_str(&format!("layer{}", i + 1));
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read latency table {}: {e}", path.display())))?;
        Ok(LatencyTable::parse(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| {
            Error::Io(format!(
                "cannot write latency table {}: {e}",
                path.display()
            ))
        })
    }
}

pub fn load_table(text: &str) -> Result<LatencyTable> {
    Ok(LatencyTable::parse(text)?)
}

pub fn predict_latency(table: &LatencyTable, chromosome: &Chromosome) -> f64 {
    table.predict(chromosome)
}

/// Root-mean-square error between predicted and measured latencies.
pub fn latency_rmse(predicted: &[f64], measured: &[f64]) -> Result<f64> {
    if predicted.is_empty() || predicted.len() != measured.len() {
        return Err(Error::Domain(format!(
            "rmse needs two equal, non-empty sequences (got {} and {})",
            predicted.len(),
            measured.len()
        )));
    }
    let sum: f64 = predicted
        .iter()
        .zip(measured)
        .map(|(p, m)| (p - m) * (p - m))
        .sum();
    Ok((sum / predicted.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search_space::presets;

    #[test]
    fn constant_tables() {
        let zero = LatencyTable::constant(0.0, 0.0).unwrap();
        assert_eq!(zero.predict(&presets::MODEL_A), 0.0);
        let half = LatencyTable::constant(0.5, 2.0).unwrap();
        assert_eq!(half.predict(&presets::MODEL_B), 9.0);
        assert_eq!(half.predict(&presets::MODEL_C), 9.0);
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(
            latency_rmse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(),
            0.0
        );
        let r = latency_rmse(&[1.0, 2.0], &[2.0, 2.0]).unwrap();
        assert!((r - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(latency_rmse(&[], &[]).is_err());
        assert!(latency_rmse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn rejects_negative_cells() {
        let err = LatencyTable::constant(0.5, 1.0)
            .unwrap()
            .with_entry(3, 4, -0.2)
            .unwrap_err();
        let Error::Lut(lut) = err else {
            panic!("wrong error")
        };
        assert_eq!(
            lut.violations,
            vec![LutViolation::Negative {
                layer: 4,
                choice: 4,
                value: -0.2
            }]
        );
    }

    #[test]
    fn proxy_table_is_plausible() {
        let t = LatencyTable::madds_proxy(0.04, 0.05, 1.0).unwrap();
        let a = t.predict(&presets::MODEL_A);
        assert!(a > 5.0 && a < 30.0, "{a}");
        assert!(
            t.predict(&Chromosome::uniform(11).unwrap())
                > t.predict(&Chromosome::uniform(0).unwrap())
        );
    }
}
