//! Accuracy objective.
//!
//! The search never assumes scores come from a trained network: anything
//! implementing [`Evaluator`] can drive it. Two implementations ship here, a
//! lookup table read from CSV and a closed-form synthetic benchmark.

use std::collections::HashMap;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::search_space::{BlockChoice, Chromosome, NUM_LAYERS};

/// Top-1 accuracy (or a surrogate) as a fraction in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct AccuracyScore(f64);

impl AccuracyScore {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Domain(format!("accuracy {value} is outside [0, 1]")));
        }
        Ok(AccuracyScore(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Scores a chromosome. Implementations must be deterministic and safe to
/// call from many threads at once.
pub trait Evaluator: Send + Sync {
    fn evaluate(&self, chromosome: &Chromosome) -> Result<AccuracyScore>;
}

impl<E: Evaluator + ?Sized> Evaluator for &E {
    fn evaluate(&self, chromosome: &Chromosome) -> Result<AccuracyScore> {
        (**self).evaluate(chromosome)
    }
}

impl<E: Evaluator + ?Sized> Evaluator for Box<E> {
    fn evaluate(&self, chromosome: &Chromosome) -> Result<AccuracyScore> {
        (**self).evaluate(chromosome)
    }
}

/// What a [`TableEvaluator`] does for chromosomes absent from its table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MissPolicy {
    Strict,
    Default(AccuracyScore),
}

#[derive(Debug, Clone)]
pub struct TableEvaluator {
    scores: HashMap<Chromosome, AccuracyScore>,
    policy: MissPolicy,
}

impl TableEvaluator {
    pub fn new(scores: HashMap<Chromosome, AccuracyScore>, policy: MissPolicy) -> Self {
        TableEvaluator { scores, policy }
    }

    /// Parses lines of `chromosome_text,score`. The chromosome may be
    /// quoted; the score is whatever follows the last comma. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn parse(text: &str, policy: MissPolicy) -> Result<Self> {
        let mut scores = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad =
                |what: String| Error::Config(format!("accuracy table line {}: {what}", n + 1));
            let (key, score) = line
                .rsplit_once(',')
                .ok_or_else(|| bad("expected 'chromosome,score'".into()))?;
            let key: Chromosome = key
                .trim()
                .trim_matches('"')
                .parse()
                .map_err(|e| bad(format!("{e}")))?;
            let score: f64 = score
                .trim()
                .parse()
                .map_err(|_| bad(format!("cannot parse score {:?}", score.trim())))?;
            let score = AccuracyScore::new(score).map_err(|e| bad(e.to_string()))?;
            scores.insert(key, score);
        }
        Ok(TableEvaluator { scores, policy })
    }

    pub fn load(path: impl AsRef<Path>, policy: MissPolicy) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Io(format!(
                "cannot read accuracy table {}: {e}",
                path.display()
            ))
        })?;
        TableEvaluator::parse(&text, policy)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

impl Evaluator for TableEvaluator {
    fn evaluate(&self, chromosome: &Chromosome) -> Result<AccuracyScore> {
        match (self.scores.get(chromosome), self.policy) {
            (Some(&score), _) => Ok(score),
            (None, MissPolicy::Default(score)) => Ok(score),
            (None, MissPolicy::Strict) => Err(Error::Evaluation {
                chromosome: chromosome.to_string(),
                reason: "not present in the accuracy table".into(),
            }),
        }
    }
}

pub fn table_evaluate(table: &TableEvaluator, chromosome: &Chromosome) -> Result<AccuracyScore> {
    table.evaluate(chromosome)
}

/// Closed-form surrogate accuracy in `[0.50, 0.80]`.
///
/// Each gene scores `q = 0.5·[t = 6] + 0.15·(k − 3)/4 + 0.35·[SE]`; layers
/// 8–14 weigh twice as much as layers 1–7, and the weighted mean of `q` maps
/// linearly onto the score range. Larger blocks score higher, so accuracy
/// pulls against latency and with parameter count.
#[derive(Debug, Clone, Copy, Default)]
pub struct SyntheticEvaluator;

impl SyntheticEvaluator {
    pub const MIN: f64 = 0.50;
    pub const MAX: f64 = 0.80;

    pub fn gene_quality(choice: BlockChoice) -> f64 {
        let expansion = if choice.expansion == 6 { 0.5 } else { 0.0 };
        let kernel = 0.15 * (choice.kernel as f64 - 3.0) / 4.0;
        let se = if choice.se { 0.35 } else { 0.0 };
        expansion + kernel + se
    }

    pub fn position_weight(layer: usize) -> f64 {
        if layer < 7 {
            1.0
        } else {
            2.0
        }
    }

    pub fn score(chromosome: &Chromosome) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for layer in 0..NUM_LAYERS {
            let w = Self::position_weight(layer);
            num += w * Self::gene_quality(chromosome.choice(layer));
            den += w;
        }
        Self::MIN + (Self::MAX - Self::MIN) * num / den
    }
}

impl Evaluator for SyntheticEvaluator {
    fn evaluate(&self, chromosome: &Chromosome) -> Result<AccuracyScore> {
        AccuracyScore::new(Self::score(chromosome))
    }
}

pub fn synthetic_evaluate(chromosome: &Chromosome) -> AccuracyScore {
    AccuracyScore(SyntheticEvaluator::score(chromosome))
}
