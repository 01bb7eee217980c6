//! The generational loop.
//!
//! `P0` and `Q0` are both seeded by the diversity initializer. Each
//! generation merges `R = P ∪ Q`, sorts it into fronts, admits whole fronts
//! into the next parent population and truncates the last admitted front by
//! weighted crowding order. Offspring come from binary tournaments: every
//! selected pair contributes its two crossover children and one mutant of
//! each parent until `n` offspring exist.
//!
//! Every random decision draws from a stream keyed by (seed, generation,
//! slot), and evaluations are merged back in a fixed order, so results do
//! not depend on the number of worker threads.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::crowding::weighted_crowding;
use super::hypervolume::hypervolume;
use super::objectives::{dominates, ObjectiveMode, ObjectiveVector, ObjectiveWeights};
use super::operators::{
    crowded_compare, hierarchical_mutation, single_point_crossover, tournament_select, Individual,
};
use super::sort::{constrained_nondominated_sort, fast_nondominated_sort};
use crate::error::{Error, Result};
use crate::evaluator::Evaluator;
use crate::latency::LatencyTable;
use crate::search_space::{
    decode_architecture, layer_in_channels, Chromosome, SearchSpace, CHOICES, DEFAULT_NUM_CLASSES,
    SKELETON,
};
use crate::stats::{block_params, count_params};

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub population_size: usize,
    pub generations: usize,
    pub weights: ObjectiveWeights,
    pub seed: u64,
    pub crossover_prob: f64,
    /// Per-gene mutation probability.
    pub p_layer: f64,
    /// Probability of redrawing a whole chromosome instead.
    pub p_resample: f64,
    /// Number of models picked from the final front.
    pub report_size: usize,
    /// Optional hard cap: models must run strictly faster than this.
    pub latency_cap_ms: Option<f64>,
    pub objectives: ObjectiveMode,
    pub space: SearchSpace,
    pub num_classes: u32,
    /// Evaluation threads; 0 lets the thread pool decide.
    pub workers: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            population_size: 70,
            generations: 120,
            weights: ObjectiveWeights::default(),
            seed: 0,
            crossover_prob: 0.9,
            p_layer: 0.1,
            p_resample: 0.2,
            report_size: 3,
            latency_cap_ms: None,
            objectives: ObjectiveMode::Three,
            space: SearchSpace::full(),
            num_classes: DEFAULT_NUM_CLASSES,
            workers: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let n = self.population_size;
        if n < 12 || !n.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "population_size must be even and at least 12, got {n}"
            )));
        }
        if self.generations < 1 {
            return Err(Error::Config("generations must be at least 1".into()));
        }
        if self.report_size < 1 || self.report_size > n {
            return Err(Error::Config(format!(
                "K must lie in 1..={n}, got {}",
                self.report_size
            )));
        }
        for (name, p) in [
            ("crossover_prob", self.crossover_prob),
            ("p_layer", self.p_layer),
            ("p_resample", self.p_resample),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        self.weights.validate()?;
        if let Some(cap) = self.latency_cap_ms {
            if !(cap.is_finite() && cap > 0.0) {
                return Err(Error::Config(format!(
                    "latency_cap_ms must be positive, got {cap}"
                )));
            }
        }
        if self.num_classes == 0 {
            return Err(Error::Config("num_classes must be positive".into()));
        }
        if (n as u128) > self.space.cardinality() {
            return Err(Error::Config(format!(
                "population_size {n} exceeds the {} chromosomes of the search space",
                self.space.cardinality()
            )));
        }
        Ok(())
    }
}

/// One evaluated offspring (or initial individual) in evaluation order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArchiveEntry {
    pub generation: usize,
    pub chromosome: Chromosome,
    pub objectives: ObjectiveVector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub front_size: usize,
    pub best_accuracy: f64,
    pub min_latency_ms: f64,
    /// Normalized hypervolume of the parent population's first front.
    pub hypervolume: f64,
    /// Normalized hypervolume of everything evaluated so far.
    pub archive_hypervolume: f64,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// Final parents, ranked and crowded among themselves, in crowded order.
    pub final_population: Vec<Individual>,
    pub archive: Vec<ArchiveEntry>,
    pub log: Vec<GenerationRecord>,
    /// The `K` equally spaced models of the final front.
    pub selected: Vec<Individual>,
    /// Distinct chromosomes actually sent to the evaluator.
    pub unique_evaluations: usize,
    pub bounds: ObjectiveBounds,
}

impl SearchOutcome {
    /// Distinct chromosomes of the final first front, in crowded order.
    pub fn final_front(&self) -> Vec<Individual> {
        distinct_front(&self.final_population)
    }

    pub fn total_evaluations(&self) -> usize {
        self.archive.len()
    }
}

/// Ideal and nadir corners of the attainable objective space, used to map
/// objectives onto the unit cube for hypervolume.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectiveBounds {
    pub mode: ObjectiveMode,
    pub ideal: Vec<f64>,
    pub nadir: Vec<f64>,
}

impl ObjectiveBounds {
    /// Accuracy spans [0, 1]; latency and params span their exact extremes
    /// over `space` (both are separable per layer).
    pub fn for_space(
        space: &SearchSpace,
        lut: &LatencyTable,
        num_classes: u32,
        mode: ObjectiveMode,
    ) -> Self {
        let (lat_lo, lat_hi) = lut.bounds(|i| space.allowed(i));
        let per_layer = |pick: fn(u64, u64) -> u64| -> Chromosome {
            let genes = std::array::from_fn(|i| {
                let allowed = space.allowed(i);
                let score = |g: u8| {
                    block_params(
                        layer_in_channels(i),
                        CHOICES[g as usize],
                        SKELETON[i].out_channels,
                    )
                };
                *allowed
                    .iter()
                    .reduce(|a, b| {
                        if pick(score(*a), score(*b)) == score(*a) {
                            a
                        } else {
                            b
                        }
                    })
                    .expect("every layer allows a choice")
            });
            Chromosome::new(genes).expect("genes come from the choice table")
        };
        let params_of = |m: Chromosome| count_params(&decode_architecture(&m, num_classes)) as f64;
        let p_min = params_of(per_layer(u64::min));
        let p_max = params_of(per_layer(u64::max));
        let ideal = [-1.0, lat_lo, -p_max];
        let nadir = [0.0, lat_hi, -p_min];
        let arity = mode.arity();
        ObjectiveBounds {
            mode,
            ideal: ideal[..arity].to_vec(),
            nadir: nadir[..arity].to_vec(),
        }
    }

    pub fn normalize(&self, o: &ObjectiveVector) -> Vec<f64> {
        self.mode
            .project(o)
            .iter()
            .zip(self.ideal.iter().zip(&self.nadir))
            .map(|(v, (lo, hi))| {
                let span = hi - lo;
                if span > 0.0 {
                    ((v - lo) / span).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Hypervolume of the non-dominated subset of `objectives` against the
    /// unit reference point, after normalization.
    pub fn hypervolume<'a>(
        &self,
        objectives: impl IntoIterator<Item = &'a ObjectiveVector>,
    ) -> f64 {
        let points: Vec<Vec<f64>> = objectives.into_iter().map(|o| self.normalize(o)).collect();
        let reference = vec![1.0; self.mode.arity()];
        hypervolume(&points, &reference).expect("normalized points lie inside the unit box")
    }
}

/// Random stream for one (generation, slot) decision point.
pub fn stream_rng(seed: u64, generation: u64, slot: u64, tag: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (chunk, word) in key.chunks_exact_mut(8).zip([seed, generation, slot, tag]) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

const TAG_INIT_PARENTS: u64 = 1;
const TAG_INIT_OFFSPRING: u64 = 2;
const TAG_OFFSPRING: u64 = 3;

struct Objectives<'a, E: ?Sized> {
    evaluator: &'a E,
    lut: &'a LatencyTable,
    num_classes: u32,
    cache: HashMap<Chromosome, ObjectiveVector>,
    pool: rayon::ThreadPool,
}

impl<E: Evaluator + ?Sized> Objectives<'_, E> {
    fn compute(&self, m: &Chromosome) -> Result<ObjectiveVector> {
        let accuracy = self.evaluator.evaluate(m).map_err(|e| match e {
            e @ Error::Evaluation { .. } => e,
            other => Error::Evaluation {
                chromosome: m.to_string(),
                reason: other.to_string(),
            },
        })?;
        Ok(ObjectiveVector {
            accuracy: accuracy.value(),
            latency_ms: self.lut.predict(m),
            params: count_params(&decode_architecture(m, self.num_classes)),
        })
    }

    fn evaluate(&mut self, batch: &[Chromosome]) -> Result<Vec<Individual>> {
        let mut pending: Vec<Chromosome> = Vec::new();
        for m in batch {
            if !self.cache.contains_key(m) && !pending.contains(m) {
                pending.push(*m);
            }
        }
        let results: Vec<Result<ObjectiveVector>> = self
            .pool
            .install(|| pending.par_iter().map(|m| self.compute(m)).collect());
        for (m, r) in pending.iter().zip(results) {
            self.cache.insert(*m, r?);
        }
        Ok(batch
            .iter()
            .map(|m| Individual::new(*m, self.cache[m]))
            .collect())
    }
}

/// Assigns rank and crowding distance to every member of `pop` and returns
/// the fronts as index lists.
pub fn rank_population(
    pop: &mut [Individual],
    mode: ObjectiveMode,
    weights: &ObjectiveWeights,
    latency_cap_ms: Option<f64>,
) -> Vec<Vec<usize>> {
    let points: Vec<Vec<f64>> = pop.iter().map(|i| mode.project(&i.objectives)).collect();
    let fronts = match latency_cap_ms {
        None => fast_nondominated_sort(&points),
        Some(cap) => {
            let violation: Vec<Option<f64>> = pop
                .iter()
                .map(|i| (i.objectives.latency_ms >= cap).then_some(i.objectives.latency_ms - cap))
                .collect();
            constrained_nondominated_sort(&points, &violation)
        }
    };
    let w = mode.crowding_weights(weights);
    for (rank, front) in fronts.iter().enumerate() {
        let members: Vec<&Vec<f64>> = front.iter().map(|&i| &points[i]).collect();
        let distance = weighted_crowding(&members, &w);
        for (&i, d) in front.iter().zip(distance) {
            pop[i].rank = Some(rank);
            pop[i].crowding = Some(d);
        }
    }
    fronts
}

fn sort_crowded(pop: &mut [Individual]) {
    pop.sort_by(|a, b| crowded_compare(a, b).expect("ranked population"));
}

/// Picks `n` survivors from `merged` front by front, truncating the last
/// admitted front in crowded order.
fn environmental_selection(
    mut merged: Vec<Individual>,
    n: usize,
    cfg: &SearchConfig,
) -> Vec<Individual> {
    let fronts = rank_population(
        &mut merged,
        cfg.objectives,
        &cfg.weights,
        cfg.latency_cap_ms,
    );
    let mut next = Vec::with_capacity(n);
    for front in fronts {
        let mut members: Vec<Individual> = front.iter().map(|&i| merged[i].clone()).collect();
        if next.len() + members.len() > n {
            sort_crowded(&mut members);
            members.truncate(n - next.len());
        }
        next.extend(members);
        if next.len() == n {
            break;
        }
    }
    next
}

fn offspring(
    parents: &[Individual],
    generation: usize,
    cfg: &SearchConfig,
) -> Result<Vec<Chromosome>> {
    let n = cfg.population_size;
    let mut children = Vec::with_capacity(n);
    let mut slot = 0u64;
    while children.len() < n {
        let mut rng = stream_rng(cfg.seed, generation as u64, slot, TAG_OFFSPRING);
        let (a, b) = tournament_select(parents, &mut rng)?;
        let (pa, pb) = (&parents[a].chromosome, &parents[b].chromosome);
        let (c1, c2) = single_point_crossover(pa, pb, cfg.crossover_prob, &mut rng);
        let m1 = hierarchical_mutation(pa, &cfg.space, cfg.p_layer, cfg.p_resample, &mut rng);
        let m2 = hierarchical_mutation(pb, &cfg.space, cfg.p_layer, cfg.p_resample, &mut rng);
        for child in [c1, c2, m1, m2] {
            if children.len() < n {
                children.push(child);
            }
        }
        slot += 1;
    }
    Ok(children)
}

/// Non-dominated points seen so far, in normalized coordinates.
struct CumulativeFront {
    points: Vec<Vec<f64>>,
}

impl CumulativeFront {
    fn add(&mut self, p: Vec<f64>) {
        if self.points.iter().any(|q| dominates(q, &p) || *q == p) {
            return;
        }
        self.points.retain(|q| !dominates(&p, q));
        self.points.push(p);
    }

    fn hypervolume(&self, arity: usize) -> f64 {
        hypervolume(&self.points, &vec![1.0; arity]).expect("normalized points")
    }
}

pub fn evolve<E: Evaluator + ?Sized>(
    cfg: &SearchConfig,
    evaluator: &E,
    lut: &LatencyTable,
) -> Result<SearchOutcome> {
    evolve_with_observer(cfg, evaluator, lut, |_, _| {})
}

/// Like [`evolve`], calling `observer(g, P_g)` after each parent selection.
pub fn evolve_with_observer<E, F>(
    cfg: &SearchConfig,
    evaluator: &E,
    lut: &LatencyTable,
    mut observer: F,
) -> Result<SearchOutcome>
where
    E: Evaluator + ?Sized,
    F: FnMut(usize, &[Individual]),
{
    cfg.validate()?;
    let n = cfg.population_size;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", cfg.workers)))?;
    let mut objectives = Objectives {
        evaluator,
        lut,
        num_classes: cfg.num_classes,
        cache: HashMap::new(),
        pool,
    };
    let bounds = ObjectiveBounds::for_space(&cfg.space, lut, cfg.num_classes, cfg.objectives);
    let mut cumulative = CumulativeFront { points: Vec::new() };
    let mut archive = Vec::with_capacity(n * (cfg.generations + 2));
    let record = |generation: usize,
                  batch: &[Individual],
                  archive: &mut Vec<ArchiveEntry>,
                  cumulative: &mut CumulativeFront| {
        for i in batch {
            cumulative.add(bounds.normalize(&i.objectives));
            archive.push(ArchiveEntry {
                generation,
                chromosome: i.chromosome,
                objectives: i.objectives,
            });
        }
    };

    let p0 = cfg
        .space
        .diversity_init(n, &mut stream_rng(cfg.seed, 0, 0, TAG_INIT_PARENTS))?;
    let q0 = cfg
        .space
        .diversity_init(n, &mut stream_rng(cfg.seed, 0, 0, TAG_INIT_OFFSPRING))?;
    let mut parents = objectives.evaluate(&p0)?;
    let mut children = objectives.evaluate(&q0)?;
    record(0, &parents, &mut archive, &mut cumulative);
    record(0, &children, &mut archive, &mut cumulative);

    let mut log = Vec::with_capacity(cfg.generations);
    for generation in 1..=cfg.generations {
        let mut merged = std::mem::take(&mut parents);
        merged.append(&mut children);
        parents = environmental_selection(merged, n, cfg);
        observer(generation, &parents);

        let front: Vec<&Individual> = parents.iter().filter(|i| i.rank == Some(0)).collect();
        log.push(GenerationRecord {
            generation,
            front_size: front.len(),
            best_accuracy: front
                .iter()
                .map(|i| i.objectives.accuracy)
                .fold(f64::NEG_INFINITY, f64::max),
            min_latency_ms: front
                .iter()
                .map(|i| i.objectives.latency_ms)
                .fold(f64::INFINITY, f64::min),
            hypervolume: bounds.hypervolume(front.iter().map(|i| &i.objectives)),
            archive_hypervolume: 0.0,
        });

        let genes = offspring(&parents, generation, cfg)?;
        children = objectives.evaluate(&genes)?;
        record(generation, &children, &mut archive, &mut cumulative);
        // the log closes each generation with the archive including its offspring
        log.last_mut().expect("just pushed").archive_hypervolume =
            cumulative.hypervolume(cfg.objectives.arity());
    }

    rank_population(
        &mut parents,
        cfg.objectives,
        &cfg.weights,
        cfg.latency_cap_ms,
    );
    sort_crowded(&mut parents);
    let front = distinct_front(&parents);
    let selected = select_k_equal_distance(&front, cfg.report_size)?;
    Ok(SearchOutcome {
        final_population: parents,
        archive,
        log,
        selected,
        unique_evaluations: objectives.cache.len(),
        bounds,
    })
}

fn distinct_front(population: &[Individual]) -> Vec<Individual> {
    let mut seen = std::collections::HashSet::new();
    population
        .iter()
        .filter(|i| i.rank == Some(0) && seen.insert(i.chromosome))
        .cloned()
        .collect()
}

/// `K` members of a front spread evenly along latency. With `K = 1` the most
/// accurate member is returned. Repeated picks collapse when the front is
/// smaller than `K`.
pub fn select_k_equal_distance(front: &[Individual], k: usize) -> Result<Vec<Individual>> {
    if front.is_empty() {
        return Err(Error::Domain(
            "cannot select models from an empty front".into(),
        ));
    }
    if k == 0 {
        return Err(Error::Domain("K must be at least 1".into()));
    }
    let mut sorted: Vec<&Individual> = front.iter().collect();
    if k == 1 {
        let best = sorted
            .into_iter()
            .max_by(|a, b| {
                a.objectives
                    .accuracy
                    .total_cmp(&b.objectives.accuracy)
                    .then(b.objectives.latency_ms.total_cmp(&a.objectives.latency_ms))
                    .then(b.chromosome.cmp(&a.chromosome))
            })
            .expect("non-empty");
        return Ok(vec![best.clone()]);
    }
    sorted.sort_by(|a, b| {
        a.objectives
            .latency_ms
            .total_cmp(&b.objectives.latency_ms)
            .then(a.chromosome.cmp(&b.chromosome))
    });
    let last = sorted.len() - 1;
    let mut picks: Vec<usize> = (0..k).map(|j| j * last / (k - 1)).collect();
    picks.dedup();
    Ok(picks.into_iter().map(|i| sorted[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::SyntheticEvaluator;

    fn individual(latency: f64, accuracy: f64, genes: u8) -> Individual {
        Individual::new(
            Chromosome::uniform(genes).unwrap(),
            ObjectiveVector {
                accuracy,
                latency_ms: latency,
                params: 1,
            },
        )
    }

    #[test]
    fn select_k_examples() {
        let front: Vec<Individual> = (0..9).map(|i| individual(9.0 - i as f64, 0.5, i)).collect();
        let lat = |v: &[Individual]| {
            v.iter()
                .map(|i| i.objectives.latency_ms)
                .collect::<Vec<_>>()
        };
        assert_eq!(
            lat(&select_k_equal_distance(&front, 3).unwrap()),
            [1.0, 5.0, 9.0]
        );
        assert_eq!(
            lat(&select_k_equal_distance(&front, 2).unwrap()),
            [1.0, 9.0]
        );
        assert_eq!(
            lat(&select_k_equal_distance(&front, 9).unwrap()),
            (1..=9).map(f64::from).collect::<Vec<_>>()
        );
        assert_eq!(select_k_equal_distance(&front[..2], 5).unwrap().len(), 2);
        assert!(select_k_equal_distance(&[], 3).is_err());
    }

    #[test]
    fn select_one_is_most_accurate() {
        let front = vec![
            individual(1.0, 0.6, 0),
            individual(2.0, 0.7, 1),
            individual(3.0, 0.65, 2),
        ];
        assert_eq!(
            select_k_equal_distance(&front, 1).unwrap()[0]
                .objectives
                .accuracy,
            0.7
        );
    }

    #[test]
    fn config_validation() {
        let ok = SearchConfig::default();
        ok.validate().unwrap();
        for bad in [
            SearchConfig {
                population_size: 13,
                ..ok.clone()
            },
            SearchConfig {
                population_size: 10,
                ..ok.clone()
            },
            SearchConfig {
                generations: 0,
                ..ok.clone()
            },
            SearchConfig {
                report_size: 71,
                ..ok.clone()
            },
            SearchConfig {
                p_layer: 1.5,
                ..ok.clone()
            },
            SearchConfig {
                weights: ObjectiveWeights {
                    acc: 0.4,
                    lat: 0.3,
                    params: 0.2,
                },
                ..ok.clone()
            },
            SearchConfig {
                latency_cap_ms: Some(-1.0),
                ..ok.clone()
            },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))), "{bad:?}");
        }
    }

    #[test]
    fn stream_rngs_differ_by_slot() {
        use rand::Rng;
        let a: u64 = stream_rng(1, 2, 3, 0).gen();
        let b: u64 = stream_rng(1, 2, 4, 0).gen();
        let c: u64 = stream_rng(1, 2, 3, 0).gen();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn smallest_pipeline() {
        let cfg = SearchConfig {
            population_size: 12,
            generations: 1,
            report_size: 2,
            ..SearchConfig::default()
        };
        let lut = LatencyTable::constant(0.5, 2.0).unwrap();
        let out = evolve(&cfg, &SyntheticEvaluator, &lut).unwrap();
        assert_eq!(out.total_evaluations(), 36);
        assert_eq!(out.final_population.len(), 12);
        assert!(out
            .final_population
            .iter()
            .all(|i| i.rank.is_some() && i.crowding.is_some()));
        assert_eq!(out.log.len(), 1);
    }

    #[test]
    fn bounds_cover_the_space() {
        let lut = LatencyTable::madds_proxy(0.04, 0.05, 1.0).unwrap();
        let b = ObjectiveBounds::for_space(&SearchSpace::full(), &lut, 1000, ObjectiveMode::Three);
        let smallest =
            count_params(&decode_architecture(&Chromosome::uniform(0).unwrap(), 1000)) as f64;
        let largest = count_params(&decode_architecture(
            &Chromosome::uniform(11).unwrap(),
            1000,
        )) as f64;
        assert_eq!(b.nadir[2], -smallest);
        assert_eq!(b.ideal[2], -largest);
        assert_eq!(b.ideal[1], lut.predict(&Chromosome::uniform(0).unwrap()));
    }
}
