//! Seeded inputs shared by the engine benchmarks.

use lutnas_core::nsga2::{Individual, ObjectiveVector};
use lutnas_core::{
    count_params, decode_architecture, Chromosome, LatencyTable, SearchSpace, SyntheticEvaluator,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn chromosomes(n: usize, seed: u64) -> Vec<Chromosome> {
    let space = SearchSpace::full();
    let mut rng = rng(seed);
    (0..n).map(|_| space.sample(&mut rng)).collect()
}

/// `n` random points in the unit cube.
pub fn points(n: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = rng(seed);
    (0..n).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect()
}

/// `n` mutually non-dominated points on the plane x + y + z = 1.
pub fn front(n: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = rng(seed);
    (0..n)
        .map(|_| {
            let (a, b): (f64, f64) = (rng.gen(), rng.gen());
            let (lo, hi) = (a.min(b), a.max(b));
            [lo, hi - lo, 1.0 - hi]
        })
        .collect()
}

/// Random chromosomes scored with the synthetic evaluator and proxy table.
pub fn population(n: usize, seed: u64) -> Vec<Individual> {
    let lut = LatencyTable::reference_proxy();
    chromosomes(n, seed)
        .into_iter()
        .map(|m| {
            Individual::new(
                m,
                ObjectiveVector {
                    accuracy: SyntheticEvaluator::score(&m),
                    latency_ms: lut.predict(&m),
                    params: count_params(&decode_architecture(&m, 1000)),
                },
            )
        })
        .collect()
}
