//! Selection, crossover and mutation.

use std::cmp::Ordering;

use rand::Rng;
use serde::Serialize;

use super::objectives::ObjectiveVector;
use crate::error::{Error, Result};
use crate::search_space::{Chromosome, SearchSpace, NUM_CHOICES, NUM_LAYERS};

/// A chromosome with its objectives, plus the rank and crowding distance
/// assigned by the last sorting pass (unset until then).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Individual {
    pub chromosome: Chromosome,
    pub objectives: ObjectiveVector,
    pub rank: Option<usize>,
    pub crowding: Option<f64>,
}

impl Individual {
    pub fn new(chromosome: Chromosome, objectives: ObjectiveVector) -> Self {
        Individual {
            chromosome,
            objectives,
            rank: None,
            crowding: None,
        }
    }
}

/// Crowded-comparison order: lower rank first, then larger crowding
/// distance, then the lexicographically smaller chromosome.
pub fn crowded_compare(a: &Individual, b: &Individual) -> Result<Ordering> {
    let unset = |who: &Individual| {
        Error::Contract(format!(
            "individual {} compared before its rank and crowding distance were assigned",
            who.chromosome
        ))
    };
    let (ra, ca) = a.rank.zip(a.crowding).ok_or_else(|| unset(a))?;
    let (rb, cb) = b.rank.zip(b.crowding).ok_or_else(|| unset(b))?;
    Ok(ra
        .cmp(&rb)
        .then_with(|| cb.partial_cmp(&ca).unwrap_or(Ordering::Equal))
        .then_with(|| a.chromosome.cmp(&b.chromosome)))
}

/// Index of the winner of one binary tournament: two distinct members drawn
/// uniformly, the crowded-comparison winner kept.
pub fn binary_tournament<R: Rng + ?Sized>(pool: &[Individual], rng: &mut R) -> Result<usize> {
    if pool.len() < 2 {
        return Err(Error::Config(format!(
            "tournament selection needs at least 2 individuals, got {}",
            pool.len()
        )));
    }
    let a = rng.gen_range(0..pool.len());
    let mut b = rng.gen_range(0..pool.len() - 1);
    if b >= a {
        b += 1;
    }
    Ok(match crowded_compare(&pool[a], &pool[b])? {
        Ordering::Greater => b,
        _ => a,
    })
}

const PARENT_REDRAWS: usize = 10;

/// Two parents from independent tournaments. The second is redrawn up to
/// ten times while it carries the same chromosome as the first; after that
/// the best member (crowded order) with a different chromosome is taken, and
/// duplication is accepted only when no such member exists.
pub fn tournament_select<R: Rng + ?Sized>(
    pool: &[Individual],
    rng: &mut R,
) -> Result<(usize, usize)> {
    let first = binary_tournament(pool, rng)?;
    let mut second = binary_tournament(pool, rng)?;
    let mut redraws = 0;
    while pool[second].chromosome == pool[first].chromosome {
        if redraws == PARENT_REDRAWS {
            let mut best: Option<usize> = None;
            for (i, cand) in pool.iter().enumerate() {
                if cand.chromosome == pool[first].chromosome {
                    continue;
                }
                best = match best {
                    Some(b) if crowded_compare(&pool[b], cand)? != Ordering::Greater => Some(b),
                    _ => Some(i),
                };
            }
            return Ok((first, best.unwrap_or(second)));
        }
        second = binary_tournament(pool, rng)?;
        redraws += 1;
    }
    Ok((first, second))
}

/// Single-point crossover at cut `k` (1..=13): the first child keeps `a`'s
/// first `k` genes and takes the rest from `b`; the second is the mirror.
pub fn crossover_at(a: &Chromosome, b: &Chromosome, k: usize) -> (Chromosome, Chromosome) {
    assert!((1..NUM_LAYERS).contains(&k), "cut point {k} outside 1..14");
    let (mut c1, mut c2) = (*a, *b);
    c1.genes_mut()[k..].copy_from_slice(&b.genes()[k..]);
    c2.genes_mut()[k..].copy_from_slice(&a.genes()[k..]);
    (c1, c2)
}

/// With probability `probability`, crossover at a uniform cut in 1..=13;
/// otherwise the parents are copied.
pub fn single_point_crossover<R: Rng + ?Sized>(
    a: &Chromosome,
    b: &Chromosome,
    probability: f64,
    rng: &mut R,
) -> (Chromosome, Chromosome) {
    if rng.gen_bool(probability) {
        let k = rng.gen_range(1..NUM_LAYERS);
        crossover_at(a, b, k)
    } else {
        (*a, *b)
    }
}

/// Two-level mutation. With probability `p_resample` the whole chromosome
/// is redrawn uniformly from `space`; otherwise each searchable gene
/// independently moves, with probability `p_layer`, to a different choice
/// drawn uniformly.
pub fn hierarchical_mutation<R: Rng + ?Sized>(
    m: &Chromosome,
    space: &SearchSpace,
    p_layer: f64,
    p_resample: f64,
    rng: &mut R,
) -> Chromosome {
    if rng.gen_bool(p_resample) {
        return space.sample(rng);
    }
    let mut out = *m;
    for layer in space.free_layers() {
        if rng.gen_bool(p_layer) {
            let old = out.genes()[layer];
            let mut new = rng.gen_range(0..NUM_CHOICES as u8 - 1);
            if new >= old {
                new += 1;
            }
            out.genes_mut()[layer] = new;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ind(genes: u8, rank: usize, crowding: f64) -> Individual {
        let mut i = Individual::new(
            Chromosome::uniform(genes).unwrap(),
            ObjectiveVector {
                accuracy: 0.5,
                latency_ms: 1.0,
                params: 1,
            },
        );
        i.rank = Some(rank);
        i.crowding = Some(crowding);
        i
    }

    #[test]
    fn compare_by_rank_then_distance_then_chromosome() {
        assert_eq!(
            crowded_compare(&ind(5, 0, 0.1), &ind(1, 1, 9.0)).unwrap(),
            Ordering::Less
        );
        assert_eq!(
            crowded_compare(&ind(5, 2, f64::INFINITY), &ind(1, 2, 0.5)).unwrap(),
            Ordering::Less
        );
        assert_eq!(
            crowded_compare(&ind(1, 0, 0.5), &ind(5, 0, 0.5)).unwrap(),
            Ordering::Less
        );
        assert_eq!(
            crowded_compare(&ind(5, 0, 0.5), &ind(1, 0, 0.5)).unwrap(),
            Ordering::Greater
        );
    }

    #[test]
    fn compare_requires_assignment() {
        let mut a = ind(0, 0, 1.0);
        a.crowding = None;
        assert!(matches!(
            crowded_compare(&a, &ind(1, 0, 1.0)),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn pool_of_two() {
        let pool = [ind(3, 1, 0.0), ind(2, 0, 1.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            assert_eq!(tournament_select(&pool, &mut rng).unwrap(), (1, 0));
        }
        assert!(tournament_select(&pool[..1], &mut rng).is_err());
    }

    #[test]
    fn dominant_individual_always_wins() {
        let mut pool: Vec<Individual> = (0..6).map(|g| ind(g, 1, 0.3)).collect();
        pool.push(ind(9, 0, f64::INFINITY));
        for j in 0..6 {
            assert_eq!(crowded_compare(&pool[6], &pool[j]).unwrap(), Ordering::Less);
        }
        // it enters a tournament with probability 2/7 and never loses one
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let wins = (0..7000)
            .filter(|_| binary_tournament(&pool, &mut rng).unwrap() == 6)
            .count();
        assert!((wins as f64 / 7000.0 - 2.0 / 7.0).abs() < 0.02, "{wins}");
    }

    #[test]
    fn crossover_boundary_cut() {
        let zeros = Chromosome::uniform(0).unwrap();
        let elevens = Chromosome::uniform(11).unwrap();
        let (c1, c2) = crossover_at(&zeros, &elevens, 13);
        assert_eq!(c1.genes()[..13], [0; 13]);
        assert_eq!(c1.genes()[13], 11);
        assert_eq!(c2.genes()[..13], [11; 13]);
        assert_eq!(c2.genes()[13], 0);
    }

    #[test]
    fn crossover_of_identical_parents() {
        let m = Chromosome::new([1, 4, 7, 2, 9, 11, 0, 3, 3, 8, 5, 6, 10, 2]).unwrap();
        for k in 1..14 {
            assert_eq!(crossover_at(&m, &m, k), (m, m));
        }
    }

    #[test]
    fn crossover_probability_zero_copies() {
        let a = Chromosome::uniform(1).unwrap();
        let b = Chromosome::uniform(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(single_point_crossover(&a, &b, 0.0, &mut rng), (a, b));
    }

    #[test]
    fn mutation_noop_and_forced() {
        let m = Chromosome::new([1, 4, 7, 2, 9, 11, 0, 3, 3, 8, 5, 6, 10, 2]).unwrap();
        let space = SearchSpace::full();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(hierarchical_mutation(&m, &space, 0.0, 0.0, &mut rng), m);
            let all = hierarchical_mutation(&m, &space, 1.0, 0.0, &mut rng);
            assert!(all.genes().iter().zip(m.genes()).all(|(a, b)| a != b));
        }
    }

    #[test]
    fn mutation_respects_pins() {
        let space = SearchSpace::prefix(5, 0).unwrap();
        let m = Chromosome::uniform(0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let out = hierarchical_mutation(&m, &space, 0.5, 0.3, &mut rng);
            assert!(space.contains(&out));
        }
    }
}
