use lutnas_core::nsga2::{
    binary_tournament, crossover_at, crowded_compare, hierarchical_mutation,
    single_point_crossover, tournament_select, Individual, ObjectiveVector,
};
use lutnas_core::{Chromosome, SearchSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cmp::Ordering;

fn pool() -> Vec<Individual> {
    let spec = [
        (0, 0.5),
        (0, f64::INFINITY),
        (1, 2.0),
        (1, 0.1),
        (2, 9.0),
        (0, 0.5),
        (3, 1.0),
        (1, 0.1),
    ];
    spec.iter()
        .enumerate()
        .map(|(g, &(rank, crowding))| {
            let mut i = Individual::new(
                Chromosome::uniform(g as u8).unwrap(),
                ObjectiveVector {
                    accuracy: 0.5,
                    latency_ms: 1.0,
                    params: 1,
                },
            );
            i.rank = Some(rank);
            i.crowding = Some(crowding);
            i
        })
        .collect()
}

#[test]
fn tournament_win_rates_match_enumeration() {
    let pool = pool();
    let n = pool.len();
    // every ordered pair of distinct members is equally likely
    let mut expected = vec![0.0; n];
    for a in 0..n {
        for b in 0..n {
            if a != b {
                let w = if crowded_compare(&pool[a], &pool[b]).unwrap() == Ordering::Greater {
                    b
                } else {
                    a
                };
                expected[w] += 1.0 / (n * (n - 1)) as f64;
            }
        }
    }
    let trials = 10_000;
    let mut wins = vec![0usize; n];
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..trials {
        wins[binary_tournament(&pool, &mut rng).unwrap()] += 1;
    }
    for i in 0..n {
        let rate = wins[i] as f64 / trials as f64;
        assert!(
            (rate - expected[i]).abs() < 0.02,
            "member {i}: {rate} vs {}",
            expected[i]
        );
    }
}

#[test]
fn parents_are_distinct_when_possible() {
    let pool = pool();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..2000 {
        let (a, b) = tournament_select(&pool, &mut rng).unwrap();
        assert_ne!(pool[a].chromosome, pool[b].chromosome);
    }
}

#[test]
fn crossover_preserves_gene_multiset_per_position() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let space = SearchSpace::full();
    for _ in 0..1000 {
        let a = space.sample(&mut rng);
        let b = space.sample(&mut rng);
        let k = rng.gen_range(1..14);
        let (c1, c2) = crossover_at(&a, &b, k);
        for i in 0..14 {
            let mut parents = [a.gene(i), b.gene(i)];
            let mut children = [c1.gene(i), c2.gene(i)];
            parents.sort_unstable();
            children.sort_unstable();
            assert_eq!(parents, children);
        }
        assert_eq!(c1.genes()[..k], a.genes()[..k]);
        assert_eq!(c1.genes()[k..], b.genes()[k..]);
    }
}

#[test]
fn crossover_cut_is_uniform() {
    let a = Chromosome::uniform(0).unwrap();
    let b = Chromosome::uniform(1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let mut counts = [0usize; 14];
    for _ in 0..13_000 {
        let (c1, _) = single_point_crossover(&a, &b, 1.0, &mut rng);
        let k = c1.genes().iter().position(|&g| g == 1).unwrap();
        counts[k] += 1;
    }
    assert_eq!(counts[0], 0);
    for c in &counts[1..] {
        assert!((800..1200).contains(c), "{counts:?}");
    }
}

#[test]
fn resampling_mutation_is_uniform_per_cell() {
    let m = Chromosome::uniform(3).unwrap();
    let space = SearchSpace::full();
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let draws = 12_000;
    let mut counts = [[0usize; 12]; 14];
    for _ in 0..draws {
        let out = hierarchical_mutation(&m, &space, 0.0, 1.0, &mut rng);
        for i in 0..14 {
            counts[i][out.gene(i)] += 1;
        }
    }
    for row in counts {
        for c in row {
            assert!((800..1200).contains(&c), "{row:?}");
        }
    }
}

#[test]
fn layer_mutation_rate_and_target_distribution() {
    let m = Chromosome::uniform(5).unwrap();
    let space = SearchSpace::full();
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let mut changed = 0usize;
    let mut targets = [0usize; 12];
    let draws = 20_000;
    for _ in 0..draws {
        let out = hierarchical_mutation(&m, &space, 0.1, 0.0, &mut rng);
        for i in 0..14 {
            if out.gene(i) != 5 {
                changed += 1;
                targets[out.gene(i)] += 1;
            }
        }
    }
    let rate = changed as f64 / (draws * 14) as f64;
    assert!((rate - 0.1).abs() < 0.005, "{rate}");
    assert_eq!(targets[5], 0);
    let per_target = changed as f64 / 11.0;
    for (g, &t) in targets.iter().enumerate().filter(|(g, _)| *g != 5) {
        assert!(
            (t as f64 - per_target).abs() < 0.1 * per_target,
            "choice {g}: {t}"
        );
    }
}
