use lutnas_core::latency::{predict_latency, LutViolation};
use lutnas_core::{latency_rmse, Chromosome, Error, LatencyTable, SearchSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_table(rng: &mut ChaCha8Rng) -> LatencyTable {
    let entries = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(0.0..2.0)));
    LatencyTable::new(entries, rng.gen_range(0.0..5.0)).unwrap()
}

#[test]
fn prediction_is_overhead_plus_selected_cells() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let space = SearchSpace::full();
    for _ in 0..200 {
        let t = random_table(&mut rng);
        let m = space.sample(&mut rng);
        let mut expected = t.overhead_ms();
        for i in 0..14 {
            expected += t.entry(i, m.gene(i));
        }
        assert_eq!(predict_latency(&t, &m), expected);
    }
}

#[test]
fn perturbing_a_cell_moves_exactly_the_chromosomes_using_it() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let space = SearchSpace::full();
    // multiples of 1/1024 below 2^10 add without rounding
    let dyadic = |rng: &mut ChaCha8Rng| rng.gen_range(0..2048) as f64 / 1024.0;
    for _ in 0..500 {
        let entries = std::array::from_fn(|_| std::array::from_fn(|_| dyadic(&mut rng)));
        let t = LatencyTable::new(entries, dyadic(&mut rng)).unwrap();
        let (layer, choice) = (rng.gen_range(0..14), rng.gen_range(0..12));
        let delta = dyadic(&mut rng);
        let bumped = t
            .with_entry(layer, choice, t.entry(layer, choice) + delta)
            .unwrap();
        let m = space.sample(&mut rng);
        let moved = bumped.predict(&m) - t.predict(&m);
        if m.gene(layer) == choice {
            assert_eq!(moved, delta);
        } else {
            assert_eq!(moved, 0.0);
        }
    }
}

#[test]
fn csv_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let t = random_table(&mut rng);
    assert_eq!(LatencyTable::parse(&t.to_csv()).unwrap(), t);
    let dir = tempdir();
    let path = dir.join("lut.csv");
    t.save(&path).unwrap();
    assert_eq!(LatencyTable::load(&path).unwrap(), t);
    std::fs::remove_dir_all(dir).unwrap();
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("lutnas-latency-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn every_violation_is_reported() {
    let good = LatencyTable::constant(0.5, 1.0).unwrap().to_csv();
    let mut lines: Vec<String> = good.lines().map(String::from).collect();
    lines[3] = lines[3].replacen("0.5", "-0.25", 1);
    lines[5] = lines[5].replacen(",0.5", ",abc", 1);
    lines[7] = "layer7,0.5,0.5".into();
    let err = match LatencyTable::parse(&lines.join("\n")) {
        Err(e) => e,
        Ok(_) => panic!("table accepted"),
    };
    assert_eq!(err.violations.len(), 3, "{err}");
    assert!(err.violations.contains(&LutViolation::Negative {
        layer: 3,
        choice: 0,
        value: -0.25
    }));
    let text = err.to_string();
    assert!(
        text.contains("layer 3, choice 0: negative latency -0.25"),
        "{text}"
    );
    assert!(text.contains("layer 5"), "{text}");
    assert!(text.contains("layer 7"), "{text}");
}

#[test]
fn wrong_row_count_reported() {
    let good = LatencyTable::constant(0.5, 1.0).unwrap().to_csv();
    let short: Vec<&str> = good.lines().take(14).collect();
    let err = LatencyTable::parse(&short.join("\n")).unwrap_err();
    assert!(
        err.to_string().contains("expected 14 layer rows, found 13"),
        "{err}"
    );
    assert!(matches!(
        lutnas_core::latency::load_table("overhead_ms,1\n"),
        Err(Error::Lut(_))
    ));
}

#[test]
fn rmse_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let v: Vec<f64> = (0..50).map(|_| rng.gen_range(0.0..20.0)).collect();
    assert_eq!(latency_rmse(&v, &v).unwrap(), 0.0);
    let shifted: Vec<f64> = v.iter().map(|x| x + 0.5).collect();
    assert!((latency_rmse(&v, &shifted).unwrap() - 0.5).abs() < 1e-12);
    assert!(latency_rmse(&[], &[]).is_err());
    assert!(latency_rmse(&[1.0], &[1.0, 2.0]).is_err());
}

#[test]
fn bounds_are_attained() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let t = random_table(&mut rng);
    let (lo, hi) = t.bounds(|_| (0..12).collect());
    let argmin = Chromosome::from_slice(
        &(0..14)
            .map(|i| {
                (0..12)
                    .min_by(|&a, &b| t.entry(i, a).total_cmp(&t.entry(i, b)))
                    .unwrap() as u8
            })
            .collect::<Vec<_>>(),
    )
    .unwrap();
    assert_eq!(t.predict(&argmin), lo);
    let space = SearchSpace::full();
    for _ in 0..1000 {
        let p = t.predict(&space.sample(&mut rng));
        assert!(lo <= p && p <= hi);
    }
}
