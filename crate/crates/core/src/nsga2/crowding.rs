//! Preference-weighted crowding distance.
//!
//! For every objective the front is ordered by that objective; the two
//! extremes get `+∞` and each interior member accumulates
//! `w_i · (next − prev) / (max − min)`. An objective whose values are all
//! equal contributes nothing. With equal weights the ordering coincides
//! with the classic unweighted crowding distance.

use std::cmp::Ordering;

pub fn weighted_crowding<P: AsRef<[f64]>>(front: &[P], weights: &[f64]) -> Vec<f64> {
    let n = front.len();
    let mut distance = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let arity = front[0].as_ref().len();
    assert_eq!(arity, weights.len(), "one weight per objective");

    let mut order: Vec<usize> = (0..n).collect();
    for (m, &w) in weights.iter().enumerate() {
        let value = |i: usize| front[i].as_ref()[m];
        order.sort_by(|&a, &b| {
            value(a)
                .partial_cmp(&value(b))
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        let (lo, hi) = (value(order[0]), value(order[n - 1]));
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for k in 1..n - 1 {
            let i = order[k];
            if distance[i].is_finite() {
                distance[i] += w * (value(order[k + 1]) - value(order[k - 1])) / range;
            }
        }
    }
    distance
}
