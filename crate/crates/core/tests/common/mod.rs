//! Reference implementations used as test oracles. Deliberately naive.
#![allow(dead_code, clippy::needless_range_loop)]

use std::cmp::Ordering;
use std::collections::BTreeMap;

pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Fronts by repeatedly removing the non-dominated set. Indices within a
/// front are ascending.
pub fn stripping_fronts(points: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let mut left: Vec<usize> = (0..points.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| !left.iter().any(|&j| dominates(&points[j], &points[i])))
            .collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

/// Unweighted crowding distance as usually written for NSGA-II.
pub fn standard_crowding(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points.len();
    let mut d = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    for m in 0..points[0].len() {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| {
            points[a][m]
                .partial_cmp(&points[b][m])
                .unwrap()
                .then(a.cmp(&b))
        });
        let lo = points[idx[0]][m];
        let hi = points[idx[n - 1]][m];
        d[idx[0]] = f64::INFINITY;
        d[idx[n - 1]] = f64::INFINITY;
        if hi == lo {
            continue;
        }
        for k in 1..n - 1 {
            d[idx[k]] += (points[idx[k + 1]][m] - points[idx[k - 1]][m]) / (hi - lo);
        }
    }
    d
}

/// Indices ordered by distance descending, ties by index.
pub fn argsort_desc(d: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.sort_by(|&a, &b| {
        d[b].partial_cmp(&d[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    idx
}

#[derive(Clone, Copy)]
struct Key(f64);
impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Non-dominated subset of 3-D minimization points (one copy of each
/// duplicate), by a sweep over the first coordinate with a 2-D staircase.
pub fn nondominated_3d(mut points: Vec<[f64; 3]>) -> Vec<[f64; 3]> {
    points.sort_by(|a, b| {
        a[0].total_cmp(&b[0])
            .then(a[1].total_cmp(&b[1]))
            .then(a[2].total_cmp(&b[2]))
    });
    let mut stairs: BTreeMap<Key, f64> = BTreeMap::new();
    let mut front = Vec::new();
    for p in points {
        // every earlier point has a first coordinate no larger than p's
        if let Some((_, &z)) = stairs.range(..=Key(p[1])).next_back() {
            if z <= p[2] {
                continue;
            }
        }
        let covered: Vec<Key> = stairs
            .range(Key(p[1])..)
            .take_while(|(_, &z)| z >= p[2])
            .map(|(k, _)| *k)
            .collect();
        for k in covered {
            stairs.remove(&k);
        }
        stairs.insert(Key(p[1]), p[2]);
        front.push(p);
    }
    front
}
