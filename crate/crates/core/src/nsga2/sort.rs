//! Fast non-dominated sorting.

use super::objectives::dominates;

/// Partitions `points` into fronts of indices; front 0 is dominated by
/// nobody, front k by nobody once fronts 0..k are removed. Indices within a
/// front are ascending.
pub fn fast_nondominated_sort<P: AsRef<[f64]>>(points: &[P]) -> Vec<Vec<usize>> {
    sort_by_domination(points.len(), |a, b| {
        dominates(points[a].as_ref(), points[b].as_ref())
    })
}

/// Non-dominated sorting under constrained domination. `violation[i]` is
/// `None` for a feasible point and the amount of constraint violation
/// otherwise. Feasible points dominate infeasible ones; between infeasible
/// points the smaller violation dominates.
pub fn constrained_nondominated_sort<P: AsRef<[f64]>>(
    points: &[P],
    violation: &[Option<f64>],
) -> Vec<Vec<usize>> {
    assert_eq!(points.len(), violation.len());
    sort_by_domination(points.len(), |a, b| match (violation[a], violation[b]) {
        (None, None) => dominates(points[a].as_ref(), points[b].as_ref()),
        (None, Some(_)) => true,
        (Some(_), None) => false,
        (Some(va), Some(vb)) => va < vb,
    })
}

/// Rank of every point (its front index).
pub fn ranks_from_fronts(fronts: &[Vec<usize>], n: usize) -> Vec<usize> {
    let mut ranks = vec![usize::MAX; n];
    for (r, front) in fronts.iter().enumerate() {
        for &i in front {
            ranks[i] = r;
        }
    }
    ranks
}

fn sort_by_domination(n: usize, dominates: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut dominated_by_count = vec![0usize; n];
    let mut dominated: Vec<Vec<usize>> = vec![Vec::new(); n];
    for a in 0..n {
        for b in (a + 1)..n {
            if dominates(a, b) {
                dominated[a].push(b);
                dominated_by_count[b] += 1;
            } else if dominates(b, a) {
                dominated[b].push(a);
                dominated_by_count[a] += 1;
            }
        }
    }

    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &a in &current {
            for &b in &dominated[a] {
                dominated_by_count[b] -= 1;
                if dominated_by_count[b] == 0 {
                    next.push(b);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}
