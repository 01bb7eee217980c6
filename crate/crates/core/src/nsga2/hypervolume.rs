//! Exact hypervolume for two and three minimization objectives.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Lebesgue measure of the union of boxes `[p, reference]` over `points`.
/// Every point must weakly dominate the reference.
pub fn hypervolume<P: AsRef<[f64]>>(points: &[P], reference: &[f64]) -> Result<f64> {
    for p in points {
        let p = p.as_ref();
        if p.len() != reference.len() {
            return Err(Error::Domain(format!(
                "point has {} coordinates, reference has {}",
                p.len(),
                reference.len()
            )));
        }
        if p.iter()
            .zip(reference)
            .any(|(x, r)| !matches!(x.partial_cmp(r), Some(Ordering::Less | Ordering::Equal)))
        {
            return Err(Error::Domain(format!(
                "point {p:?} does not dominate reference {reference:?}"
            )));
        }
    }
    match reference.len() {
        1 => Ok(points
            .iter()
            .map(|p| reference[0] - p.as_ref()[0])
            .fold(0.0, f64::max)),
        2 => {
            let pts: Vec<[f64; 2]> = points
                .iter()
                .map(|p| [p.as_ref()[0], p.as_ref()[1]])
                .collect();
            Ok(area_2d(pts, [reference[0], reference[1]]))
        }
        3 => {
            let pts: Vec<[f64; 3]> = points
                .iter()
                .map(|p| {
                    let p = p.as_ref();
                    [p[0], p[1], p[2]]
                })
                .collect();
            Ok(volume_3d(pts, [reference[0], reference[1], reference[2]]))
        }
        d => Err(Error::Domain(format!(
            "hypervolume supports 1 to 3 objectives, got {d}"
        ))),
    }
}

fn cmp(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

fn area_2d(mut pts: Vec<[f64; 2]>, reference: [f64; 2]) -> f64 {
    pts.sort_by(|a, b| cmp(a[0], b[0]).then(cmp(a[1], b[1])));
    let mut area = 0.0;
    let mut best_y = reference[1];
    for (i, p) in pts.iter().enumerate() {
        if p[1] < best_y {
            best_y = p[1];
        }
        let next_x = pts.get(i + 1).map_or(reference[0], |q| q[0]);
        area += (next_x - p[0]) * (reference[1] - best_y);
    }
    area
}

fn volume_3d(mut pts: Vec<[f64; 3]>, reference: [f64; 3]) -> f64 {
    // sweep along the third objective, integrating the 2-D area of all
    // points at or below the current level
    pts.sort_by(|a, b| cmp(a[2], b[2]));
    let mut volume = 0.0;
    let mut slice: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    for (i, p) in pts.iter().enumerate() {
        insert_staircase(&mut slice, [p[0], p[1]]);
        let next_z = pts.get(i + 1).map_or(reference[2], |q| q[2]);
        let depth = next_z - p[2];
        if depth > 0.0 {
            volume += depth * staircase_area(&slice, [reference[0], reference[1]]);
        }
    }
    volume
}

/// Keeps `stairs` as the non-dominated 2-D set sorted by x ascending (and so
/// y descending).
fn insert_staircase(stairs: &mut Vec<[f64; 2]>, p: [f64; 2]) {
    let pos = stairs.partition_point(|q| q[0] < p[0] || (q[0] == p[0] && q[1] < p[1]));
    // weakly dominated by the predecessor (x ≤, y ≤)?
    if pos > 0 && stairs[pos - 1][1] <= p[1] {
        return;
    }
    if pos < stairs.len() && stairs[pos][0] == p[0] && stairs[pos][1] == p[1] {
        return;
    }
    let mut end = pos;
    while end < stairs.len() && stairs[end][1] >= p[1] {
        end += 1;
    }
    stairs.splice(pos..end, [p]);
}

fn staircase_area(stairs: &[[f64; 2]], reference: [f64; 2]) -> f64 {
    let mut area = 0.0;
    for (i, p) in stairs.iter().enumerate() {
        let next_x = stairs.get(i + 1).map_or(reference[0], |q| q[0]);
        area += (next_x - p[0]) * (reference[1] - p[1]);
    }
    area
}
