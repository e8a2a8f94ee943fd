use super::objective::dominates_min;
use crate::{Error, Result};

/// Fast non-dominated sorting; returns the front rank (0 = non-dominated) of every point.
pub fn non_dominated_sort(points: &[Vec<f64>]) -> Vec<usize> {
    let n = points.len();
    let mut dominated_by = vec![0usize; n];
    let mut dominates: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates_min(&points[i], &points[j]) {
                dominates[i].push(j);
                dominated_by[j] += 1;
            } else if dominates_min(&points[j], &points[i]) {
                dominates[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut rank = vec![0usize; n];
    let mut front: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    let mut r = 0;
    while !front.is_empty() {
        let mut next = Vec::new();
        for &i in &front {
            rank[i] = r;
            for &j in &dominates[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        front = next;
        r += 1;
    }
    rank
}

/// Crowding distance of each member of `front` (indices into `points`), in front order.
/// Boundary points of every objective get `f64::INFINITY`.
pub fn crowding_distance(points: &[Vec<f64>], front: &[usize]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = points[front[0]].len();
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..m {
        order.sort_by(|&a, &b| points[front[a]][k].total_cmp(&points[front[b]][k]).then(a.cmp(&b)));
        let lo = points[front[order[0]]][k];
        let hi = points[front[order[n - 1]]][k];
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        if hi > lo {
            for w in 1..n - 1 {
                let prev = points[front[order[w - 1]]][k];
                let next = points[front[order[w + 1]]][k];
                dist[order[w]] += (next - prev) / (hi - lo);
            }
        }
    }
    dist
}

/// Ranks and crowding distances for a whole population.
pub fn rank_and_crowding(points: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>) {
    let rank = non_dominated_sort(points);
    let mut crowd = vec![0.0; points.len()];
    let fronts = rank.iter().copied().max().map_or(0, |r| r + 1);
    for r in 0..fronts {
        let front: Vec<usize> = (0..points.len()).filter(|&i| rank[i] == r).collect();
        for (i, d) in front.iter().zip(crowding_distance(points, &front)) {
            crowd[*i] = d;
        }
    }
    (rank, crowd)
}

/// Indices of the `k` best points by (rank ascending, crowding descending, index).
pub fn select_top_k(points: &[Vec<f64>], k: usize) -> Result<Vec<usize>> {
    if k > points.len() {
        return Err(Error::Bounds(format!("top-{k} of {} points", points.len())));
    }
    let (rank, crowd) = rank_and_crowding(points);
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        rank[a]
            .cmp(&rank[b])
            .then_with(|| crowd[b].total_cmp(&crowd[a]))
            .then(a.cmp(&b))
    });
    idx.truncate(k);
    Ok(idx)
}
