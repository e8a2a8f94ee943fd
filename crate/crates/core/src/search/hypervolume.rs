use super::objective::{to_min, Sense};
use crate::{Error, Result};

/// Volume dominated by `points` and bounded by `reference`, all objectives minimized.
///
/// Two objectives use a sweep, three use slicing along the last objective with a 2-D sweep
/// per slice.
pub fn hypervolume(points: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    let m = reference.len();
    if !(2..=3).contains(&m) {
        return Err(Error::InvalidReference(format!("{m} objectives; 2 or 3 supported")));
    }
    for p in points {
        if p.len() != m {
            return Err(Error::ObjectiveArity(p.len(), m));
        }
        if p.iter().zip(reference).any(|(x, r)| x > r || !x.is_finite()) {
            return Err(Error::InvalidReference(format!("{reference:?} is not dominated by {p:?}")));
        }
    }
    Ok(if m == 2 {
        let pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
        sweep_2d(pts, [reference[0], reference[1]])
    } else {
        slice_3d(points, reference)
    })
}

/// [`hypervolume`] for vectors in their natural senses.
pub fn hypervolume_with_senses(points: &[Vec<f64>], reference: &[f64], senses: &[Sense]) -> Result<f64> {
    if senses.len() != reference.len() {
        return Err(Error::ObjectiveArity(senses.len(), reference.len()));
    }
    let pts: Vec<Vec<f64>> = points.iter().map(|p| to_min(p, senses)).collect();
    hypervolume(&pts, &to_min(reference, senses))
}

fn sweep_2d(mut pts: Vec<[f64; 2]>, reference: [f64; 2]) -> f64 {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut volume = 0.0;
    let mut ceiling = reference[1];
    for p in pts {
        if p[1] < ceiling {
            volume += (reference[0] - p[0]) * (ceiling - p[1]);
            ceiling = p[1];
        }
    }
    volume
}

fn slice_3d(points: &[Vec<f64>], reference: &[f64]) -> f64 {
    let mut order: Vec<&Vec<f64>> = points.iter().collect();
    order.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let mut volume = 0.0;
    let mut active: Vec<[f64; 2]> = Vec::new();
    for (i, p) in order.iter().enumerate() {
        active.push([p[0], p[1]]);
        let top = order.get(i + 1).map_or(reference[2], |q| q[2]);
        if top > p[2] {
            volume += sweep_2d(active.clone(), [reference[0], reference[1]]) * (top - p[2]);
        }
    }
    volume
}
