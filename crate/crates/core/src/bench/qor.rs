use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// PSNR reported for an exact match.
pub const PSNR_CAP: f64 = 100.0;
/// Peak matching tolerance in samples.
pub const PEAK_TOLERANCE: usize = 3;
/// Half-width of the neighbourhood in which a peak must be the maximum.
pub const PEAK_RADIUS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QorMetric {
    Psnr,
    PeakF1,
}

impl QorMetric {
    /// Best attainable value.
    pub fn best(self) -> f64 {
        match self {
            QorMetric::Psnr => PSNR_CAP,
            QorMetric::PeakF1 => 1.0,
        }
    }

    /// Quality expressed as an error to minimise.
    pub fn to_error(self, value: f64) -> f64 {
        self.best() - value
    }

    pub fn from_error(self, error: f64) -> f64 {
        self.best() - error
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QorValue {
    pub value: f64,
    pub dataset: String,
}

/// `10 log10(peak^2 / MSE)`, capped at [`PSNR_CAP`].
pub fn psnr(reference: &[u64], test: &[u64], peak: f64) -> Result<f64> {
    if reference.len() != test.len() || reference.is_empty() {
        return Err(Error::Dimension(format!(
            "psnr over {} and {} samples",
            reference.len(),
            test.len()
        )));
    }
    let sse: f64 = reference
        .iter()
        .zip(test)
        .map(|(&r, &t)| {
            let d = r as f64 - t as f64;
            d * d
        })
        .sum();
    if sse == 0.0 {
        return Ok(PSNR_CAP);
    }
    let mse = sse / reference.len() as f64;
    Ok((10.0 * (peak * peak / mse).log10()).min(PSNR_CAP))
}

/// Indices that reach a third of the signal maximum and are the maximum of their
/// ±[`PEAK_RADIUS`] neighbourhood (earliest index wins ties).
pub fn detect_peaks(y: &[u64]) -> Vec<usize> {
    let max = y.iter().copied().max().unwrap_or(0);
    if max == 0 {
        return Vec::new();
    }
    let threshold = max.div_ceil(3);
    let mut peaks = Vec::new();
    for n in 0..y.len() {
        if y[n] < threshold {
            continue;
        }
        let lo = n.saturating_sub(PEAK_RADIUS);
        let hi = (n + PEAK_RADIUS).min(y.len() - 1);
        if y[lo..n].iter().all(|&v| v < y[n]) && y[n + 1..=hi].iter().all(|&v| v <= y[n]) {
            peaks.push(n);
        }
    }
    peaks
}

/// F1 score of detected against golden peak positions, matching greedily in
/// time order within `tolerance` samples. Two empty sets score 1.
pub fn peak_f1(golden: &[usize], detected: &[usize], tolerance: usize) -> f64 {
    if golden.is_empty() && detected.is_empty() {
        return 1.0;
    }
    let mut used = vec![false; detected.len()];
    let mut tp = 0;
    for &g in golden {
        if let Some(j) = (0..detected.len()).find(|&j| !used[j] && detected[j].abs_diff(g) <= tolerance) {
            used[j] = true;
            tp += 1;
        }
    }
    2.0 * tp as f64 / (golden.len() + detected.len()) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psnr_closed_forms() {
        let a: Vec<u64> = (0..100).map(|i| i % 200).collect();
        assert_eq!(psnr(&a, &a, 255.0).unwrap(), PSNR_CAP);
        let b: Vec<u64> = a.iter().map(|v| v + 1).collect();
        let expect = 10.0 * (255.0f64 * 255.0).log10();
        assert!((psnr(&a, &b, 255.0).unwrap() - expect).abs() < 1e-9);
        assert!((expect - 48.13).abs() < 0.01);
        let z = vec![0u64; 16];
        let f = vec![255u64; 16];
        assert!(psnr(&z, &f, 255.0).unwrap().abs() < 1e-12);
        assert!(matches!(psnr(&z, &f[..3], 255.0), Err(Error::Dimension(_))));
    }

    #[test]
    fn f1_by_hand() {
        assert_eq!(peak_f1(&[10, 50, 90], &[12, 50, 200], 3), 2.0 * 2.0 / 6.0);
        assert_eq!(peak_f1(&[], &[], 3), 1.0);
        assert_eq!(peak_f1(&[5], &[], 3), 0.0);
        assert_eq!(peak_f1(&[5, 8], &[6], 3), 2.0 / 3.0);
    }

    #[test]
    fn peaks_of_two_bumps() {
        let mut y = vec![0u64; 200];
        y[50] = 10;
        y[49] = 7;
        y[150] = 9;
        y[120] = 2;
        assert_eq!(detect_peaks(&y), vec![50, 150]);
    }
}
