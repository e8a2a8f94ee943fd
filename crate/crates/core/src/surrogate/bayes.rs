use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Shape and rate of the gamma hyperpriors on both precisions.
const HYPER: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "priors", rename_all = "snake_case")]
pub enum BayesParams {
    /// Fixed weight precision `alpha` and noise precision `beta`.
    Fixed { alpha: f64, beta: f64 },
    /// Both precisions re-estimated by maximizing the marginal likelihood.
    Evidence { max_iter: usize, tol: f64 },
}

impl Default for BayesParams {
    fn default() -> Self {
        BayesParams::Evidence { max_iter: 100, tol: 1e-6 }
    }
}

/// Bayesian linear regression with a Gaussian weight prior.
///
/// Features are expected centered (the caller standardizes them); the bias is the label mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesianLinear {
    pub params: BayesParams,
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Posterior weight covariance, row-major `d x d`.
    pub covariance: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl BayesianLinear {
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: BayesParams) -> Result<Self> {
        let n = y.len();
        if n == 0 || x.len() != n {
            return Err(Error::Dimension(format!("{} rows but {} labels", x.len(), n)));
        }
        let d = x[0].len();
        let bias = y.iter().sum::<f64>() / n as f64;
        let yc = DVector::from_iterator(n, y.iter().map(|v| v - bias));
        let xm = DMatrix::from_fn(n, d, |i, j| x[i][j]);
        let xtx = xm.transpose() * &xm;
        let xty = xm.transpose() * &yc;
        let eig = SymmetricEigen::new(xtx);
        let evals: Vec<f64> = eig.eigenvalues.iter().map(|&e| e.max(0.0)).collect();
        let v = eig.eigenvectors;
        // Projection of X^T y onto the eigenbasis.
        let proj = v.transpose() * &xty;

        let solve = |alpha: f64, beta: f64| -> DVector<f64> {
            let scaled = DVector::from_iterator(d, (0..d).map(|i| beta * proj[i] / (alpha + beta * evals[i])));
            &v * scaled
        };

        let (mut alpha, mut beta) = match params {
            BayesParams::Fixed { alpha, beta } => {
                if !(alpha > 0.0 && beta > 0.0) {
                    return Err(Error::Parameter("bayesian priors must be positive".into()));
                }
                (alpha, beta)
            }
            BayesParams::Evidence { .. } => {
                let var = yc.norm_squared() / n as f64;
                (1.0, if var > 0.0 { 1.0 / var } else { 1.0 })
            }
        };
        let mut w = solve(alpha, beta);
        let mut iterations = 0;
        let mut converged = true;
        if let BayesParams::Evidence { max_iter, tol } = params {
            converged = false;
            for it in 0..max_iter {
                iterations = it + 1;
                let gamma: f64 = evals.iter().map(|&e| beta * e / (alpha + beta * e)).sum();
                let sse = (&yc - &xm * &w).norm_squared();
                alpha = (gamma + 2.0 * HYPER) / (w.norm_squared() + 2.0 * HYPER);
                beta = (n as f64 - gamma + 2.0 * HYPER) / (sse + 2.0 * HYPER);
                let next = solve(alpha, beta);
                let delta: f64 = (&next - &w).abs().sum();
                w = next;
                if delta < tol {
                    converged = true;
                    break;
                }
            }
        }
        let inv = DMatrix::from_diagonal(&DVector::from_iterator(d, evals.iter().map(|&e| 1.0 / (alpha + beta * e))));
        let cov = &v * inv * v.transpose();
        Ok(BayesianLinear {
            params,
            weights: w.iter().copied().collect(),
            bias,
            covariance: cov.transpose().iter().copied().collect(),
            alpha,
            beta,
            iterations,
            converged,
        })
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }

    /// Predictive variance: posterior weight uncertainty plus noise.
    pub fn variance(&self, x: &[f64]) -> f64 {
        let d = self.weights.len();
        let mut q = 0.0;
        for i in 0..d {
            let row = &self.covariance[i * d..(i + 1) * d];
            q += x[i] * row.iter().zip(x).map(|(c, v)| c * v).sum::<f64>();
        }
        q + 1.0 / self.beta
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn centered(x: &[f64]) -> Vec<Vec<f64>> {
        let m = x.iter().sum::<f64>() / x.len() as f64;
        x.iter().map(|v| vec![v - m]).collect()
    }

    #[test]
    fn weak_prior_recovers_least_squares() {
        let raw: Vec<f64> = (0..100).map(|i| i as f64 / 10.0).collect();
        let y: Vec<f64> = raw.iter().map(|v| 2.0 * v + 1.0).collect();
        let m = BayesianLinear::fit(&centered(&raw), &y, BayesParams::Fixed { alpha: 1e-8, beta: 1.0 }).unwrap();
        assert!((m.weights[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn evidence_iteration_terminates() {
        let raw: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64).collect();
        let y: Vec<f64> = raw.iter().enumerate().map(|(i, v)| 3.0 * v + (i % 3) as f64).collect();
        let m = BayesianLinear::fit(&centered(&raw), &y, BayesParams::default()).unwrap();
        assert!(m.iterations <= 100);
        assert!((m.weights[0] - 3.0).abs() < 0.1);
        assert!(m.alpha > 0.0 && m.beta > 0.0);
    }

    #[test]
    fn variance_grows_away_from_data() {
        let raw: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let y: Vec<f64> = raw.iter().map(|v| v * 0.5 + (v * 1.3).sin()).collect();
        let x = centered(&raw);
        let m = BayesianLinear::fit(&x, &y, BayesParams::default()).unwrap();
        assert!(m.variance(&x[3]) <= m.variance(&[1000.0]));
    }
}
