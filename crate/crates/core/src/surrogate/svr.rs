use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::stats::{median, std_dev};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => (-gamma * a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrParams {
    /// Half-width of the insensitive zone, in units of the label standard deviation.
    pub epsilon: f64,
    /// Box bound on every dual coefficient.
    pub c: f64,
    pub kernel: Kernel,
    /// Coordinate-descent epochs before giving up.
    pub max_epochs: usize,
    /// Largest coefficient change in an epoch that counts as converged.
    pub tol: f64,
}

impl Default for SvrParams {
    fn default() -> Self {
        SvrParams {
            epsilon: 0.1,
            c: 1.0,
            kernel: Kernel::Rbf { gamma: 0.1 },
            max_epochs: 300,
            tol: 1e-3,
        }
    }
}

/// Epsilon-insensitive kernel regression.
///
/// The dual `min 1/2 b'Qb - t'b + eps |b|_1` over `-C <= b_i <= C`, with `Q = K + 1` absorbing
/// the bias, is solved by cyclic coordinate descent in a seeded random order. Labels are
/// centered on their median and scaled by their standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Svr {
    pub params: SvrParams,
    pub support: Vec<Vec<f64>>,
    pub coef: Vec<f64>,
    pub center: f64,
    pub scale: f64,
    pub epochs: usize,
    pub converged: bool,
}

impl Svr {
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: SvrParams, seed: u64) -> Result<Self> {
        let n = y.len();
        if n == 0 || x.len() != n {
            return Err(Error::Dimension(format!("{} rows but {} labels", x.len(), n)));
        }
        if !(params.c > 0.0 && params.epsilon >= 0.0) {
            return Err(Error::Parameter("svr needs C > 0 and epsilon >= 0".into()));
        }
        let center = median(y);
        let sd = std_dev(y);
        let scale = if sd > 0.0 { sd } else { 1.0 };
        let t: Vec<f64> = y.iter().map(|v| (v - center) / scale).collect();

        let mut q = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let k = params.kernel.eval(&x[i], &x[j]) + 1.0;
                q[i * n + j] = k;
                q[j * n + i] = k;
            }
        }
        let mut beta = vec![0.0; n];
        // qb = Q * beta
        let mut qb = vec![0.0; n];
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut epochs = 0;
        let mut converged = false;
        while epochs < params.max_epochs {
            epochs += 1;
            order.shuffle(&mut rng);
            let mut max_step: f64 = 0.0;
            for &i in &order {
                let qii = q[i * n + i];
                let g = qb[i] - t[i];
                let z = beta[i] - g / qii;
                let shrink = params.epsilon / qii;
                let next = (z.signum() * (z.abs() - shrink).max(0.0)).clamp(-params.c, params.c);
                let step = next - beta[i];
                if step != 0.0 {
                    beta[i] = next;
                    let row = &q[i * n..(i + 1) * n];
                    for (acc, &k) in qb.iter_mut().zip(row) {
                        *acc += step * k;
                    }
                    max_step = max_step.max(step.abs());
                }
            }
            if max_step <= params.tol {
                converged = true;
                break;
            }
        }
        let (support, coef) = x
            .iter()
            .zip(&beta)
            .filter(|(_, &b)| b != 0.0)
            .map(|(r, &b)| (r.clone(), b))
            .unzip();
        Ok(Svr {
            params,
            support,
            coef,
            center,
            scale,
            epochs,
            converged,
        })
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let f: f64 = self
            .support
            .iter()
            .zip(&self.coef)
            .map(|(s, b)| b * (self.params.kernel.eval(s, x) + 1.0))
            .sum();
        self.center + self.scale * f
    }
}
