use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features tried per split; `None` means `max(1, floor(sqrt(d)))`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            trees: 100,
            max_depth: 12,
            min_leaf: 2,
            max_features: None,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf { value: f64 },
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Bagged CART regression trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub params: ForestParams,
    pub trees: Vec<Tree>,
    /// Training label range; averaging rounding never leaves it.
    pub y_range: (f64, f64),
}

impl RandomForest {
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: ForestParams, seed: u64) -> Result<Self> {
        if x.len() < 2 || x.len() != y.len() {
            return Err(Error::Dimension(format!(
                "forest needs at least 2 labelled rows, got {} rows and {} labels",
                x.len(),
                y.len()
            )));
        }
        if params.trees == 0 || params.min_leaf == 0 {
            return Err(Error::Parameter("forest needs trees >= 1 and min_leaf >= 1".into()));
        }
        let d = x[0].len();
        let mtry = params
            .max_features
            .unwrap_or_else(|| (d as f64).sqrt().floor() as usize)
            .clamp(1, d.max(1));
        let columns: Vec<Vec<f64>> = (0..d).map(|j| x.iter().map(|r| r[j]).collect()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seeds: Vec<u64> = (0..params.trees).map(|_| rng.gen()).collect();
        let trees = seeds
            .par_iter()
            .map(|&s| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let rows: Vec<usize> = if params.bootstrap {
                    (0..y.len()).map(|_| rng.gen_range(0..y.len())).collect()
                } else {
                    (0..y.len()).collect()
                };
                let mut b = Builder {
                    columns: &columns,
                    y,
                    params,
                    mtry,
                    rng,
                    nodes: Vec::new(),
                };
                b.grow(rows, 0);
                Tree { nodes: b.nodes }
            })
            .collect();
        let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(RandomForest {
            params,
            trees,
            y_range: (lo, hi),
        })
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mean = self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64;
        mean.clamp(self.y_range.0, self.y_range.1)
    }
}

struct Builder<'a> {
    columns: &'a [Vec<f64>],
    y: &'a [f64],
    params: ForestParams,
    mtry: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let n = rows.len() as f64;
        let sum: f64 = rows.iter().map(|&r| self.y[r]).sum();
        self.nodes.push(Node::Leaf { value: sum / n });
        let first = self.y[rows[0]];
        if depth >= self.params.max_depth
            || rows.len() < 2 * self.params.min_leaf
            || rows.iter().all(|&r| self.y[r] == first)
        {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&rows, sum) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.columns[feature][i] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split { feature, threshold, left, right };
        id
    }

    /// Maximizes the variance reduction over a random feature subset. The threshold is the
    /// largest left-branch value, so any monotone feature rescaling yields the same partition.
    fn best_split(&mut self, rows: &[usize], sum: f64) -> Option<(usize, f64)> {
        let d = self.columns.len();
        let n = rows.len();
        let min_leaf = self.params.min_leaf;
        let parent = sum * sum / n as f64;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n);
        for feature in sample(&mut self.rng, d, self.mtry.min(d)) {
            let col = &self.columns[feature];
            pairs.clear();
            pairs.extend(rows.iter().map(|&r| (col[r], self.y[r])));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = 0.0;
            for i in 0..n - 1 {
                left += pairs[i].1;
                let nl = i + 1;
                if nl < min_leaf || n - nl < min_leaf || pairs[i].0 == pairs[i + 1].0 {
                    continue;
                }
                let right = sum - left;
                let score = left * left / nl as f64 + right * right / (n - nl) as f64;
                let gain = score - parent;
                if gain > 1e-12 * parent.abs().max(1e-300) && best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, feature, pairs[i].0));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_one_tree_predicts_cluster_means() {
        let x: Vec<Vec<f64>> = [0.0, 0.1, 0.2, 5.0, 5.1, 5.3].iter().map(|&v| vec![v]).collect();
        let y = [1.0, 2.0, 3.0, 10.0, 11.0, 15.0];
        let params = ForestParams {
            trees: 1,
            max_depth: 1,
            min_leaf: 1,
            max_features: None,
            bootstrap: false,
        };
        let f = RandomForest::fit(&x, &y, params, 1).unwrap();
        assert_eq!(f.trees[0].depth(), 1);
        assert_eq!(f.predict(&[0.05]), 2.0);
        assert_eq!(f.predict(&[5.2]), 12.0);
    }

    #[test]
    fn constant_target() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i * 7 % 5) as f64]).collect();
        let y = vec![4.5; 20];
        let f = RandomForest::fit(&x, &y, ForestParams::default(), 3).unwrap();
        assert!(f.trees.iter().all(|t| t.nodes.len() == 1));
        assert_eq!(f.predict(&[100.0, -3.0]), 4.5);
    }

    #[test]
    fn rejects_tiny_sets() {
        assert!(RandomForest::fit(&[vec![1.0]], &[1.0], ForestParams::default(), 0).is_err());
    }
}
