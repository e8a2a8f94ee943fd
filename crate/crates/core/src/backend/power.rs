//! Switching-activity power proxy over a LUT cover.
//!
//! Primary inputs are uniform and independent (p = 1/2). Each LUT's output
//! probability is computed exactly from its truth table, treating its leaves as
//! independent nets. The toggle rate of a net with probability p is 2p(1-p).

use super::mapping::LutMapping;
use crate::circuit::{exhaustive_word, Aig, Lit};

use super::mapping::MAX_K;

const TT_WORDS: usize = 1 << (MAX_K - 6);

type Table = [u64; TT_WORDS];

/// Truth table of `root` as a function of `leaves` (leaf `i` is variable `i`).
pub(crate) fn lut_truth_table(aig: &Aig, root: u32, leaves: &[u32], scratch: &mut Vec<Option<Table>>) -> Table {
    if scratch.len() < aig.num_nodes() {
        scratch.resize(aig.num_nodes(), None);
    }
    let mut touched = Vec::new();
    for (i, &l) in leaves.iter().enumerate() {
        let mut t = [0u64; TT_WORDS];
        for (w, slot) in t.iter_mut().enumerate() {
            *slot = exhaustive_word(i, w);
        }
        scratch[l as usize] = Some(t);
        touched.push(l);
    }
    let t = eval_cone(aig, root, scratch, &mut touched);
    for n in touched {
        scratch[n as usize] = None;
    }
    t
}

fn eval_cone(aig: &Aig, node: u32, scratch: &mut Vec<Option<Table>>, touched: &mut Vec<u32>) -> Table {
    if let Some(t) = scratch[node as usize] {
        return t;
    }
    // Iterative post-order to stay clear of deep recursion on long chains.
    let mut stack = vec![node];
    while let Some(&n) = stack.last() {
        if scratch[n as usize].is_some() {
            stack.pop();
            continue;
        }
        let (a, b) = aig
            .fanins(n)
            .unwrap_or_else(|| panic!("node {n} escapes its cut"));
        let (ta, tb) = (scratch[a.node() as usize], scratch[b.node() as usize]);
        match (ta, tb) {
            (Some(ta), Some(tb)) => {
                let mut t = [0u64; TT_WORDS];
                for w in 0..TT_WORDS {
                    t[w] = lit_word(ta[w], a) & lit_word(tb[w], b);
                }
                scratch[n as usize] = Some(t);
                touched.push(n);
                stack.pop();
            }
            _ => {
                if ta.is_none() {
                    stack.push(a.node());
                }
                if tb.is_none() {
                    stack.push(b.node());
                }
            }
        }
    }
    scratch[node as usize].unwrap()
}

fn lit_word(w: u64, l: Lit) -> u64 {
    if l.is_complemented() {
        !w
    } else {
        w
    }
}

/// Probability that a function with truth table `t` over independent leaves
/// with probabilities `p` evaluates to one.
pub(crate) fn one_probability(t: &Table, p: &[f64]) -> f64 {
    let n = p.len();
    let mut total = 0.0;
    for m in 0..(1usize << n) {
        if (t[m / 64] >> (m % 64)) & 1 == 0 {
            continue;
        }
        let mut prod = 1.0;
        for (i, &pi) in p.iter().enumerate() {
            prod *= if (m >> i) & 1 == 1 { pi } else { 1.0 - pi };
        }
        total += prod;
    }
    total
}

/// Per-LUT results of the power analysis, aligned with `mapping.luts`.
#[derive(Debug, Clone)]
pub struct PowerReport {
    pub probability: Vec<f64>,
    pub toggle: Vec<f64>,
    /// Number of LUT leaf references to each LUT root.
    pub fanout: Vec<u32>,
    pub total: f64,
}

pub fn power_report(aig: &Aig, mapping: &LutMapping) -> PowerReport {
    let mut prob = vec![0.5f64; aig.num_nodes()];
    prob[0] = 0.0;
    let mut fanout_of = vec![0u32; aig.num_nodes()];
    for lut in &mapping.luts {
        for &l in &lut.leaves {
            fanout_of[l as usize] += 1;
        }
    }
    let mut scratch = Vec::new();
    let mut probability = Vec::with_capacity(mapping.luts.len());
    let mut toggle = Vec::with_capacity(mapping.luts.len());
    let mut fanout = Vec::with_capacity(mapping.luts.len());
    let mut total = 0.0;
    let mut leaf_p = Vec::with_capacity(MAX_K);
    for lut in &mapping.luts {
        let t = lut_truth_table(aig, lut.root, &lut.leaves, &mut scratch);
        leaf_p.clear();
        leaf_p.extend(lut.leaves.iter().map(|&l| prob[l as usize]));
        let p = one_probability(&t, &leaf_p).clamp(0.0, 1.0);
        prob[lut.root as usize] = p;
        let tg = 2.0 * p * (1.0 - p);
        let fo = fanout_of[lut.root as usize];
        total += tg * (fo + 1) as f64;
        probability.push(p);
        toggle.push(tg);
        fanout.push(fo);
    }
    PowerReport {
        probability,
        toggle,
        fanout,
        total,
    }
}

/// Activity-weighted power proxy: sum over LUTs of toggle rate times (fanout + 1).
pub fn switching_power(aig: &Aig, mapping: &LutMapping) -> f64 {
    power_report(aig, mapping).total
}
