//! Error characterization against the exact integer function.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::{ComponentSpec, Family};
use crate::circuit::{exhaustive_word, Aig, Simulator, SlotKind, WORD_BITS};

/// Largest total operand width characterized exhaustively.
pub const EXHAUSTIVE_LIMIT: u32 = 20;
/// Pattern count of sampled characterization.
pub const SAMPLE_COUNT: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    Exhaustive,
    Sampled { n: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    /// Mean absolute error in output LSBs.
    pub mae: f64,
    /// Mean relative error over inputs whose exact result is non-zero.
    pub mre: f64,
    pub wce: u64,
    pub error_rate: f64,
    #[serde(flatten)]
    pub method: Method,
}

impl ErrorMetrics {
    pub fn zero(method: Method) -> Self {
        ErrorMetrics {
            mae: 0.0,
            mre: 0.0,
            wce: 0,
            error_rate: 0.0,
            method,
        }
    }
}

/// Per-word partial sums; folded in word order so results do not depend on
/// how words are batched.
#[derive(Debug, Clone, Copy, Default)]
struct Partial {
    abs_sum: u128,
    errors: u64,
    wce: u64,
    rel_sum: f64,
    nonzero: u64,
    count: u64,
}

impl Partial {
    fn merge(mut self, o: Partial) -> Partial {
        self.abs_sum += o.abs_sum;
        self.errors += o.errors;
        self.wce = self.wce.max(o.wce);
        self.rel_sum += o.rel_sum;
        self.nonzero += o.nonzero;
        self.count += o.count;
        self
    }
}

/// Closed-form worst-case error where the family admits one.
pub fn analytic_wce(spec: &ComponentSpec) -> Option<u64> {
    let n = spec.width;
    let full = (1u64 << n) - 1;
    match (spec.kind, spec.family) {
        (_, Family::Accurate) => Some(0),
        (SlotKind::Adder, Family::Truncated { k }) => Some(2 * ((1u64 << k) - 1)),
        (SlotKind::Multiplier, Family::Truncated { k }) => {
            let kept = full - ((1u64 << k) - 1);
            Some(full * full - kept * kept)
        }
        (SlotKind::Adder, Family::LowerOr { k }) => Some((1u64 << k) - 1),
        // Every dropped partial product is set when both operands are all ones.
        (SlotKind::Multiplier, Family::BrokenArray { .. }) => Some(full * full - spec.apply(full, full)),
        _ => None,
    }
}

/// Sampling seed of one 64-pattern word.
fn word_seed(seed: u64, word: u64) -> u64 {
    let mut z = seed ^ word.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn word_partial(spec: &ComponentSpec, sim: &mut Simulator, inputs: &[u64], patterns: usize) -> Partial {
    let n = spec.width as usize;
    let out = sim.run(inputs).expect("input arity matches spec");
    let mut p = Partial::default();
    for bit in 0..patterns {
        let mut a = 0u64;
        let mut b = 0u64;
        for i in 0..n {
            a |= ((inputs[i] >> bit) & 1) << i;
            b |= ((inputs[n + i] >> bit) & 1) << i;
        }
        let approx = out.iter().enumerate().fold(0u64, |acc, (i, w)| acc | (((w >> bit) & 1) << i));
        let exact = spec.exact(a, b);
        let e = approx.abs_diff(exact);
        p.abs_sum += e as u128;
        p.errors += (e != 0) as u64;
        p.wce = p.wce.max(e);
        if exact != 0 {
            p.rel_sum += e as f64 / exact as f64;
            p.nonzero += 1;
        }
        p.count += 1;
    }
    p
}

fn finish(p: Partial, method: Method) -> ErrorMetrics {
    ErrorMetrics {
        mae: p.abs_sum as f64 / p.count as f64,
        mre: if p.nonzero == 0 { 0.0 } else { p.rel_sum / p.nonzero as f64 },
        wce: p.wce,
        error_rate: p.errors as f64 / p.count as f64,
        method,
    }
}

/// Exhaustive enumeration of all operand pairs.
pub fn characterize_exhaustive(spec: &ComponentSpec, circuit: &Aig, batch_words: usize) -> ErrorMetrics {
    let bits = spec.input_bits() as usize;
    let total = 1usize << bits;
    let words = total.div_ceil(WORD_BITS);
    let patterns = total.min(WORD_BITS);
    let batches: Vec<Vec<Partial>> = (0..words)
        .collect::<Vec<_>>()
        .par_chunks(batch_words.max(1))
        .map(|chunk| {
            let mut sim = Simulator::new(circuit);
            let mut inputs = vec![0u64; bits];
            chunk
                .iter()
                .map(|&w| {
                    for (i, x) in inputs.iter_mut().enumerate() {
                        *x = exhaustive_word(i, w);
                    }
                    word_partial(spec, &mut sim, &inputs, patterns)
                })
                .collect()
        })
        .collect();
    let total = batches.into_iter().flatten().fold(Partial::default(), Partial::merge);
    finish(total, Method::Exhaustive)
}

/// Uniform random operand pairs; every word draws from its own seeded stream.
pub fn characterize_sampled(spec: &ComponentSpec, circuit: &Aig, n: u64, seed: u64, batch_words: usize) -> ErrorMetrics {
    let bits = spec.input_bits() as usize;
    let words = (n as usize).div_ceil(WORD_BITS);
    let batches: Vec<Vec<Partial>> = (0..words)
        .collect::<Vec<_>>()
        .par_chunks(batch_words.max(1))
        .map(|chunk| {
            let mut sim = Simulator::new(circuit);
            let mut inputs = vec![0u64; bits];
            chunk
                .iter()
                .map(|&w| {
                    let mut rng = ChaCha8Rng::seed_from_u64(word_seed(seed, w as u64));
                    for x in inputs.iter_mut() {
                        *x = rng.gen();
                    }
                    let patterns = (n as usize - w * WORD_BITS).min(WORD_BITS);
                    word_partial(spec, &mut sim, &inputs, patterns)
                })
                .collect()
        })
        .collect();
    // Relative-error sums are folded word by word so the floating-point result
    // is independent of the batch size.
    let total = batches.into_iter().flatten().fold(Partial::default(), Partial::merge);
    let mut m = finish(total, Method::Sampled { n, seed });
    if let Some(w) = analytic_wce(spec) {
        m.wce = m.wce.max(w);
    }
    m
}

/// Exhaustive up to [`EXHAUSTIVE_LIMIT`] operand bits, sampled with
/// [`SAMPLE_COUNT`] patterns beyond.
pub fn characterize(spec: &ComponentSpec, circuit: &Aig, seed: u64) -> ErrorMetrics {
    if spec.input_bits() <= EXHAUSTIVE_LIMIT {
        characterize_exhaustive(spec, circuit, 64)
    } else {
        characterize_sampled(spec, circuit, SAMPLE_COUNT, seed, 64)
    }
}
