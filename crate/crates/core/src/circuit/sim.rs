//! Bit-parallel simulation: every `u64` word carries 64 independent input patterns.

use super::aig::{Aig, Lit};
use crate::{Error, Result};

/// Patterns per simulation word.
pub const WORD_BITS: usize = 64;

const LOW_MASKS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

/// Simulation word for input `input` in word `word` of an exhaustive sweep, where
/// pattern `p = word * 64 + bit` assigns bit `input` of `p` to that input.
pub fn exhaustive_word(input: usize, word: usize) -> u64 {
    if input < 6 {
        LOW_MASKS[input]
    } else if (word >> (input - 6)) & 1 == 1 {
        !0
    } else {
        0
    }
}

/// Reusable simulation buffer for one circuit.
pub struct Simulator<'a> {
    aig: &'a Aig,
    values: Vec<u64>,
    outputs: Vec<u64>,
}

impl<'a> Simulator<'a> {
    pub fn new(aig: &'a Aig) -> Self {
        Simulator {
            aig,
            values: vec![0; aig.num_nodes()],
            outputs: vec![0; aig.num_outputs()],
        }
    }

    /// Simulates one word per input; returns one word per output.
    pub fn run(&mut self, inputs: &[u64]) -> Result<&[u64]> {
        let aig = self.aig;
        if inputs.len() != aig.num_inputs() {
            return Err(Error::InputArity {
                expected: aig.num_inputs(),
                got: inputs.len(),
            });
        }
        let v = &mut self.values;
        v[0] = 0;
        v[1..=inputs.len()].copy_from_slice(inputs);
        let base = aig.first_and() as usize;
        for (i, &(a, b)) in aig.ands().iter().enumerate() {
            let wa = lit_word(v, a);
            let wb = lit_word(v, b);
            v[base + i] = wa & wb;
        }
        for (o, &lit) in self.outputs.iter_mut().zip(aig.outputs()) {
            *o = lit_word(v, lit);
        }
        Ok(&self.outputs)
    }

    /// Node values from the last [`run`](Self::run).
    pub fn node_values(&self) -> &[u64] {
        &self.values
    }

    pub fn lit_value(&self, lit: Lit) -> u64 {
        lit_word(&self.values, lit)
    }
}

#[inline]
fn lit_word(values: &[u64], lit: Lit) -> u64 {
    let w = values[lit.node() as usize];
    if lit.is_complemented() {
        !w
    } else {
        w
    }
}

/// One-shot simulation of a single word per input.
pub fn simulate(aig: &Aig, inputs: &[u64]) -> Result<Vec<u64>> {
    let mut sim = Simulator::new(aig);
    sim.run(inputs).map(|o| o.to_vec())
}

/// Packs per-pattern input assignments into words. `patterns[p][i]` is the value of
/// input `i` under pattern `p`; at most 64 patterns.
pub fn pack_patterns(patterns: &[Vec<bool>], num_inputs: usize) -> Vec<u64> {
    assert!(patterns.len() <= WORD_BITS);
    let mut words = vec![0u64; num_inputs];
    for (p, pat) in patterns.iter().enumerate() {
        for (i, &bit) in pat.iter().enumerate() {
            if bit {
                words[i] |= 1 << p;
            }
        }
    }
    words
}

/// Writes `value` (LSB first) into inputs `offset..offset + width` for pattern `bit`.
pub fn set_word_value(words: &mut [u64], offset: usize, width: usize, bit: usize, value: u64) {
    for i in 0..width {
        if (value >> i) & 1 == 1 {
            words[offset + i] |= 1 << bit;
        } else {
            words[offset + i] &= !(1 << bit);
        }
    }
}

/// Reads the unsigned value encoded by `words` (LSB first) for pattern `bit`.
pub fn word_value(words: &[u64], bit: usize) -> u64 {
    words
        .iter()
        .enumerate()
        .fold(0, |acc, (i, w)| acc | (((w >> bit) & 1) << i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::arith::ripple_add;

    #[test]
    fn missing_input_word_is_an_arity_error() {
        let (mut aig, x) = Aig::with_inputs("t", 2);
        let y = aig.add_and(x[0], x[1]);
        aig.add_output(y);
        assert!(matches!(
            simulate(&aig, &[0]),
            Err(Error::InputArity { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn xor_truth_table() {
        let (mut aig, x) = Aig::with_inputs("t", 2);
        let y = aig.add_xor(x[0], x[1]);
        aig.add_output(y);
        // patterns 0..4 enumerate (x0, x1) = 00, 10, 01, 11
        let out = simulate(&aig, &[0b1010, 0b1100]).unwrap();
        assert_eq!(out[0] & 0xF, 0b0110);
    }

    #[test]
    fn complement_simulates_as_bitwise_not() {
        let (mut aig, x) = Aig::with_inputs("t", 2);
        let y = aig.add_and(x[0], x[1]);
        aig.add_output(y);
        aig.add_output(!y);
        let out = simulate(&aig, &[0x1234_5678_9abc_def0, 0x0fed_cba9_8765_4321]).unwrap();
        assert_eq!(out[1], !out[0]);
    }

    #[test]
    fn two_bit_adder_on_packed_patterns() {
        let (mut aig, x) = Aig::with_inputs("add2", 4);
        let s = ripple_add(&mut aig, &x[0..2], &x[2..4], Lit::FALSE);
        aig.add_outputs(&s);
        let mut words = vec![0u64; 4];
        set_word_value(&mut words, 0, 2, 0, 1);
        set_word_value(&mut words, 2, 2, 0, 2);
        set_word_value(&mut words, 0, 2, 1, 3);
        set_word_value(&mut words, 2, 2, 1, 3);
        let out = simulate(&aig, &words).unwrap();
        assert_eq!(word_value(&out, 0), 3);
        assert_eq!(word_value(&out, 1), 6);
        let zero = simulate(&aig, &[0; 4]).unwrap();
        assert!(zero.iter().all(|&w| w == 0));
    }

    #[test]
    fn exhaustive_words_enumerate_patterns() {
        for word in 0..4 {
            for bit in 0..64 {
                let p = word * 64 + bit;
                for input in 0..8 {
                    let got = (exhaustive_word(input, word) >> bit) & 1;
                    assert_eq!(got as usize, (p >> input) & 1);
                }
            }
        }
    }
}
