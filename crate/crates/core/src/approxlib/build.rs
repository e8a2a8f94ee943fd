//! Gate-level generators for every component family.

use super::spec::{ComponentSpec, Family};
use crate::circuit::arith::{const_word, mux_word, resize, ripple_add, shift_left, sum_rows};
use crate::circuit::{Aig, Lit, SlotKind};
use crate::Result;

/// Array multiplier keeping partial product `a_i * b_j` iff `j >= h && i + j >= v`.
fn array_multiplier(aig: &mut Aig, a: &[Lit], b: &[Lit], h: usize, v: usize) -> Vec<Lit> {
    let width = a.len() + b.len();
    let mut rows = Vec::with_capacity(b.len());
    for (j, &bj) in b.iter().enumerate().skip(h) {
        let row: Vec<Lit> = a
            .iter()
            .enumerate()
            .map(|(i, &ai)| if i + j >= v { aig.add_and(ai, bj) } else { Lit::FALSE })
            .collect();
        rows.push(shift_left(&row, j));
    }
    sum_rows(aig, &rows, width)
}

/// Top `w` bits of `x`, rounded half up and saturated to all ones on overflow.
fn round_word(aig: &mut Aig, x: &[Lit], w: usize) -> Vec<Lit> {
    let s = x.len() - w;
    if s == 0 {
        return x.to_vec();
    }
    let mut inc = ripple_add(aig, &x[s..], &[], x[s - 1]);
    let overflow = inc.pop().expect("carry bit");
    mux_word(aig, overflow, &const_word(u64::MAX, w), &inc)
}

/// Builds the circuit of `spec`: inputs `a` (bits `0..w`) then `b`, outputs
/// `output_width` bits LSB first.
pub fn build_component(spec: &ComponentSpec) -> Result<Aig> {
    spec.validate()?;
    let n = spec.width as usize;
    let (mut aig, x) = Aig::with_inputs(spec.id(), 2 * n);
    let (a, b) = x.split_at(n);
    let out = match (spec.kind, spec.family) {
        (SlotKind::Adder, Family::Accurate) => ripple_add(&mut aig, a, b, Lit::FALSE),
        (SlotKind::Multiplier, Family::Accurate) => array_multiplier(&mut aig, a, b, 0, 0),
        (SlotKind::Adder, Family::Truncated { k }) => {
            let k = k as usize;
            let hi = ripple_add(&mut aig, &a[k..], &b[k..], Lit::FALSE);
            shift_left(&hi, k)
        }
        (SlotKind::Multiplier, Family::Truncated { k }) => {
            let k = k as usize;
            let hi = array_multiplier(&mut aig, &a[k..], &b[k..], 0, 0);
            shift_left(&hi, 2 * k)
        }
        (_, Family::LowerOr { k }) => {
            let k = k as usize;
            let mut low: Vec<Lit> = (0..k).map(|i| aig.add_or(a[i], b[i])).collect();
            low.extend(ripple_add(&mut aig, &a[k..], &b[k..], Lit::FALSE));
            low
        }
        (_, Family::BrokenArray { h, v }) => array_multiplier(&mut aig, a, b, h as usize, v as usize),
        (kind, Family::WidthReduced { w }) => {
            let (w, s) = (w as usize, n - w as usize);
            let ra = round_word(&mut aig, a, w);
            let rb = round_word(&mut aig, b, w);
            match kind {
                SlotKind::Adder => shift_left(&ripple_add(&mut aig, &ra, &rb, Lit::FALSE), s),
                SlotKind::Multiplier => shift_left(&array_multiplier(&mut aig, &ra, &rb, 0, 0), 2 * s),
            }
        }
    };
    aig.add_outputs(&resize(&out, spec.output_width() as usize));
    Ok(aig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{exhaustive_word, Simulator, WORD_BITS};

    /// Simulates every operand pair and checks the circuit against `apply`.
    fn check_exhaustive(spec: &ComponentSpec) {
        let aig = build_component(spec).unwrap();
        let n = spec.width as usize;
        let total = 1usize << (2 * n);
        let mut sim = Simulator::new(&aig);
        for word in 0..total.div_ceil(WORD_BITS) {
            let inputs: Vec<u64> = (0..2 * n).map(|i| exhaustive_word(i, word)).collect();
            let out = sim.run(&inputs).unwrap().to_vec();
            for bit in 0..WORD_BITS.min(total) {
                let p = word * WORD_BITS + bit;
                let (av, bv) = ((p as u64) & ((1 << n) - 1), (p as u64) >> n);
                let got = out.iter().enumerate().fold(0u64, |acc, (i, w)| acc | (((w >> bit) & 1) << i));
                assert_eq!(got, spec.apply(av, bv), "{spec} on ({av}, {bv})");
            }
        }
    }

    #[test]
    fn every_family_matches_its_function() {
        let specs = [
            ComponentSpec::new(SlotKind::Adder, 5, Family::Accurate),
            ComponentSpec::new(SlotKind::Adder, 5, Family::Truncated { k: 2 }),
            ComponentSpec::new(SlotKind::Adder, 5, Family::LowerOr { k: 3 }),
            ComponentSpec::new(SlotKind::Adder, 5, Family::WidthReduced { w: 3 }),
            ComponentSpec::new(SlotKind::Multiplier, 5, Family::Accurate),
            ComponentSpec::new(SlotKind::Multiplier, 5, Family::Truncated { k: 1 }),
            ComponentSpec::new(SlotKind::Multiplier, 5, Family::BrokenArray { h: 1, v: 4 }),
            ComponentSpec::new(SlotKind::Multiplier, 5, Family::WidthReduced { w: 3 }),
            ComponentSpec::new(SlotKind::Multiplier, 4, Family::WidthReduced { w: 1 }),
        ];
        for s in &specs {
            check_exhaustive(s);
        }
    }

    #[test]
    fn degenerate_broken_array_is_exact_multiplier() {
        check_exhaustive(&ComponentSpec::new(SlotKind::Multiplier, 8, Family::BrokenArray { h: 0, v: 0 }));
        check_exhaustive(&ComponentSpec::new(SlotKind::Multiplier, 8, Family::Accurate));
    }

    #[test]
    fn truncation_zero_is_accurate() {
        check_exhaustive(&ComponentSpec::new(SlotKind::Adder, 8, Family::Truncated { k: 0 }));
    }

    #[test]
    fn invalid_spec_rejected() {
        let s = ComponentSpec::new(SlotKind::Adder, 8, Family::Truncated { k: 9 });
        assert!(build_component(&s).is_err());
    }
}
