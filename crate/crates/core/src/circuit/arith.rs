//! Word-level builders over LSB-first literal vectors.

use super::aig::{Aig, Lit};

pub fn full_adder(aig: &mut Aig, a: Lit, b: Lit, c: Lit) -> (Lit, Lit) {
    let p = aig.add_xor(a, b);
    let s = aig.add_xor(p, c);
    let g = aig.add_and(a, b);
    let t = aig.add_and(p, c);
    let carry = aig.add_or(g, t);
    (s, carry)
}

/// Ripple-carry sum of two words; the result is one bit wider than the wider operand.
pub fn ripple_add(aig: &mut Aig, a: &[Lit], b: &[Lit], cin: Lit) -> Vec<Lit> {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n + 1);
    let mut carry = cin;
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(Lit::FALSE);
        let y = b.get(i).copied().unwrap_or(Lit::FALSE);
        let (s, c) = full_adder(aig, x, y, carry);
        out.push(s);
        carry = c;
    }
    out.push(carry);
    out
}

/// `a - b` over `width` bits in two's complement; returns `(difference, borrow)`
/// where `borrow` is set iff `a < b`.
pub fn subtract(aig: &mut Aig, a: &[Lit], b: &[Lit], width: usize) -> (Vec<Lit>, Lit) {
    let a = resize(a, width);
    let nb: Vec<Lit> = resize(b, width).into_iter().map(|l| !l).collect();
    let mut sum = ripple_add(aig, &a, &nb, Lit::TRUE);
    let carry = sum.pop().expect("non-empty sum");
    (sum, !carry)
}

pub fn mux_word(aig: &mut Aig, sel: Lit, t: &[Lit], e: &[Lit]) -> Vec<Lit> {
    let n = t.len().max(e.len());
    (0..n)
        .map(|i| {
            let x = t.get(i).copied().unwrap_or(Lit::FALSE);
            let y = e.get(i).copied().unwrap_or(Lit::FALSE);
            aig.add_mux(sel, x, y)
        })
        .collect()
}

pub fn const_word(value: u64, width: usize) -> Vec<Lit> {
    (0..width)
        .map(|i| {
            if i < 64 && (value >> i) & 1 == 1 {
                Lit::TRUE
            } else {
                Lit::FALSE
            }
        })
        .collect()
}

/// Zero-extends or truncates to `width` bits.
pub fn resize(word: &[Lit], width: usize) -> Vec<Lit> {
    let mut w: Vec<Lit> = word.iter().copied().take(width).collect();
    w.resize(width, Lit::FALSE);
    w
}

pub fn shift_left(word: &[Lit], by: usize) -> Vec<Lit> {
    let mut w = vec![Lit::FALSE; by];
    w.extend_from_slice(word);
    w
}

pub fn shift_right(word: &[Lit], by: usize) -> Vec<Lit> {
    if by >= word.len() {
        vec![Lit::FALSE]
    } else {
        word[by..].to_vec()
    }
}

/// OR-reduction of a word; constant false for an empty word.
pub fn or_reduce(aig: &mut Aig, word: &[Lit]) -> Lit {
    word.iter().fold(Lit::FALSE, |acc, &l| aig.add_or(acc, l))
}

/// Sums rows of shifted partial products with a chain of ripple adders.
pub fn sum_rows(aig: &mut Aig, rows: &[Vec<Lit>], width: usize) -> Vec<Lit> {
    let mut acc = const_word(0, width);
    for row in rows {
        if row.iter().all(|&l| l == Lit::FALSE) {
            continue;
        }
        let s = ripple_add(aig, &acc, row, Lit::FALSE);
        acc = resize(&s, width);
    }
    acc
}
