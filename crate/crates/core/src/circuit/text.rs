//! Line-based circuit text format.
//!
//! ```text
//! axaig 1
//! name <label>
//! inputs <I> outputs <O> ands <A>
//! <lit> <lit>      (A lines, node I+1+j)
//! <lit>            (O lines)
//! ```
//!
//! A literal is a node index, prefixed with `-` when complemented. Node 0 is
//! constant false, so `-0` is constant true. Inputs are nodes `1..=I`.

use std::fmt::Write as _;

use super::aig::{Aig, Lit};
use crate::{Error, Result};

const MAGIC: &str = "axaig 1";

fn fmt_lit(out: &mut String, lit: Lit) {
    if lit.is_complemented() {
        out.push('-');
    }
    let _ = write!(out, "{}", lit.node());
}

pub fn write_aig(aig: &Aig) -> String {
    let mut out = String::with_capacity(16 * (aig.num_ands() + aig.num_outputs()) + 64);
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "name {}", aig.name());
    let _ = writeln!(
        out,
        "inputs {} outputs {} ands {}",
        aig.num_inputs(),
        aig.num_outputs(),
        aig.num_ands()
    );
    for &(a, b) in aig.ands() {
        fmt_lit(&mut out, a);
        out.push(' ');
        fmt_lit(&mut out, b);
        out.push('\n');
    }
    for &o in aig.outputs() {
        fmt_lit(&mut out, o);
        out.push('\n');
    }
    out
}

fn parse_lit(tok: &str, limit: u32, line: usize) -> Result<Lit> {
    let (neg, digits) = match tok.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, tok),
    };
    let node: u32 = digits.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad literal `{tok}`"),
    })?;
    if node >= limit {
        return Err(Error::Parse {
            line,
            msg: format!("literal `{tok}` references node {node} not yet defined"),
        });
    }
    Ok(Lit::new(node, neg))
}

pub fn read_aig(text: &str) -> Result<Aig> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let perr = |line: usize, msg: &str| Error::Parse {
        line,
        msg: msg.to_string(),
    };
    let (ln, magic) = lines.next().ok_or_else(|| perr(1, "empty input"))?;
    if magic != MAGIC {
        return Err(perr(ln, "missing `axaig 1` header"));
    }
    let (ln, name_line) = lines.next().ok_or_else(|| perr(2, "missing name line"))?;
    let name = name_line
        .strip_prefix("name ")
        .or_else(|| (name_line == "name").then_some(""))
        .ok_or_else(|| perr(ln, "expected `name <label>`"))?;
    let (ln, counts) = lines.next().ok_or_else(|| perr(3, "missing counts line"))?;
    let toks: Vec<&str> = counts.split_whitespace().collect();
    if toks.len() != 6 || toks[0] != "inputs" || toks[2] != "outputs" || toks[4] != "ands" {
        return Err(perr(ln, "expected `inputs I outputs O ands A`"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| perr(ln, "bad count"));
    let (ni, no, na) = (num(toks[1])?, num(toks[3])?, num(toks[5])?);

    let (mut aig, _) = Aig::with_inputs(name, ni);
    for _ in 0..na {
        let (ln, l) = lines.next().ok_or_else(|| perr(0, "truncated AND section"))?;
        let mut it = l.split_whitespace();
        let limit = aig.num_nodes() as u32;
        let a = parse_lit(it.next().ok_or_else(|| perr(ln, "missing fanin"))?, limit, ln)?;
        let b = parse_lit(it.next().ok_or_else(|| perr(ln, "missing fanin"))?, limit, ln)?;
        if it.next().is_some() {
            return Err(perr(ln, "trailing tokens"));
        }
        aig.push_raw_and(a, b);
    }
    let limit = aig.num_nodes() as u32;
    for _ in 0..no {
        let (ln, l) = lines.next().ok_or_else(|| perr(0, "truncated output section"))?;
        let lit = parse_lit(l.trim(), limit, ln)?;
        aig.add_output(lit);
    }
    if let Some((ln, l)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(perr(ln, &format!("unexpected trailing content `{l}`")));
    }
    Ok(aig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::arith::ripple_add;
    use proptest::prelude::*;

    fn adder() -> Aig {
        let (mut aig, x) = Aig::with_inputs("add3 example", 6);
        let s = ripple_add(&mut aig, &x[0..3], &x[3..6], Lit::FALSE);
        aig.add_outputs(&s);
        aig.add_output(Lit::TRUE);
        aig.add_output(!x[2]);
        aig
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let aig = adder();
        let text = write_aig(&aig);
        let back = read_aig(&text).unwrap();
        assert_eq!(back, aig);
        assert_eq!(write_aig(&back), text);
        assert!(text.contains("\n-0\n"));
    }

    #[test]
    fn forward_reference_rejected() {
        let text = "axaig 1\nname x\ninputs 1 outputs 1 ands 1\n1 3\n2\n";
        assert!(matches!(read_aig(text), Err(Error::Parse { line: 4, .. })));
    }

    proptest! {
        #[test]
        fn random_graphs_round_trip(ops in proptest::collection::vec((0u32..64, 0u32..64, any::<bool>()), 1..60)) {
            let (mut aig, x) = Aig::with_inputs("rand", 4);
            let mut pool: Vec<Lit> = x.clone();
            for (i, j, inv) in ops {
                let a = pool[i as usize % pool.len()];
                let b = pool[j as usize % pool.len()].xor_compl(inv);
                let l = aig.add_and(a, b);
                pool.push(l);
            }
            for l in pool.iter().rev().take(3) {
                aig.add_output(*l);
            }
            let text = write_aig(&aig);
            let back = read_aig(&text).unwrap();
            prop_assert_eq!(write_aig(&back), text);
            prop_assert_eq!(back, aig);
        }
    }
}
