//! Depth-oriented k-LUT mapping over priority cuts.
//!
//! Every AND node keeps at most [`CUT_LIMIT`] non-trivial cuts ranked by
//! (depth, area flow, leaf count, leaves). The best cut fixes the node's depth;
//! the cover is then extracted backwards from the outputs.

use serde::{Deserialize, Serialize};

use crate::circuit::Aig;
use crate::{Error, Result};

pub const MIN_K: usize = 2;
pub const MAX_K: usize = 8;
pub const CUT_LIMIT: usize = 16;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Cut {
    leaves: [u32; MAX_K],
    len: u8,
    sig: u64,
    depth: u32,
    area_flow: f64,
}

impl Cut {
    fn trivial(node: u32) -> Cut {
        let mut leaves = [0; MAX_K];
        leaves[0] = node;
        Cut {
            leaves,
            len: 1,
            sig: 1u64 << (node % 64),
            depth: 0,
            area_flow: 0.0,
        }
    }

    pub(crate) fn leaves(&self) -> &[u32] {
        &self.leaves[..self.len as usize]
    }

    fn is_subset_of(&self, other: &Cut) -> bool {
        if self.len > other.len || self.sig & !other.sig != 0 {
            return false;
        }
        let (a, b) = (self.leaves(), other.leaves());
        let mut j = 0;
        for &x in a {
            while j < b.len() && b[j] < x {
                j += 1;
            }
            if j == b.len() || b[j] != x {
                return false;
            }
            j += 1;
        }
        true
    }

    fn rank(&self) -> (u32, f64, u8) {
        (self.depth, self.area_flow, self.len)
    }

    fn better_than(&self, other: &Cut) -> bool {
        let (a, b) = (self.rank(), other.rank());
        match a.0.cmp(&b.0) {
            std::cmp::Ordering::Equal => {}
            o => return o.is_lt(),
        }
        if (a.1 - b.1).abs() > 1e-9 {
            return a.1 < b.1;
        }
        match a.2.cmp(&b.2) {
            std::cmp::Ordering::Equal => self.leaves() < other.leaves(),
            o => o.is_lt(),
        }
    }
}

/// Sorted union of two leaf sets; `None` when it exceeds `k` leaves.
fn merge(a: &Cut, b: &Cut, k: usize, work: &mut u64) -> Option<Cut> {
    if (a.sig | b.sig).count_ones() as usize > k {
        *work += 1;
        return None;
    }
    let (x, y) = (a.leaves(), b.leaves());
    *work += (x.len() + y.len()) as u64;
    let mut leaves = [0u32; MAX_K];
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < x.len() || j < y.len() {
        let v = if j == y.len() || (i < x.len() && x[i] < y[j]) {
            i += 1;
            x[i - 1]
        } else if i == x.len() || y[j] < x[i] {
            j += 1;
            y[j - 1]
        } else {
            i += 1;
            j += 1;
            x[i - 1]
        };
        if n == k {
            return None;
        }
        leaves[n] = v;
        n += 1;
    }
    Some(Cut {
        leaves,
        len: n as u8,
        sig: a.sig | b.sig,
        depth: 0,
        area_flow: 0.0,
    })
}

/// A single mapped LUT: `root` computed from `leaves`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappedLut {
    pub root: u32,
    pub leaves: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct LutMapping {
    pub k: usize,
    /// LUTs of the cover in ascending root order (topological).
    pub luts: Vec<MappedLut>,
    /// Mapped depth of the critical output, in LUT levels.
    pub depth: u32,
    /// Best-cut depth of every node (0 for constants and inputs).
    pub node_depth: Vec<u32>,
    /// Leaf visits spent during cut enumeration.
    pub work: u64,
}

impl LutMapping {
    pub fn lut_count(&self) -> usize {
        self.luts.len()
    }
}

fn fanout_counts(aig: &Aig) -> Vec<u32> {
    let mut fo = vec![0u32; aig.num_nodes()];
    for &(a, b) in aig.ands() {
        fo[a.node() as usize] += 1;
        fo[b.node() as usize] += 1;
    }
    for o in aig.outputs() {
        fo[o.node() as usize] += 1;
    }
    fo
}

/// Enumerates priority cuts; returns the retained cut lists of every node.
pub(crate) fn enumerate_cuts(aig: &Aig, k: usize, work: &mut u64) -> Vec<Vec<Cut>> {
    let n = aig.num_nodes();
    let fanout = fanout_counts(aig);
    let mut cuts: Vec<Vec<Cut>> = vec![Vec::new(); n];
    let mut depth = vec![0u32; n];
    let mut flow = vec![0.0f64; n];
    let base = aig.first_and();
    let mut cand_a: Vec<Cut> = Vec::with_capacity(CUT_LIMIT + 1);
    let mut cand_b: Vec<Cut> = Vec::with_capacity(CUT_LIMIT + 1);
    for (idx, &(fa, fb)) in aig.ands().iter().enumerate() {
        let node = base + idx as u32;
        cand_a.clear();
        cand_a.push(Cut::trivial(fa.node()));
        cand_a.extend_from_slice(&cuts[fa.node() as usize]);
        cand_b.clear();
        cand_b.push(Cut::trivial(fb.node()));
        cand_b.extend_from_slice(&cuts[fb.node() as usize]);

        let mut kept: Vec<Cut> = Vec::with_capacity(CUT_LIMIT + 1);
        for ca in &cand_a {
            for cb in &cand_b {
                let Some(mut c) = merge(ca, cb, k, work) else {
                    continue;
                };
                let leaves = &c.leaves[..c.len as usize];
                let d = 1 + leaves.iter().map(|&l| depth[l as usize]).max().unwrap_or(0);
                let af = 1.0
                    + leaves
                        .iter()
                        .map(|&l| flow[l as usize] / fanout[l as usize].max(1) as f64)
                        .sum::<f64>();
                c.depth = d;
                c.area_flow = af;
                if kept.len() == CUT_LIMIT && !c.better_than(kept.last().unwrap()) {
                    continue;
                }
                *work += kept.len() as u64;
                if kept.iter().any(|r| r.is_subset_of(&c)) {
                    continue;
                }
                kept.retain(|r| !c.is_subset_of(r));
                let pos = kept.iter().position(|r| c.better_than(r)).unwrap_or(kept.len());
                kept.insert(pos, c);
                kept.truncate(CUT_LIMIT);
            }
        }
        let best = kept[0];
        depth[node as usize] = best.depth;
        flow[node as usize] = best.area_flow;
        cuts[node as usize] = kept;
    }
    cuts
}

/// Maps `aig` onto `k`-input LUTs.
pub fn map_luts(aig: &Aig, k: usize) -> Result<LutMapping> {
    if !(MIN_K..=MAX_K).contains(&k) {
        return Err(Error::Parameter(format!(
            "LUT size k={k} outside [{MIN_K}, {MAX_K}]"
        )));
    }
    let mut work = 0;
    let cuts = enumerate_cuts(aig, k, &mut work);
    let node_depth: Vec<u32> = cuts.iter().map(|c| c.first().map_or(0, |b| b.depth)).collect();

    let mut required = vec![false; aig.num_nodes()];
    for o in aig.outputs() {
        if aig.is_and(o.node()) {
            required[o.node() as usize] = true;
        }
    }
    let mut luts = Vec::new();
    for node in (aig.first_and() as usize..aig.num_nodes()).rev() {
        if !required[node] {
            continue;
        }
        let best = &cuts[node][0];
        for &l in best.leaves() {
            if aig.is_and(l) {
                required[l as usize] = true;
            }
        }
        luts.push(MappedLut {
            root: node as u32,
            leaves: best.leaves().to_vec(),
        });
    }
    luts.reverse();
    let depth = aig
        .outputs()
        .iter()
        .map(|o| node_depth[o.node() as usize])
        .max()
        .unwrap_or(0);
    Ok(LutMapping {
        k,
        luts,
        depth,
        node_depth,
        work,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{stats, Lit};

    fn and_tree(n: usize) -> Aig {
        let (mut aig, x) = Aig::with_inputs("tree", n);
        let mut layer: Vec<Lit> = x;
        while layer.len() > 1 {
            let mut next = Vec::new();
            for p in layer.chunks(2) {
                next.push(if p.len() == 2 { aig.add_and(p[0], p[1]) } else { p[0] });
            }
            layer = next;
        }
        aig.add_output(layer[0]);
        aig
    }

    #[test]
    fn single_and() {
        let aig = and_tree(2);
        let m = map_luts(&aig, 6).unwrap();
        assert_eq!((m.lut_count(), m.depth), (1, 1));
    }

    #[test]
    fn seven_input_tree_needs_two_luts() {
        let aig = and_tree(7);
        let m = map_luts(&aig, 6).unwrap();
        assert_eq!((m.lut_count(), m.depth), (2, 2));
        for lut in &m.luts {
            assert!(lut.leaves.len() <= 6);
        }
    }

    #[test]
    fn k_out_of_range() {
        let aig = and_tree(4);
        assert!(matches!(map_luts(&aig, 1), Err(Error::Parameter(_))));
        assert!(matches!(map_luts(&aig, 9), Err(Error::Parameter(_))));
    }

    #[test]
    fn k2_maps_every_and() {
        let aig = and_tree(9);
        let m = map_luts(&aig, 2).unwrap();
        let s = stats(&aig);
        assert_eq!(m.lut_count(), s.and_count);
        assert_eq!(m.depth, s.level_count);
    }

    #[test]
    fn pass_through_has_no_luts() {
        let (mut aig, x) = Aig::with_inputs("wire", 2);
        aig.add_output(x[0]);
        aig.add_output(!x[1]);
        let m = map_luts(&aig, 6).unwrap();
        assert_eq!((m.lut_count(), m.depth), (0, 0));
    }
}
