use serde::{Deserialize, Serialize};

use super::aig::Aig;

/// Structural summary of a circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AigStats {
    pub and_count: usize,
    /// Longest input-to-output path counted in AND nodes.
    pub level_count: u32,
    pub input_count: usize,
    pub output_count: usize,
    /// Complemented AND fanins plus complemented outputs.
    pub inverter_edge_count: usize,
}

/// Logic level of every node: 0 for constants and inputs, `1 + max(fanin levels)`
/// for AND nodes.
pub fn levels(aig: &Aig) -> Vec<u32> {
    let mut lv = vec![0u32; aig.num_nodes()];
    let base = aig.first_and() as usize;
    for (i, &(a, b)) in aig.ands().iter().enumerate() {
        lv[base + i] = 1 + lv[a.node() as usize].max(lv[b.node() as usize]);
    }
    lv
}

pub fn stats(aig: &Aig) -> AigStats {
    let lv = levels(aig);
    let level_count = aig
        .outputs()
        .iter()
        .map(|o| lv[o.node() as usize])
        .max()
        .unwrap_or(0);
    let inverter_edge_count = aig
        .ands()
        .iter()
        .map(|&(a, b)| a.is_complemented() as usize + b.is_complemented() as usize)
        .sum::<usize>()
        + aig.outputs().iter().filter(|o| o.is_complemented()).count();
    AigStats {
        and_count: aig.num_ands(),
        level_count,
        input_count: aig.num_inputs(),
        output_count: aig.num_outputs(),
        inverter_edge_count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Lit;

    #[test]
    fn single_and() {
        let (mut aig, x) = Aig::with_inputs("t", 2);
        let y = aig.add_and(x[0], x[1]);
        aig.add_output(y);
        let s = stats(&aig);
        assert_eq!((s.and_count, s.level_count), (1, 1));
        assert_eq!((s.input_count, s.output_count, s.inverter_edge_count), (2, 1, 0));
    }

    #[test]
    fn balanced_tree_of_eight() {
        let (mut aig, x) = Aig::with_inputs("t", 8);
        let mut layer: Vec<Lit> = x;
        while layer.len() > 1 {
            layer = layer
                .chunks(2)
                .map(|p| aig.add_and(p[0], p[1]))
                .collect();
        }
        aig.add_output(layer[0]);
        let s = stats(&aig);
        assert_eq!((s.and_count, s.level_count), (7, 3));
    }

    #[test]
    fn series_node_never_lowers_level() {
        let (mut aig, x) = Aig::with_inputs("t", 3);
        let a = aig.add_and(x[0], x[1]);
        aig.add_output(a);
        let before = stats(&aig).level_count;
        let b = aig.add_and(a, x[2]);
        aig.add_output(b);
        assert!(stats(&aig).level_count >= before);
    }
}
