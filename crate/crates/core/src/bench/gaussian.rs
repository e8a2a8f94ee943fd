//! 3x3 Gaussian blur: nine 8-bit multipliers and eight 16-bit adders.

use super::data::{Grid, IMAGE_DATASET};
use super::qor::QorMetric;
use super::template::{AcceleratorTemplate, Stage, Workload};
use crate::circuit::{DataflowGraph, Operand, SlotSpec};

/// Row-major kernel; the weights sum to 256.
pub const KERNEL: [u64; 9] = [9, 30, 9, 30, 100, 30, 9, 30, 9];
pub const SHIFT: u32 = 8;

/// Neighbourhood offsets in kernel order.
pub const OFFSETS: [(isize, isize); 9] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 0),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

pub fn gaussian_template() -> AcceleratorTemplate {
    let mut g = DataflowGraph::new("gaussian3x3");
    let px: Vec<Operand> = (0..9).map(|_| g.add_input(8)).collect();
    let p: Vec<Operand> = px
        .iter()
        .zip(KERNEL)
        .map(|(&x, k)| g.add_slot(SlotSpec::multiplier(8), x, Operand::constant(k)))
        .collect();
    let add = |g: &mut DataflowGraph, a: Operand, b: Operand| g.add_slot(SlotSpec::adder(16), a.truncating(), b.truncating());
    let s01 = add(&mut g, p[0], p[1]);
    let s23 = add(&mut g, p[2], p[3]);
    let s45 = add(&mut g, p[4], p[5]);
    let s67 = add(&mut g, p[6], p[7]);
    let s03 = add(&mut g, s01, s23);
    let s47 = add(&mut g, s45, s67);
    let s07 = add(&mut g, s03, s47);
    let sum = add(&mut g, s07, p[8]);
    g.add_output(sum.shr(SHIFT).truncating(), 8);
    AcceleratorTemplate {
        name: "gaussian".into(),
        workload: Workload::Gaussian,
        stages: vec![Stage {
            name: "gaussian".into(),
            graph: g,
        }],
        metric: QorMetric::Psnr,
        dataset: IMAGE_DATASET.into(),
        peak: 255.0,
    }
}

/// Exact blur with border replication.
pub fn reference(img: &Grid) -> Vec<u64> {
    let mut out = Vec::with_capacity(img.data.len());
    for r in 0..img.rows as isize {
        for c in 0..img.cols as isize {
            let s: u64 = OFFSETS
                .iter()
                .zip(KERNEL)
                .map(|(&(dr, dc), k)| img.clamped(r + dr, c + dc) as u64 * k)
                .sum();
            out.push(s >> SHIFT);
        }
    }
    out
}
