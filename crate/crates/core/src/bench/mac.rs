//! Two-slot multiply-accumulate on horizontally adjacent pixels:
//! `y = p * 89 + (q << 6)`.

use super::data::{Grid, IMAGE_DATASET};
use super::qor::QorMetric;
use super::template::{AcceleratorTemplate, Stage, Workload};
use crate::circuit::{DataflowGraph, Operand, SlotSpec};

pub const COEFF: u64 = 89;
pub const OFFSETS: [(isize, isize); 2] = [(0, 0), (0, 1)];

pub fn mac_template() -> AcceleratorTemplate {
    let mut g = DataflowGraph::new("mac");
    let p = g.add_input(8);
    let q = g.add_input(8);
    let prod = g.add_slot(SlotSpec::multiplier(8), p, Operand::constant(COEFF));
    let sum = g.add_slot(SlotSpec::adder(16), prod, q.shl(6));
    g.add_output(sum, 17);
    AcceleratorTemplate {
        name: "mac".into(),
        workload: Workload::Mac,
        stages: vec![Stage {
            name: "mac".into(),
            graph: g,
        }],
        metric: QorMetric::Psnr,
        dataset: IMAGE_DATASET.into(),
        peak: (255 * COEFF + (255 << 6)) as f64,
    }
}

pub fn reference(img: &Grid) -> Vec<u64> {
    let mut out = Vec::with_capacity(img.data.len());
    for r in 0..img.rows as isize {
        for c in 0..img.cols as isize {
            out.push(img.clamped(r, c) as u64 * COEFF + ((img.clamped(r, c + 1) as u64) << 6));
        }
    }
    out
}
