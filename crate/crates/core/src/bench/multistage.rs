//! Five cascaded streaming stages for pulse detection: low-pass, high-pass,
//! derivative, squaring and moving-window integration (73 slots in total).

use super::data::SIGNAL_DATASET;
use super::qor::QorMetric;
use super::template::{AcceleratorTemplate, Stage, Workload};
use crate::circuit::{DataflowGraph, Operand, SlotSpec};

pub const LPF_TAPS: [u64; 11] = [1, 3, 5, 7, 9, 14, 9, 7, 5, 3, 1];
pub const LPF_SHIFT: u32 = 6;
pub const HPF_LEN: usize = 16;
pub const HPF_DELAY: usize = 8;
pub const HPF_OFFSET: u64 = 128;
pub const MWI_LEN: usize = 29;
pub const MWI_SHIFT: u32 = 3;
pub const SQUARE_SHIFT: u32 = 4;
/// Derivative weights `2, 1` scaled up so truncated products keep their precision.
pub const DERIV_SCALE: u64 = 32;
pub const DERIV_SHIFT: u32 = 7;
/// Output widths of the squaring and integrator stages.
pub const SQUARE_WIDTH: u32 = 13;
pub const MWI_WIDTH: u32 = 14;

/// Slot count of each stage.
pub const STAGE_SLOTS: [usize; 5] = [21, 15, 6, 3, 28];

fn add16(g: &mut DataflowGraph, a: Operand, b: Operand) -> Operand {
    g.add_slot(SlotSpec::adder(16), a.truncating(), b.truncating())
}

/// Pairwise adder tree over `terms`.
fn sum_tree(g: &mut DataflowGraph, mut terms: Vec<Operand>) -> Operand {
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        for pair in terms.chunks(2) {
            next.push(if pair.len() == 2 { add16(g, pair[0], pair[1]) } else { pair[0] });
        }
        terms = next;
    }
    terms[0]
}

fn window(g: &mut DataflowGraph, n: usize, width: u32) -> Vec<Operand> {
    (0..n).map(|_| g.add_input(width)).collect()
}

fn lowpass() -> DataflowGraph {
    let mut g = DataflowGraph::new("lowpass");
    let x = window(&mut g, LPF_TAPS.len(), 8);
    let prods = x
        .iter()
        .zip(LPF_TAPS)
        .map(|(&xi, w)| g.add_slot(SlotSpec::multiplier(8), xi, Operand::constant(w)))
        .collect();
    let s = sum_tree(&mut g, prods);
    g.add_output(s.shr(LPF_SHIFT).truncating(), 8);
    g
}

fn highpass() -> DataflowGraph {
    let mut g = DataflowGraph::new("highpass");
    let x = window(&mut g, HPF_LEN, 8);
    let s = sum_tree(&mut g, x.clone());
    let y = g.add_clamp_sub(HPF_OFFSET, x[HPF_DELAY], s.shr(4), 8);
    g.add_output(y, 8);
    g
}

fn derivative() -> DataflowGraph {
    let mut g = DataflowGraph::new("derivative");
    let x = window(&mut g, 5, 8);
    let mul = |g: &mut DataflowGraph, a: Operand, c: u64| g.add_slot(SlotSpec::multiplier(8), a, Operand::constant(c));
    let a0 = mul(&mut g, x[0], 2 * DERIV_SCALE);
    let a1 = mul(&mut g, x[1], DERIV_SCALE);
    let b3 = mul(&mut g, x[3], DERIV_SCALE);
    let b4 = mul(&mut g, x[4], 2 * DERIV_SCALE);
    let p = add16(&mut g, a0, a1);
    let q = add16(&mut g, b3, b4);
    let d = g.add_abs_diff(p, q);
    g.add_output(d.shr(DERIV_SHIFT).truncating(), 8);
    g
}

fn squaring() -> DataflowGraph {
    let mut g = DataflowGraph::new("squaring");
    let x = window(&mut g, 2, 8);
    let s0 = g.add_slot(SlotSpec::multiplier(8), x[0], x[0]);
    let s1 = g.add_slot(SlotSpec::multiplier(8), x[1], x[1]);
    let s = add16(&mut g, s0, s1);
    g.add_output(s.shr(SQUARE_SHIFT).truncating(), SQUARE_WIDTH);
    g
}

fn integrator() -> DataflowGraph {
    let mut g = DataflowGraph::new("integrator");
    let x = window(&mut g, MWI_LEN, SQUARE_WIDTH);
    let s = sum_tree(&mut g, x);
    g.add_output(s.shr(MWI_SHIFT).truncating(), MWI_WIDTH);
    g
}

pub fn multistage_template() -> AcceleratorTemplate {
    let stages = [lowpass(), highpass(), derivative(), squaring(), integrator()]
        .into_iter()
        .map(|graph| Stage {
            name: graph.name.clone(),
            graph,
        })
        .collect();
    AcceleratorTemplate {
        name: "multistage".into(),
        workload: Workload::Multistage,
        stages,
        metric: QorMetric::PeakF1,
        dataset: SIGNAL_DATASET.into(),
        peak: 255.0,
    }
}

/// `x[n - i]`, holding the first sample before the start of the stream.
fn delayed(x: &[u64], n: usize, i: usize) -> u64 {
    x[n.saturating_sub(i)]
}

/// Exact integer model of the five stages.
pub fn reference(x: &[u64]) -> Vec<u64> {
    let len = x.len();
    let y1: Vec<u64> = (0..len)
        .map(|n| (LPF_TAPS.iter().enumerate().map(|(i, w)| w * delayed(x, n, i)).sum::<u64>() >> LPF_SHIFT) & 0xFF)
        .collect();
    let y2: Vec<u64> = (0..len)
        .map(|n| {
            let mean = (0..HPF_LEN).map(|i| delayed(&y1, n, i)).sum::<u64>() >> 4;
            (HPF_OFFSET as i64 + delayed(&y1, n, HPF_DELAY) as i64 - mean as i64).clamp(0, 255) as u64
        })
        .collect();
    let y3: Vec<u64> = (0..len)
        .map(|n| {
            let p = DERIV_SCALE * (2 * delayed(&y2, n, 0) + delayed(&y2, n, 1));
            let q = DERIV_SCALE * (delayed(&y2, n, 3) + 2 * delayed(&y2, n, 4));
            (p.abs_diff(q) >> DERIV_SHIFT) & 0xFF
        })
        .collect();
    let y4: Vec<u64> = (0..len)
        .map(|n| {
            let (a, b) = (delayed(&y3, n, 0), delayed(&y3, n, 1));
            ((a * a + b * b) >> SQUARE_SHIFT) & ((1 << SQUARE_WIDTH) - 1)
        })
        .collect();
    (0..len)
        .map(|n| ((0..MWI_LEN).map(|i| delayed(&y4, n, i)).sum::<u64>() >> MWI_SHIFT) & ((1 << MWI_WIDTH) - 1))
        .collect()
}
