//! Multiplierless multiple-constant multiplication blocks of a 4-point integer
//! DCT. All four variants compute `x * c` for every constant `c` of
//! [`CONSTANTS`] from an 8-bit input using only 16-bit adders and shifts; they
//! differ in how partial sums are shared.

use super::data::{Grid, IMAGE_DATASET};
use super::qor::QorMetric;
use super::template::{AcceleratorTemplate, Stage, Workload};
use crate::circuit::{DataflowGraph, Operand, SlotSpec};

pub const CONSTANTS: [u64; 7] = [18, 36, 50, 64, 75, 83, 89];

/// Adder counts of MCM1..MCM4.
pub const UNIT_COUNTS: [usize; 4] = [13, 11, 9, 8];

struct Builder {
    g: DataflowGraph,
    x: Operand,
}

impl Builder {
    fn new(name: &str) -> Self {
        let mut g = DataflowGraph::new(name);
        let x = g.add_input(8);
        Builder { g, x }
    }

    fn sh(&self, k: u32) -> Operand {
        self.x.shl(k)
    }

    fn add(&mut self, a: Operand, b: Operand) -> Operand {
        self.g.add_slot(SlotSpec::adder(16), a.truncating(), b.truncating())
    }

    /// Sum of `x << k` over the set bits `k` of `c`, left to right.
    fn naive(&mut self, c: u64) -> Operand {
        let mut terms = (0..8).rev().filter(|k| (c >> k) & 1 == 1).map(|k| self.sh(k));
        let first = terms.next().expect("non-zero constant");
        let rest: Vec<Operand> = terms.collect();
        rest.into_iter().fold(first, |acc, t| self.add(acc, t))
    }

    fn finish(mut self, outs: [Operand; 7], variant: u8) -> AcceleratorTemplate {
        for o in outs {
            self.g.add_output(o.truncating(), 16);
        }
        AcceleratorTemplate {
            name: format!("mcm{variant}"),
            workload: Workload::Mcm(variant),
            stages: vec![Stage {
                name: format!("mcm{variant}"),
                graph: self.g,
            }],
            metric: QorMetric::Psnr,
            dataset: IMAGE_DATASET.into(),
            peak: (255 * CONSTANTS[6]) as f64,
        }
    }
}

/// Every constant built independently from its binary expansion.
fn mcm1() -> AcceleratorTemplate {
    let mut b = Builder::new("mcm1");
    let c18 = b.naive(18);
    let c36 = b.naive(36);
    let c50 = b.naive(50);
    let c64 = b.sh(6);
    let c75 = b.naive(75);
    let c83 = b.naive(83);
    let c89 = b.naive(89);
    b.finish([c18, c36, c50, c64, c75, c83, c89], 1)
}

/// 18x taken from 36x by a shift; 50x = 32x + 18x.
fn mcm2() -> AcceleratorTemplate {
    let mut b = Builder::new("mcm2");
    let c36 = b.naive(36);
    let c18 = c36.shr(1);
    let t = b.sh(5);
    let c50 = b.add(t, c18);
    let c64 = b.sh(6);
    let c75 = b.naive(75);
    let c83 = b.naive(83);
    let c89 = b.naive(89);
    b.finish([c18, c36, c50, c64, c75, c83, c89], 2)
}

/// 9x and 3x shared; 83x and 89x chained off 75x.
fn mcm3() -> AcceleratorTemplate {
    let mut b = Builder::new("mcm3");
    let (x, x8, x2) = (b.sh(0), b.sh(3), b.sh(1));
    let n9 = b.add(x8, x);
    let n3 = b.add(x2, x);
    let c50 = b.naive(50);
    let c75 = b.naive(75);
    let c83 = b.add(c75, x8);
    let c89 = b.add(c83, n3.shl(1));
    let c64 = b.sh(6);
    b.finish([n9.shl(1), n9.shl(2), c50, c64, c75, c83, c89], 3)
}

/// 75x = 72x + 3x and 50x = 32x + 18x reuse 9x; 18x and 36x stay independent.
fn mcm4() -> AcceleratorTemplate {
    let mut b = Builder::new("mcm4");
    let (x, x8, x2, x32) = (b.sh(0), b.sh(3), b.sh(1), b.sh(5));
    let n3 = b.add(x2, x);
    let n9 = b.add(x8, x);
    let c75 = b.add(n9.shl(3), n3);
    let c83 = b.add(c75, x8);
    let c89 = b.add(c83, n3.shl(1));
    let c50 = b.add(x32, n9.shl(1));
    let c36 = b.naive(36);
    let c18 = b.naive(18);
    let c64 = b.sh(6);
    b.finish([c18, c36, c50, c64, c75, c83, c89], 4)
}

pub fn mcm_templates() -> Vec<AcceleratorTemplate> {
    vec![mcm1(), mcm2(), mcm3(), mcm4()]
}

/// `x * c` for every pixel and constant, pixel-major.
pub fn reference(img: &Grid) -> Vec<u64> {
    img.data
        .iter()
        .flat_map(|&x| CONSTANTS.iter().map(move |&c| x as u64 * c))
        .collect()
}
