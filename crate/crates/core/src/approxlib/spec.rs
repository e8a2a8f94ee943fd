use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuit::{SlotKind, SlotSpec};
use crate::{Error, Result};

/// Approximation family and its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Accurate,
    /// The `k` low operand bits are ignored and the matching result bits are zero.
    Truncated { k: u32 },
    /// Adders only: the `k` low result bits are `a | b`, the rest is an exact
    /// sum of the high parts without carry-in.
    LowerOr { k: u32 },
    /// Multipliers only: array multiplier keeping partial product `a_i * b_j`
    /// iff `j >= h` and `i + j >= v`.
    BrokenArray { h: u32, v: u32 },
    /// Operands rounded (half up, saturating) to their top `w` bits, combined
    /// exactly, and rescaled.
    WidthReduced { w: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub kind: SlotKind,
    /// Width of both operands.
    pub width: u32,
    #[serde(flatten)]
    pub family: Family,
}

fn mask(w: u32) -> u64 {
    if w >= 64 {
        !0
    } else {
        (1u64 << w) - 1
    }
}

/// Round-half-up to the top `w` of `width` bits, saturating at `2^w - 1`.
pub(crate) fn round_operand(x: u64, width: u32, w: u32) -> u64 {
    let s = width - w;
    if s == 0 {
        return x;
    }
    ((x >> s) + ((x >> (s - 1)) & 1)).min(mask(w))
}

impl ComponentSpec {
    pub fn new(kind: SlotKind, width: u32, family: Family) -> Self {
        ComponentSpec { kind, width, family }
    }

    pub fn slot(&self) -> SlotSpec {
        SlotSpec { kind: self.kind, width: self.width }
    }

    pub fn output_width(&self) -> u32 {
        self.slot().output_width()
    }

    pub fn input_bits(&self) -> u32 {
        2 * self.width
    }

    /// Stable identifier, e.g. `mul8u_bam_h02_v06` or `add16u_trunc_k03`.
    pub fn id(&self) -> String {
        let base = format!("{}{}u", self.kind.tag(), self.width);
        match self.family {
            Family::Accurate => format!("{base}_acc"),
            Family::Truncated { k } => format!("{base}_trunc_k{k:02}"),
            Family::LowerOr { k } => format!("{base}_loa_k{k:02}"),
            Family::BrokenArray { h, v } => format!("{base}_bam_h{h:02}_v{v:02}"),
            Family::WidthReduced { w } => format!("{base}_wr_w{w:02}"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.width;
        let bad = |msg: String| Err(Error::Spec(format!("{}: {msg}", self.id())));
        if !(1..=16).contains(&n) {
            return bad(format!("operand width {n} outside [1, 16]"));
        }
        match (self.kind, self.family) {
            (_, Family::Accurate) => Ok(()),
            (_, Family::Truncated { k }) if k >= n => bad(format!("truncation k={k} must be below {n}")),
            (SlotKind::Multiplier, Family::LowerOr { .. }) => bad("lower-or applies to adders only".into()),
            (_, Family::LowerOr { k }) if k >= n => bad(format!("lower-or k={k} must be below {n}")),
            (SlotKind::Adder, Family::BrokenArray { .. }) => bad("broken-array applies to multipliers only".into()),
            (_, Family::BrokenArray { h, v }) if h >= n || v > 2 * n - 2 => {
                bad(format!("broken-array (h={h}, v={v}) out of bounds"))
            }
            (_, Family::WidthReduced { w }) if w == 0 || w > n => bad(format!("reduced width {w} outside [1, {n}]")),
            _ => Ok(()),
        }
    }

    /// Exact integer function of the slot kind.
    pub fn exact(&self, a: u64, b: u64) -> u64 {
        match self.kind {
            SlotKind::Adder => a + b,
            SlotKind::Multiplier => a * b,
        }
    }

    /// The family's defined function on masked operands.
    pub fn apply(&self, a: u64, b: u64) -> u64 {
        let n = self.width;
        let (a, b) = (a & mask(n), b & mask(n));
        match self.family {
            Family::Accurate => self.exact(a, b),
            Family::Truncated { k } => match self.kind {
                SlotKind::Adder => ((a >> k) + (b >> k)) << k,
                SlotKind::Multiplier => ((a >> k) << k) * ((b >> k) << k),
            },
            Family::LowerOr { k } => (((a >> k) + (b >> k)) << k) | ((a | b) & mask(k)),
            Family::BrokenArray { h, v } => {
                let mut acc = 0;
                for j in h..n {
                    if (b >> j) & 1 == 0 {
                        continue;
                    }
                    for i in v.saturating_sub(j)..n {
                        acc += ((a >> i) & 1) << (i + j);
                    }
                }
                acc
            }
            Family::WidthReduced { w } => {
                let s = n - w;
                let (ra, rb) = (round_operand(a, n, w), round_operand(b, n, w));
                match self.kind {
                    SlotKind::Adder => (ra + rb) << s,
                    SlotKind::Multiplier => (ra * rb) << (2 * s),
                }
            }
        }
    }
}

impl fmt::Display for ComponentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}
