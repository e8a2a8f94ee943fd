//! Word-level dataflow graphs of arithmetic slots and their flattening into a single AIG.

use serde::{Deserialize, Serialize};

use super::aig::{Aig, Lit};
use super::arith::{const_word, mux_word, or_reduce, resize, ripple_add, shift_left, shift_right, subtract};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotKind {
    Adder,
    Multiplier,
}

impl SlotKind {
    pub fn tag(self) -> &'static str {
        match self {
            SlotKind::Adder => "add",
            SlotKind::Multiplier => "mul",
        }
    }
}

/// An approximable arithmetic position: unsigned, both operands `width` bits wide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SlotSpec {
    pub kind: SlotKind,
    pub width: u32,
}

impl SlotSpec {
    pub fn adder(width: u32) -> Self {
        SlotSpec { kind: SlotKind::Adder, width }
    }

    pub fn multiplier(width: u32) -> Self {
        SlotSpec { kind: SlotKind::Multiplier, width }
    }

    pub fn output_width(&self) -> u32 {
        match self.kind {
            SlotKind::Adder => self.width + 1,
            SlotKind::Multiplier => 2 * self.width,
        }
    }

    pub fn input_bits(&self) -> u32 {
        2 * self.width
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    Input(usize),
    Node(usize),
    Const(u64),
}

/// An edge into an operation: `((source >> shr) << shl)`, adapted to the consumer's width.
/// Narrowing is only allowed on edges marked `truncate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Operand {
    pub source: Source,
    pub shl: u32,
    pub shr: u32,
    pub truncate: bool,
}

impl Operand {
    pub fn new(source: Source) -> Self {
        Operand {
            source,
            shl: 0,
            shr: 0,
            truncate: false,
        }
    }

    pub fn input(i: usize) -> Self {
        Operand::new(Source::Input(i))
    }

    pub fn node(i: usize) -> Self {
        Operand::new(Source::Node(i))
    }

    pub fn constant(v: u64) -> Self {
        Operand::new(Source::Const(v))
    }

    pub fn shl(mut self, by: u32) -> Self {
        self.shl = by;
        self
    }

    pub fn shr(mut self, by: u32) -> Self {
        self.shr = by;
        self
    }

    pub fn truncating(mut self) -> Self {
        self.truncate = true;
        self
    }
}

impl From<Source> for Operand {
    fn from(s: Source) -> Self {
        Operand::new(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    /// Approximable slot, index into [`DataflowGraph::slots`].
    Slot(usize),
    /// Exact `|a - b|`.
    AbsDiff,
    /// Exact `clamp(offset + a - b, 0, 2^width - 1)`.
    ClampSub { offset: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpNode {
    pub op: Op,
    pub a: Operand,
    pub b: Operand,
    pub width: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphOutput {
    pub operand: Operand,
    pub width: u32,
}

/// How constant operands are materialised when flattening a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConstantMode {
    /// Each constant operand becomes a dedicated coefficient input, placed after
    /// the primary inputs in operand order. The circuit stays programmable, so
    /// every slot keeps its full logic.
    #[default]
    Register,
    /// Constants are tied off and folded into the logic.
    Fold,
}

/// Acyclic word-level dataflow: primary inputs, slot and fixed operations in
/// topological order, and outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataflowGraph {
    pub name: String,
    pub input_widths: Vec<u32>,
    pub slots: Vec<SlotSpec>,
    pub nodes: Vec<OpNode>,
    pub outputs: Vec<GraphOutput>,
}

fn bit_len(v: u64) -> u32 {
    (64 - v.leading_zeros()).max(1)
}

fn mask(width: u32) -> u64 {
    if width >= 64 {
        !0
    } else {
        (1u64 << width) - 1
    }
}

impl DataflowGraph {
    pub fn new(name: impl Into<String>) -> Self {
        DataflowGraph {
            name: name.into(),
            input_widths: Vec::new(),
            slots: Vec::new(),
            nodes: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn add_input(&mut self, width: u32) -> Operand {
        self.input_widths.push(width);
        Operand::input(self.input_widths.len() - 1)
    }

    /// Adds a new slot computing `a (op) b`; returns an operand reading its result.
    pub fn add_slot(&mut self, spec: SlotSpec, a: Operand, b: Operand) -> Operand {
        self.slots.push(spec);
        self.nodes.push(OpNode {
            op: Op::Slot(self.slots.len() - 1),
            a,
            b,
            width: spec.output_width(),
        });
        Operand::node(self.nodes.len() - 1)
    }

    pub fn add_abs_diff(&mut self, a: Operand, b: Operand) -> Operand {
        let width = self.operand_width(&a).max(self.operand_width(&b));
        self.nodes.push(OpNode {
            op: Op::AbsDiff,
            a,
            b,
            width,
        });
        Operand::node(self.nodes.len() - 1)
    }

    pub fn add_clamp_sub(&mut self, offset: u64, a: Operand, b: Operand, width: u32) -> Operand {
        self.nodes.push(OpNode {
            op: Op::ClampSub { offset },
            a,
            b,
            width,
        });
        Operand::node(self.nodes.len() - 1)
    }

    pub fn add_output(&mut self, operand: Operand, width: u32) {
        self.outputs.push(GraphOutput { operand, width });
    }

    pub fn source_width(&self, s: &Source) -> u32 {
        match *s {
            Source::Input(i) => self.input_widths[i],
            Source::Node(i) => self.nodes[i].width,
            Source::Const(v) => bit_len(v),
        }
    }

    /// Natural width of an operand before adaptation.
    pub fn operand_width(&self, o: &Operand) -> u32 {
        self.source_width(&o.source).saturating_sub(o.shr).max(1) + o.shl
    }

    /// Constant operands in the order they become coefficient inputs.
    pub fn constants(&self) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        for n in &self.nodes {
            for o in [&n.a, &n.b] {
                if let Source::Const(v) = o.source {
                    out.push((v, self.consumer_width(n, o)));
                }
            }
        }
        out
    }

    fn consumer_width(&self, n: &OpNode, o: &Operand) -> u32 {
        match n.op {
            Op::Slot(s) => self.slots[s].width,
            _ => self.operand_width(o),
        }
    }

    /// Checks acyclicity, single use of every slot and width compatibility.
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Composition(format!("{}: {m}", self.name)));
        let mut used = vec![false; self.slots.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            for o in [&n.a, &n.b] {
                match o.source {
                    Source::Input(j) if j >= self.input_widths.len() => {
                        return err(format!("node {i} reads missing input {j}"))
                    }
                    Source::Node(j) if j >= i => {
                        return err(format!("node {i} reads node {j} out of order"))
                    }
                    _ => {}
                }
                let w = self.operand_width(o);
                let target = self.consumer_width(n, o);
                if w > target && !o.truncate {
                    return err(format!(
                        "node {i}: {w}-bit operand feeds {target}-bit port without a truncation rule"
                    ));
                }
            }
            if let Op::Slot(s) = n.op {
                if s >= self.slots.len() || used[s] {
                    return err(format!("slot {s} missing or instantiated twice"));
                }
                used[s] = true;
                if n.width != self.slots[s].output_width() {
                    return err(format!("node {i}: width disagrees with slot {s}"));
                }
            }
        }
        if let Some(s) = used.iter().position(|u| !u) {
            return err(format!("slot {s} is never instantiated"));
        }
        for (k, out) in self.outputs.iter().enumerate() {
            if let Source::Node(j) = out.operand.source {
                if j >= self.nodes.len() {
                    return err(format!("output {k} reads missing node {j}"));
                }
            }
            if self.operand_width(&out.operand) > out.width && !out.operand.truncate {
                return err(format!("output {k} narrows without a truncation rule"));
            }
        }
        Ok(())
    }

    /// Behavioural evaluation. `slot_fn(slot, a, b)` computes a slot's result.
    pub fn eval<F>(&self, inputs: &[u64], mut slot_fn: F) -> Vec<u64>
    where
        F: FnMut(usize, u64, u64) -> u64,
    {
        let mut vals = Vec::with_capacity(self.nodes.len());
        let mut out = vec![0; self.outputs.len()];
        self.eval_into(inputs, &mut vals, &mut out, &mut slot_fn);
        out
    }

    /// Allocation-free variant of [`eval`](Self::eval) for hot loops.
    pub fn eval_into<F>(&self, inputs: &[u64], vals: &mut Vec<u64>, out: &mut [u64], slot_fn: &mut F)
    where
        F: FnMut(usize, u64, u64) -> u64,
    {
        debug_assert_eq!(inputs.len(), self.input_widths.len());
        vals.clear();
        for n in &self.nodes {
            let (wa, wb) = match n.op {
                Op::Slot(s) => (self.slots[s].width, self.slots[s].width),
                _ => (64, 64),
            };
            let a = self.read(&n.a, inputs, vals) & mask(wa);
            let b = self.read(&n.b, inputs, vals) & mask(wb);
            let v = match n.op {
                Op::Slot(s) => slot_fn(s, a, b),
                Op::AbsDiff => a.abs_diff(b),
                Op::ClampSub { offset } => {
                    let t = offset as i128 + a as i128 - b as i128;
                    t.clamp(0, mask(n.width) as i128) as u64
                }
            };
            vals.push(v & mask(n.width));
        }
        for (o, g) in out.iter_mut().zip(&self.outputs) {
            *o = self.read(&g.operand, inputs, vals) & mask(g.width);
        }
    }

    #[inline]
    fn read(&self, o: &Operand, inputs: &[u64], vals: &[u64]) -> u64 {
        let raw = match o.source {
            Source::Input(i) => inputs[i] & mask(self.input_widths[i]),
            Source::Node(i) => vals[i],
            Source::Const(v) => v,
        };
        (raw >> o.shr) << o.shl
    }

    /// Number of AIG inputs produced by flattening under `mode`.
    pub fn flat_input_bits(&self, mode: ConstantMode) -> usize {
        let primary: u32 = self.input_widths.iter().sum();
        let coeff: u32 = match mode {
            ConstantMode::Register => self.constants().iter().map(|c| c.1).sum(),
            ConstantMode::Fold => 0,
        };
        (primary + coeff) as usize
    }
}

/// Flattens `graph` into one AIG, instantiating `slot_circuits[s]` for slot `s`.
///
/// Slot circuits take operand `a` on inputs `0..w` and `b` on `w..2w` (LSB first)
/// and drive `output_width` outputs. The composed circuit's inputs are the
/// primary inputs in order (LSB first), followed by coefficient inputs under
/// [`ConstantMode::Register`].
pub fn compose(graph: &DataflowGraph, slot_circuits: &[&Aig]) -> Result<Aig> {
    compose_with(graph, slot_circuits, ConstantMode::Register)
}

pub fn compose_with(graph: &DataflowGraph, slot_circuits: &[&Aig], mode: ConstantMode) -> Result<Aig> {
    compose_many(&graph.name, &[(graph, slot_circuits)], mode)
}

/// Flattens several independent graphs side by side into one AIG. Inputs of all
/// graphs come first (graph order), then the logic of each graph.
pub fn compose_many(name: &str, parts: &[(&DataflowGraph, &[&Aig])], mode: ConstantMode) -> Result<Aig> {
    for (g, circuits) in parts {
        g.validate()?;
        check_slot_circuits(g, circuits)?;
    }
    let mut aig = Aig::new(name);
    let mut input_sets = Vec::with_capacity(parts.len());
    for (g, _) in parts {
        input_sets.push(aig.add_inputs(g.flat_input_bits(mode)));
    }
    for ((g, circuits), lits) in parts.iter().zip(&input_sets) {
        let outs = build_graph(&mut aig, g, circuits, lits, mode);
        for o in outs {
            aig.add_outputs(&o);
        }
    }
    Ok(aig)
}

fn check_slot_circuits(g: &DataflowGraph, circuits: &[&Aig]) -> Result<()> {
    if circuits.len() != g.slots.len() {
        return Err(Error::Composition(format!(
            "{}: {} slot circuits for {} slots",
            g.name,
            circuits.len(),
            g.slots.len()
        )));
    }
    for (s, (spec, c)) in g.slots.iter().zip(circuits).enumerate() {
        if c.num_inputs() != spec.input_bits() as usize || c.num_outputs() != spec.output_width() as usize {
            return Err(Error::Composition(format!(
                "{}: slot {s} expects {} inputs/{} outputs, circuit `{}` has {}/{}",
                g.name,
                spec.input_bits(),
                spec.output_width(),
                c.name(),
                c.num_inputs(),
                c.num_outputs()
            )));
        }
    }
    Ok(())
}

fn build_graph(aig: &mut Aig, g: &DataflowGraph, circuits: &[&Aig], inputs: &[Lit], mode: ConstantMode) -> Vec<Vec<Lit>> {
    let mut offset = 0;
    let mut primary = Vec::with_capacity(g.input_widths.len());
    for &w in &g.input_widths {
        primary.push(inputs[offset..offset + w as usize].to_vec());
        offset += w as usize;
    }
    let mut coeff_cursor = offset;
    let mut vals: Vec<Vec<Lit>> = Vec::with_capacity(g.nodes.len());

    let read = |o: &Operand, width: u32, vals: &[Vec<Lit>], cursor: &mut usize| -> Vec<Lit> {
        let raw = match o.source {
            Source::Input(i) => primary[i].clone(),
            Source::Node(i) => vals[i].clone(),
            Source::Const(v) => match mode {
                ConstantMode::Fold => const_word(v, bit_len(v) as usize),
                ConstantMode::Register => {
                    let w = width as usize;
                    let lits = inputs[*cursor..*cursor + w].to_vec();
                    *cursor += w;
                    lits
                }
            },
        };
        let shifted = shift_left(&shift_right(&raw, o.shr as usize), o.shl as usize);
        resize(&shifted, width as usize)
    };

    for n in &g.nodes {
        let v = match n.op {
            Op::Slot(s) => {
                let w = g.slots[s].width;
                let mut ins = read(&n.a, w, &vals, &mut coeff_cursor);
                ins.extend(read(&n.b, w, &vals, &mut coeff_cursor));
                aig.instantiate(circuits[s], &ins)
            }
            Op::AbsDiff => {
                let (wa, wb) = (g.operand_width(&n.a), g.operand_width(&n.b));
                let a = read(&n.a, wa, &vals, &mut coeff_cursor);
                let b = read(&n.b, wb, &vals, &mut coeff_cursor);
                let m = n.width as usize;
                let (d, borrow) = subtract(aig, &a, &b, m);
                let (e, _) = subtract(aig, &b, &a, m);
                mux_word(aig, borrow, &e, &d)
            }
            Op::ClampSub { offset } => {
                let (wa, wb) = (g.operand_width(&n.a), g.operand_width(&n.b));
                let a = read(&n.a, wa, &vals, &mut coeff_cursor);
                let b = read(&n.b, wb, &vals, &mut coeff_cursor);
                let m = wa.max(wb).max(bit_len(offset)).max(n.width) as usize + 2;
                let t = ripple_add(aig, &resize(&a, m), &const_word(offset, m), Lit::FALSE);
                let (d, borrow) = subtract(aig, &resize(&t, m), &b, m);
                let w = n.width as usize;
                let over = or_reduce(aig, &d[w..]);
                (0..w)
                    .map(|i| {
                        let bit = aig.add_or(d[i], over);
                        aig.add_and(bit, !borrow)
                    })
                    .collect()
            }
        };
        vals.push(resize(&v, n.width as usize));
    }
    g.outputs
        .iter()
        .map(|out| read(&out.operand, out.width, &vals, &mut coeff_cursor))
        .collect()
}
