use std::fmt;
use std::ops::Not;

use rustc_hash::FxHashMap;

/// Reference to an AIG node with an optional complement.
///
/// Encoded as `node << 1 | complemented`. Node 0 is the constant-false node, so
/// [`Lit::FALSE`] and [`Lit::TRUE`] are the two constant literals.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub const FALSE: Lit = Lit(0);
    pub const TRUE: Lit = Lit(1);

    pub fn new(node: u32, complemented: bool) -> Lit {
        Lit(node << 1 | complemented as u32)
    }

    pub fn from_raw(raw: u32) -> Lit {
        Lit(raw)
    }

    pub fn raw(self) -> u32 {
        self.0
    }

    pub fn node(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_complemented(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn is_const(self) -> bool {
        self.node() == 0
    }

    /// Complement only when `flag` is set.
    pub fn xor_compl(self, flag: bool) -> Lit {
        Lit(self.0 ^ flag as u32)
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_complemented() {
            write!(f, "!n{}", self.node())
        } else {
            write!(f, "n{}", self.node())
        }
    }
}

/// Combinational and-inverter graph.
///
/// Node 0 is constant false, nodes `1..=num_inputs` are primary inputs and every
/// later node is a two-input AND. All inputs must be created before the first AND
/// so the node order is always topological.
#[derive(Clone)]
pub struct Aig {
    name: String,
    num_inputs: u32,
    ands: Vec<(Lit, Lit)>,
    outputs: Vec<Lit>,
    strash: FxHashMap<(Lit, Lit), u32>,
}

impl fmt::Debug for Aig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Aig")
            .field("name", &self.name)
            .field("inputs", &self.num_inputs)
            .field("ands", &self.ands.len())
            .field("outputs", &self.outputs)
            .finish()
    }
}

impl PartialEq for Aig {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.num_inputs == other.num_inputs
            && self.ands == other.ands
            && self.outputs == other.outputs
    }
}

impl Eq for Aig {}

impl Aig {
    pub fn new(name: impl Into<String>) -> Aig {
        Aig {
            name: name.into(),
            num_inputs: 0,
            ands: Vec::new(),
            outputs: Vec::new(),
            strash: FxHashMap::default(),
        }
    }

    /// Creates an AIG with `n` inputs already allocated.
    pub fn with_inputs(name: impl Into<String>, n: usize) -> (Aig, Vec<Lit>) {
        let mut aig = Aig::new(name);
        let lits = aig.add_inputs(n);
        (aig, lits)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    /// Adds a primary input.
    ///
    /// # Panics
    ///
    /// Panics if an AND node has already been created.
    pub fn add_input(&mut self) -> Lit {
        assert!(
            self.ands.is_empty(),
            "inputs must be created before AND nodes"
        );
        self.num_inputs += 1;
        Lit::new(self.num_inputs, false)
    }

    pub fn add_inputs(&mut self, n: usize) -> Vec<Lit> {
        (0..n).map(|_| self.add_input()).collect()
    }

    pub fn input(&self, i: usize) -> Lit {
        assert!(i < self.num_inputs as usize, "input {i} out of range");
        Lit::new(i as u32 + 1, false)
    }

    pub fn add_output(&mut self, lit: Lit) {
        debug_assert!(self.contains(lit));
        self.outputs.push(lit);
    }

    pub fn add_outputs(&mut self, lits: &[Lit]) {
        for &l in lits {
            self.add_output(l);
        }
    }

    pub fn outputs(&self) -> &[Lit] {
        &self.outputs
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs as usize
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn num_ands(&self) -> usize {
        self.ands.len()
    }

    /// Total node count including the constant node.
    pub fn num_nodes(&self) -> usize {
        1 + self.num_inputs as usize + self.ands.len()
    }

    pub fn first_and(&self) -> u32 {
        self.num_inputs + 1
    }

    pub fn is_input(&self, node: u32) -> bool {
        node >= 1 && node <= self.num_inputs
    }

    pub fn is_and(&self, node: u32) -> bool {
        node > self.num_inputs && (node as usize) < self.num_nodes()
    }

    /// Fanins of an AND node, `None` for constants and inputs.
    pub fn fanins(&self, node: u32) -> Option<(Lit, Lit)> {
        if self.is_and(node) {
            Some(self.ands[(node - self.first_and()) as usize])
        } else {
            None
        }
    }

    pub fn ands(&self) -> &[(Lit, Lit)] {
        &self.ands
    }

    pub fn contains(&self, lit: Lit) -> bool {
        (lit.node() as usize) < self.num_nodes()
    }

    /// AND of two literals with constant folding and structural hashing.
    pub fn add_and(&mut self, a: Lit, b: Lit) -> Lit {
        debug_assert!(self.contains(a) && self.contains(b));
        if a == Lit::FALSE || b == Lit::FALSE || a == !b {
            return Lit::FALSE;
        }
        if a == Lit::TRUE || a == b {
            return b;
        }
        if b == Lit::TRUE {
            return a;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        if let Some(&node) = self.strash.get(&key) {
            return Lit::new(node, false);
        }
        let node = self.num_nodes() as u32;
        self.ands.push(key);
        self.strash.insert(key, node);
        Lit::new(node, false)
    }

    pub fn add_or(&mut self, a: Lit, b: Lit) -> Lit {
        !self.add_and(!a, !b)
    }

    pub fn add_xor(&mut self, a: Lit, b: Lit) -> Lit {
        let l = self.add_and(a, !b);
        let r = self.add_and(!a, b);
        self.add_or(l, r)
    }

    /// `if sel { t } else { e }`.
    pub fn add_mux(&mut self, sel: Lit, t: Lit, e: Lit) -> Lit {
        let l = self.add_and(sel, t);
        let r = self.add_and(!sel, e);
        self.add_or(l, r)
    }

    /// Appends an AND node without folding or hashing. Used by the text reader so
    /// a parsed graph reproduces the stored node list exactly.
    pub(crate) fn push_raw_and(&mut self, a: Lit, b: Lit) -> Lit {
        let node = self.num_nodes() as u32;
        self.ands.push((a, b));
        self.strash.entry((a, b)).or_insert(node);
        Lit::new(node, false)
    }

    /// Copies `other` into `self`, driving its inputs with `inputs`; returns the
    /// literals of `other`'s outputs.
    pub fn instantiate(&mut self, other: &Aig, inputs: &[Lit]) -> Vec<Lit> {
        assert_eq!(inputs.len(), other.num_inputs(), "instance input arity");
        let mut map = Vec::with_capacity(other.num_nodes());
        map.push(Lit::FALSE);
        map.extend_from_slice(inputs);
        for &(a, b) in &other.ands {
            let fa = map[a.node() as usize].xor_compl(a.is_complemented());
            let fb = map[b.node() as usize].xor_compl(b.is_complemented());
            let l = self.add_and(fa, fb);
            map.push(l);
        }
        other
            .outputs
            .iter()
            .map(|o| map[o.node() as usize].xor_compl(o.is_complemented()))
            .collect()
    }
}
