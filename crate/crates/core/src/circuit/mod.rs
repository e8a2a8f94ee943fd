//! And-inverter graphs: construction with structural hashing, bit-parallel
//! simulation, structural statistics, text serialisation and composition of
//! slot circuits into flattened accelerator netlists.

mod aig;
pub mod arith;
mod dataflow;
mod sim;
mod stats;
mod text;

pub use aig::{Aig, Lit};
pub use dataflow::{
    compose, compose_many, compose_with, ConstantMode, DataflowGraph, GraphOutput, Op, OpNode, Operand,
    SlotKind, SlotSpec, Source,
};
pub use sim::{exhaustive_word, pack_patterns, set_word_value, simulate, word_value, Simulator, WORD_BITS};
pub use stats::{levels, stats, AigStats};
pub use text::{read_aig, write_aig};
