use serde::{Deserialize, Serialize};

use super::mapping::map_luts;
use super::power::switching_power;
use crate::approxlib::ComponentRecord;
use crate::circuit::{stats, Aig, SlotKind};
use crate::{Error, Result};

pub const FAST_SCHEMA: &str = "fast-v1";
pub const FAST_NAMES: [&str; 5] = [
    "and_count",
    "level_count",
    "input_count",
    "output_count",
    "inverter_edge_count",
];

/// LUT size used by the exact oracle unless configured otherwise.
pub const DEFAULT_K: usize = 6;

/// Exact-oracle hardware cost of one circuit.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostEstimate {
    pub luts: usize,
    /// LUT levels on the critical path.
    pub delay: u32,
    pub power: f64,
}

/// Ordered, named real-valued features tagged with a schema identifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub schema: String,
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(schema: impl Into<String>) -> Self {
        FeatureVector {
            schema: schema.into(),
            names: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64) {
        self.names.push(name.into());
        self.values.push(value);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Appends `other`, joining the schema tags with `+`.
    pub fn concat(mut self, other: &FeatureVector) -> Self {
        self.schema = format!("{}+{}", self.schema, other.schema);
        self.names.extend(other.names.iter().cloned());
        self.values.extend_from_slice(&other.values);
        self
    }
}

/// Maps the circuit with `k`-LUTs and bundles count, depth and power.
pub fn exact_cost(aig: &Aig, k: usize) -> Result<CostEstimate> {
    exact_cost_counted(aig, k).map(|(c, _)| c)
}

/// [`exact_cost`] plus the number of cut-enumeration leaf visits it spent.
pub fn exact_cost_counted(aig: &Aig, k: usize) -> Result<(CostEstimate, u64)> {
    let m = map_luts(aig, k)?;
    let power = switching_power(aig, &m);
    Ok((
        CostEstimate {
            luts: m.lut_count(),
            delay: m.depth,
            power,
        },
        m.work,
    ))
}

pub fn fast_features(aig: &Aig) -> FeatureVector {
    fast_features_counted(aig).0
}

/// [`fast_features`] plus the number of node visits spent.
pub fn fast_features_counted(aig: &Aig) -> (FeatureVector, u64) {
    let s = stats(aig);
    let mut f = FeatureVector::new(FAST_SCHEMA);
    for (name, v) in FAST_NAMES.iter().zip([
        s.and_count as f64,
        s.level_count as f64,
        s.input_count as f64,
        s.output_count as f64,
        s.inverter_edge_count as f64,
    ]) {
        f.push(*name, v);
    }
    (f, aig.num_nodes() as u64 + aig.num_outputs() as u64)
}

/// Which cached per-component quantities are summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComponentSource {
    /// Exact-oracle costs: LUTs, power, delay.
    Exact,
    /// Structural features: AND count, level count.
    Fast,
}

impl ComponentSource {
    pub fn schema(self) -> &'static str {
        match self {
            ComponentSource::Exact => "comp-exact-v1",
            ComponentSource::Fast => "comp-fast-v1",
        }
    }

    fn quantities(self) -> &'static [&'static str] {
        match self {
            ComponentSource::Exact => &["luts", "power", "delay"],
            ComponentSource::Fast => &["and_count", "level_count"],
        }
    }
}

fn quantity(r: &ComponentRecord, name: &str) -> f64 {
    match name {
        "luts" => r.exact_cost.luts as f64,
        "power" => r.exact_cost.power,
        "delay" => r.exact_cost.delay as f64,
        "and_count" => r.features.values[0],
        "level_count" => r.features.values[1],
        _ => unreachable!(),
    }
}

/// Per-kind sums of cached component quantities, without elaborating the
/// accelerator. Kinds appear in the order adder, multiplier, skipping absent ones.
pub fn composed_component_features(records: &[&ComponentRecord], source: ComponentSource) -> Result<FeatureVector> {
    let mut f = FeatureVector::new(source.schema());
    for kind in [SlotKind::Adder, SlotKind::Multiplier] {
        let of_kind: Vec<_> = records.iter().filter(|r| r.spec.kind == kind).collect();
        if of_kind.is_empty() {
            continue;
        }
        for q in source.quantities() {
            let mut sum = 0.0;
            for r in &of_kind {
                if r.features.schema != FAST_SCHEMA {
                    return Err(Error::CacheMiss(format!("features of {} not cached", r.id)));
                }
                sum += quantity(r, q);
            }
            f.push(format!("{}_{}", kind.tag(), q), sum);
        }
    }
    Ok(f)
}
