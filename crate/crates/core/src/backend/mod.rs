//! Hardware cost estimation. The exact oracle maps a circuit onto k-input LUTs
//! and derives LUT count, logic depth and a switching-activity power proxy; the
//! fast extractor reports structural statistics without mapping.

mod features;
mod mapping;
mod power;

pub use features::{
    composed_component_features, exact_cost, exact_cost_counted, fast_features, fast_features_counted,
    ComponentSource, CostEstimate, FeatureVector, DEFAULT_K, FAST_NAMES, FAST_SCHEMA,
};
pub use mapping::{map_luts, LutMapping, MappedLut, CUT_LIMIT, MAX_K, MIN_K};
pub use power::{power_report, switching_power, PowerReport};
