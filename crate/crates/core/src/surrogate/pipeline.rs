use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::approxlib::ComponentRecord;
use crate::backend::{composed_component_features, fast_features, ComponentSource, FeatureVector};
use crate::bench::AcceleratorTemplate;
use crate::{Error, Result};

/// Where per-component or accelerator-level features come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSource {
    None,
    Exact,
    Fast,
}

/// Feature pipelines A-F.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PipelineKind {
    /// Direct oracle evaluation, no surrogate.
    A,
    /// Exact per-component costs.
    B,
    /// Fast per-component features.
    C,
    /// Fast per-component plus fast accelerator features.
    D,
    /// Exact per-component costs plus fast accelerator features.
    E,
    /// Fast accelerator features only.
    F,
}

impl PipelineKind {
    pub const ALL: [PipelineKind; 6] = [
        PipelineKind::A,
        PipelineKind::B,
        PipelineKind::C,
        PipelineKind::D,
        PipelineKind::E,
        PipelineKind::F,
    ];

    pub fn component_source(self) -> FeatureSource {
        match self {
            PipelineKind::A | PipelineKind::F => FeatureSource::None,
            PipelineKind::B | PipelineKind::E => FeatureSource::Exact,
            PipelineKind::C | PipelineKind::D => FeatureSource::Fast,
        }
    }

    pub fn accelerator_source(self) -> FeatureSource {
        match self {
            PipelineKind::D | PipelineKind::E | PipelineKind::F => FeatureSource::Fast,
            _ => FeatureSource::None,
        }
    }

    /// Whether assembling features requires elaborating the accelerator.
    pub fn needs_composition(self) -> bool {
        self.accelerator_source() != FeatureSource::None
    }

    pub fn tag(self) -> &'static str {
        match self {
            PipelineKind::A => "A",
            PipelineKind::B => "B",
            PipelineKind::C => "C",
            PipelineKind::D => "D",
            PipelineKind::E => "E",
            PipelineKind::F => "F",
        }
    }
}

impl fmt::Display for PipelineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PipelineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PipelineKind::ALL
            .into_iter()
            .find(|p| p.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parameter(format!("unknown pipeline `{s}`")))
    }
}

/// Hardware features of one configuration under `pipeline`.
pub fn assemble_features(
    pipeline: PipelineKind,
    template: &AcceleratorTemplate,
    records: &[&ComponentRecord],
) -> Result<FeatureVector> {
    let component = match pipeline.component_source() {
        FeatureSource::Exact => Some(composed_component_features(records, ComponentSource::Exact)?),
        FeatureSource::Fast => Some(composed_component_features(records, ComponentSource::Fast)?),
        FeatureSource::None => None,
    };
    let accelerator = if pipeline.needs_composition() {
        Some(fast_features(&template.compose(records)?))
    } else {
        None
    };
    match (component, accelerator) {
        (Some(c), Some(a)) => Ok(c.concat(&a)),
        (Some(c), None) => Ok(c),
        (None, Some(a)) => Ok(a),
        (None, None) => Err(Error::NotASurrogate),
    }
}

pub const QOR_SCHEMA: &str = "qor-v1";

/// Per-slot (mae, mre, wce, error_rate), concatenated in slot order.
pub fn qor_features(records: &[&ComponentRecord]) -> FeatureVector {
    let mut f = FeatureVector::new(QOR_SCHEMA);
    for (i, r) in records.iter().enumerate() {
        let e = &r.errors;
        f.push(format!("s{i}_mae"), e.mae);
        f.push(format!("s{i}_mre"), e.mre);
        f.push(format!("s{i}_wce"), e.wce as f64);
        f.push(format!("s{i}_error_rate"), e.error_rate);
    }
    f
}
