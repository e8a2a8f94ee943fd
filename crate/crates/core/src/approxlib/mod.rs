//! Parameterised approximate adders and multipliers with exhaustive or sampled
//! error characterization and an on-disk, incrementally rebuilt library.

mod build;
mod library;
mod metrics;
mod spec;

pub use build::build_component;
pub use library::{
    generate_library, load_or_generate, Behavior, CacheReport, ClassSweep, ComponentMeta, ComponentRecord,
    FamilySweep, Library, LibraryConfig, LibraryManifest,
};
pub use metrics::{
    analytic_wce, characterize, characterize_exhaustive, characterize_sampled, ErrorMetrics, Method,
    EXHAUSTIVE_LIMIT, SAMPLE_COUNT,
};
pub use spec::{ComponentSpec, Family};
