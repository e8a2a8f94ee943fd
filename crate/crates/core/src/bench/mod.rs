//! Benchmark accelerators with integer reference models, bundled datasets and
//! quality-of-result evaluation.

mod data;
mod gaussian;
mod mac;
mod mcm;
mod multistage;
mod qor;
mod template;

pub use data::{synthetic_image, synthetic_signal, DatasetSeeds, Datasets, Grid, IMAGE_DATASET, SIGNAL_DATASET};
pub use gaussian::{gaussian_template, KERNEL};
pub use mac::mac_template;
pub use mcm::{mcm_templates, CONSTANTS as MCM_CONSTANTS, UNIT_COUNTS as MCM_UNIT_COUNTS};
pub use multistage::{multistage_template, STAGE_SLOTS};
pub use qor::{detect_peaks, peak_f1, psnr, QorMetric, QorValue, PEAK_TOLERANCE, PSNR_CAP};
pub use template::{
    evaluate_qor, run_stage, simulate_graph, AcceleratorTemplate, Configuration, QorEvaluator, Stage, Workload,
};

/// Looks a benchmark up by name: `gaussian`, `mcm1`..`mcm4`, `multistage`, `mac`.
pub fn template_by_name(name: &str) -> Option<AcceleratorTemplate> {
    match name {
        "gaussian" => Some(gaussian_template()),
        "multistage" => Some(multistage_template()),
        "mac" => Some(mac_template()),
        _ => mcm_templates().into_iter().find(|t| t.name == name),
    }
}
