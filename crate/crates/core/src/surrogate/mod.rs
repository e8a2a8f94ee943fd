//! Feature pipelines, training-set generation and from-scratch regressors.

mod bayes;
mod forest;
mod model;
mod pipeline;
mod stats;
mod svr;
mod training;

pub use bayes::{BayesParams, BayesianLinear};
pub use forest::{ForestParams, Node, RandomForest, Tree};
pub use model::{
    evaluate_model, fit_presets, preset_by_name, presets, select_best, train_bayesian_linear, train_random_forest,
    train_svr_analog, FitReport, Learner, ModelKind, ModelParams, Preset, RegressorModel, Standardizer,
};
pub use pipeline::{assemble_features, qor_features, FeatureSource, PipelineKind, QOR_SCHEMA};
pub use stats::{mean, median, pcc, std_dev};
pub use svr::{Kernel, Svr, SvrParams};
pub use training::{
    draw_labeled_sample, feature_rows, label_configurations, make_training_set, oracle_label, random_configurations,
    slot_choices, LabeledSample, OracleLabel, Target, TrainingSet, TEST_FRACTION,
};
