use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pipeline::{assemble_features, qor_features, PipelineKind};
use crate::approxlib::{ComponentRecord, Library};
use crate::backend::{exact_cost, CostEstimate};
use crate::bench::{AcceleratorTemplate, Datasets, QorEvaluator};
use crate::{Error, Result};

/// Default held-out fraction.
pub const TEST_FRACTION: f64 = 0.2;

/// Scalar quantity a surrogate predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Power,
    Luts,
    Delay,
    Qor,
}

impl Target {
    pub const ALL: [Target; 4] = [Target::Power, Target::Luts, Target::Delay, Target::Qor];

    pub fn name(self) -> &'static str {
        match self {
            Target::Power => "power",
            Target::Luts => "luts",
            Target::Delay => "delay",
            Target::Qor => "qor",
        }
    }

    pub fn is_hardware(self) -> bool {
        self != Target::Qor
    }

    pub fn of(self, label: &OracleLabel) -> f64 {
        match self {
            Target::Power => label.cost.power,
            Target::Luts => label.cost.luts as f64,
            Target::Delay => label.cost.delay as f64,
            Target::Qor => label.qor,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Target::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown target `{s}`")))
    }
}

/// True hardware cost and QoR of one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleLabel {
    pub cost: CostEstimate,
    pub qor: f64,
}

/// Runs the exact oracle (synthesis analog plus application simulation) on one configuration.
pub fn oracle_label(
    template: &AcceleratorTemplate,
    records: &[&ComponentRecord],
    evaluator: &QorEvaluator,
    lut_k: usize,
) -> Result<OracleLabel> {
    let cost = exact_cost(&template.compose(records)?, lut_k)?;
    let qor = evaluator.evaluate(records)?;
    Ok(OracleLabel { cost, qor })
}

/// Labels every configuration (library indices per slot); results keep input order.
pub fn label_configurations(
    template: &AcceleratorTemplate,
    library: &Library,
    evaluator: &QorEvaluator,
    configs: &[Vec<usize>],
) -> Result<Vec<OracleLabel>> {
    configs
        .par_iter()
        .map(|c| {
            let recs: Vec<&ComponentRecord> = c.iter().map(|&i| library.record(i)).collect();
            oracle_label(template, &recs, evaluator, library.config.lut_k)
        })
        .collect()
}

/// Draws `n` configurations with every slot chosen uniformly among compatible components.
pub fn random_configurations<R: Rng>(
    template: &AcceleratorTemplate,
    library: &Library,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Vec<usize>>> {
    let choices = slot_choices(template, library)?;
    Ok((0..n)
        .map(|_| choices.iter().map(|c| *c.choose(rng).expect("non-empty")).collect())
        .collect())
}

/// Compatible library indices per slot of `template`.
pub fn slot_choices<'l>(template: &AcceleratorTemplate, library: &'l Library) -> Result<Vec<&'l [usize]>> {
    template
        .slots()
        .into_iter()
        .map(|s| {
            let c = library.choices(s);
            if c.is_empty() {
                Err(Error::CacheMiss(format!("no library component for slot {}{}", s.kind.tag(), s.width)))
            } else {
                Ok(c)
            }
        })
        .collect()
}

/// Random configurations together with their oracle labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub seed: u64,
    pub configs: Vec<Vec<usize>>,
    pub labels: Vec<OracleLabel>,
}

impl LabeledSample {
    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    /// Oracle evaluations spent on the sample.
    pub fn oracle_calls(&self) -> u64 {
        self.labels.len() as u64
    }
}

/// Samples and labels `n` random configurations.
pub fn draw_labeled_sample(
    template: &AcceleratorTemplate,
    library: &Library,
    evaluator: &QorEvaluator,
    n: usize,
    seed: u64,
) -> Result<LabeledSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let configs = random_configurations(template, library, n, &mut rng)?;
    let labels = label_configurations(template, library, evaluator, &configs)?;
    Ok(LabeledSample { seed, configs, labels })
}

/// Feature rows of `configs` for predicting `target` under `pipeline`.
///
/// QoR models always use the per-slot error features; hardware models use the pipeline's
/// feature assembly. Returns the schema, the feature names and the rows.
pub fn feature_rows(
    template: &AcceleratorTemplate,
    library: &Library,
    pipeline: PipelineKind,
    target: Target,
    configs: &[Vec<usize>],
) -> Result<(String, Vec<String>, Vec<Vec<f64>>)> {
    if configs.is_empty() {
        return Err(Error::Dimension("no configurations".into()));
    }
    let vectors = configs
        .par_iter()
        .map(|c| {
            let recs: Vec<&ComponentRecord> = c.iter().map(|&i| library.record(i)).collect();
            if target.is_hardware() {
                assemble_features(pipeline, template, &recs)
            } else {
                Ok(qor_features(&recs))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let schema = vectors[0].schema.clone();
    let names = vectors[0].names.clone();
    Ok((schema, names, vectors.into_iter().map(|v| v.values).collect()))
}

/// A feature matrix with labels and a seeded train/test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub schema: String,
    pub names: Vec<String>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub pipeline: PipelineKind,
    pub target: Target,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub split_seed: u64,
}

impl TrainingSet {
    /// Builds a set from explicit rows; rows are split with `split_seed`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        schema: String,
        names: Vec<String>,
        x: Vec<Vec<f64>>,
        y: Vec<f64>,
        pipeline: PipelineKind,
        target: Target,
        test_fraction: f64,
        split_seed: u64,
    ) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Dimension(format!("{} rows but {} labels", x.len(), y.len())));
        }
        if x.iter().any(|r| r.len() != names.len()) {
            return Err(Error::Dimension("row width differs from feature names".into()));
        }
        if x.iter().flatten().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::Dimension("non-finite entry in training data".into()));
        }
        if !(0.0..1.0).contains(&test_fraction) {
            return Err(Error::Parameter(format!("test fraction {test_fraction} outside [0, 1)")));
        }
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(split_seed));
        let n_test = (x.len() as f64 * test_fraction).round() as usize;
        let mut test = order[..n_test].to_vec();
        let mut train = order[n_test..].to_vec();
        test.sort_unstable();
        train.sort_unstable();
        Ok(TrainingSet {
            schema,
            names,
            x,
            y,
            pipeline,
            target,
            train,
            test,
            split_seed,
        })
    }

    /// Features and labels of a labeled sample.
    pub fn from_sample(
        sample: &LabeledSample,
        template: &AcceleratorTemplate,
        library: &Library,
        pipeline: PipelineKind,
        target: Target,
        test_fraction: f64,
    ) -> Result<Self> {
        let (schema, names, x) = feature_rows(template, library, pipeline, target, &sample.configs)?;
        let y = sample.labels.iter().map(|l| target.of(l)).collect();
        Self::new(schema, names, x, y, pipeline, target, test_fraction, sample.seed)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn width(&self) -> usize {
        self.names.len()
    }

    pub fn rows(&self, idx: &[usize]) -> (Vec<Vec<f64>>, Vec<f64>) {
        (idx.iter().map(|&i| self.x[i].clone()).collect(), idx.iter().map(|&i| self.y[i]).collect())
    }

    pub fn train_rows(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        self.rows(&self.train)
    }

    pub fn test_rows(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        self.rows(&self.test)
    }
}

/// Samples `n` random configurations, labels them with the oracle and assembles features.
pub fn make_training_set(
    template: &AcceleratorTemplate,
    library: &Library,
    datasets: &Datasets,
    n: usize,
    seed: u64,
    pipeline: PipelineKind,
    target: Target,
) -> Result<TrainingSet> {
    if n < 10 {
        return Err(Error::Parameter(format!("training set needs at least 10 rows, got {n}")));
    }
    if pipeline == PipelineKind::A && target.is_hardware() {
        return Err(Error::NotASurrogate);
    }
    let evaluator = QorEvaluator::new(template, datasets)?;
    let sample = draw_labeled_sample(template, library, &evaluator, n, seed)?;
    TrainingSet::from_sample(&sample, template, library, pipeline, target, TEST_FRACTION)
}
