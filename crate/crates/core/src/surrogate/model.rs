use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bayes::{BayesParams, BayesianLinear};
use super::forest::{ForestParams, RandomForest};
use super::stats::pcc;
use super::svr::{Kernel, Svr, SvrParams};
use super::training::{Target, TrainingSet};
use crate::backend::FeatureVector;
use crate::{Error, Result};

const MODEL_MAGIC: &str = "axdse-model";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    RandomForest,
    BayesianLinear,
    SvrAnalog,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::RandomForest => "random_forest",
            ModelKind::BayesianLinear => "bayesian_linear",
            ModelKind::SvrAnalog => "svr_analog",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Hyperparameters of one regressor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    RandomForest(ForestParams),
    BayesianLinear(BayesParams),
    SvrAnalog(SvrParams),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::RandomForest(_) => ModelKind::RandomForest,
            ModelParams::BayesianLinear(_) => ModelKind::BayesianLinear,
            ModelParams::SvrAnalog(_) => ModelKind::SvrAnalog,
        }
    }
}

/// Per-feature affine map to zero mean and unit variance (train-set statistics).
/// Constant features keep a unit scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let n = x.len() as f64;
        let mut mean = vec![0.0; d];
        let mut scale = vec![0.0; d];
        for j in 0..d {
            let m = x.iter().map(|r| r[j]).sum::<f64>() / n;
            let v = x.iter().map(|r| (r[j] - m) * (r[j] - m)).sum::<f64>() / n;
            mean[j] = m;
            scale[j] = if v > 0.0 { v.sqrt() } else { 1.0 };
        }
        Standardizer { mean, scale }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "snake_case")]
pub enum Learner {
    RandomForest(RandomForest),
    BayesianLinear(BayesianLinear),
    SvrAnalog(Svr),
}

/// A trained surrogate for one target quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorModel {
    pub kind: ModelKind,
    pub preset: String,
    pub target: Target,
    /// Feature schema the model was trained on.
    pub schema: String,
    pub names: Vec<String>,
    pub seed: u64,
    pub standardizer: Standardizer,
    pub learner: Learner,
    /// False when an iterative solver stopped on its budget.
    pub converged: bool,
}

impl RegressorModel {
    /// Fits `params` on raw feature rows.
    #[allow(clippy::too_many_arguments)]
    pub fn fit(
        preset: &str,
        params: ModelParams,
        target: Target,
        schema: &str,
        names: &[String],
        x: &[Vec<f64>],
        y: &[f64],
        seed: u64,
    ) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::Dimension(format!("{} rows but {} labels", x.len(), y.len())));
        }
        if x.iter().any(|r| r.len() != names.len()) {
            return Err(Error::Dimension("row width differs from feature names".into()));
        }
        let standardizer = Standardizer::fit(x);
        let xs: Vec<Vec<f64>> = x.iter().map(|r| standardizer.apply(r)).collect();
        let (learner, converged) = match params {
            ModelParams::RandomForest(p) => (Learner::RandomForest(RandomForest::fit(&xs, y, p, seed)?), true),
            ModelParams::BayesianLinear(p) => {
                let m = BayesianLinear::fit(&xs, y, p)?;
                let c = m.converged;
                (Learner::BayesianLinear(m), c)
            }
            ModelParams::SvrAnalog(p) => {
                let m = Svr::fit(&xs, y, p, seed)?;
                let c = m.converged;
                (Learner::SvrAnalog(m), c)
            }
        };
        Ok(RegressorModel {
            kind: params.kind(),
            preset: preset.to_string(),
            target,
            schema: schema.to_string(),
            names: names.to_vec(),
            seed,
            standardizer,
            learner,
            converged,
        })
    }

    /// Fits on the training split of `set`.
    pub fn train(set: &TrainingSet, preset: &Preset, seed: u64) -> Result<Self> {
        let (x, y) = set.train_rows();
        Self::fit(&preset.name, preset.params, set.target, &set.schema, &set.names, &x, &y, seed)
    }

    pub fn width(&self) -> usize {
        self.names.len()
    }

    pub fn check_schema(&self, schema: &str) -> Result<()> {
        if schema != self.schema {
            return Err(Error::SchemaMismatch {
                expected: self.schema.clone(),
                got: schema.to_string(),
            });
        }
        Ok(())
    }

    pub fn predict_one(&self, row: &[f64]) -> f64 {
        let z = self.standardizer.apply(row);
        match &self.learner {
            Learner::RandomForest(m) => m.predict(&z),
            Learner::BayesianLinear(m) => m.predict(&z),
            Learner::SvrAnalog(m) => m.predict(&z),
        }
    }

    /// Batch prediction over raw feature rows.
    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        if let Some(r) = rows.iter().find(|r| r.len() != self.width()) {
            return Err(Error::Dimension(format!("model expects {} features, got {}", self.width(), r.len())));
        }
        Ok(rows.par_iter().map(|r| self.predict_one(r)).collect())
    }

    /// Batch prediction over assembled feature vectors, checking their schema.
    pub fn predict_features(&self, features: &[FeatureVector]) -> Result<Vec<f64>> {
        if let Some(f) = features.first() {
            self.check_schema(&f.schema)?;
        }
        let rows: Vec<Vec<f64>> = features.iter().map(|f| f.values.clone()).collect();
        self.predict(&rows)
    }

    /// Predictive variance; available for the Bayesian model only.
    pub fn variance(&self, row: &[f64]) -> Option<f64> {
        match &self.learner {
            Learner::BayesianLinear(m) => Some(m.variance(&self.standardizer.apply(row))),
            _ => None,
        }
    }

    /// Linear model in raw feature units as `(weights, bias)`; Bayesian model only.
    pub fn raw_coefficients(&self) -> Option<(Vec<f64>, f64)> {
        let Learner::BayesianLinear(m) = &self.learner else {
            return None;
        };
        let s = &self.standardizer;
        let w: Vec<f64> = m.weights.iter().zip(&s.scale).map(|(w, sc)| w / sc).collect();
        let b = m.bias - w.iter().zip(&s.mean).map(|(w, mu)| w * mu).sum::<f64>();
        Some((w, b))
    }

    /// Header line `axdse-model <version> <kind> <target> <schema>` followed by a JSON body.
    pub fn to_text(&self) -> Result<String> {
        let mut s = format!(
            "{MODEL_MAGIC} {MODEL_VERSION} {} {} {}\n",
            self.kind, self.target, self.schema
        );
        s.push_str(&serde_json::to_string(self)?);
        s.push('\n');
        Ok(s)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (header, body) = text
            .split_once('\n')
            .ok_or_else(|| Error::ModelFormat("missing header line".into()))?;
        let fields: Vec<&str> = header.split(' ').collect();
        if fields.len() != 5 || fields[0] != MODEL_MAGIC {
            return Err(Error::ModelFormat(format!("bad header `{header}`")));
        }
        if fields[1] != MODEL_VERSION.to_string() {
            return Err(Error::ModelFormat(format!("unsupported model version {}", fields[1])));
        }
        let model: RegressorModel = serde_json::from_str(body)?;
        if fields[2] != model.kind.name() || fields[3] != model.target.name() || fields[4] != model.schema {
            return Err(Error::ModelFormat("header disagrees with model body".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// A named hyperparameter setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub params: ModelParams,
}

impl Preset {
    pub fn new(name: impl Into<String>, params: ModelParams) -> Self {
        Preset {
            name: name.into(),
            params,
        }
    }
}

/// The registered model presets: 7 forests, 5 Bayesian linear models and 8 SVR variants.
pub fn presets() -> Vec<Preset> {
    let rf = |name: &str, trees, max_depth, min_leaf, max_features| {
        Preset::new(
            name,
            ModelParams::RandomForest(ForestParams {
                trees,
                max_depth,
                min_leaf,
                max_features,
                bootstrap: true,
            }),
        )
    };
    let fixed = |name: &str, alpha, beta| Preset::new(name, ModelParams::BayesianLinear(BayesParams::Fixed { alpha, beta }));
    let svr = |name: &str, epsilon, c, kernel| {
        Preset::new(
            name,
            ModelParams::SvrAnalog(SvrParams {
                epsilon,
                c,
                kernel,
                ..SvrParams::default()
            }),
        )
    };
    vec![
        rf("rf_default", 100, 12, 2, None),
        rf("rf_t50_d8", 50, 8, 2, None),
        rf("rf_t200_d16", 200, 16, 2, None),
        rf("rf_t100_d6", 100, 6, 2, None),
        rf("rf_t100_d12_leaf5", 100, 12, 5, None),
        rf("rf_t30_d12", 30, 12, 2, None),
        rf("rf_t100_d12_all", 100, 12, 2, Some(usize::MAX)),
        Preset::new("bayes_evidence", ModelParams::BayesianLinear(BayesParams::default())),
        fixed("bayes_a1e-2_b1", 1e-2, 1.0),
        fixed("bayes_a1_b1", 1.0, 1.0),
        fixed("bayes_a10_b1", 10.0, 1.0),
        fixed("bayes_a1_b1e-2", 1.0, 1e-2),
        svr("svr_lin_c0.1", 0.1, 0.1, Kernel::Linear),
        svr("svr_lin_c1", 0.1, 1.0, Kernel::Linear),
        svr("svr_lin_c10", 0.1, 10.0, Kernel::Linear),
        svr("svr_lin_e0.01", 0.01, 1.0, Kernel::Linear),
        svr("svr_rbf_g0.01_c1", 0.1, 1.0, Kernel::Rbf { gamma: 0.01 }),
        svr("svr_rbf_g0.01_c10", 0.1, 10.0, Kernel::Rbf { gamma: 0.01 }),
        svr("svr_rbf_g0.1_c1", 0.1, 1.0, Kernel::Rbf { gamma: 0.1 }),
        svr("svr_rbf_g0.1_c10", 0.1, 10.0, Kernel::Rbf { gamma: 0.1 }),
    ]
}

pub fn preset_by_name(name: &str) -> Result<Preset> {
    presets()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::Parameter(format!("unknown model preset `{name}`")))
}

pub fn train_random_forest(set: &TrainingSet, params: ForestParams, seed: u64) -> Result<RegressorModel> {
    RegressorModel::train(set, &Preset::new("random_forest", ModelParams::RandomForest(params)), seed)
}

pub fn train_bayesian_linear(set: &TrainingSet, params: BayesParams) -> Result<RegressorModel> {
    RegressorModel::train(set, &Preset::new("bayesian_linear", ModelParams::BayesianLinear(params)), 0)
}

pub fn train_svr_analog(set: &TrainingSet, params: SvrParams, seed: u64) -> Result<RegressorModel> {
    RegressorModel::train(set, &Preset::new("svr_analog", ModelParams::SvrAnalog(params)), seed)
}

/// Train and held-out correlation of one fitted model. `None` marks an undefined
/// correlation (constant labels or predictions), reported as degenerate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub preset: String,
    pub kind: ModelKind,
    pub target: Target,
    pub pcc_train: Option<f64>,
    pub pcc_test: Option<f64>,
    pub converged: bool,
}

impl FitReport {
    pub fn degenerate(&self) -> bool {
        self.pcc_test.is_none()
    }
}

pub fn evaluate_model(model: &RegressorModel, set: &TrainingSet) -> Result<FitReport> {
    let score = |idx: &[usize]| -> Result<Option<f64>> {
        let (x, y) = set.rows(idx);
        if y.len() < 2 {
            return Ok(None);
        }
        match pcc(&y, &model.predict(&x)?) {
            Ok(r) => Ok(Some(r)),
            Err(Error::UndefinedCorrelation(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    Ok(FitReport {
        preset: model.preset.clone(),
        kind: model.kind,
        target: model.target,
        pcc_train: score(&set.train)?,
        pcc_test: score(&set.test)?,
        converged: model.converged,
    })
}

/// Fits every preset on `set`, returning models with their reports in preset order.
pub fn fit_presets(set: &TrainingSet, presets: &[Preset], seed: u64) -> Result<Vec<(RegressorModel, FitReport)>> {
    presets
        .iter()
        .map(|p| {
            let m = RegressorModel::train(set, p, seed)?;
            let r = evaluate_model(&m, set)?;
            Ok((m, r))
        })
        .collect()
}

/// Index of the report with the highest held-out correlation; degenerate reports rank last,
/// ties keep the earlier preset.
pub fn select_best(reports: &[FitReport]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in reports.iter().enumerate() {
        let v = r.pcc_test.unwrap_or(f64::NEG_INFINITY);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}
