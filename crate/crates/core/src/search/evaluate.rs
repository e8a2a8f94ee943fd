use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use super::objective::Objective;
use crate::approxlib::{ComponentRecord, Library};
use crate::backend::{exact_cost, FeatureVector};
use crate::bench::{AcceleratorTemplate, Configuration, QorEvaluator, QorMetric};
use crate::surrogate::{assemble_features, qor_features, PipelineKind, RegressorModel};
use crate::{Error, Result};

/// Whether objective values come from trained models or from the exact oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalSource {
    Surrogate { models: usize },
    Oracle,
}

/// Batch objective evaluation of genomes (library index per slot) in minimization form.
pub trait Evaluator: Sync {
    fn objectives(&self) -> &[Objective];

    fn source(&self) -> EvalSource;

    /// One call evaluates the whole batch; results keep batch order.
    fn evaluate(&self, genomes: &[Vec<usize>]) -> Result<Vec<Vec<f64>>>;
}

fn records<'l>(library: &'l Library, genome: &[usize]) -> Vec<&'l ComponentRecord> {
    genome.iter().map(|&i| library.record(i)).collect()
}

/// Estimates objectives with one QoR model and one model per hardware objective.
pub struct SurrogateEvaluator<'a> {
    template: &'a AcceleratorTemplate,
    library: &'a Library,
    pipeline: PipelineKind,
    objectives: Vec<Objective>,
    /// Model per objective, in objective order.
    models: Vec<&'a RegressorModel>,
}

impl<'a> SurrogateEvaluator<'a> {
    /// Checks every model against the feature schema the pipeline produces.
    pub fn new(
        template: &'a AcceleratorTemplate,
        library: &'a Library,
        pipeline: PipelineKind,
        objectives: &[Objective],
        qor_model: &'a RegressorModel,
        hw_models: &[(Objective, &'a RegressorModel)],
    ) -> Result<Self> {
        let probe = Configuration::accurate(template, library)?.indices(template, library)?;
        let recs = records(library, &probe);
        let hw = if hw_models.is_empty() {
            None
        } else {
            Some(assemble_features(pipeline, template, &recs)?)
        };
        let check = |m: &RegressorModel, f: &FeatureVector| -> Result<()> {
            m.check_schema(&f.schema)?;
            if m.names != f.names {
                return Err(Error::SchemaMismatch {
                    expected: m.names.join(","),
                    got: f.names.join(","),
                });
            }
            Ok(())
        };
        let mut models = Vec::with_capacity(objectives.len());
        for &o in objectives {
            if o == Objective::Qor {
                check(qor_model, &qor_features(&recs))?;
                models.push(qor_model);
            } else {
                let (_, m) = hw_models
                    .iter()
                    .find(|(obj, _)| *obj == o)
                    .ok_or_else(|| Error::Parameter(format!("no model for objective {o}")))?;
                check(m, hw.as_ref().expect("hardware features"))?;
                models.push(*m);
            }
        }
        Ok(SurrogateEvaluator {
            template,
            library,
            pipeline,
            objectives: objectives.to_vec(),
            models,
        })
    }
}

impl Evaluator for SurrogateEvaluator<'_> {
    fn objectives(&self) -> &[Objective] {
        &self.objectives
    }

    fn source(&self) -> EvalSource {
        EvalSource::Surrogate {
            models: self.models.len(),
        }
    }

    fn evaluate(&self, genomes: &[Vec<usize>]) -> Result<Vec<Vec<f64>>> {
        let need_hw = self.objectives.iter().any(|&o| o != Objective::Qor);
        let need_qor = self.objectives.contains(&Objective::Qor);
        let rows: Vec<(Option<Vec<f64>>, Option<Vec<f64>>)> = genomes
            .par_iter()
            .map(|g| {
                let recs = records(self.library, g);
                let hw = if need_hw {
                    Some(assemble_features(self.pipeline, self.template, &recs)?.values)
                } else {
                    None
                };
                let q = need_qor.then(|| qor_features(&recs).values);
                Ok((hw, q))
            })
            .collect::<Result<_>>()?;
        let hw_rows: Vec<Vec<f64>> = rows.iter().filter_map(|r| r.0.clone()).collect();
        let qor_rows: Vec<Vec<f64>> = rows.into_iter().filter_map(|r| r.1).collect();
        let metric = self.template.metric;
        let mut columns = Vec::with_capacity(self.objectives.len());
        for (o, m) in self.objectives.iter().zip(&self.models) {
            let col = if *o == Objective::Qor {
                m.predict(&qor_rows)?.into_iter().map(|v| metric.to_error(v)).collect()
            } else {
                m.predict(&hw_rows)?
            };
            columns.push(col);
        }
        Ok((0..genomes.len()).map(|i| columns.iter().map(|c: &Vec<f64>| c[i]).collect()).collect())
    }
}

/// Exact objectives from composing, mapping and simulating every candidate.
pub struct OracleEvaluator<'a> {
    template: &'a AcceleratorTemplate,
    library: &'a Library,
    qor: QorEvaluator<'a>,
    objectives: Vec<Objective>,
    calls: AtomicU64,
}

impl<'a> OracleEvaluator<'a> {
    pub fn new(template: &'a AcceleratorTemplate, library: &'a Library, qor: QorEvaluator<'a>, objectives: &[Objective]) -> Self {
        OracleEvaluator {
            template,
            library,
            qor,
            objectives: objectives.to_vec(),
            calls: AtomicU64::new(0),
        }
    }

    /// Candidates evaluated so far.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn metric(&self) -> QorMetric {
        self.template.metric
    }
}

impl Evaluator for OracleEvaluator<'_> {
    fn objectives(&self) -> &[Objective] {
        &self.objectives
    }

    fn source(&self) -> EvalSource {
        EvalSource::Oracle
    }

    fn evaluate(&self, genomes: &[Vec<usize>]) -> Result<Vec<Vec<f64>>> {
        self.calls.fetch_add(genomes.len() as u64, Ordering::Relaxed);
        let need_hw = self.objectives.iter().any(|&o| o != Objective::Qor);
        let metric = self.template.metric;
        genomes
            .par_iter()
            .map(|g| {
                let recs = records(self.library, g);
                let cost = if need_hw {
                    exact_cost(&self.template.compose(&recs)?, self.library.config.lut_k)?
                } else {
                    Default::default()
                };
                self.objectives
                    .iter()
                    .map(|o| {
                        Ok(match o {
                            Objective::Qor => metric.to_error(self.qor.evaluate(&recs)?),
                            Objective::Power => cost.power,
                            Objective::Luts => cost.luts as f64,
                            Objective::Delay => cost.delay as f64,
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

/// Wraps an evaluator so genomes are first mapped to full configurations.
pub struct MappedEvaluator<'a, F> {
    pub inner: &'a dyn Evaluator,
    pub map: F,
}

impl<F> Evaluator for MappedEvaluator<'_, F>
where
    F: Fn(&[usize]) -> Vec<usize> + Sync,
{
    fn objectives(&self) -> &[Objective] {
        self.inner.objectives()
    }

    fn source(&self) -> EvalSource {
        self.inner.source()
    }

    fn evaluate(&self, genomes: &[Vec<usize>]) -> Result<Vec<Vec<f64>>> {
        let full: Vec<Vec<usize>> = genomes.iter().map(|g| (self.map)(g)).collect();
        self.inner.evaluate(&full)
    }
}

/// Table-driven evaluator for tests and toy spaces: objectives are computed by a closure.
pub struct FnEvaluator<F> {
    pub objectives: Vec<Objective>,
    pub source: EvalSource,
    pub f: F,
}

impl<F> Evaluator for FnEvaluator<F>
where
    F: Fn(&[usize]) -> Vec<f64> + Sync,
{
    fn objectives(&self) -> &[Objective] {
        &self.objectives
    }

    fn source(&self) -> EvalSource {
        self.source
    }

    fn evaluate(&self, genomes: &[Vec<usize>]) -> Result<Vec<Vec<f64>>> {
        Ok(genomes.iter().map(|g| (self.f)(g)).collect())
    }
}
