use serde::{Deserialize, Serialize};

use super::archive::ParetoArchive;
use super::evaluate::{EvalSource, Evaluator};
use crate::surrogate::pcc;
use crate::{Error, Result};

/// Estimated and true objectives of one archive member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub genome: Vec<usize>,
    pub estimated: Vec<f64>,
    pub truth: Vec<f64>,
    /// Whether the member survives on the true-value front.
    pub on_front: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalReport {
    pub archive: ParetoArchive,
    /// One row per input archive member, in archive order.
    pub residuals: Vec<Residual>,
    pub oracle_calls: u64,
}

impl FinalReport {
    /// Correlation of estimated against true values of objective `k` over all re-scored
    /// members; `None` when undefined.
    pub fn residual_pcc(&self, k: usize) -> Option<f64> {
        let t: Vec<f64> = self.residuals.iter().map(|r| r.truth[k]).collect();
        let e: Vec<f64> = self.residuals.iter().map(|r| r.estimated[k]).collect();
        pcc(&t, &e).ok()
    }
}

/// Re-scores every member with the exact oracle and keeps the true-value Pareto set.
pub fn final_evaluation(archive: &ParetoArchive, oracle: &dyn Evaluator) -> Result<FinalReport> {
    if oracle.source() != EvalSource::Oracle {
        return Err(Error::Parameter("final evaluation requires the exact oracle".into()));
    }
    let genomes: Vec<Vec<usize>> = archive.members().iter().map(|m| m.genome.clone()).collect();
    let truth = oracle.evaluate(&genomes)?;
    let mut front = ParetoArchive::new();
    for (m, t) in archive.members().iter().zip(&truth) {
        front.insert(&m.genome, t, m.generation);
    }
    let residuals = archive
        .members()
        .iter()
        .zip(truth)
        .map(|(m, t)| Residual {
            on_front: front.members().iter().any(|f| f.genome == m.genome && f.objectives == t),
            genome: m.genome.clone(),
            estimated: m.objectives.clone(),
            truth: t,
        })
        .collect();
    Ok(FinalReport {
        archive: front,
        residuals,
        oracle_calls: genomes.len() as u64,
    })
}
