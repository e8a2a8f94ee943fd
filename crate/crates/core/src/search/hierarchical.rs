use serde::{Deserialize, Serialize};

use super::archive::{Member, ParetoArchive};
use super::engines::{es_moo, EsParams, GenerationTrace};
use super::evaluate::{Evaluator, MappedEvaluator};
use crate::approxlib::Library;
use crate::bench::AcceleratorTemplate;
use crate::surrogate::slot_choices;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageMode {
    /// One search over every slot.
    Flat,
    /// Per-stage searches, then a combined search over per-stage Pareto sets.
    Staged,
}

/// Outcome of a hierarchical or flat search; archive members are full slot assignments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalResult {
    pub mode: StageMode,
    pub archive: ParetoArchive,
    pub trace: GenerationTrace,
    /// Genes of the final search: slot count (flat) or stage count (staged).
    pub genome_arity: usize,
    /// Pareto-set size per stage (empty in flat mode).
    pub stage_set_sizes: Vec<usize>,
    /// Candidate evaluations spent per phase: stages in order, then the combined search.
    pub phase_budgets: Vec<usize>,
    /// Successful insertions of every phase as full configurations, with generations
    /// numbered along the concatenated trace.
    pub inserted: Vec<Member>,
}

/// Splits `budget` into `stages` equal per-stage shares (floor) and gives the remainder to
/// the combined phase.
pub fn split_budget(budget: usize, stages: usize) -> (usize, usize) {
    let per_stage = budget / (stages + 1);
    (per_stage, budget - stages * per_stage)
}

fn generations_for(budget: usize, es: &EsParams) -> usize {
    (budget / (es.mu * es.lambda)).max(1)
}

/// Runs the flat or staged search with ES under a total budget of candidate evaluations.
///
/// In staged mode each stage is searched with the other stages fixed to accurate components
/// and evaluated on the full application. The combined search picks one member of every
/// stage's Pareto set per gene. Stage archives are merged into the final archive since their
/// members are full configurations evaluated the same way.
pub fn hierarchical_search(
    template: &AcceleratorTemplate,
    library: &Library,
    evaluator: &dyn Evaluator,
    mode: StageMode,
    budget: usize,
    es: EsParams,
) -> Result<HierarchicalResult> {
    let choices: Vec<Vec<usize>> = slot_choices(template, library)?.into_iter().map(<[usize]>::to_vec).collect();
    if es.mu == 0 || es.lambda == 0 || budget < es.mu * es.lambda {
        return Err(Error::Parameter(format!(
            "budget {budget} below one ES generation of {} candidates",
            es.mu * es.lambda
        )));
    }
    if mode == StageMode::Flat {
        let params = EsParams {
            generations: generations_for(budget, &es),
            ..es
        };
        let r = es_moo(evaluator, &choices, params)?;
        return Ok(HierarchicalResult {
            mode,
            archive: r.archive,
            trace: r.trace,
            genome_arity: choices.len(),
            stage_set_sizes: Vec::new(),
            phase_budgets: vec![params.generations * es.mu * es.lambda],
            inserted: r.inserted,
        });
    }

    let ranges = template.stage_ranges();
    if ranges.len() < 2 {
        return Err(Error::Parameter("staged search needs at least two stages".into()));
    }
    let accurate: Vec<usize> = template
        .slots()
        .into_iter()
        .map(|s| library.accurate(s))
        .collect::<Result<_>>()?;
    let (per_stage, combined) = split_budget(budget, ranges.len());
    let mut trace = GenerationTrace::default();
    let mut merged = ParetoArchive::new();
    let mut stage_sets: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut phase_budgets = Vec::new();
    let mut inserted = Vec::new();
    for (s, range) in ranges.iter().enumerate() {
        let local: Vec<Vec<usize>> = (0..choices.len())
            .map(|i| if range.contains(&i) { choices[i].clone() } else { vec![accurate[i]] })
            .collect();
        let params = EsParams {
            generations: generations_for(per_stage, &es),
            seed: es.seed.wrapping_add(s as u64 + 1),
            ..es
        };
        phase_budgets.push(params.generations * es.mu * es.lambda);
        let r = es_moo(evaluator, &local, params)?;
        let offset = trace.len();
        inserted.extend(r.inserted.into_iter().map(|m| Member {
            generation: m.generation + offset,
            ..m
        }));
        trace.extend(&r.trace);
        let mut set: Vec<Vec<usize>> = r.archive.sorted().iter().map(|m| m.genome[range.clone()].to_vec()).collect();
        set.dedup();
        for m in r.archive.members() {
            merged.insert(&m.genome, &m.objectives, 0);
        }
        stage_sets.push(set);
    }

    let expand = |g: &[usize]| -> Vec<usize> {
        let mut full = accurate.clone();
        for (s, range) in ranges.iter().enumerate() {
            full[range.clone()].copy_from_slice(&stage_sets[s][g[s]]);
        }
        full
    };
    let mapped = MappedEvaluator { inner: evaluator, map: expand };
    let genes: Vec<Vec<usize>> = stage_sets.iter().map(|s| (0..s.len()).collect()).collect();
    let params = EsParams {
        generations: generations_for(combined, &es),
        seed: es.seed,
        ..es
    };
    phase_budgets.push(params.generations * es.mu * es.lambda);
    let r = es_moo(&mapped, &genes, params)?;
    trace.extend(&r.trace);
    let generation_offset = trace.len() - r.trace.len();
    for m in r.archive.members() {
        merged.insert(&(mapped.map)(&m.genome), &m.objectives, m.generation + generation_offset);
    }
    inserted.extend(r.inserted.iter().map(|m| Member {
        genome: (mapped.map)(&m.genome),
        objectives: m.objectives.clone(),
        generation: m.generation + generation_offset,
    }));
    Ok(HierarchicalResult {
        mode,
        archive: merged,
        trace,
        genome_arity: genes.len(),
        stage_set_sizes: stage_sets.iter().map(Vec::len).collect(),
        phase_budgets,
        inserted,
    })
}
