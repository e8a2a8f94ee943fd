use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::archive::{Member, ParetoArchive};
use super::evaluate::{EvalSource, Evaluator};
use super::operators::{default_rate, mutate, random_genome, uniform_crossover, Choices};
use super::sort::rank_and_crowding;
use crate::{Error, Result};

/// Counters of one generation (or iteration, or batch).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub archive_size: usize,
    pub insertions: usize,
    /// Candidates evaluated.
    pub evaluations: u64,
    /// Batch evaluation calls.
    pub batch_calls: u64,
    /// Surrogate model invocations: batch calls times models per call.
    pub surrogate_calls: u64,
    pub oracle_calls: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationTrace {
    pub records: Vec<GenerationRecord>,
}

impl GenerationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Sums of every counter; `archive_size` is the final size.
    pub fn totals(&self) -> GenerationRecord {
        let mut t = GenerationRecord::default();
        for r in &self.records {
            t.insertions += r.insertions;
            t.evaluations += r.evaluations;
            t.batch_calls += r.batch_calls;
            t.surrogate_calls += r.surrogate_calls;
            t.oracle_calls += r.oracle_calls;
        }
        if let Some(last) = self.records.last() {
            t.generation = last.generation;
            t.archive_size = last.archive_size;
        }
        t
    }

    pub fn cumulative_insertions(&self) -> Vec<usize> {
        self.records
            .iter()
            .scan(0, |acc, r| {
                *acc += r.insertions;
                Some(*acc)
            })
            .collect()
    }

    /// Share of all insertions made in each generation; all zeros if nothing was inserted.
    pub fn density(&self) -> Vec<f64> {
        let total: usize = self.records.iter().map(|r| r.insertions).sum();
        self.records
            .iter()
            .map(|r| if total == 0 { 0.0 } else { r.insertions as f64 / total as f64 })
            .collect()
    }

    /// Appends the records of `other`, renumbering generations to continue this trace.
    pub fn extend(&mut self, other: &GenerationTrace) {
        let offset = self.records.last().map_or(0, |r| r.generation + 1);
        self.records.extend(other.records.iter().map(|r| GenerationRecord {
            generation: r.generation + offset,
            ..*r
        }));
    }
}

/// Archive, trace and the log of successful insertions of one search run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub archive: ParetoArchive,
    pub trace: GenerationTrace,
    /// Every candidate at the moment it entered the archive.
    pub inserted: Vec<Member>,
}

struct Recorder<'e> {
    evaluator: &'e dyn Evaluator,
    result: SearchResult,
    current: GenerationRecord,
}

impl<'e> Recorder<'e> {
    fn new(evaluator: &'e dyn Evaluator) -> Self {
        Recorder {
            evaluator,
            result: SearchResult::default(),
            current: GenerationRecord::default(),
        }
    }

    fn evaluate(&mut self, genomes: &[Vec<usize>]) -> Result<Vec<Vec<f64>>> {
        let out = self.evaluator.evaluate(genomes)?;
        if out.iter().any(|v| v.len() != self.evaluator.objectives().len() || v.iter().any(|x| !x.is_finite())) {
            return Err(Error::Dimension("evaluator returned a malformed objective vector".into()));
        }
        self.current.evaluations += genomes.len() as u64;
        self.current.batch_calls += 1;
        match self.evaluator.source() {
            EvalSource::Surrogate { models } => self.current.surrogate_calls += models as u64,
            EvalSource::Oracle => self.current.oracle_calls += genomes.len() as u64,
        }
        Ok(out)
    }

    fn insert(&mut self, genome: &[usize], objectives: &[f64], generation: usize) -> bool {
        let ok = self.result.archive.insert(genome, objectives, generation);
        if ok {
            self.current.insertions += 1;
            self.result.inserted.push(Member {
                genome: genome.to_vec(),
                objectives: objectives.to_vec(),
                generation,
            });
        }
        ok
    }

    fn close(&mut self, generation: usize) {
        self.current.generation = generation;
        self.current.archive_size = self.result.archive.len();
        self.result.trace.records.push(self.current);
        self.current = GenerationRecord::default();
    }
}

fn check_space(choices: &Choices) -> Result<()> {
    if choices.is_empty() || choices.iter().any(|c| c.is_empty()) {
        return Err(Error::Parameter("search space has an empty gene".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsParams {
    pub mu: usize,
    pub lambda: usize,
    pub generations: usize,
    /// Per-gene replacement probability; `None` means one over the mutable gene count.
    pub mutation_rate: Option<f64>,
    pub seed: u64,
}

impl Default for EsParams {
    fn default() -> Self {
        EsParams {
            mu: 1,
            lambda: 20,
            generations: 5000,
            mutation_rate: None,
            seed: 0,
        }
    }
}

/// Multi-objective ES(mu + lambda) with a Pareto archive.
///
/// Each generation, every parent spawns `lambda` mutants that are estimated in one batch call
/// and offered to the archive in order. The last mutant that enters the archive replaces the
/// parent; a parent none of whose mutants entered is replaced by a random archive member.
pub fn es_moo(evaluator: &dyn Evaluator, choices: &Choices, params: EsParams) -> Result<SearchResult> {
    check_space(choices)?;
    if params.mu == 0 || params.lambda == 0 || params.generations == 0 {
        return Err(Error::Parameter("ES needs mu, lambda and generations >= 1".into()));
    }
    let rate = params.mutation_rate.unwrap_or_else(|| default_rate(choices));
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut rec = Recorder::new(evaluator);
    let mut parents: Vec<Vec<usize>> = (0..params.mu).map(|_| random_genome(choices, &mut rng)).collect();
    for g in 0..params.generations {
        for parent in parents.iter_mut() {
            let candidates: Vec<Vec<usize>> = (0..params.lambda).map(|_| mutate(parent, choices, rate, &mut rng)).collect();
            let est = rec.evaluate(&candidates)?;
            let mut replaced = false;
            for (c, e) in candidates.iter().zip(&est) {
                if rec.insert(c, e, g) {
                    *parent = c.clone();
                    replaced = true;
                }
            }
            if !replaced {
                let members = rec.result.archive.members();
                if !members.is_empty() {
                    *parent = members[rng.gen_range(0..members.len())].genome.clone();
                }
            }
        }
        rec.close(g);
    }
    Ok(rec.result)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NsgaParams {
    pub pop: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub mutation_rate: Option<f64>,
    pub seed: u64,
}

impl Default for NsgaParams {
    fn default() -> Self {
        NsgaParams {
            pop: 100,
            generations: 100,
            crossover_prob: 0.9,
            mutation_rate: None,
            seed: 0,
        }
    }
}

/// NSGA-II result: the search result (archive of everything seen) plus the final population.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NsgaResult {
    pub search: SearchResult,
    pub population: Vec<Member>,
    pub ranks: Vec<usize>,
}

/// Elitist NSGA-II with binary tournaments on (rank, crowding), uniform crossover and the
/// shared mutation operator. The initial population is evaluated within generation 0.
pub fn nsga2(evaluator: &dyn Evaluator, choices: &Choices, params: NsgaParams) -> Result<NsgaResult> {
    check_space(choices)?;
    if params.pop < 4 || params.pop % 2 == 1 {
        return Err(Error::Parameter(format!("NSGA-II population must be even and >= 4, got {}", params.pop)));
    }
    if params.generations == 0 {
        return Err(Error::Parameter("NSGA-II needs at least one generation".into()));
    }
    let rate = params.mutation_rate.unwrap_or_else(|| default_rate(choices));
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut rec = Recorder::new(evaluator);
    let mut pop: Vec<Vec<usize>> = (0..params.pop).map(|_| random_genome(choices, &mut rng)).collect();
    let mut obj = rec.evaluate(&pop)?;
    for (g, o) in pop.iter().zip(&obj) {
        rec.insert(g, o, 0);
    }
    let (mut rank, mut crowd) = rank_and_crowding(&obj);
    for gen in 0..params.generations {
        let tournament = |rng: &mut ChaCha8Rng| -> usize {
            let a = rng.gen_range(0..pop.len());
            let b = rng.gen_range(0..pop.len());
            if rank[a] < rank[b] || (rank[a] == rank[b] && crowd[a] > crowd[b]) {
                a
            } else {
                b
            }
        };
        let mut children = Vec::with_capacity(params.pop);
        while children.len() < params.pop {
            let p1 = tournament(&mut rng);
            let p2 = tournament(&mut rng);
            let (mut c1, mut c2) = if rng.gen::<f64>() < params.crossover_prob {
                uniform_crossover(&pop[p1], &pop[p2], &mut rng)
            } else {
                (pop[p1].clone(), pop[p2].clone())
            };
            c1 = mutate(&c1, choices, rate, &mut rng);
            c2 = mutate(&c2, choices, rate, &mut rng);
            children.push(c1);
            children.push(c2);
        }
        let child_obj = rec.evaluate(&children)?;
        for (c, o) in children.iter().zip(&child_obj) {
            rec.insert(c, o, gen);
        }
        pop.extend(children);
        obj.extend(child_obj);
        let (r, c) = rank_and_crowding(&obj);
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| r[a].cmp(&r[b]).then_with(|| c[b].total_cmp(&c[a])).then(a.cmp(&b)));
        order.truncate(params.pop);
        pop = order.iter().map(|&i| pop[i].clone()).collect();
        obj = order.iter().map(|&i| obj[i].clone()).collect();
        (rank, crowd) = rank_and_crowding(&obj);
        rec.close(gen);
    }
    let population = pop
        .into_iter()
        .zip(obj)
        .map(|(genome, objectives)| Member {
            genome,
            objectives,
            generation: params.generations - 1,
        })
        .collect();
    Ok(NsgaResult {
        search: rec.result,
        population,
        ranks: rank,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HillParams {
    /// Candidate evaluations including the starting point.
    pub budget: usize,
    /// Scalarization weights on normalized objectives; `None` means equal weights.
    pub weights: Option<Vec<f64>>,
    pub mutation_rate: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HillResult {
    pub search: SearchResult,
    /// Scalarized value of the current point after every iteration.
    pub path: Vec<f64>,
}

/// Single-candidate hill climbing on a weighted sum of objectives normalized by the magnitudes
/// of the starting point. Every evaluated candidate is offered to the archive; a neighbour is
/// accepted when its scalarized value does not exceed the current one.
pub fn hill_climber(evaluator: &dyn Evaluator, choices: &Choices, params: &HillParams) -> Result<HillResult> {
    check_space(choices)?;
    if params.budget == 0 {
        return Err(Error::Parameter("hill climber budget must be >= 1".into()));
    }
    let m = evaluator.objectives().len();
    let weights = params.weights.clone().unwrap_or_else(|| vec![1.0 / m as f64; m]);
    if weights.len() != m {
        return Err(Error::ObjectiveArity(weights.len(), m));
    }
    let rate = params.mutation_rate.unwrap_or_else(|| default_rate(choices));
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut rec = Recorder::new(evaluator);
    let mut current = random_genome(choices, &mut rng);
    let start = rec.evaluate(std::slice::from_ref(&current))?.remove(0);
    rec.insert(&current, &start, 0);
    rec.close(0);
    let scale: Vec<f64> = start.iter().map(|v| v.abs().max(1e-9)).collect();
    let scalar = |o: &[f64]| -> f64 { o.iter().zip(&scale).zip(&weights).map(|((v, s), w)| w * v / s).sum() };
    let mut value = scalar(&start);
    let mut path = vec![value];
    for it in 1..params.budget {
        let cand = mutate(&current, choices, rate, &mut rng);
        let o = rec.evaluate(std::slice::from_ref(&cand))?.remove(0);
        rec.insert(&cand, &o, it);
        let v = scalar(&o);
        if v <= value {
            current = cand;
            value = v;
        }
        path.push(value);
        rec.close(it);
    }
    Ok(HillResult {
        search: rec.result,
        path,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomParams {
    pub budget: usize,
    /// Candidates per batch call.
    pub batch: usize,
    pub seed: u64,
}

/// Uniform random sampling with a Pareto archive; one trace row per batch.
pub fn random_search(evaluator: &dyn Evaluator, choices: &Choices, params: RandomParams) -> Result<SearchResult> {
    check_space(choices)?;
    if params.batch == 0 {
        return Err(Error::Parameter("random search batch must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut rec = Recorder::new(evaluator);
    let mut done = 0;
    let mut g = 0;
    while done < params.budget {
        let n = params.batch.min(params.budget - done);
        let cands: Vec<Vec<usize>> = (0..n).map(|_| random_genome(choices, &mut rng)).collect();
        let est = rec.evaluate(&cands)?;
        for (c, e) in cands.iter().zip(&est) {
            rec.insert(c, e, g);
        }
        rec.close(g);
        done += n;
        g += 1;
    }
    Ok(rec.result)
}
