//! Stage commands: characterize, train, explore, evaluate, report.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use axdse::approxlib::{load_or_generate, Library};
use axdse::bench::{AcceleratorTemplate, Configuration, Datasets, QorEvaluator};
use axdse::search::{
    dominates_min, es_moo, final_evaluation, hierarchical_search, hill_climber, hypervolume, nsga2, random_search, select_top_k,
    EsParams, GenerationTrace, HillParams, Member, NsgaParams, Objective, OracleEvaluator, ParetoArchive, RandomParams,
    StageMode, SurrogateEvaluator,
};
use axdse::surrogate::{
    draw_labeled_sample, evaluate_model, fit_presets, select_best, slot_choices, LabeledSample, ModelKind, RegressorModel, Target,
    TrainingSet, TEST_FRACTION,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{Engine, RunConfig, SearchMode};
use crate::error::{CliError, CliResult};
use crate::manifest::{files_below, write_text, OutputLock, RunManifest, STAGES, TIMINGS_FILE};
use crate::plot::{bar_chart, line_chart, scatter, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Characterize,
    Train,
    Explore,
    Evaluate,
    Report,
    All,
}

impl Command {
    fn stages(self) -> &'static [&'static str] {
        match self {
            Command::Characterize => &STAGES[0..1],
            Command::Train => &STAGES[1..2],
            Command::Explore => &STAGES[2..3],
            Command::Evaluate => &STAGES[3..4],
            Command::Report => &STAGES[4..5],
            Command::All => &STAGES,
        }
    }
}

/// Runs `command` in `out`, holding the directory lock for its duration.
pub fn run(command: Command, config: &RunConfig, out: &Path) -> CliResult<()> {
    config.validate()?;
    let _lock = OutputLock::acquire(out)?;
    for &stage in command.stages() {
        let start = Instant::now();
        let mut manifest = if stage == "characterize" {
            RunManifest::load(out).unwrap_or_else(|_| RunManifest::new(config))
        } else {
            RunManifest::load(out)?
        };
        for &up in STAGES.iter().take_while(|s| **s != stage) {
            manifest.require(out, up, &slice(config, up)?)?;
        }
        manifest.config = config.clone();
        manifest.invalidate_from(stage);
        let ctx = Ctx { config, out };
        let (artifacts, summary) = match stage {
            "characterize" => ctx.characterize()?,
            "train" => ctx.train(&mut manifest)?,
            "explore" => ctx.explore(&mut manifest)?,
            "evaluate" => ctx.evaluate(&mut manifest)?,
            _ => ctx.report()?,
        };
        manifest.record(out, stage, slice(config, stage)?, artifacts, summary)?;
        manifest.save(out)?;
        record_timing(out, stage, start.elapsed().as_secs_f64())?;
    }
    Ok(())
}

/// The configuration fields each stage depends on.
fn slice(c: &RunConfig, stage: &str) -> CliResult<serde_json::Value> {
    Ok(match stage {
        "characterize" => json!({
            "library": serde_json::to_value(c.library_config()?)?,
            "images": c.seeds.images,
            "signal": c.seeds.signal,
        }),
        "train" => json!({
            "benchmark": c.benchmark,
            "pipeline": c.pipeline,
            "objectives": c.objectives,
            "train": serde_json::to_value(&c.train)?,
            "sample_seed": c.seeds.sample,
            "model_seed": c.seeds.model,
        }),
        "explore" => json!({
            "search": serde_json::to_value(&c.search)?,
            "search_seed": c.seeds.search,
        }),
        "evaluate" => json!({ "final": serde_json::to_value(&c.final_eval)? }),
        _ => json!({}),
    })
}

fn record_timing(out: &Path, stage: &str, secs: f64) -> CliResult<()> {
    let path = out.join(TIMINGS_FILE);
    let mut t: BTreeMap<String, f64> = fs::read_to_string(&path)
        .ok()
        .and_then(|s| serde_json::from_str(&s).ok())
        .unwrap_or_default();
    t.insert(stage.to_string(), secs);
    write_text(&path, &(serde_json::to_string_pretty(&t)? + "\n"))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> CliResult<Vec<T>> {
    if !path.exists() {
        return Err(CliError::Missing(path.display().to_string()));
    }
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<Vec<T>, _>>()?)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|_| CliError::Missing(path.display().to_string()))?;
    Ok(serde_json::from_str(&text)?)
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> CliResult<()> {
    write_text(path, &(serde_json::to_string_pretty(v)? + "\n"))
}

/// Short stable identifier of a configuration.
pub fn config_id(assignment: &str) -> String {
    hex::encode(&Sha256::digest(assignment.as_bytes())[..6])
}

/// Expected best model kind per target from the original ablation, where one exists.
pub fn expected_kind(target: Target) -> Option<ModelKind> {
    match target {
        Target::Qor => Some(ModelKind::RandomForest),
        Target::Power => Some(ModelKind::BayesianLinear),
        _ => None,
    }
}

/// Hypervolume reference in minimization form: zero QoR (error equal to the best value)
/// and 1.1 times the largest training label of every hardware objective.
pub fn reference_point(template: &AcceleratorTemplate, objectives: &[Objective], sample: &LabeledSample) -> Vec<f64> {
    objectives
        .iter()
        .map(|&o| match o {
            Objective::Qor => template.metric.best(),
            _ => 1.1 * sample.labels.iter().map(|l| o.target().of(l)).fold(0.0, f64::max),
        })
        .collect()
}

/// Hypervolume of the points inside the reference box; points outside contribute nothing.
pub fn clipped_hypervolume(points: &[Vec<f64>], reference: &[f64]) -> CliResult<f64> {
    let inside: Vec<Vec<f64>> = points
        .iter()
        .filter(|p| p.iter().zip(reference).all(|(v, r)| v <= r))
        .cloned()
        .collect();
    Ok(hypervolume(&inside, reference)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PccRow {
    pub benchmark: String,
    pub pipeline: String,
    pub model: String,
    pub target: String,
    pub seed: u64,
    pub pcc_train: Option<f64>,
    pub pcc_test: Option<f64>,
    pub fit_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub target: String,
    pub preset: String,
    pub kind: String,
    pub pcc_test: Option<f64>,
    pub degenerate: bool,
    pub expected_kind: Option<String>,
    pub matches_expected: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationRow {
    pub generation: usize,
    pub config_id: String,
    pub assignment: String,
    pub est_qor: Option<f64>,
    pub est_power: Option<f64>,
    pub est_luts: Option<f64>,
    pub inserted: bool,
    pub true_qor: Option<f64>,
    pub true_power: Option<f64>,
    pub true_luts: Option<f64>,
    pub est_delay: Option<f64>,
    pub true_delay: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub generation: usize,
    pub archive_size: usize,
    pub insertions: usize,
    pub evaluations: u64,
    pub batch_calls: u64,
    pub surrogate_calls: u64,
    pub oracle_calls: u64,
    pub cumulative_insertions: usize,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontRow {
    pub config_id: String,
    pub assignment: String,
    pub qor: Option<f64>,
    pub power: Option<f64>,
    pub luts: Option<f64>,
    pub delay: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub config_id: String,
    pub assignment: String,
    pub on_front: bool,
    pub est_qor: Option<f64>,
    pub true_qor: Option<f64>,
    pub est_power: Option<f64>,
    pub true_power: Option<f64>,
    pub est_luts: Option<f64>,
    pub true_luts: Option<f64>,
    pub est_delay: Option<f64>,
    pub true_delay: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSummary {
    pub archive_size: usize,
    pub evaluated: usize,
    pub front_size: usize,
    pub reference: Vec<f64>,
    pub hypervolume_estimated: f64,
    pub hypervolume_true: f64,
    pub residual_pcc: BTreeMap<String, Option<f64>>,
    pub oracle_calls: u64,
    pub oracle_reduction: f64,
}

/// Objective values in reporting form, keyed by objective name.
fn by_name(objectives: &[Objective], values: &[f64], template: &AcceleratorTemplate) -> BTreeMap<&'static str, f64> {
    objectives
        .iter()
        .zip(values)
        .map(|(&o, &v)| (o.name(), if o == Objective::Qor { template.metric.from_error(v) } else { v }))
        .collect()
}

struct Ctx<'a> {
    config: &'a RunConfig,
    out: &'a Path,
}

impl Ctx<'_> {
    fn path(&self, rel: &str) -> std::path::PathBuf {
        self.out.join(rel)
    }

    fn library(&self) -> CliResult<Library> {
        let dir = self.path("library");
        if !dir.join("manifest.json").exists() {
            return Err(CliError::Missing(format!("{} (run `characterize`)", dir.display())));
        }
        Ok(Library::load(&dir)?)
    }

    fn datasets(&self) -> CliResult<Datasets> {
        let dir = self.path("datasets");
        if !dir.join("datasets.json").exists() {
            return Err(CliError::Missing(format!("{} (run `characterize`)", dir.display())));
        }
        Ok(Datasets::load(&dir)?)
    }

    fn model_path(&self, target: Target) -> String {
        format!("train/models/{}.model", target.name())
    }

    fn emit(&self, artifacts: &mut Vec<String>, rel: &str, text: String) -> CliResult<()> {
        write_text(&self.path(rel), &text)?;
        artifacts.push(rel.to_string());
        Ok(())
    }

    fn emit_csv<T: Serialize>(&self, artifacts: &mut Vec<String>, rel: &str, rows: &[T]) -> CliResult<()> {
        write_csv(&self.path(rel), rows)?;
        artifacts.push(rel.to_string());
        Ok(())
    }

    fn characterize(&self) -> CliResult<(Vec<String>, serde_json::Value)> {
        let lib_config = self.config.library_config()?;
        let (lib, cache) = load_or_generate(&lib_config, &self.path("library"))?;
        Datasets::generate(self.config.dataset_seeds()).save(&self.path("datasets"))?;
        let classes: BTreeMap<String, usize> = lib
            .slot_classes()
            .map(|s| (format!("{}{}", s.kind.tag(), s.width), lib.choices(*s).len()))
            .collect();
        let mut artifacts = files_below(self.out, &self.path("library"))?;
        artifacts.extend(files_below(self.out, &self.path("datasets"))?);
        let summary = json!({
            "components": lib.len(),
            "classes": classes,
            "cache_hits": cache.hits,
            "recomputed": cache.recomputed.len(),
            "full_cache_hit": cache.recomputed.is_empty(),
        });
        Ok((artifacts, summary))
    }

    fn train(&self, manifest: &mut RunManifest) -> CliResult<(Vec<String>, serde_json::Value)> {
        let c = self.config;
        let template = c.template()?;
        let lib = self.library()?;
        let data = self.datasets()?;
        let qev = QorEvaluator::new(&template, &data)?;
        let pipeline = c.pipeline_kind()?;
        let presets = c.preset_list()?;
        let sample = draw_labeled_sample(&template, &lib, &qev, c.train.samples, c.seeds.sample)?;
        write_json(&self.path("train/sample.json"), &sample)?;
        let mut artifacts = vec!["train/sample.json".to_string()];
        let mut rows = Vec::new();
        let mut selection = Vec::new();
        let mut chosen = BTreeMap::new();
        let models = self.path("train/models");
        fs::create_dir_all(&models).map_err(|e| CliError::io(&models, e))?;
        for o in c.objective_list()? {
            let target = o.target();
            let set = TrainingSet::from_sample(&sample, &template, &lib, pipeline, target, TEST_FRACTION)?;
            let fits = fit_presets(&set, &presets, c.seeds.model)?;
            for (_, r) in &fits {
                rows.push(PccRow {
                    benchmark: template.name.clone(),
                    pipeline: pipeline.tag().to_string(),
                    model: r.preset.clone(),
                    target: target.name().to_string(),
                    seed: c.seeds.model,
                    pcc_train: r.pcc_train,
                    pcc_test: r.pcc_test,
                    fit_count: set.train.len(),
                });
            }
            let reports: Vec<_> = fits.iter().map(|f| f.1.clone()).collect();
            let best = select_best(&reports).ok_or_else(|| CliError::Config("no presets to fit".into()))?;
            let (model, report) = &fits[best];
            if report.degenerate() {
                eprintln!("warning: target {} is degenerate (no defined held-out correlation)", target.name());
            }
            let expected = expected_kind(target);
            selection.push(SelectionRow {
                target: target.name().to_string(),
                preset: report.preset.clone(),
                kind: report.kind.name().to_string(),
                pcc_test: report.pcc_test,
                degenerate: report.degenerate(),
                expected_kind: expected.map(|k| k.name().to_string()),
                matches_expected: expected.map(|k| k == report.kind),
            });
            if let Some(k) = expected {
                eprintln!(
                    "model selection for {}: expected {}, observed {} ({})",
                    target.name(),
                    k.name(),
                    report.kind.name(),
                    report.preset
                );
            }
            let rel = self.model_path(target);
            model.save(&self.path(&rel))?;
            artifacts.push(rel);
            chosen.insert(target.name(), presets.iter().find(|p| p.name == report.preset).cloned().expect("fitted preset"));
        }
        let mut ablation = c.ablation_list()?;
        ablation.dedup();
        for p in ablation.into_iter().filter(|&p| p != pipeline) {
            for o in c.objective_list()?.into_iter().filter(|&o| o != Objective::Qor) {
                let target = o.target();
                let preset = &chosen[target.name()];
                let set = TrainingSet::from_sample(&sample, &template, &lib, p, target, TEST_FRACTION)?;
                let m = RegressorModel::train(&set, preset, c.seeds.model)?;
                let r = evaluate_model(&m, &set)?;
                rows.push(PccRow {
                    benchmark: template.name.clone(),
                    pipeline: p.tag().to_string(),
                    model: r.preset.clone(),
                    target: target.name().to_string(),
                    seed: c.seeds.model,
                    pcc_train: r.pcc_train,
                    pcc_test: r.pcc_test,
                    fit_count: set.train.len(),
                });
            }
        }
        write_csv(&self.path("train/pcc_report.csv"), &rows)?;
        write_csv(&self.path("train/selection.csv"), &selection)?;
        artifacts.push("train/pcc_report.csv".into());
        artifacts.push("train/selection.csv".into());
        artifacts.sort();
        manifest.counters = Default::default();
        manifest.counters.training_oracle_calls = sample.oracle_calls();
        let summary = json!({
            "samples": sample.len(),
            "oracle_calls": sample.oracle_calls(),
            "report_rows": rows.len(),
            "selection": selection,
        });
        Ok((artifacts, summary))
    }

    fn explore(&self, manifest: &mut RunManifest) -> CliResult<(Vec<String>, serde_json::Value)> {
        let c = self.config;
        let s = &c.search;
        let template = c.template()?;
        let lib = self.library()?;
        let objectives = c.objective_list()?;
        let load = |t: Target| -> CliResult<RegressorModel> {
            let p = self.path(&self.model_path(t));
            if !p.exists() {
                return Err(CliError::Missing(format!("{} (run `train`)", p.display())));
            }
            Ok(RegressorModel::load(&p)?)
        };
        let qor_model = load(Target::Qor)?;
        let hw: Vec<(Objective, RegressorModel)> = objectives
            .iter()
            .filter(|&&o| o != Objective::Qor)
            .map(|&o| Ok((o, load(o.target())?)))
            .collect::<CliResult<_>>()?;
        let hw_refs: Vec<(Objective, &RegressorModel)> = hw.iter().map(|(o, m)| (*o, m)).collect();
        let ev = SurrogateEvaluator::new(&template, &lib, c.pipeline_kind()?, &objectives, &qor_model, &hw_refs)?;
        let choices: Vec<Vec<usize>> = slot_choices(&template, &lib)?.into_iter().map(<[usize]>::to_vec).collect();
        let es = EsParams {
            mu: s.mu,
            lambda: s.lambda,
            generations: s.generations,
            mutation_rate: s.mutation_rate,
            seed: c.seeds.search,
        };
        let (archive, trace, inserted): (ParetoArchive, GenerationTrace, Vec<Member>) = match (s.mode, s.engine) {
            (SearchMode::Flat | SearchMode::Staged, _) => {
                let mode = if s.mode == SearchMode::Flat { StageMode::Flat } else { StageMode::Staged };
                let r = hierarchical_search(&template, &lib, &ev, mode, s.budget, es)?;
                (r.archive, r.trace, r.inserted)
            }
            (SearchMode::Direct, Engine::Es) => {
                let r = es_moo(&ev, &choices, es)?;
                (r.archive, r.trace, r.inserted)
            }
            (SearchMode::Direct, Engine::Nsga2) => {
                let r = nsga2(
                    &ev,
                    &choices,
                    NsgaParams {
                        pop: s.nsga_pop,
                        generations: s.nsga_generations,
                        crossover_prob: s.crossover,
                        mutation_rate: s.mutation_rate,
                        seed: c.seeds.search,
                    },
                )?
                .search;
                (r.archive, r.trace, r.inserted)
            }
            (SearchMode::Direct, Engine::Hc) => {
                let r = hill_climber(
                    &ev,
                    &choices,
                    &HillParams {
                        budget: s.budget,
                        weights: None,
                        mutation_rate: s.mutation_rate,
                        seed: c.seeds.search,
                    },
                )?
                .search;
                (r.archive, r.trace, r.inserted)
            }
            (SearchMode::Direct, Engine::Random) => {
                let r = random_search(
                    &ev,
                    &choices,
                    RandomParams {
                        budget: s.budget,
                        batch: s.batch,
                        seed: c.seeds.search,
                    },
                )?;
                (r.archive, r.trace, r.inserted)
            }
        };
        let rows: Vec<ExplorationRow> = inserted
            .iter()
            .map(|m| {
                let label = Configuration::from_indices(&lib, &m.genome).label();
                let v = by_name(&objectives, &m.objectives, &template);
                ExplorationRow {
                    generation: m.generation,
                    config_id: config_id(&label),
                    assignment: label,
                    est_qor: v.get("qor").copied(),
                    est_power: v.get("power").copied(),
                    est_luts: v.get("luts").copied(),
                    inserted: true,
                    true_qor: None,
                    true_power: None,
                    true_luts: None,
                    est_delay: v.get("delay").copied(),
                    true_delay: None,
                }
            })
            .collect();
        let cumulative = trace.cumulative_insertions();
        let density = trace.density();
        let trace_rows: Vec<TraceRow> = trace
            .records
            .iter()
            .enumerate()
            .map(|(i, r)| TraceRow {
                generation: r.generation,
                archive_size: r.archive_size,
                insertions: r.insertions,
                evaluations: r.evaluations,
                batch_calls: r.batch_calls,
                surrogate_calls: r.surrogate_calls,
                oracle_calls: r.oracle_calls,
                cumulative_insertions: cumulative[i],
                density: density[i],
            })
            .collect();
        let totals = trace.totals();
        if totals.oracle_calls != 0 {
            return Err(CliError::Invariant(format!("exploration made {} oracle calls", totals.oracle_calls)));
        }
        write_csv(&self.path("explore/exploration.csv"), &rows)?;
        write_csv(&self.path("explore/trace.csv"), &trace_rows)?;
        write_json(&self.path("explore/archive.json"), &archive)?;
        let counters = &mut manifest.counters;
        counters.surrogate_candidates = totals.evaluations;
        counters.surrogate_calls = totals.surrogate_calls;
        counters.batch_calls = totals.batch_calls;
        counters.exploration_oracle_calls = totals.oracle_calls;
        counters.final_oracle_calls = 0;
        let engine = match s.mode {
            SearchMode::Direct => s.engine.to_string(),
            SearchMode::Flat => "es-flat".into(),
            SearchMode::Staged => "es-staged".into(),
        };
        let summary = json!({
            "engine": engine,
            "generations": trace.len(),
            "archive_size": archive.len(),
            "insertions": rows.len(),
            "evaluations": totals.evaluations,
        });
        let artifacts = ["explore/archive.json", "explore/exploration.csv", "explore/trace.csv"].map(String::from).to_vec();
        Ok((artifacts, summary))
    }

    fn evaluate(&self, manifest: &mut RunManifest) -> CliResult<(Vec<String>, serde_json::Value)> {
        let c = self.config;
        let template = c.template()?;
        let lib = self.library()?;
        let data = self.datasets()?;
        let objectives = c.objective_list()?;
        let archive: ParetoArchive = read_json(&self.path("explore/archive.json"))?;
        let sample: LabeledSample = read_json(&self.path("train/sample.json"))?;
        let trace: Vec<TraceRow> = read_csv(&self.path("explore/trace.csv"))?;
        let sum = |f: fn(&TraceRow) -> u64| trace.iter().map(f).sum::<u64>();
        let counters = &manifest.counters;
        if sum(|r| r.evaluations) != counters.surrogate_candidates
            || sum(|r| r.surrogate_calls) != counters.surrogate_calls
            || sum(|r| r.batch_calls) != counters.batch_calls
            || sum(|r| r.oracle_calls) != counters.exploration_oracle_calls
        {
            return Err(CliError::Invariant("manifest counters differ from the trace totals".into()));
        }

        let points = archive.objectives();
        let subset = if archive.len() > c.final_eval.top_k {
            let mut keep = select_top_k(&points, c.final_eval.top_k)?;
            keep.sort_unstable();
            let mut a = ParetoArchive::new();
            for i in keep {
                let m = &archive.members()[i];
                a.insert(&m.genome, &m.objectives, m.generation);
            }
            a
        } else {
            archive.clone()
        };
        let oracle = OracleEvaluator::new(&template, &lib, QorEvaluator::new(&template, &data)?, &objectives);
        let report = final_evaluation(&subset, &oracle)?;
        if oracle.calls() != report.oracle_calls {
            return Err(CliError::Invariant("oracle counter disagrees with the final report".into()));
        }
        let front = report.archive.members();
        if front.iter().any(|a| front.iter().any(|b| dominates_min(&b.objectives, &a.objectives))) {
            return Err(CliError::Invariant("final front contains a dominated member".into()));
        }

        let label = |g: &[usize]| Configuration::from_indices(&lib, g).label();
        let front_rows: Vec<FrontRow> = report
            .archive
            .sorted()
            .iter()
            .map(|m| {
                let l = label(&m.genome);
                let v = by_name(&objectives, &m.objectives, &template);
                FrontRow {
                    config_id: config_id(&l),
                    assignment: l,
                    qor: v.get("qor").copied(),
                    power: v.get("power").copied(),
                    luts: v.get("luts").copied(),
                    delay: v.get("delay").copied(),
                }
            })
            .collect();
        let residual_rows: Vec<ResidualRow> = report
            .residuals
            .iter()
            .map(|r| {
                let l = label(&r.genome);
                let e = by_name(&objectives, &r.estimated, &template);
                let t = by_name(&objectives, &r.truth, &template);
                ResidualRow {
                    config_id: config_id(&l),
                    assignment: l,
                    on_front: r.on_front,
                    est_qor: e.get("qor").copied(),
                    true_qor: t.get("qor").copied(),
                    est_power: e.get("power").copied(),
                    true_power: t.get("power").copied(),
                    est_luts: e.get("luts").copied(),
                    true_luts: t.get("luts").copied(),
                    est_delay: e.get("delay").copied(),
                    true_delay: t.get("delay").copied(),
                }
            })
            .collect();
        write_csv(&self.path("evaluate/final_front.csv"), &front_rows)?;
        write_csv(&self.path("evaluate/residuals.csv"), &residual_rows)?;

        manifest.counters.final_oracle_calls = report.oracle_calls;
        let reference = reference_point(&template, &objectives, &sample);
        let summary = EvaluationSummary {
            archive_size: archive.len(),
            evaluated: subset.len(),
            front_size: report.archive.len(),
            hypervolume_estimated: clipped_hypervolume(&subset.objectives(), &reference)?,
            hypervolume_true: clipped_hypervolume(&report.archive.objectives(), &reference)?,
            reference,
            residual_pcc: objectives
                .iter()
                .enumerate()
                .map(|(k, o)| (o.name().to_string(), report.residual_pcc(k)))
                .collect(),
            oracle_calls: manifest.counters.oracle_calls(),
            oracle_reduction: manifest.counters.oracle_reduction(),
        };
        write_json(&self.path("evaluate/summary.json"), &summary)?;
        let artifacts = ["evaluate/final_front.csv", "evaluate/residuals.csv", "evaluate/summary.json"]
            .map(String::from)
            .to_vec();
        Ok((artifacts, serde_json::to_value(&summary)?))
    }

    fn report(&self) -> CliResult<(Vec<String>, serde_json::Value)> {
        let c = self.config;
        let objectives = c.objective_list()?;
        let pcc: Vec<PccRow> = read_csv(&self.path("train/pcc_report.csv"))?;
        let selection: Vec<SelectionRow> = read_csv(&self.path("train/selection.csv"))?;
        let trace: Vec<TraceRow> = read_csv(&self.path("explore/trace.csv"))?;
        let residuals: Vec<ResidualRow> = read_csv(&self.path("evaluate/residuals.csv"))?;
        let mut artifacts = Vec::new();

        #[derive(Serialize)]
        struct PipelineBar<'a> {
            pipeline: &'a str,
            target: &'a str,
            model: &'a str,
            pcc_test: Option<f64>,
        }
        let mut bars: Vec<PipelineBar> = Vec::new();
        for s in selection.iter().filter(|s| s.target != Target::Qor.name()) {
            for r in pcc.iter().filter(|r| r.target == s.target && r.model == s.preset) {
                bars.push(PipelineBar {
                    pipeline: &r.pipeline,
                    target: &r.target,
                    model: &r.model,
                    pcc_test: r.pcc_test,
                });
            }
        }
        bars.sort_by(|a, b| (a.target, a.pipeline).cmp(&(b.target, b.pipeline)));
        self.emit_csv(&mut artifacts, "report/pcc_by_pipeline.csv", &bars)?;
        let labels: Vec<(String, f64)> = bars
            .iter()
            .map(|b| (format!("{}:{}", b.pipeline, b.target), b.pcc_test.unwrap_or(0.0)))
            .collect();
        self.emit(&mut artifacts, "report/pcc_by_pipeline.svg", bar_chart("Held-out PCC by feature pipeline", "pipeline:target", "PCC", &labels))?;

        #[derive(Serialize)]
        struct AblationRow<'a> {
            target: &'a str,
            preset: &'a str,
            kind: String,
            pcc_train: Option<f64>,
            pcc_test: Option<f64>,
            selected: bool,
        }
        let main = c.pipeline_kind()?.tag();
        let mut ablation = Vec::new();
        for s in &selection {
            let rows: Vec<&PccRow> = pcc.iter().filter(|r| r.target == s.target && r.pipeline == main).collect();
            for r in &rows {
                let kind = axdse::surrogate::preset_by_name(&r.model)?.params.kind().name().to_string();
                ablation.push(AblationRow {
                    target: &r.target,
                    preset: &r.model,
                    kind,
                    pcc_train: r.pcc_train,
                    pcc_test: r.pcc_test,
                    selected: r.model == s.preset,
                });
            }
            let labels: Vec<(String, f64)> = rows.iter().map(|r| (r.model.clone(), r.pcc_test.unwrap_or(0.0))).collect();
            self.emit(
                &mut artifacts,
                &format!("report/model_ablation_{}.svg", s.target),
                bar_chart(&format!("Held-out PCC per preset ({})", s.target), "preset", "PCC", &labels),
            )?;
        }
        self.emit_csv(&mut artifacts, "report/model_ablation.csv", &ablation)?;

        #[derive(Serialize)]
        struct Convergence {
            generation: usize,
            archive_size: usize,
            cumulative_insertions: usize,
        }
        let conv: Vec<Convergence> = trace
            .iter()
            .map(|t| Convergence {
                generation: t.generation,
                archive_size: t.archive_size,
                cumulative_insertions: t.cumulative_insertions,
            })
            .collect();
        self.emit_csv(&mut artifacts, "report/convergence.csv", &conv)?;
        let series = [Series {
            name: "archive size",
            points: trace.iter().map(|t| (t.generation as f64, t.archive_size as f64)).collect(),
        }];
        self.emit(&mut artifacts, "report/convergence.svg", line_chart("Archive size per generation", "generation", "members", &series))?;

        #[derive(Serialize)]
        struct Density {
            generation: usize,
            insertions: usize,
            density: f64,
        }
        let dens: Vec<Density> = trace
            .iter()
            .map(|t| Density {
                generation: t.generation,
                insertions: t.insertions,
                density: t.density,
            })
            .collect();
        self.emit_csv(&mut artifacts, "report/density.csv", &dens)?;
        let series = [Series {
            name: "density",
            points: trace.iter().map(|t| (t.generation as f64, t.density)).collect(),
        }];
        self.emit(&mut artifacts, "report/density.svg", line_chart("Share of Pareto insertions per generation", "generation", "density", &series))?;

        let engine = match c.search.mode {
            SearchMode::Direct => c.search.engine.to_string(),
            SearchMode::Flat => "es-flat".into(),
            SearchMode::Staged => "es-staged".into(),
        };
        let (xo, yo) = (objectives[1].name(), objectives[0].name());
        let pick = |r: &ResidualRow, name: &str, truth: bool| -> f64 {
            let v = match (name, truth) {
                ("qor", false) => r.est_qor,
                ("qor", true) => r.true_qor,
                ("power", false) => r.est_power,
                ("power", true) => r.true_power,
                ("luts", false) => r.est_luts,
                ("luts", true) => r.true_luts,
                (_, false) => r.est_delay,
                (_, true) => r.true_delay,
            };
            v.unwrap_or(f64::NAN)
        };
        #[derive(Serialize)]
        struct ScatterRow<'a> {
            engine: &'a str,
            source: &'a str,
            config_id: &'a str,
            on_front: bool,
            x: f64,
            y: f64,
        }
        let mut scatter_rows = Vec::new();
        for (source, truth) in [("estimated", false), ("true", true)] {
            for r in &residuals {
                scatter_rows.push(ScatterRow {
                    engine: &engine,
                    source,
                    config_id: &r.config_id,
                    on_front: r.on_front,
                    x: pick(r, xo, truth),
                    y: pick(r, yo, truth),
                });
            }
        }
        self.emit_csv(&mut artifacts, "report/pareto_scatter.csv", &scatter_rows)?;
        let series = [
            Series {
                name: "estimated",
                points: residuals.iter().map(|r| (pick(r, xo, false), pick(r, yo, false))).collect(),
            },
            Series {
                name: "true",
                points: residuals.iter().map(|r| (pick(r, xo, true), pick(r, yo, true))).collect(),
            },
            Series {
                name: "true front",
                points: residuals
                    .iter()
                    .filter(|r| r.on_front)
                    .map(|r| (pick(r, xo, true), pick(r, yo, true)))
                    .collect(),
            },
        ];
        self.emit(
            &mut artifacts,
            "report/pareto_scatter.svg",
            scatter(&format!("Pareto front ({engine})"), xo, yo, &series),
        )?;
        artifacts.sort();
        let summary = json!({ "files": artifacts.len() });
        Ok((artifacts, summary))
    }
}
