//! Acceptance suite: one test per criterion, each printing a single verdict line.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use axdse::approxlib::{generate_library, ClassSweep, FamilySweep, Library, LibraryConfig};
use axdse::backend::{map_luts, power_report, switching_power, LutMapping, MAX_K, MIN_K};
use axdse::bench::{gaussian_template, mac_template, AcceleratorTemplate, Datasets, QorEvaluator};
use axdse::circuit::arith::ripple_add;
use axdse::circuit::{set_word_value, stats, word_value, Aig, Lit, SlotKind, Simulator};
use axdse::search::{
    dominates_min, es_moo, final_evaluation, hierarchical_search, non_dominated_sort, nsga2, random_search, select_top_k,
    EsParams, EvalSource, Evaluator, NsgaParams, Objective, OracleEvaluator, ParetoArchive, RandomParams, StageMode,
    SurrogateEvaluator,
};
use axdse::surrogate::{
    draw_labeled_sample, fit_presets, presets, select_best, slot_choices, LabeledSample, PipelineKind, RegressorModel, Target,
    TrainingSet,
};
use axdse_cli::commands::{read_csv, PccRow, SelectionRow};
use axdse_cli::{clipped_hypervolume, expected_kind, reference_point, run, Command, Profile, RunConfig, RunManifest};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

/// Prints past the test harness capture so verdicts show in every run.
fn verdict(id: u32, name: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "ACCEPTANCE c{id} {name}: {status} | {detail}");
    let _ = out.flush();
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

struct PaperRun {
    out: PathBuf,
    elapsed: Duration,
    _dir: tempfile::TempDir,
}

/// Default Gaussian run at paper scale, shared by the criteria that inspect it.
fn paper_run() -> &'static PaperRun {
    static RUN: OnceLock<PaperRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        let t = Instant::now();
        run(Command::All, &RunConfig::defaults(Profile::Paper), &out).unwrap();
        PaperRun {
            out,
            elapsed: t.elapsed(),
            _dir: dir,
        }
    })
}

struct RunArtifacts {
    template: AcceleratorTemplate,
    lib: Library,
    data: Datasets,
    sample: LabeledSample,
    objectives: Vec<Objective>,
}

fn artifacts(out: &Path, config: &RunConfig) -> RunArtifacts {
    let sample: LabeledSample = serde_json::from_str(&std::fs::read_to_string(out.join("train/sample.json")).unwrap()).unwrap();
    RunArtifacts {
        template: config.template().unwrap(),
        lib: Library::load(&out.join("library")).unwrap(),
        data: Datasets::load(&out.join("datasets")).unwrap(),
        sample,
        objectives: config.objective_list().unwrap(),
    }
}

fn load_model(out: &Path, t: Target) -> RegressorModel {
    RegressorModel::load(&out.join(format!("train/models/{}.model", t.name()))).unwrap()
}

/// Top-k subset of an estimated archive, re-scored by the oracle; hypervolume of the true front.
fn true_hypervolume(a: &RunArtifacts, archive: &ParetoArchive, top_k: usize) -> f64 {
    let subset = if archive.len() > top_k {
        let mut keep = select_top_k(&archive.objectives(), top_k).unwrap();
        keep.sort_unstable();
        let mut s = ParetoArchive::new();
        for i in keep {
            let m = &archive.members()[i];
            s.insert(&m.genome, &m.objectives, m.generation);
        }
        s
    } else {
        archive.clone()
    };
    let oracle = OracleEvaluator::new(&a.template, &a.lib, QorEvaluator::new(&a.template, &a.data).unwrap(), &a.objectives);
    let report = final_evaluation(&subset, &oracle).unwrap();
    let reference = reference_point(&a.template, &a.objectives, &a.sample);
    clipped_hypervolume(&report.archive.objectives(), &reference).unwrap()
}

#[test]
fn c01_oracle_reduction() {
    let r = paper_run();
    let c = RunManifest::load(&r.out).unwrap().counters;
    let reduction = c.oracle_reduction();
    let pass = c.surrogate_candidates == 100_000
        && c.training_oracle_calls == 1000
        && c.exploration_oracle_calls == 0
        && c.final_oracle_calls <= 200
        && c.oracle_calls() <= 1200
        && reduction >= 0.988
        && r.elapsed <= Duration::from_secs(600);
    verdict(
        1,
        "oracle reduction",
        pass,
        &format!(
            "surrogate {} training {} exploration {} final {} reduction {:.5} (>= 0.988) runtime {:.1}s (<= 600s)",
            c.surrogate_candidates,
            c.training_oracle_calls,
            c.exploration_oracle_calls,
            c.final_oracle_calls,
            reduction,
            r.elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn c02_surrogate_fidelity() {
    let t = Instant::now();
    let template = gaussian_template();
    let lib = generate_library(&LibraryConfig::default()).unwrap();
    let data = Datasets::generate(RunConfig::defaults(Profile::Paper).dataset_seeds());
    let qev = QorEvaluator::new(&template, &data).unwrap();
    let all = presets();
    let (mut d, mut f) = (Vec::new(), Vec::new());
    for seed in SEEDS {
        let sample = draw_labeled_sample(&template, &lib, &qev, 1200, seed).unwrap();
        for (pipeline, acc) in [(PipelineKind::D, &mut d), (PipelineKind::F, &mut f)] {
            let set = TrainingSet::from_sample(&sample, &template, &lib, pipeline, Target::Power, 200.0 / 1200.0).unwrap();
            assert_eq!((set.train.len(), set.test.len()), (1000, 200));
            let fits = fit_presets(&set, &all, seed).unwrap();
            let reports: Vec<_> = fits.iter().map(|x| x.1.clone()).collect();
            let best = select_best(&reports).unwrap();
            acc.push(reports[best].pcc_test.unwrap_or(f64::NAN));
        }
    }
    let (md, mf) = (median(&d), median(&f));
    let elapsed = t.elapsed();
    let pass = md >= 0.85 && md >= mf - 0.02 && elapsed <= Duration::from_secs(900);
    verdict(
        2,
        "surrogate fidelity",
        pass,
        &format!(
            "median held-out PCC D {md:.4} (>= 0.85) F {mf:.4} (D >= F - 0.02) per-seed D {d:.4?} F {f:.4?} runtime {:.1}s (<= 900s)",
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

/// Wraps the exact oracle with a cache so repeated genomes are scored once.
struct MemoOracle<'a> {
    inner: OracleEvaluator<'a>,
    cache: Mutex<std::collections::HashMap<Vec<usize>, Vec<f64>>>,
}

impl Evaluator for MemoOracle<'_> {
    fn objectives(&self) -> &[Objective] {
        self.inner.objectives()
    }

    fn source(&self) -> EvalSource {
        EvalSource::Oracle
    }

    fn evaluate(&self, genomes: &[Vec<usize>]) -> axdse::Result<Vec<Vec<f64>>> {
        let missing: Vec<Vec<usize>> = {
            let c = self.cache.lock().unwrap();
            let mut m: Vec<Vec<usize>> = genomes.iter().filter(|g| !c.contains_key(*g)).cloned().collect();
            m.sort();
            m.dedup();
            m
        };
        if !missing.is_empty() {
            let vals = self.inner.evaluate(&missing)?;
            let mut c = self.cache.lock().unwrap();
            for (g, v) in missing.into_iter().zip(vals) {
                c.insert(g, v);
            }
        }
        let c = self.cache.lock().unwrap();
        Ok(genomes.iter().map(|g| c[g].clone()).collect())
    }
}

#[test]
fn c03_exhaustive_recovery() {
    let t = Instant::now();
    let config = LibraryConfig {
        classes: vec![
            ClassSweep {
                kind: SlotKind::Multiplier,
                width: 8,
                families: vec![
                    FamilySweep::Accurate,
                    FamilySweep::Truncated { k: vec![1, 2, 3, 4] },
                    FamilySweep::WidthReduced { w: vec![5, 6, 7] },
                ],
            },
            ClassSweep {
                kind: SlotKind::Adder,
                width: 16,
                families: vec![
                    FamilySweep::Accurate,
                    FamilySweep::Truncated { k: vec![1, 2, 3, 4] },
                    FamilySweep::LowerOr { k: vec![2, 4, 6] },
                ],
            },
        ],
        ..LibraryConfig::default()
    };
    let lib = generate_library(&config).unwrap();
    let template = mac_template();
    let data = Datasets::generate(RunConfig::defaults(Profile::Paper).dataset_seeds());
    let objectives = vec![Objective::Qor, Objective::Power];
    let oracle = MemoOracle {
        inner: OracleEvaluator::new(&template, &lib, QorEvaluator::new(&template, &data).unwrap(), &objectives),
        cache: Mutex::new(Default::default()),
    };
    let choices: Vec<Vec<usize>> = slot_choices(&template, &lib).unwrap().into_iter().map(<[usize]>::to_vec).collect();
    assert_eq!(choices.iter().map(Vec::len).collect::<Vec<_>>(), vec![8, 8]);
    let space: Vec<Vec<usize>> = choices[0].iter().flat_map(|&a| choices[1].iter().map(move |&b| vec![a, b])).collect();
    let values = oracle.evaluate(&space).unwrap();
    let brute: BTreeSet<Vec<usize>> = (0..space.len())
        .filter(|&i| !values.iter().any(|v| dominates_min(v, &values[i])))
        .map(|i| space[i].clone())
        .collect();
    let genomes = |a: &ParetoArchive| a.members().iter().map(|m| m.genome.clone()).collect::<BTreeSet<_>>();
    let mut failures = Vec::new();
    for seed in SEEDS {
        let es = es_moo(
            &oracle,
            &choices,
            EsParams {
                mu: 1,
                lambda: 8,
                generations: 100,
                mutation_rate: None,
                seed,
            },
        )
        .unwrap();
        if genomes(&es.archive) != brute {
            failures.push(format!("es seed {seed}"));
        }
        let ns = nsga2(
            &oracle,
            &choices,
            NsgaParams {
                pop: 16,
                generations: 50,
                crossover_prob: 0.9,
                mutation_rate: None,
                seed,
            },
        )
        .unwrap();
        if genomes(&ns.search.archive) != brute {
            failures.push(format!("nsga2 seed {seed}"));
        }
    }
    let elapsed = t.elapsed();
    let pass = failures.is_empty() && elapsed <= Duration::from_secs(60);
    verdict(
        3,
        "exhaustive recovery",
        pass,
        &format!(
            "brute-force front {} of 64, failures {failures:?}, runtime {:.1}s (<= 60s)",
            brute.len(),
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn c04_es_vs_random() {
    let r = paper_run();
    let t = Instant::now();
    let config = RunConfig::defaults(Profile::Paper);
    let a = artifacts(&r.out, &config);
    let qor = load_model(&r.out, Target::Qor);
    let hw: Vec<(Objective, RegressorModel)> =
        a.objectives.iter().filter(|&&o| o != Objective::Qor).map(|&o| (o, load_model(&r.out, o.target()))).collect();
    let hw_refs: Vec<(Objective, &RegressorModel)> = hw.iter().map(|(o, m)| (*o, m)).collect();
    let ev = SurrogateEvaluator::new(&a.template, &a.lib, config.pipeline_kind().unwrap(), &a.objectives, &qor, &hw_refs).unwrap();
    let choices: Vec<Vec<usize>> = slot_choices(&a.template, &a.lib).unwrap().into_iter().map(<[usize]>::to_vec).collect();
    let top_k = config.final_eval.top_k;
    let (mut es, mut rs) = (Vec::new(), Vec::new());
    for seed in SEEDS {
        let e = es_moo(
            &ev,
            &choices,
            EsParams {
                mu: 1,
                lambda: 20,
                generations: 500,
                mutation_rate: None,
                seed,
            },
        )
        .unwrap();
        let budget_es: u64 = e.trace.records.iter().map(|g| g.evaluations).sum();
        assert_eq!(budget_es, 10_000);
        es.push(true_hypervolume(&a, &e.archive, top_k));
        let rnd = random_search(
            &ev,
            &choices,
            RandomParams {
                budget: 10_000,
                batch: 20,
                seed,
            },
        )
        .unwrap();
        rs.push(true_hypervolume(&a, &rnd.archive, top_k));
    }
    let (me, mr) = (median(&es), median(&rs));
    let elapsed = t.elapsed();
    let pass = me >= mr && elapsed <= Duration::from_secs(600);
    verdict(
        4,
        "es vs random",
        pass,
        &format!(
            "median true hypervolume es {me:.2} random {mr:.2} per-seed es {es:.2?} random {rs:.2?} runtime {:.1}s (<= 600s)",
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn c05_hierarchical_scalability() {
    let t = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("multistage");
    let mut config = RunConfig::defaults(Profile::Paper);
    config.benchmark = "multistage".into();
    config.train.ablation_pipelines.clear();
    run(Command::Characterize, &config, &out).unwrap();
    run(Command::Train, &config, &out).unwrap();
    let a = artifacts(&out, &config);
    let qor = load_model(&out, Target::Qor);
    let hw: Vec<(Objective, RegressorModel)> =
        a.objectives.iter().filter(|&&o| o != Objective::Qor).map(|&o| (o, load_model(&out, o.target()))).collect();
    let hw_refs: Vec<(Objective, &RegressorModel)> = hw.iter().map(|(o, m)| (*o, m)).collect();
    let ev = SurrogateEvaluator::new(&a.template, &a.lib, config.pipeline_kind().unwrap(), &a.objectives, &qor, &hw_refs).unwrap();
    let top_k = config.final_eval.top_k;
    let (mut flat, mut staged) = (Vec::new(), Vec::new());
    for seed in SEEDS {
        let es = EsParams {
            mu: 1,
            lambda: 20,
            generations: 0,
            mutation_rate: None,
            seed,
        };
        for (mode, acc) in [(StageMode::Flat, &mut flat), (StageMode::Staged, &mut staged)] {
            let h = hierarchical_search(&a.template, &a.lib, &ev, mode, 10_000, es).unwrap();
            let spent: u64 = h.trace.records.iter().map(|g| g.evaluations).sum();
            assert!(spent <= 10_000, "{mode:?} spent {spent}");
            acc.push(true_hypervolume(&a, &h.archive, top_k));
        }
    }
    let (mf, ms) = (median(&flat), median(&staged));
    let elapsed = t.elapsed();
    let pass = ms >= mf && elapsed <= Duration::from_secs(1200);
    verdict(
        5,
        "hierarchical scalability",
        pass,
        &format!(
            "median true hypervolume staged {ms:.2} flat {mf:.2} per-seed staged {staged:.2?} flat {flat:.2?} runtime {:.1}s (<= 1200s)",
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn c06_error_characterization() {
    let t = Instant::now();
    let lib = generate_library(&LibraryConfig::default()).unwrap();
    let mut checked = 0;
    let mut failures = Vec::new();
    for rec in lib.records().iter().filter(|r| r.spec.input_bits() <= 16) {
        let spec = &rec.spec;
        let n = spec.width as usize;
        let mut sim = Simulator::new(&rec.circuit);
        let (mut sum, mut wce, mut errs, mut count) = (0u128, 0u64, 0u64, 0u64);
        let pairs: Vec<(u64, u64)> = (0..1u64 << n).flat_map(|a| (0..1u64 << n).map(move |b| (a, b))).collect();
        for chunk in pairs.chunks(64) {
            let mut words = vec![0u64; 2 * n];
            for (bit, &(a, b)) in chunk.iter().enumerate() {
                set_word_value(&mut words, 0, n, bit, a);
                set_word_value(&mut words, n, n, bit, b);
            }
            let outs = sim.run(&words).unwrap().to_vec();
            for (bit, &(a, b)) in chunk.iter().enumerate() {
                let e = word_value(&outs, bit).abs_diff(spec.exact(a, b));
                sum += e as u128;
                wce = wce.max(e);
                errs += (e != 0) as u64;
                count += 1;
            }
        }
        let m = &rec.errors;
        let mae = sum as f64 / count as f64;
        let rate = errs as f64 / count as f64;
        if m.mae != mae || m.wce != wce || m.error_rate != rate {
            failures.push(format!("{}: recorded ({}, {}, {}) brute ({mae}, {wce}, {rate})", rec.id, m.mae, m.wce, m.error_rate));
        }
        if spec.family == axdse::approxlib::Family::Accurate && (m.mae, m.wce, m.error_rate, m.mre) != (0.0, 0, 0.0, 0.0) {
            failures.push(format!("{}: accurate component with non-zero error", rec.id));
        }
        checked += 1;
    }
    let elapsed = t.elapsed();
    let pass = checked > 0 && failures.is_empty() && elapsed <= Duration::from_secs(300);
    verdict(
        6,
        "error characterization",
        pass,
        &format!("{checked} components enumerated, failures {failures:?}, runtime {:.1}s (<= 300s)", elapsed.as_secs_f64()),
    );
    assert!(pass);
}

fn peeling_ranks(points: &[Vec<f64>]) -> Vec<usize> {
    let mut rank = vec![usize::MAX; points.len()];
    let mut level = 0;
    while rank.contains(&usize::MAX) {
        let open: Vec<usize> = (0..points.len()).filter(|&i| rank[i] == usize::MAX).collect();
        let front: Vec<usize> =
            open.iter().copied().filter(|&i| !open.iter().any(|&j| dominates_min(&points[j], &points[i]))).collect();
        for i in front {
            rank[i] = level;
        }
        level += 1;
    }
    rank
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.gen_range(0..8) as f64).collect()).collect()
}

#[test]
fn c07_dominance_machinery() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut archive_failures = 0;
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=100);
        let d = rng.gen_range(2..=3);
        let pts = random_points(&mut rng, n, d);
        let genomes: Vec<Vec<usize>> = (0..n).map(|_| vec![rng.gen_range(0..4)]).collect();
        let mut a = ParetoArchive::new();
        for (g, p) in genomes.iter().zip(&pts) {
            a.insert(g, p, 0);
        }
        let got: BTreeSet<(Vec<usize>, Vec<u64>)> =
            a.members().iter().map(|m| (m.genome.clone(), m.objectives.iter().map(|v| v.to_bits()).collect())).collect();
        let want: BTreeSet<(Vec<usize>, Vec<u64>)> = (0..n)
            .filter(|&i| !pts.iter().any(|q| dominates_min(q, &pts[i])))
            .map(|i| (genomes[i].clone(), pts[i].iter().map(|v| v.to_bits()).collect()))
            .collect();
        if got != want || a.len() != want.len() {
            archive_failures += 1;
        }
    }
    let mut rank_failures = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=100);
        let d = rng.gen_range(2..=3);
        let pts = random_points(&mut rng, n, d);
        if non_dominated_sort(&pts) != peeling_ranks(&pts) {
            rank_failures += 1;
        }
    }
    let elapsed = t.elapsed();
    let pass = archive_failures == 0 && rank_failures == 0 && elapsed <= Duration::from_secs(60);
    verdict(
        7,
        "dominance machinery",
        pass,
        &format!(
            "archive mismatches {archive_failures}/10000, rank mismatches {rank_failures}/200, runtime {:.1}s (<= 60s)",
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

/// Random AIG whose dangling nodes all drive outputs and where every AND has no 2-input
/// cut other than its own fanins, so the graph is its own 2-LUT mapping.
fn random_aig(seed: u64) -> Aig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..10);
    let (mut aig, mut lits) = Aig::with_inputs("rand", n);
    let fanin_nodes = |aig: &Aig, l: Lit| {
        aig.fanins(l.node()).map(|(x, y)| {
            let (p, q) = (x.node(), y.node());
            (p.min(q), p.max(q))
        })
    };
    for _ in 0..rng.gen_range(5..80) {
        let a = lits[rng.gen_range(0..lits.len())].xor_compl(rng.gen());
        let b = lits[rng.gen_range(0..lits.len())].xor_compl(rng.gen());
        let (fa, fb) = (fanin_nodes(&aig, a), fanin_nodes(&aig, b));
        let feeds = |f: Option<(u32, u32)>, l: Lit| f.is_some_and(|(p, q)| p == l.node() || q == l.node());
        if feeds(fa, b) || feeds(fb, a) || (fa.is_some() && fa == fb) {
            continue;
        }
        let y = aig.add_and(a, b);
        if !y.is_const() && !lits.contains(&y) && !lits.contains(&!y) {
            lits.push(y);
        }
    }
    let mut used = vec![false; aig.num_nodes()];
    for &(a, b) in aig.ands() {
        used[a.node() as usize] = true;
        used[b.node() as usize] = true;
    }
    for node in aig.first_and()..aig.num_nodes() as u32 {
        if !used[node as usize] {
            aig.add_output(Lit::new(node, false));
        }
    }
    aig
}

/// Toggle counting at every LUT root between consecutive random input vectors,
/// weighted by (fanout + 1).
fn monte_carlo_power(aig: &Aig, m: &LutMapping, pairs: usize, seed: u64) -> f64 {
    let report = power_report(aig, m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sim = Simulator::new(aig);
    let mut toggles = vec![0u64; m.luts.len()];
    let words = pairs / 64;
    let mut prev_last = vec![false; m.luts.len()];
    for w in 0..=words {
        let inputs: Vec<u64> = (0..aig.num_inputs()).map(|_| rng.gen()).collect();
        sim.run(&inputs).unwrap();
        let vals = sim.node_values();
        let cur: Vec<u64> = m.luts.iter().map(|l| vals[l.root as usize]).collect();
        for (i, &c) in cur.iter().enumerate() {
            let inner = (c ^ (c >> 1)) & (u64::MAX >> 1);
            toggles[i] += inner.count_ones() as u64;
            if w > 0 {
                toggles[i] += (prev_last[i] != (c & 1 == 1)) as u64;
            }
            prev_last[i] = (c >> 63) & 1 == 1;
        }
    }
    let transitions = ((words + 1) * 64 - 1) as f64;
    toggles.iter().zip(&report.fanout).map(|(&t, &f)| t as f64 / transitions * (f + 1) as f64).sum()
}

#[test]
fn c08_backend_sanity() {
    let t = Instant::now();
    let (mut mirror_failures, mut depth_failures) = (0, 0);
    for seed in 0..100 {
        let aig = random_aig(seed);
        let s = stats(&aig);
        let m = map_luts(&aig, 2).unwrap();
        if m.lut_count() != s.and_count || m.depth != s.level_count {
            mirror_failures += 1;
        }
        let depths: Vec<u32> = (MIN_K..=MAX_K).map(|k| map_luts(&aig, k).unwrap().depth).collect();
        if depths.windows(2).any(|w| w[1] > w[0]) {
            depth_failures += 1;
        }
    }
    let (mut aig, x) = Aig::with_inputs("add4", 8);
    let s = ripple_add(&mut aig, &x[..4], &x[4..], Lit::FALSE);
    aig.add_outputs(&s);
    let m = map_luts(&aig, 6).unwrap();
    let proxy = switching_power(&aig, &m);
    let mc = monte_carlo_power(&aig, &m, 1 << 20, 11);
    let rel = ((proxy - mc) / mc).abs();
    let elapsed = t.elapsed();
    let pass = mirror_failures == 0 && depth_failures == 0 && rel < 0.10 && elapsed <= Duration::from_secs(120);
    verdict(
        8,
        "backend sanity",
        pass,
        &format!(
            "k=2 mismatches {mirror_failures}/100, depth increases {depth_failures}/100, power proxy {proxy:.4} vs monte carlo {mc:.4} ({:.2}% < 10%), runtime {:.1}s (<= 120s)",
            rel * 100.0,
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

fn relative_files(root: &Path) -> Vec<String> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/"));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn c09_determinism() {
    let a = paper_run();
    let dir = tempfile::tempdir().unwrap();
    let out_b = dir.path().join("run");
    let t = Instant::now();
    run(Command::All, &RunConfig::defaults(Profile::Paper), &out_b).unwrap();
    let elapsed = a.elapsed + t.elapsed();
    let skip = |f: &String| f.ends_with("timings.json");
    let fa: Vec<String> = relative_files(&a.out).into_iter().filter(|f| !skip(f)).collect();
    let fb: Vec<String> = relative_files(&out_b).into_iter().filter(|f| !skip(f)).collect();
    let differing: Vec<&String> =
        fa.iter().filter(|f| std::fs::read(a.out.join(f)).unwrap() != std::fs::read(out_b.join(f)).unwrap_or_default()).collect();
    let pass = fa == fb && differing.is_empty() && elapsed <= Duration::from_secs(1200);
    verdict(
        9,
        "determinism",
        pass,
        &format!(
            "{} files compared, file lists equal {}, differing {differing:?}, runtime {:.1}s (<= 1200s)",
            fa.len(),
            fa == fb,
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn c10_ablation_report() {
    let r = paper_run();
    let pcc: Vec<PccRow> = read_csv(&r.out.join("train/pcc_report.csv")).unwrap();
    let selection: Vec<SelectionRow> = read_csv(&r.out.join("train/selection.csv")).unwrap();
    let ablation_exists = r.out.join("report/model_ablation.csv").exists();
    let names: Vec<String> = presets().into_iter().map(|p| p.name).collect();
    let mut problems = Vec::new();
    let mut lines = Vec::new();
    for target in [Target::Qor, Target::Power] {
        let rows: Vec<&PccRow> = pcc.iter().filter(|p| p.pipeline == "D" && p.target == target.name()).collect();
        let listed: Vec<String> = rows.iter().map(|p| p.model.clone()).collect();
        if listed != names {
            problems.push(format!("{} presets listed for {}", listed.len(), target.name()));
        }
        if rows.iter().any(|p| p.benchmark.is_empty() || p.pcc_train.is_none() || p.fit_count == 0) {
            problems.push(format!("incomplete rows for {}", target.name()));
        }
        let best = rows
            .iter()
            .filter(|p| p.pcc_test.is_some())
            .fold(None::<&&PccRow>, |acc, p| match acc {
                Some(b) if b.pcc_test >= p.pcc_test => Some(b),
                _ => Some(p),
            })
            .map(|p| p.model.clone());
        let sel: Vec<&SelectionRow> = selection.iter().filter(|s| s.target == target.name()).collect();
        match (sel.as_slice(), best) {
            ([s], Some(b)) if s.preset == b => {
                let expected = expected_kind(target).map(|k| k.name().to_string()).unwrap_or_default();
                lines.push(format!("{} expected {expected} observed {} ({})", target.name(), s.kind, s.preset));
            }
            (s, b) => problems.push(format!("selection for {} {:?} vs argmax {b:?}", target.name(), s.iter().map(|x| &x.preset).collect::<Vec<_>>())),
        }
    }
    if !ablation_exists {
        problems.push("report/model_ablation.csv missing".into());
    }
    let pass = problems.is_empty() && selection.len() == 2;
    verdict(10, "ablation report", pass, &format!("{}; problems {problems:?}", lines.join("; ")));
    assert!(pass);
}
