use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;
use std::sync::OnceLock;

use axdse::approxlib::LibraryConfig;
use axdse::search::dominates_min;
use axdse::surrogate::{presets, RegressorModel};
use axdse_cli::commands::{read_csv, FrontRow, PccRow, ResidualRow, SelectionRow, TraceRow};
use axdse_cli::manifest::{sha256_file, LOCK_FILE};
use axdse_cli::{run, Command, Profile, RunConfig, RunManifest};

fn desk() -> RunConfig {
    RunConfig::defaults(Profile::Desk)
}

fn fresh_run(config: &RunConfig) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    run(Command::All, config, &out).unwrap();
    (dir, out)
}

/// One completed desk run shared by the read-only tests.
fn shared() -> &'static Path {
    static RUN: OnceLock<(tempfile::TempDir, PathBuf)> = OnceLock::new();
    &RUN.get_or_init(|| fresh_run(&desk())).1
}

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_axdse"))
}

#[test]
fn stage_before_upstream_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["explore", "--profile", "desk", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "version = 1\nbenchmark = \"nope\"\n").unwrap();
    let status = bin().arg("characterize").arg("--config").arg(&cfg).arg("--out").arg(dir.path().join("o")).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let status = bin().args(["characterize", "--engine", "annealing", "--out"]).arg(dir.path()).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn binary_runs_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(
        &cfg,
        "version = 1\nprofile = \"desk\"\nbenchmark = \"mac\"\n[search]\ngenerations = 10\n[train]\npresets = [\"bayes_evidence\", \"rf_t30_d12\"]\n",
    )
    .unwrap();
    let out = dir.path().join("o");
    let status = bin().arg("all").arg("--config").arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let m = RunManifest::load(&out).unwrap();
    assert_eq!(m.config.benchmark, "mac");
    assert_eq!(m.stages.len(), 5);
    assert!(!out.join(LOCK_FILE).exists());
}

#[test]
fn characterize_is_incremental() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let c = desk();
    run(Command::Characterize, &c, out).unwrap();
    let summary = |out: &Path| RunManifest::load(out).unwrap().stages["characterize"].summary.clone();
    let first = summary(out);
    let lib = LibraryConfig::default();
    assert_eq!(first["components"], lib.specs().unwrap().len());
    for class in &lib.classes {
        let key = format!("{}{}", class.kind.tag(), class.width);
        assert_eq!(first["classes"][key.as_str()], class.expand().len(), "{key}");
    }
    run(Command::Characterize, &c, out).unwrap();
    let again = summary(out);
    assert_eq!(again["recomputed"], 0);
    assert_eq!(again["full_cache_hit"], true);
    fs::remove_file(out.join("library/components/mul8u_trunc_k03.json")).unwrap();
    run(Command::Characterize, &c, out).unwrap();
    let partial = summary(out);
    assert_eq!(partial["recomputed"], 1);
    assert_eq!(partial["cache_hits"], first["components"].as_u64().unwrap() - 1);
}

#[test]
fn training_report_schema() {
    let out = shared();
    let c = desk();
    let rows: Vec<PccRow> = read_csv(&out.join("train/pcc_report.csv")).unwrap();
    let header = fs::read_to_string(out.join("train/pcc_report.csv")).unwrap();
    assert!(header.starts_with("benchmark,pipeline,model,target,seed,pcc_train,pcc_test,fit_count\n"));
    let mut keys: Vec<_> = rows.iter().map(|r| (&r.pipeline, &r.model, &r.target, r.seed)).collect();
    let n = keys.len();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), n, "one row per (pipeline, model, target, seed)");
    let main: Vec<_> = rows.iter().filter(|r| r.pipeline == "D").collect();
    assert_eq!(main.len(), c.train.presets.len() * c.objectives.len());
    assert!(rows.iter().any(|r| r.pipeline == "F" && r.target == "power"));
    assert!(rows.iter().all(|r| r.fit_count == 80));
    let sel: Vec<SelectionRow> = read_csv(&out.join("train/selection.csv")).unwrap();
    assert_eq!(sel.len(), 2);
    for s in &sel {
        let best = rows
            .iter()
            .filter(|r| r.pipeline == "D" && r.target == s.target)
            .map(|r| r.pcc_test.unwrap_or(f64::NEG_INFINITY))
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(s.pcc_test, Some(best));
        assert!(s.expected_kind.is_some() && s.matches_expected.is_some());
        let m = RegressorModel::load(&out.join(format!("train/models/{}.model", s.target))).unwrap();
        assert_eq!(m.preset, s.preset);
    }
}

#[test]
fn exploration_counters() {
    let out = shared();
    let c = desk();
    let m = RunManifest::load(out).unwrap();
    let trace: Vec<TraceRow> = read_csv(&out.join("explore/trace.csv")).unwrap();
    assert_eq!(trace.len(), c.search.generations);
    assert_eq!(m.counters.exploration_oracle_calls, 0);
    assert_eq!(m.counters.surrogate_calls, (c.search.generations * c.search.mu * 2) as u64);
    assert_eq!(m.counters.surrogate_candidates, trace.iter().map(|t| t.evaluations).sum::<u64>());
    assert_eq!(m.counters.surrogate_calls, trace.iter().map(|t| t.surrogate_calls).sum::<u64>());
    assert_eq!(m.counters.batch_calls, trace.iter().map(|t| t.batch_calls).sum::<u64>());
    assert_eq!(m.counters.training_oracle_calls, c.train.samples as u64);
    let cum: Vec<usize> = trace.iter().map(|t| t.cumulative_insertions).collect();
    assert!(cum.windows(2).all(|w| w[0] <= w[1]));
    let lines = fs::read_to_string(out.join("explore/exploration.csv")).unwrap().lines().count();
    assert_eq!(lines - 1, *cum.last().unwrap());
}

#[test]
fn evaluation_outputs() {
    let out = shared();
    let c = desk();
    let m = RunManifest::load(out).unwrap();
    let residuals: Vec<ResidualRow> = read_csv(&out.join("evaluate/residuals.csv")).unwrap();
    assert!(residuals.len() <= c.final_eval.top_k);
    assert_eq!(m.counters.final_oracle_calls, residuals.len() as u64);
    let front: Vec<FrontRow> = read_csv(&out.join("evaluate/final_front.csv")).unwrap();
    assert_eq!(front.len(), residuals.iter().filter(|r| r.on_front).count());
    let pts: Vec<Vec<f64>> = front.iter().map(|f| vec![100.0 - f.qor.unwrap(), f.power.unwrap()]).collect();
    for a in &pts {
        assert!(!pts.iter().any(|b| dominates_min(b, a)));
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("evaluate/summary.json")).unwrap()).unwrap();
    assert!(summary["residual_pcc"]["power"].as_f64().unwrap() >= 0.0);
    let expect = 1.0 - m.counters.oracle_calls() as f64 / (m.counters.surrogate_candidates + m.counters.oracle_calls()) as f64;
    assert_eq!(summary["oracle_reduction"].as_f64().unwrap(), expect);
}

#[test]
fn report_bundle() {
    let out = shared();
    let c = desk();
    #[derive(serde::Deserialize)]
    struct Density {
        density: f64,
    }
    let conv = fs::read_to_string(out.join("report/convergence.csv")).unwrap();
    assert_eq!(conv.lines().count() - 1, c.search.generations);
    let dens: Vec<Density> = read_csv(&out.join("report/density.csv")).unwrap();
    assert!((dens.iter().map(|d| d.density).sum::<f64>() - 1.0).abs() <= 1e-9);
    #[derive(serde::Deserialize)]
    struct Scatter {
        source: String,
        config_id: String,
        on_front: bool,
        x: f64,
        y: f64,
    }
    let scatter: Vec<Scatter> = read_csv(&out.join("report/pareto_scatter.csv")).unwrap();
    let mut from_scatter: Vec<(String, f64, f64)> = scatter
        .iter()
        .filter(|s| s.source == "true" && s.on_front)
        .map(|s| (s.config_id.clone(), s.x, s.y))
        .collect();
    let front: Vec<FrontRow> = read_csv(&out.join("evaluate/final_front.csv")).unwrap();
    let mut from_front: Vec<(String, f64, f64)> = front.iter().map(|f| (f.config_id.clone(), f.power.unwrap(), f.qor.unwrap())).collect();
    from_scatter.sort_by(|a, b| a.0.cmp(&b.0));
    from_front.sort_by(|a, b| a.0.cmp(&b.0));
    assert_eq!(from_scatter, from_front);
    for f in ["pcc_by_pipeline.svg", "convergence.svg", "density.svg", "pareto_scatter.svg", "model_ablation_qor.svg"] {
        let svg = fs::read_to_string(out.join("report").join(f)).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"), "{f}");
    }
    let m = RunManifest::load(out).unwrap();
    for (path, sum) in &m.checksums {
        assert_eq!(&sha256_file(&out.join(path)).unwrap(), sum, "{path}");
    }
    assert!(!m.checksums.contains_key("timings.json"));
}

#[test]
fn tampering_and_config_drift_are_detected() {
    let c = desk();
    let (_d, out) = fresh_run(&c);
    let mut drift = c.clone();
    drift.train.samples = 50;
    assert_eq!(run(Command::Explore, &drift, &out).unwrap_err().exit_code(), 2);
    fs::write(out.join("train/selection.csv"), "tampered\n").unwrap();
    assert_eq!(run(Command::Explore, &c, &out).unwrap_err().exit_code(), 4);
    fs::remove_file(out.join("train/selection.csv")).unwrap();
    assert_eq!(run(Command::Explore, &c, &out).unwrap_err().exit_code(), 3);
    run(Command::Train, &c, &out).unwrap();
    let m = RunManifest::load(&out).unwrap();
    assert!(!m.stages.contains_key("explore") && !m.stages.contains_key("evaluate"));
    assert_eq!(run(Command::Evaluate, &c, &out).unwrap_err().exit_code(), 3);
    fs::write(out.join(LOCK_FILE), "").unwrap();
    assert_eq!(run(Command::Explore, &c, &out).unwrap_err().exit_code(), 2);
    fs::remove_file(out.join(LOCK_FILE)).unwrap();
    run(Command::Explore, &c, &out).unwrap();
}

#[test]
fn schema_mismatch_is_a_hard_error() {
    let c = desk();
    let (_d, out) = fresh_run(&c);
    let mut other = c.clone();
    other.pipeline = "F".into();
    other.train.ablation_pipelines.clear();
    let (_d2, out2) = fresh_run(&other);
    let rel = "train/models/power.model";
    fs::copy(out2.join(rel), out.join(rel)).unwrap();
    let mut m = RunManifest::load(&out).unwrap();
    m.checksums.insert(rel.into(), sha256_file(&out.join(rel)).unwrap());
    m.save(&out).unwrap();
    assert_eq!(run(Command::Explore, &c, &out).unwrap_err().exit_code(), 4);
}

#[test]
fn engines_and_modes_run() {
    use axdse_cli::{Engine, SearchMode};
    let base = desk();
    let (_d, out) = fresh_run(&base);
    for engine in [Engine::Nsga2, Engine::Hc, Engine::Random] {
        let mut c = base.clone();
        c.search.engine = engine;
        run(Command::Explore, &c, &out).unwrap();
        run(Command::Evaluate, &c, &out).unwrap();
        let m = RunManifest::load(&out).unwrap();
        assert_eq!(m.counters.exploration_oracle_calls, 0, "{engine}");
        assert!(m.counters.surrogate_candidates > 0);
    }
    let mut ms = base.clone();
    ms.benchmark = "multistage".into();
    ms.search.mode = SearchMode::Staged;
    ms.train.presets = vec!["bayes_evidence".into()];
    ms.train.ablation_pipelines.clear();
    let (_d2, out2) = fresh_run(&ms);
    let m = RunManifest::load(&out2).unwrap();
    assert_eq!(m.stages["explore"].summary["engine"], "es-staged");
    assert!(m.counters.surrogate_candidates <= ms.search.budget as u64);
}

#[test]
fn all_presets_listed_by_default() {
    let c = RunConfig::defaults(Profile::Paper);
    assert_eq!(c.preset_list().unwrap().len(), presets().len());
    let counts: BTreeMap<_, usize> = presets().iter().fold(BTreeMap::new(), |mut m, p| {
        *m.entry(p.params.kind().name()).or_default() += 1;
        m
    });
    assert_eq!(counts.len(), 3);
}
