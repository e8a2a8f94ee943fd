//! Run manifest: configuration snapshot, per-stage summaries, artifact checksums and
//! evaluation counters. Wall-clock timings live in a separate file so the manifest is
//! reproducible byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TIMINGS_FILE: &str = "timings.json";
pub const MANIFEST_FORMAT: &str = "axdse-run-1";

/// Pipeline stages in execution order.
pub const STAGES: [&str; 5] = ["characterize", "train", "explore", "evaluate", "report"];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Counters {
    /// Oracle evaluations spent labeling training configurations.
    pub training_oracle_calls: u64,
    /// Oracle evaluations during exploration; zero for surrogate-driven search.
    pub exploration_oracle_calls: u64,
    pub final_oracle_calls: u64,
    /// Candidates scored by the surrogates during exploration.
    pub surrogate_candidates: u64,
    /// Model invocations: batch calls times models.
    pub surrogate_calls: u64,
    pub batch_calls: u64,
}

impl Counters {
    pub fn oracle_calls(&self) -> u64 {
        self.training_oracle_calls + self.exploration_oracle_calls + self.final_oracle_calls
    }

    /// `1 - oracle / (surrogate-scored candidates + oracle)`.
    pub fn oracle_reduction(&self) -> f64 {
        let oracle = self.oracle_calls() as f64;
        let total = self.surrogate_candidates as f64 + oracle;
        if total == 0.0 {
            0.0
        } else {
            1.0 - oracle / total
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    /// The configuration slice the stage depends on.
    pub config: serde_json::Value,
    /// Paths relative to the output directory.
    pub artifacts: Vec<String>,
    pub summary: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub tool_version: String,
    pub config: RunConfig,
    pub stages: BTreeMap<String, StageRecord>,
    pub checksums: BTreeMap<String, String>,
    pub counters: Counters,
}

impl RunManifest {
    pub fn new(config: &RunConfig) -> Self {
        RunManifest {
            format: MANIFEST_FORMAT.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            stages: BTreeMap::new(),
            checksums: BTreeMap::new(),
            counters: Counters::default(),
        }
    }

    pub fn load(out: &Path) -> CliResult<Self> {
        let path = out.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|_| CliError::Missing(format!("{} (run `characterize` first)", path.display())))?;
        let m: RunManifest = serde_json::from_str(&text)?;
        if m.format != MANIFEST_FORMAT {
            return Err(CliError::Invariant(format!("unknown manifest format {}", m.format)));
        }
        Ok(m)
    }

    pub fn save(&self, out: &Path) -> CliResult<()> {
        write_text(&out.join(MANIFEST_FILE), &(serde_json::to_string_pretty(self)? + "\n"))
    }

    /// Drops `stage` and everything downstream of it together with their checksums.
    pub fn invalidate_from(&mut self, stage: &str) {
        let start = STAGES.iter().position(|s| *s == stage).expect("known stage");
        for s in &STAGES[start..] {
            if let Some(rec) = self.stages.remove(*s) {
                for a in rec.artifacts {
                    self.checksums.remove(&a);
                }
            }
        }
    }

    /// Requires `stage` to have completed with the same configuration slice and its
    /// artifacts to be intact.
    pub fn require(&self, out: &Path, stage: &str, config: &serde_json::Value) -> CliResult<()> {
        let rec = self
            .stages
            .get(stage)
            .ok_or_else(|| CliError::Missing(format!("stage `{stage}` has not run in {}", out.display())))?;
        if &rec.config != config {
            return Err(CliError::Config(format!(
                "stage `{stage}` ran with a different configuration; rerun it first"
            )));
        }
        for a in &rec.artifacts {
            let path = out.join(a);
            if !path.exists() {
                return Err(CliError::Missing(format!("{} (rerun `{stage}`)", path.display())));
            }
            let expected = self.checksums.get(a).ok_or_else(|| CliError::Invariant(format!("no checksum for {a}")))?;
            if &sha256_file(&path)? != expected {
                return Err(CliError::Invariant(format!("checksum mismatch for {a}")));
            }
        }
        Ok(())
    }

    /// Records a completed stage and checksums its artifacts.
    pub fn record(&mut self, out: &Path, stage: &str, config: serde_json::Value, artifacts: Vec<String>, summary: serde_json::Value) -> CliResult<()> {
        for a in &artifacts {
            self.checksums.insert(a.clone(), sha256_file(&out.join(a))?);
        }
        self.stages.insert(
            stage.to_string(),
            StageRecord {
                config,
                artifacts,
                summary,
            },
        );
        Ok(())
    }
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Every file below `dir`, as sorted paths relative to `root`.
pub fn files_below(root: &Path, dir: &Path) -> CliResult<Vec<String>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).map_err(|e| CliError::io(&d, e))? {
            let p: PathBuf = e.map_err(|e| CliError::io(&d, e))?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(relative(root, &p));
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn relative(root: &Path, p: &Path) -> String {
    p.strip_prefix(root)
        .unwrap_or(p)
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct OutputLock {
    path: PathBuf,
}

pub const LOCK_FILE: &str = ".axdse.lock";

impl OutputLock {
    pub fn acquire(out: &Path) -> CliResult<Self> {
        fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
        let path = out.join(LOCK_FILE);
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(OutputLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::Config(format!(
                "{} is locked by another command; remove {} if it is stale",
                out.display(),
                path.display()
            ))),
            Err(e) => Err(CliError::io(&path, e)),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Profile;

    #[test]
    fn reduction_arithmetic() {
        let c = Counters {
            training_oracle_calls: 1000,
            final_oracle_calls: 200,
            surrogate_candidates: 100_000,
            ..Default::default()
        };
        assert_eq!(c.oracle_calls(), 1200);
        assert!((c.oracle_reduction() - (1.0 - 1200.0 / 101_200.0)).abs() < 1e-15);
        assert_eq!(Counters::default().oracle_reduction(), 0.0);
    }

    #[test]
    fn lock_is_exclusive() {
        let dir = tempfile::tempdir().unwrap();
        let a = OutputLock::acquire(dir.path()).unwrap();
        assert_eq!(OutputLock::acquire(dir.path()).unwrap_err().exit_code(), 2);
        drop(a);
        OutputLock::acquire(dir.path()).unwrap();
    }

    #[test]
    fn checksums_verify_and_invalidate() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path();
        write_text(&out.join("a/x.csv"), "1\n").unwrap();
        let mut m = RunManifest::new(&RunConfig::defaults(Profile::Desk));
        let slice = serde_json::json!({"k": 1});
        m.record(out, "train", slice.clone(), vec!["a/x.csv".into()], serde_json::Value::Null).unwrap();
        m.require(out, "train", &slice).unwrap();
        assert_eq!(m.require(out, "train", &serde_json::json!({"k": 2})).unwrap_err().exit_code(), 2);
        assert_eq!(m.require(out, "explore", &slice).unwrap_err().exit_code(), 3);
        write_text(&out.join("a/x.csv"), "2\n").unwrap();
        assert_eq!(m.require(out, "train", &slice).unwrap_err().exit_code(), 4);
        std::fs::remove_file(out.join("a/x.csv")).unwrap();
        assert_eq!(m.require(out, "train", &slice).unwrap_err().exit_code(), 3);
        m.invalidate_from("characterize");
        assert!(m.stages.is_empty() && m.checksums.is_empty());
    }
}
