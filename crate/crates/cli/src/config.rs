//! Run configuration: a versioned TOML document layered over a named profile.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use axdse::approxlib::LibraryConfig;
use axdse::bench::{template_by_name, AcceleratorTemplate, DatasetSeeds};
use axdse::search::Objective;
use axdse::surrogate::{preset_by_name, presets, PipelineKind, Preset};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Small budgets for quick checks.
    Desk,
    /// Full-scale budgets: 1000 training configurations, 10^5 candidates.
    Paper,
}

impl FromStr for Profile {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            _ => Err(CliError::Config(format!("unknown profile `{s}` (desk|paper)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Es,
    Nsga2,
    Hc,
    Random,
}

impl FromStr for Engine {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "es" => Ok(Engine::Es),
            "nsga2" => Ok(Engine::Nsga2),
            "hc" => Ok(Engine::Hc),
            "random" => Ok(Engine::Random),
            _ => Err(CliError::Config(format!("unknown engine `{s}` (es|nsga2|hc|random)"))),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Es => "es",
            Engine::Nsga2 => "nsga2",
            Engine::Hc => "hc",
            Engine::Random => "random",
        })
    }
}

/// How the template is searched: directly by the chosen engine, or by ES over the whole
/// genome (`flat`) or stage by stage (`staged`) under `search.budget`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Direct,
    Flat,
    Staged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub library: u64,
    pub images: u64,
    pub signal: u64,
    /// Training configurations and the train/test split.
    pub sample: u64,
    pub model: u64,
    pub search: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub samples: usize,
    /// Preset names fitted per target; all presets when empty.
    pub presets: Vec<String>,
    /// Pipelines on which the selected hardware models are refitted for comparison.
    pub ablation_pipelines: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub engine: Engine,
    pub mode: SearchMode,
    pub mu: usize,
    pub lambda: usize,
    pub generations: usize,
    pub mutation_rate: Option<f64>,
    pub nsga_pop: usize,
    pub nsga_generations: usize,
    pub crossover: f64,
    /// Candidate budget of the hill climber, random search and hierarchical modes.
    pub budget: usize,
    pub batch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalConfig {
    /// Largest number of archive members re-scored by the oracle.
    pub top_k: usize,
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub version: u32,
    pub profile: Profile,
    pub benchmark: String,
    pub pipeline: String,
    pub objectives: Vec<String>,
    pub library: Option<PathBuf>,
    pub seeds: Seeds,
    pub train: TrainConfig,
    pub search: SearchConfig,
    #[serde(rename = "final")]
    pub final_eval: FinalConfig,
}

/// On-disk form: every field optional except the version header.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    version: Option<u32>,
    profile: Option<Profile>,
    benchmark: Option<String>,
    pipeline: Option<String>,
    objectives: Option<Vec<String>>,
    library: Option<PathBuf>,
    seeds: Option<RawSeeds>,
    train: Option<RawTrain>,
    search: Option<RawSearch>,
    #[serde(rename = "final")]
    final_eval: Option<RawFinal>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSeeds {
    library: Option<u64>,
    images: Option<u64>,
    signal: Option<u64>,
    sample: Option<u64>,
    model: Option<u64>,
    search: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrain {
    samples: Option<usize>,
    presets: Option<Vec<String>>,
    ablation_pipelines: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSearch {
    engine: Option<Engine>,
    mode: Option<SearchMode>,
    mu: Option<usize>,
    lambda: Option<usize>,
    generations: Option<usize>,
    mutation_rate: Option<f64>,
    nsga_pop: Option<usize>,
    nsga_generations: Option<usize>,
    crossover: Option<f64>,
    budget: Option<usize>,
    batch: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFinal {
    top_k: Option<usize>,
}

/// Command-line overrides applied after the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub profile: Option<Profile>,
    pub seed: Option<u64>,
    pub engine: Option<Engine>,
}

impl RunConfig {
    /// Defaults of `profile` on the Gaussian benchmark.
    pub fn defaults(profile: Profile) -> Self {
        let data = DatasetSeeds::default();
        let seeds = Seeds {
            library: LibraryConfig::default().seed,
            images: data.images,
            signal: data.signal,
            sample: 1,
            model: 0,
            search: 0,
        };
        let (train, search, final_eval) = match profile {
            Profile::Paper => (
                TrainConfig {
                    samples: 1000,
                    presets: Vec::new(),
                    ablation_pipelines: ["B", "C", "D", "E", "F"].map(String::from).to_vec(),
                },
                SearchConfig {
                    engine: Engine::Es,
                    mode: SearchMode::Direct,
                    mu: 1,
                    lambda: 20,
                    generations: 5000,
                    mutation_rate: None,
                    nsga_pop: 200,
                    nsga_generations: 1000,
                    crossover: 0.9,
                    budget: 100_000,
                    batch: 20,
                },
                FinalConfig { top_k: 200 },
            ),
            Profile::Desk => (
                TrainConfig {
                    samples: 100,
                    presets: ["rf_default", "rf_t30_d12", "bayes_evidence", "svr_lin_c1"]
                        .map(String::from)
                        .to_vec(),
                    ablation_pipelines: ["D", "F"].map(String::from).to_vec(),
                },
                SearchConfig {
                    engine: Engine::Es,
                    mode: SearchMode::Direct,
                    mu: 1,
                    lambda: 20,
                    generations: 50,
                    mutation_rate: None,
                    nsga_pop: 20,
                    nsga_generations: 50,
                    crossover: 0.9,
                    budget: 1000,
                    batch: 20,
                },
                FinalConfig { top_k: 20 },
            ),
        };
        RunConfig {
            version: CONFIG_VERSION,
            profile,
            benchmark: "gaussian".into(),
            pipeline: "D".into(),
            objectives: vec!["qor".into(), "power".into()],
            library: None,
            seeds,
            train,
            search,
            final_eval,
        }
    }

    /// Parses a config document; relative library paths resolve against `base`.
    pub fn parse(text: &str, base: &Path, overrides: &Overrides) -> CliResult<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        match raw.version {
            Some(CONFIG_VERSION) => {}
            Some(v) => return Err(CliError::Config(format!("unsupported config version {v}"))),
            None => return Err(CliError::Config("missing `version` header".into())),
        }
        let profile = overrides.profile.or(raw.profile).unwrap_or(Profile::Paper);
        let mut c = RunConfig::defaults(profile);
        macro_rules! set {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        set!(c.benchmark, raw.benchmark);
        set!(c.pipeline, raw.pipeline);
        set!(c.objectives, raw.objectives);
        c.library = raw.library.map(|p| if p.is_relative() { base.join(p) } else { p });
        if let Some(s) = raw.seeds {
            set!(c.seeds.library, s.library);
            set!(c.seeds.images, s.images);
            set!(c.seeds.signal, s.signal);
            set!(c.seeds.sample, s.sample);
            set!(c.seeds.model, s.model);
            set!(c.seeds.search, s.search);
        }
        if let Some(t) = raw.train {
            set!(c.train.samples, t.samples);
            set!(c.train.presets, t.presets);
            set!(c.train.ablation_pipelines, t.ablation_pipelines);
        }
        if let Some(s) = raw.search {
            set!(c.search.engine, s.engine);
            set!(c.search.mode, s.mode);
            set!(c.search.mu, s.mu);
            set!(c.search.lambda, s.lambda);
            set!(c.search.generations, s.generations);
            c.search.mutation_rate = s.mutation_rate.or(c.search.mutation_rate);
            set!(c.search.nsga_pop, s.nsga_pop);
            set!(c.search.nsga_generations, s.nsga_generations);
            set!(c.search.crossover, s.crossover);
            set!(c.search.budget, s.budget);
            set!(c.search.batch, s.batch);
        }
        if let Some(f) = raw.final_eval {
            set!(c.final_eval.top_k, f.top_k);
        }
        c.apply(overrides);
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path, overrides: &Overrides) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")), overrides)
    }

    /// Applies overrides; `--seed` replaces the sample, model and search seeds while the
    /// library and dataset seeds, which define the benchmark, stay fixed.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(p) = o.profile {
            if p != self.profile {
                let d = RunConfig::defaults(p);
                self.train = d.train;
                self.search = SearchConfig {
                    engine: self.search.engine,
                    mode: self.search.mode,
                    ..d.search
                };
                self.final_eval = d.final_eval;
                self.profile = p;
            }
        }
        if let Some(s) = o.seed {
            self.seeds.sample = s;
            self.seeds.model = s;
            self.seeds.search = s;
        }
        if let Some(e) = o.engine {
            self.search.engine = e;
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let template = self.template()?;
        let pipeline = self.pipeline_kind()?;
        if pipeline == PipelineKind::A {
            return Err(CliError::Config("pipeline A has no surrogate; choose B..F".into()));
        }
        for p in &self.train.ablation_pipelines {
            if PipelineKind::from_str(p).map_err(|e| CliError::Config(e.to_string()))? == PipelineKind::A {
                return Err(CliError::Config("pipeline A cannot be part of the ablation".into()));
            }
        }
        let objectives = self.objective_list()?;
        if !(2..=3).contains(&objectives.len()) {
            return Err(CliError::Config("two or three objectives are required".into()));
        }
        if !objectives.contains(&Objective::Qor) {
            return Err(CliError::Config("the objective set must include qor".into()));
        }
        if self.train.samples < 10 {
            return Err(CliError::Config("train.samples must be at least 10".into()));
        }
        self.preset_list()?;
        let s = &self.search;
        if s.mu == 0 || s.lambda == 0 || s.generations == 0 {
            return Err(CliError::Config("search.mu, lambda and generations must be positive".into()));
        }
        if s.nsga_pop < 4 || s.nsga_pop % 2 == 1 || s.nsga_generations == 0 {
            return Err(CliError::Config("search.nsga_pop must be even and at least 4".into()));
        }
        if !(0.0..=1.0).contains(&s.crossover) || s.mutation_rate.is_some_and(|r| !(r > 0.0 && r <= 1.0)) {
            return Err(CliError::Config("probabilities must lie in [0, 1]".into()));
        }
        if s.budget == 0 || s.batch == 0 {
            return Err(CliError::Config("search.budget and batch must be positive".into()));
        }
        if s.mode != SearchMode::Direct {
            if s.engine != Engine::Es {
                return Err(CliError::Config("flat and staged modes run ES".into()));
            }
            if s.mode == SearchMode::Staged && template.stages.len() < 2 {
                return Err(CliError::Config(format!("{} has a single stage", template.name)));
            }
        }
        if self.final_eval.top_k == 0 {
            return Err(CliError::Config("final.top_k must be positive".into()));
        }
        if let Some(p) = &self.library {
            if !p.exists() {
                return Err(CliError::Config(format!("library config {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn template(&self) -> CliResult<AcceleratorTemplate> {
        template_by_name(&self.benchmark).ok_or_else(|| CliError::Config(format!("unknown benchmark `{}`", self.benchmark)))
    }

    pub fn pipeline_kind(&self) -> CliResult<PipelineKind> {
        PipelineKind::from_str(&self.pipeline).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn objective_list(&self) -> CliResult<Vec<Objective>> {
        let list = self
            .objectives
            .iter()
            .map(|o| Objective::from_str(o).map_err(|e| CliError::Config(e.to_string())))
            .collect::<CliResult<Vec<_>>>()?;
        for (i, o) in list.iter().enumerate() {
            if list[..i].contains(o) {
                return Err(CliError::Config(format!("objective {o} listed twice")));
            }
        }
        Ok(list)
    }

    pub fn preset_list(&self) -> CliResult<Vec<Preset>> {
        if self.train.presets.is_empty() {
            return Ok(presets());
        }
        self.train
            .presets
            .iter()
            .map(|n| preset_by_name(n).map_err(|e| CliError::Config(e.to_string())))
            .collect()
    }

    pub fn ablation_list(&self) -> CliResult<Vec<PipelineKind>> {
        self.train
            .ablation_pipelines
            .iter()
            .map(|p| PipelineKind::from_str(p).map_err(|e| CliError::Config(e.to_string())))
            .collect()
    }

    /// Library configuration: the referenced TOML file or the built-in default, with the
    /// library seed taken from `seeds.library`.
    pub fn library_config(&self) -> CliResult<LibraryConfig> {
        let mut lib = match &self.library {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => LibraryConfig::default(),
        };
        lib.seed = self.seeds.library;
        Ok(lib)
    }

    pub fn dataset_seeds(&self) -> DatasetSeeds {
        DatasetSeeds {
            images: self.seeds.images,
            signal: self.seeds.signal,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_header_required() {
        let e = RunConfig::parse("benchmark = \"gaussian\"\n", Path::new("."), &Overrides::default()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = RunConfig::parse("version = 7\n", Path::new("."), &Overrides::default()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn profile_defaults_and_file_values() {
        let c = RunConfig::parse("version = 1\n", Path::new("."), &Overrides::default()).unwrap();
        assert_eq!(c, RunConfig::defaults(Profile::Paper));
        assert_eq!(c.search.generations * c.search.mu * c.search.lambda, 100_000);
        let text = "version = 1\nprofile = \"desk\"\nbenchmark = \"mac\"\n[search]\nlambda = 8\n";
        let c = RunConfig::parse(text, Path::new("."), &Overrides::default()).unwrap();
        assert_eq!(c.benchmark, "mac");
        assert_eq!(c.search.lambda, 8);
        assert_eq!(c.train.samples, 100);
    }

    #[test]
    fn overrides_win() {
        let o = Overrides {
            profile: Some(Profile::Desk),
            seed: Some(9),
            engine: Some(Engine::Nsga2),
        };
        let c = RunConfig::parse("version = 1\nprofile = \"paper\"\n", Path::new("."), &o).unwrap();
        assert_eq!(c.profile, Profile::Desk);
        assert_eq!((c.seeds.sample, c.seeds.model, c.seeds.search), (9, 9, 9));
        assert_eq!(c.seeds.library, LibraryConfig::default().seed);
        assert_eq!(c.search.engine, Engine::Nsga2);
    }

    #[test]
    fn invalid_values_rejected() {
        for text in [
            "version = 1\nbenchmark = \"nope\"\n",
            "version = 1\npipeline = \"A\"\n",
            "version = 1\nobjectives = [\"power\", \"luts\"]\n",
            "version = 1\nobjectives = [\"qor\"]\n",
            "version = 1\n[train]\npresets = [\"nope\"]\n",
            "version = 1\n[search]\nmode = \"staged\"\n",
            "version = 1\n[search]\nengine = \"nsga2\"\nmode = \"flat\"\n",
            "version = 1\nlibrary = \"/does/not/exist.toml\"\n",
            "version = 1\nunknown = 3\n",
        ] {
            let e = RunConfig::parse(text, Path::new("."), &Overrides::default()).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{text}");
        }
    }

    #[test]
    fn snapshot_round_trips() {
        let c = RunConfig::defaults(Profile::Desk);
        let back = RunConfig::parse(&c.to_toml(), Path::new("."), &Overrides::default()).unwrap();
        assert_eq!(back, c);
    }
}
