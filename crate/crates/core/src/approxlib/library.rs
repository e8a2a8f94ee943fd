use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::build::build_component;
use super::metrics::{characterize, ErrorMetrics};
use super::spec::{ComponentSpec, Family};
use crate::backend::{exact_cost, fast_features, CostEstimate, FeatureVector, DEFAULT_K};
use crate::circuit::{exhaustive_word, read_aig, write_aig, Aig, Simulator, SlotKind, SlotSpec, WORD_BITS};
use crate::{Error, Result};

/// Largest operand-bit total for which a behavioral lookup table is kept.
const TABLE_LIMIT: u32 = 16;

/// Parameter sweep of one family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySweep {
    Accurate,
    Truncated { k: Vec<u32> },
    LowerOr { k: Vec<u32> },
    BrokenArray { h: Vec<u32>, v: Vec<u32> },
    WidthReduced { w: Vec<u32> },
}

/// Components of one (kind, width) class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSweep {
    pub kind: SlotKind,
    pub width: u32,
    pub families: Vec<FamilySweep>,
}

impl ClassSweep {
    /// Expands the sweep into specs. Parameterisations that reduce to the exact
    /// function (k = 0, h = v = 0, w = width) are dropped in favour of the single
    /// accurate member, which is always present.
    pub fn expand(&self) -> Vec<ComponentSpec> {
        let mut fams = vec![Family::Accurate];
        for f in &self.families {
            match f {
                FamilySweep::Accurate => {}
                FamilySweep::Truncated { k } => fams.extend(k.iter().map(|&k| Family::Truncated { k })),
                FamilySweep::LowerOr { k } => fams.extend(k.iter().map(|&k| Family::LowerOr { k })),
                FamilySweep::BrokenArray { h, v } => {
                    for &h in h {
                        fams.extend(v.iter().map(|&v| Family::BrokenArray { h, v }));
                    }
                }
                FamilySweep::WidthReduced { w } => fams.extend(w.iter().map(|&w| Family::WidthReduced { w })),
            }
        }
        let degenerate = |f: &Family| match *f {
            Family::Truncated { k } | Family::LowerOr { k } => k == 0,
            Family::BrokenArray { h, v } => h == 0 && v == 0,
            Family::WidthReduced { w } => w == self.width,
            Family::Accurate => false,
        };
        let mut seen = std::collections::HashSet::new();
        fams.into_iter()
            .filter(|f| *f == Family::Accurate || !degenerate(f))
            .map(|f| ComponentSpec::new(self.kind, self.width, f))
            .filter(|s| seen.insert(s.id()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LibraryConfig {
    pub seed: u64,
    /// LUT size used for the cached exact costs.
    pub lut_k: usize,
    pub classes: Vec<ClassSweep>,
}

impl Default for LibraryConfig {
    /// 8-bit multipliers and 16-bit adders, the operand widths of the image
    /// benchmarks.
    fn default() -> Self {
        LibraryConfig {
            seed: 0x5eed_0001,
            lut_k: DEFAULT_K,
            classes: vec![
                ClassSweep {
                    kind: SlotKind::Multiplier,
                    width: 8,
                    families: vec![
                        FamilySweep::Accurate,
                        FamilySweep::Truncated { k: (1..=6).collect() },
                        FamilySweep::BrokenArray {
                            h: vec![0, 1, 2, 3],
                            v: vec![0, 4, 5, 6, 7],
                        },
                        FamilySweep::WidthReduced { w: vec![5, 6, 7] },
                    ],
                },
                ClassSweep {
                    kind: SlotKind::Adder,
                    width: 16,
                    families: vec![
                        FamilySweep::Accurate,
                        FamilySweep::Truncated { k: (1..=8).collect() },
                        FamilySweep::LowerOr {
                            k: vec![2, 4, 6, 8, 10],
                        },
                        FamilySweep::WidthReduced { w: vec![10, 12, 14] },
                    ],
                },
            ],
        }
    }
}

impl LibraryConfig {
    /// All component specs, validated, in id order.
    pub fn specs(&self) -> Result<Vec<ComponentSpec>> {
        if self.classes.is_empty() {
            return Err(Error::LibraryConfig("no component classes".into()));
        }
        let mut out = Vec::new();
        for c in &self.classes {
            if c.families.is_empty() {
                return Err(Error::LibraryConfig(format!(
                    "empty family sweep for {}{}",
                    c.kind.tag(),
                    c.width
                )));
            }
            for s in c.expand() {
                s.validate()?;
                out.push(s);
            }
        }
        out.sort_by_key(|s| s.id());
        for w in out.windows(2) {
            if w[0].id() == w[1].id() {
                return Err(Error::LibraryConfig(format!("duplicate component {}", w[0].id())));
            }
        }
        Ok(out)
    }

    /// Characterization seed of one component: the library seed mixed with a
    /// hash of the id, so it does not depend on library ordering.
    pub fn component_seed(&self, id: &str) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in id.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        self.seed ^ h
    }
}

/// How slot results are computed during application-level evaluation.
#[derive(Debug, Clone)]
pub enum Behavior {
    /// Output of every operand pair, indexed by `a | b << width`, obtained by
    /// simulating the circuit.
    Table(Vec<u32>),
    /// The family's integer function.
    Functional,
}

/// A characterized library component.
#[derive(Debug, Clone)]
pub struct ComponentRecord {
    pub id: String,
    pub spec: ComponentSpec,
    pub circuit: Aig,
    pub errors: ErrorMetrics,
    /// Fast structural features of the component circuit.
    pub features: FeatureVector,
    pub exact_cost: CostEstimate,
    pub behavior: Behavior,
}

impl ComponentRecord {
    /// Builds, characterizes and costs one component.
    pub fn generate(spec: ComponentSpec, seed: u64, lut_k: usize) -> Result<Self> {
        let circuit = build_component(&spec)?;
        let errors = characterize(&spec, &circuit, seed);
        Self::assemble(spec, circuit, errors, lut_k)
    }

    fn assemble(spec: ComponentSpec, circuit: Aig, errors: ErrorMetrics, lut_k: usize) -> Result<Self> {
        let features = fast_features(&circuit);
        let exact_cost = exact_cost(&circuit, lut_k)?;
        let behavior = behavior_of(&spec, &circuit);
        Ok(ComponentRecord {
            id: spec.id(),
            spec,
            circuit,
            errors,
            features,
            exact_cost,
            behavior,
        })
    }

    pub fn slot(&self) -> SlotSpec {
        self.spec.slot()
    }

    /// Behavioral evaluation on operands already masked to the slot width.
    #[inline]
    pub fn eval(&self, a: u64, b: u64) -> u64 {
        match &self.behavior {
            Behavior::Table(t) => t[(a | (b << self.spec.width)) as usize] as u64,
            Behavior::Functional => self.spec.apply(a, b),
        }
    }

    fn meta(&self, seed: u64, lut_k: usize) -> ComponentMeta {
        ComponentMeta {
            id: self.id.clone(),
            spec: self.spec,
            seed,
            lut_k,
            errors: self.errors,
            features: self.features.clone(),
            exact_cost: self.exact_cost,
        }
    }
}

fn behavior_of(spec: &ComponentSpec, circuit: &Aig) -> Behavior {
    let bits = spec.input_bits();
    if bits > TABLE_LIMIT {
        return Behavior::Functional;
    }
    let total = 1usize << bits;
    let mut table = vec![0u32; total];
    let mut sim = Simulator::new(circuit);
    let mut inputs = vec![0u64; bits as usize];
    for w in 0..total.div_ceil(WORD_BITS) {
        for (i, x) in inputs.iter_mut().enumerate() {
            *x = exhaustive_word(i, w);
        }
        let out = sim.run(&inputs).expect("arity");
        for bit in 0..WORD_BITS.min(total) {
            table[w * WORD_BITS + bit] =
                out.iter().enumerate().fold(0u32, |acc, (i, o)| acc | ((((o >> bit) & 1) as u32) << i));
        }
    }
    Behavior::Table(table)
}

/// Per-component metadata document stored beside the circuit file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentMeta {
    pub id: String,
    pub spec: ComponentSpec,
    pub seed: u64,
    pub lut_k: usize,
    pub errors: ErrorMetrics,
    pub features: FeatureVector,
    pub exact_cost: CostEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LibraryManifest {
    pub format: String,
    pub config: LibraryConfig,
    pub ids: Vec<String>,
}

const MANIFEST_FORMAT: &str = "axdse-library-1";

/// Outcome of an incremental library build.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CacheReport {
    pub hits: usize,
    pub recomputed: Vec<String>,
}

/// A characterized component library, sorted by id.
#[derive(Debug, Clone)]
pub struct Library {
    pub config: LibraryConfig,
    records: Vec<ComponentRecord>,
    index: HashMap<String, usize>,
    classes: BTreeMap<SlotSpec, Vec<usize>>,
}

impl Library {
    /// Indexes records; ids must be unique.
    pub fn from_records(config: LibraryConfig, mut records: Vec<ComponentRecord>) -> Result<Self> {
        records.sort_by(|a, b| a.id.cmp(&b.id));
        let mut index = HashMap::new();
        let mut classes: BTreeMap<SlotSpec, Vec<usize>> = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            if index.insert(r.id.clone(), i).is_some() {
                return Err(Error::LibraryConfig(format!("duplicate component {}", r.id)));
            }
            classes.entry(r.slot()).or_default().push(i);
        }
        Ok(Library {
            config,
            records,
            index,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[ComponentRecord] {
        &self.records
    }

    pub fn record(&self, i: usize) -> &ComponentRecord {
        &self.records[i]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index.get(id).copied().ok_or_else(|| Error::CacheMiss(id.to_string()))
    }

    pub fn get(&self, id: &str) -> Result<&ComponentRecord> {
        self.index_of(id).map(|i| &self.records[i])
    }

    /// Record indices compatible with `slot`, in id order.
    pub fn choices(&self, slot: SlotSpec) -> &[usize] {
        self.classes.get(&slot).map_or(&[], |v| v.as_slice())
    }

    pub fn slot_classes(&self) -> impl Iterator<Item = &SlotSpec> {
        self.classes.keys()
    }

    pub fn accurate(&self, slot: SlotSpec) -> Result<usize> {
        self.choices(slot)
            .iter()
            .copied()
            .find(|&i| self.records[i].spec.family == Family::Accurate)
            .ok_or_else(|| Error::CacheMiss(format!("{}{}u_acc", slot.kind.tag(), slot.width)))
    }

    /// Writes the library directory: `manifest.json` plus `components/<id>.aig`
    /// and `components/<id>.json` per component.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let comp = dir.join("components");
        fs::create_dir_all(&comp)?;
        for r in &self.records {
            write_if_changed(&comp.join(format!("{}.aig", r.id)), &write_aig(&r.circuit))?;
            let meta = r.meta(self.config.component_seed(&r.id), self.config.lut_k);
            write_if_changed(&comp.join(format!("{}.json", r.id)), &to_json(&meta)?)?;
        }
        let manifest = LibraryManifest {
            format: MANIFEST_FORMAT.into(),
            config: self.config.clone(),
            ids: self.records.iter().map(|r| r.id.clone()).collect(),
        };
        write_if_changed(&dir.join("manifest.json"), &to_json(&manifest)?)
    }

    /// Reads a saved library, trusting cached metadata.
    pub fn load(dir: &Path) -> Result<Self> {
        let manifest: LibraryManifest = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
        if manifest.format != MANIFEST_FORMAT {
            return Err(Error::LibraryConfig(format!("unknown library format {}", manifest.format)));
        }
        let records = manifest
            .ids
            .par_iter()
            .map(|id| {
                let (meta, circuit) = read_component(dir, id)?;
                ComponentRecord::assemble_cached(meta, circuit)
            })
            .collect::<Result<Vec<_>>>()?;
        Library::from_records(manifest.config, records)
    }
}

impl ComponentRecord {
    fn assemble_cached(meta: ComponentMeta, circuit: Aig) -> Result<Self> {
        let behavior = behavior_of(&meta.spec, &circuit);
        Ok(ComponentRecord {
            id: meta.id,
            spec: meta.spec,
            circuit,
            errors: meta.errors,
            features: meta.features,
            exact_cost: meta.exact_cost,
            behavior,
        })
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn write_if_changed(path: &Path, contents: &str) -> Result<()> {
    if fs::read_to_string(path).ok().as_deref() != Some(contents) {
        fs::write(path, contents)?;
    }
    Ok(())
}

fn read_component(dir: &Path, id: &str) -> Result<(ComponentMeta, Aig)> {
    let comp = dir.join("components");
    let meta: ComponentMeta = serde_json::from_str(&fs::read_to_string(comp.join(format!("{id}.json")))?)?;
    let circuit = read_aig(&fs::read_to_string(comp.join(format!("{id}.aig")))?)?;
    Ok((meta, circuit))
}

/// Generates and characterizes every component of `config`.
pub fn generate_library(config: &LibraryConfig) -> Result<Library> {
    let records = config
        .specs()?
        .into_par_iter()
        .map(|s| ComponentRecord::generate(s, config.component_seed(&s.id()), config.lut_k))
        .collect::<Result<Vec<_>>>()?;
    Library::from_records(config.clone(), records)
}

/// Builds the library in `dir`, reusing every cached component whose metadata
/// and circuit still match the configuration; writes back what was recomputed.
pub fn load_or_generate(config: &LibraryConfig, dir: &Path) -> Result<(Library, CacheReport)> {
    let specs = config.specs()?;
    let outcomes = specs
        .into_par_iter()
        .map(|spec| {
            let id = spec.id();
            let seed = config.component_seed(&id);
            let built = build_component(&spec)?;
            if let Ok((meta, circuit)) = read_component(dir, &id) {
                if meta.spec == spec && meta.seed == seed && meta.lut_k == config.lut_k && circuit == built {
                    return Ok((ComponentRecord::assemble_cached(meta, circuit)?, true));
                }
            }
            let errors = characterize(&spec, &built, seed);
            Ok((ComponentRecord::assemble(spec, built, errors, config.lut_k)?, false))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = CacheReport::default();
    let mut records = Vec::with_capacity(outcomes.len());
    for (r, hit) in outcomes {
        if hit {
            report.hits += 1;
        } else {
            report.recomputed.push(r.id.clone());
        }
        records.push(r);
    }
    let lib = Library::from_records(config.clone(), records)?;
    lib.save(dir)?;
    Ok((lib, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> LibraryConfig {
        LibraryConfig {
            seed: 3,
            lut_k: 6,
            classes: vec![
                ClassSweep {
                    kind: SlotKind::Multiplier,
                    width: 4,
                    families: vec![FamilySweep::Truncated { k: vec![0, 1, 2] }],
                },
                ClassSweep {
                    kind: SlotKind::Adder,
                    width: 6,
                    families: vec![FamilySweep::LowerOr { k: vec![2] }],
                },
            ],
        }
    }

    #[test]
    fn default_multiplier_sweep() {
        let specs = LibraryConfig::default().specs().unwrap();
        let mul8 = specs.iter().filter(|s| s.kind == SlotKind::Multiplier).count();
        let add16 = specs.iter().filter(|s| s.kind == SlotKind::Adder).count();
        assert_eq!((mul8, add16), (29, 17));
    }

    #[test]
    fn empty_sweep_is_an_error() {
        let mut c = small_config();
        c.classes[0].families.clear();
        assert!(matches!(c.specs(), Err(Error::LibraryConfig(_))));
        c.classes.clear();
        assert!(matches!(c.specs(), Err(Error::LibraryConfig(_))));
    }

    #[test]
    fn accurate_member_always_present_and_sorted() {
        let lib = generate_library(&small_config()).unwrap();
        let ids: Vec<_> = lib.records().iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["add6u_acc", "add6u_loa_k02", "mul4u_acc", "mul4u_trunc_k01", "mul4u_trunc_k02"]);
        assert!(lib.accurate(SlotSpec::multiplier(4)).is_ok());
        assert!(matches!(lib.get("nope"), Err(Error::CacheMiss(_))));
    }

    #[test]
    fn table_behavior_matches_function() {
        let lib = generate_library(&small_config()).unwrap();
        for r in lib.records() {
            for a in 0..1u64 << r.spec.width {
                for b in 0..1u64 << r.spec.width {
                    assert_eq!(r.eval(a, b), r.spec.apply(a, b));
                }
            }
        }
    }

    #[test]
    fn only_accurate_families_are_error_free() {
        let c = LibraryConfig {
            seed: 1,
            lut_k: 6,
            classes: vec![ClassSweep {
                kind: SlotKind::Adder,
                width: 12,
                families: vec![FamilySweep::Accurate],
            }],
        };
        let lib = generate_library(&c).unwrap();
        assert_eq!(lib.len(), 1);
        let e = lib.record(0).errors;
        assert_eq!((e.mae, e.mre, e.wce, e.error_rate), (0.0, 0.0, 0, 0.0));
    }
}
