use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::data::Datasets;
use super::qor::{detect_peaks, peak_f1, psnr, QorMetric, QorValue, PEAK_TOLERANCE};
use super::{gaussian, mac, mcm, multistage};
use crate::approxlib::{ComponentRecord, Library};
use crate::circuit::{compose_many, set_word_value, Aig, ConstantMode, DataflowGraph, Simulator, SlotSpec, WORD_BITS};
use crate::{Error, Result};

/// Which application a template implements; selects the dataset adaptor and
/// the independent integer reference model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Workload {
    Gaussian,
    Mcm(u8),
    Multistage,
    Mac,
}

/// One filter stage. Graph input `i` receives the stage input delayed by `i`
/// samples; the first sample is held before the start of the stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    pub graph: DataflowGraph,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceleratorTemplate {
    pub name: String,
    pub workload: Workload,
    /// Image templates have a single stage; streaming templates cascade stages.
    pub stages: Vec<Stage>,
    pub metric: QorMetric,
    pub dataset: String,
    /// Peak value for PSNR.
    pub peak: f64,
}

impl AcceleratorTemplate {
    pub fn slots(&self) -> Vec<SlotSpec> {
        self.stages.iter().flat_map(|s| s.graph.slots.iter().copied()).collect()
    }

    pub fn slot_count(&self) -> usize {
        self.stages.iter().map(|s| s.graph.slots.len()).sum()
    }

    /// Global slot index range of every stage.
    pub fn stage_ranges(&self) -> Vec<Range<usize>> {
        let mut at = 0;
        self.stages
            .iter()
            .map(|s| {
                let r = at..at + s.graph.slots.len();
                at = r.end;
                r
            })
            .collect()
    }

    /// Flattens the accelerator with the given per-slot components.
    pub fn compose(&self, records: &[&ComponentRecord]) -> Result<Aig> {
        self.check_records(records)?;
        let circuits: Vec<&Aig> = records.iter().map(|r| &r.circuit).collect();
        let ranges = self.stage_ranges();
        let parts: Vec<(&DataflowGraph, &[&Aig])> = self
            .stages
            .iter()
            .zip(&ranges)
            .map(|(s, r)| (&s.graph, &circuits[r.clone()]))
            .collect();
        compose_many(&self.name, &parts, ConstantMode::Register)
    }

    pub fn check_records(&self, records: &[&ComponentRecord]) -> Result<()> {
        let slots = self.slots();
        if records.len() != slots.len() {
            return Err(Error::Dimension(format!(
                "{}: {} components for {} slots",
                self.name,
                records.len(),
                slots.len()
            )));
        }
        for (i, (r, s)) in records.iter().zip(&slots).enumerate() {
            if r.slot() != *s {
                return Err(Error::Composition(format!(
                    "{}: slot {i} needs {}{}u, got {}",
                    self.name,
                    s.kind.tag(),
                    s.width,
                    r.id
                )));
            }
        }
        Ok(())
    }
}

/// An assignment of one library component id per slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    pub assignment: Vec<String>,
}

impl Configuration {
    pub fn new(assignment: Vec<String>) -> Self {
        Configuration { assignment }
    }

    pub fn from_indices(library: &Library, indices: &[usize]) -> Self {
        Configuration {
            assignment: indices.iter().map(|&i| library.record(i).id.clone()).collect(),
        }
    }

    /// The all-accurate configuration of `template`.
    pub fn accurate(template: &AcceleratorTemplate, library: &Library) -> Result<Self> {
        let idx = template
            .slots()
            .into_iter()
            .map(|s| library.accurate(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_indices(library, &idx))
    }

    /// Resolves ids to library indices, checking slot compatibility.
    pub fn indices(&self, template: &AcceleratorTemplate, library: &Library) -> Result<Vec<usize>> {
        let idx = self
            .assignment
            .iter()
            .map(|id| library.index_of(id))
            .collect::<Result<Vec<_>>>()?;
        let recs: Vec<&ComponentRecord> = idx.iter().map(|&i| library.record(i)).collect();
        template.check_records(&recs)?;
        Ok(idx)
    }

    pub fn records<'l>(&self, template: &AcceleratorTemplate, library: &'l Library) -> Result<Vec<&'l ComponentRecord>> {
        Ok(self
            .indices(template, library)?
            .into_iter()
            .map(|i| library.record(i))
            .collect())
    }

    pub fn label(&self) -> String {
        self.assignment.join(";")
    }
}

/// Prepared evaluation data of one dataset item.
#[derive(Debug, Clone)]
enum Item {
    /// Independent input vectors (`arity` values each) and flattened reference outputs.
    Vectors { arity: usize, inputs: Vec<u64>, reference: Vec<u64> },
    /// A stream, its reference output and the golden peak positions.
    Stream { input: Vec<u64>, reference: Vec<u64>, golden: Vec<usize> },
}

/// Behavioral QoR evaluator with references precomputed for one template.
#[derive(Debug, Clone)]
pub struct QorEvaluator<'t> {
    pub template: &'t AcceleratorTemplate,
    items: Vec<Item>,
}

impl<'t> QorEvaluator<'t> {
    pub fn new(template: &'t AcceleratorTemplate, datasets: &Datasets) -> Result<Self> {
        let items = match template.workload {
            Workload::Gaussian | Workload::Mcm(_) | Workload::Mac => {
                let offsets = match template.workload {
                    Workload::Gaussian => gaussian::OFFSETS.to_vec(),
                    Workload::Mac => mac::OFFSETS.to_vec(),
                    _ => vec![(0, 0)],
                };
                datasets
                    .images(&template.dataset)?
                    .iter()
                    .map(|img| {
                        let mut inputs = Vec::with_capacity(img.data.len() * offsets.len());
                        for r in 0..img.rows as isize {
                            for c in 0..img.cols as isize {
                                inputs.extend(offsets.iter().map(|&(dr, dc)| img.clamped(r + dr, c + dc) as u64));
                            }
                        }
                        let reference = match template.workload {
                            Workload::Gaussian => gaussian::reference(img),
                            Workload::Mac => mac::reference(img),
                            _ => mcm::reference(img),
                        };
                        Item::Vectors {
                            arity: offsets.len(),
                            inputs,
                            reference,
                        }
                    })
                    .collect()
            }
            Workload::Multistage => {
                let input: Vec<u64> = datasets.signal(&template.dataset)?.iter().map(|&v| v as u64).collect();
                let reference = multistage::reference(&input);
                let golden = detect_peaks(&reference);
                vec![Item::Stream {
                    input,
                    reference,
                    golden,
                }]
            }
        };
        Ok(QorEvaluator { template, items })
    }

    /// Outputs of every dataset item under the given per-slot components.
    pub fn outputs(&self, records: &[&ComponentRecord]) -> Result<Vec<Vec<u64>>> {
        self.template.check_records(records)?;
        Ok(self.items.iter().map(|it| self.run_item(it, records)).collect())
    }

    fn run_item(&self, item: &Item, records: &[&ComponentRecord]) -> Vec<u64> {
        let t = self.template;
        match item {
            Item::Vectors { arity, inputs, reference } => {
                let g = &t.stages[0].graph;
                let mut out = vec![0u64; g.outputs.len()];
                let mut vals = Vec::with_capacity(g.nodes.len());
                let mut result = Vec::with_capacity(reference.len());
                let mut f = |s: usize, a: u64, b: u64| records[s].eval(a, b);
                for x in inputs.chunks_exact(*arity) {
                    g.eval_into(x, &mut vals, &mut out, &mut f);
                    result.extend_from_slice(&out);
                }
                result
            }
            Item::Stream { input, .. } => {
                let mut stream = input.clone();
                for (stage, range) in t.stages.iter().zip(t.stage_ranges()) {
                    stream = run_stage(&stage.graph, &stream, &records[range]);
                }
                stream
            }
        }
    }

    /// Application-level QoR: PSNR averaged over items, or peak F1.
    pub fn evaluate(&self, records: &[&ComponentRecord]) -> Result<f64> {
        self.template.check_records(records)?;
        let mut total = 0.0;
        for it in &self.items {
            let out = self.run_item(it, records);
            total += match it {
                Item::Vectors { reference, .. } => psnr(reference, &out, self.template.peak)?,
                Item::Stream { golden, .. } => peak_f1(golden, &detect_peaks(&out), PEAK_TOLERANCE),
            };
        }
        Ok(total / self.items.len() as f64)
    }

    /// Reference outputs of every item.
    pub fn references(&self) -> Vec<&[u64]> {
        self.items
            .iter()
            .map(|it| match it {
                Item::Vectors { reference, .. } | Item::Stream { reference, .. } => reference.as_slice(),
            })
            .collect()
    }
}

/// Runs one streaming stage over `input`.
pub fn run_stage(graph: &DataflowGraph, input: &[u64], records: &[&ComponentRecord]) -> Vec<u64> {
    let window = graph.input_widths.len();
    let mut x = vec![0u64; window];
    let mut out = [0u64; 1];
    let mut vals = Vec::with_capacity(graph.nodes.len());
    let mut f = |s: usize, a: u64, b: u64| records[s].eval(a, b);
    input
        .iter()
        .enumerate()
        .map(|(n, _)| {
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = input[n.saturating_sub(i)];
            }
            graph.eval_into(&x, &mut vals, &mut out, &mut f);
            out[0]
        })
        .collect()
}

/// Evaluates QoR of `config` on the template's dataset.
pub fn evaluate_qor(
    template: &AcceleratorTemplate,
    config: &Configuration,
    library: &Library,
    datasets: &Datasets,
) -> Result<QorValue> {
    let records = config.records(template, library)?;
    let value = QorEvaluator::new(template, datasets)?.evaluate(&records)?;
    Ok(QorValue {
        value,
        dataset: template.dataset.clone(),
    })
}

/// Gate-level simulation of a single graph flattened with `circuits`: packs the
/// primary input vectors (and constant coefficients) into simulation words and
/// decodes every output.
pub fn simulate_graph(graph: &DataflowGraph, circuits: &[&Aig], vectors: &[Vec<u64>]) -> Result<Vec<Vec<u64>>> {
    let aig = crate::circuit::compose(graph, circuits)?;
    let consts = graph.constants();
    let mut sim = Simulator::new(&aig);
    let mut result = Vec::with_capacity(vectors.len());
    for chunk in vectors.chunks(WORD_BITS) {
        let mut words = vec![0u64; aig.num_inputs()];
        for (bit, v) in chunk.iter().enumerate() {
            let mut off = 0;
            for (x, &w) in v.iter().zip(&graph.input_widths) {
                set_word_value(&mut words, off, w as usize, bit, *x);
                off += w as usize;
            }
            for &(c, w) in &consts {
                set_word_value(&mut words, off, w as usize, bit, c);
                off += w as usize;
            }
        }
        let outs = sim.run(&words)?;
        for bit in 0..chunk.len() {
            let mut off = 0;
            let mut decoded = Vec::with_capacity(graph.outputs.len());
            for g in &graph.outputs {
                let w = g.width as usize;
                decoded.push(crate::circuit::word_value(&outs[off..off + w], bit));
                off += w;
            }
            result.push(decoded);
        }
    }
    Ok(result)
}
