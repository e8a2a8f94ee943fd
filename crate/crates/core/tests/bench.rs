use axdse::approxlib::{generate_library, ClassSweep, FamilySweep, Library, LibraryConfig};
use axdse::bench::*;
use axdse::circuit::{Aig, SlotKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn library() -> &'static Library {
    static LIB: OnceLock<Library> = OnceLock::new();
    LIB.get_or_init(|| generate_library(&LibraryConfig::default()).unwrap())
}

fn datasets() -> &'static Datasets {
    static DATA: OnceLock<Datasets> = OnceLock::new();
    DATA.get_or_init(|| Datasets::generate(DatasetSeeds::default()))
}

fn random_config(t: &AcceleratorTemplate, lib: &Library, rng: &mut ChaCha8Rng) -> Vec<usize> {
    t.slots()
        .into_iter()
        .map(|s| {
            let c = lib.choices(s);
            c[rng.gen_range(0..c.len())]
        })
        .collect()
}

#[test]
fn gaussian_shape() {
    let t = gaussian_template();
    assert_eq!(t.slot_count(), 17);
    let slots = t.slots();
    assert_eq!(slots.iter().filter(|s| s.kind == SlotKind::Multiplier && s.width == 8).count(), 9);
    assert_eq!(slots.iter().filter(|s| s.kind == SlotKind::Adder && s.width == 16).count(), 8);
    assert!(KERNEL.iter().sum::<u64>().is_power_of_two());
}

#[test]
fn accurate_configurations_reach_the_cap() {
    let lib = library();
    let mut templates = vec![gaussian_template(), mac_template()];
    templates.extend(mcm_templates());
    for t in &templates {
        let cfg = Configuration::accurate(t, lib).unwrap();
        let ev = QorEvaluator::new(t, datasets()).unwrap();
        let recs = cfg.records(t, lib).unwrap();
        let outs = ev.outputs(&recs).unwrap();
        for (o, r) in outs.iter().zip(ev.references()) {
            assert_eq!(o.as_slice(), r, "{}", t.name);
        }
        assert_eq!(evaluate_qor(t, &cfg, lib, datasets()).unwrap().value, PSNR_CAP);
    }
}

#[test]
fn one_truncated_multiplier_lowers_psnr() {
    let lib = library();
    let t = gaussian_template();
    let mut cfg = Configuration::accurate(&t, lib).unwrap();
    cfg.assignment[4] = "mul8u_trunc_k06".into();
    let q = evaluate_qor(&t, &cfg, lib, datasets()).unwrap();
    assert!(q.value < PSNR_CAP);
    assert_eq!(q.dataset, IMAGE_DATASET);
}

#[test]
fn no_configuration_beats_the_accurate_one() {
    let lib = library();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for t in [gaussian_template(), multistage_template()] {
        let ev = QorEvaluator::new(&t, datasets()).unwrap();
        let acc = Configuration::accurate(&t, lib).unwrap();
        let best = ev.evaluate(&acc.records(&t, lib).unwrap()).unwrap();
        for _ in 0..30 {
            let idx = random_config(&t, lib, &mut rng);
            let recs: Vec<_> = idx.iter().map(|&i| lib.record(i)).collect();
            assert!(ev.evaluate(&recs).unwrap() <= best);
        }
    }
}

#[test]
fn gate_level_matches_behavioral_on_random_pixels() {
    let lib = library();
    let t = gaussian_template();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..3 {
        let idx = random_config(&t, lib, &mut rng);
        let recs: Vec<_> = idx.iter().map(|&i| lib.record(i)).collect();
        let circuits: Vec<&Aig> = recs.iter().map(|r| &r.circuit).collect();
        let g = &t.stages[0].graph;
        let vectors: Vec<Vec<u64>> = (0..100).map(|_| (0..9).map(|_| rng.gen_range(0..256)).collect()).collect();
        let gates = simulate_graph(g, &circuits, &vectors).unwrap();
        for (v, out) in vectors.iter().zip(&gates) {
            let beh = g.eval(v, |s, a, b| recs[s].eval(a, b));
            assert_eq!(&beh, out);
        }
    }
}

#[test]
fn composed_gaussian_matches_golden_filter() {
    let lib = library();
    let t = gaussian_template();
    let acc = Configuration::accurate(&t, lib).unwrap();
    let recs = acc.records(&t, lib).unwrap();
    let circuits: Vec<&Aig> = recs.iter().map(|r| &r.circuit).collect();
    let img = &datasets().images[0];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut vectors = Vec::new();
    let mut golden = Vec::new();
    for _ in 0..100 {
        let (r, c) = (rng.gen_range(1..63), rng.gen_range(1..63));
        let mut v = Vec::new();
        let mut s = 0;
        for (i, k) in KERNEL.iter().enumerate() {
            let p = img.at(r + i / 3 - 1, c + i % 3 - 1) as u64;
            v.push(p);
            s += p * k;
        }
        vectors.push(v);
        golden.push(vec![s >> 8]);
    }
    assert_eq!(simulate_graph(&t.stages[0].graph, &circuits, &vectors).unwrap(), golden);
}

#[test]
fn mcm_variants() {
    let t = mcm_templates();
    let counts: Vec<usize> = t.iter().map(|t| t.slot_count()).collect();
    assert_eq!(counts, MCM_UNIT_COUNTS);
    assert!(counts.iter().all(|c| (8..=14).contains(c)));
    assert_eq!(counts.iter().max(), Some(&counts[0]));
    assert!(t.iter().all(|t| t.slots().iter().all(|s| s.kind == SlotKind::Adder)));

    let lib = library();
    for x in [0u64, 1, 37, 255] {
        let mut outs = Vec::new();
        for m in &t {
            let recs = Configuration::accurate(m, lib).unwrap().records(m, lib).unwrap();
            outs.push(m.stages[0].graph.eval(&[x], |s, a, b| recs[s].eval(a, b)));
        }
        assert!(outs.windows(2).all(|w| w[0] == w[1]));
        let expect: Vec<u64> = MCM_CONSTANTS.iter().map(|c| c * x).collect();
        assert_eq!(outs[0], expect);
    }
}

#[test]
fn multistage_shape_and_golden_f1() {
    let t = multistage_template();
    assert_eq!(t.stages.len(), 5);
    assert_eq!(t.slot_count(), 73);
    let per_stage: Vec<usize> = t.stage_ranges().iter().map(|r| r.len()).collect();
    assert_eq!(per_stage, STAGE_SLOTS);
    let lib = library();
    let acc = Configuration::accurate(&t, lib).unwrap();
    let q = evaluate_qor(&t, &acc, lib, datasets()).unwrap();
    assert_eq!(q.value, 1.0);
    let ev = QorEvaluator::new(&t, datasets()).unwrap();
    assert!(detect_peaks(ev.references()[0]).len() >= 10);
}

#[test]
fn qor_ignores_item_order() {
    let lib = library();
    let t = gaussian_template();
    let mut swapped = datasets().clone();
    swapped.images.reverse();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cfg = Configuration::from_indices(lib, &random_config(&t, lib, &mut rng));
    let a = evaluate_qor(&t, &cfg, lib, datasets()).unwrap().value;
    let b = evaluate_qor(&t, &cfg, lib, &swapped).unwrap().value;
    assert!((a - b).abs() < 1e-9);
}

#[test]
fn missing_dataset_and_bad_configuration() {
    let lib = library();
    let mut t = gaussian_template();
    let cfg = Configuration::accurate(&t, lib).unwrap();
    let mut short = cfg.clone();
    short.assignment.pop();
    assert!(evaluate_qor(&t, &short, lib, datasets()).is_err());
    let mut wrong = cfg.clone();
    wrong.assignment.swap(0, 16);
    assert!(evaluate_qor(&t, &wrong, lib, datasets()).is_err());
    t.dataset = "absent".into();
    assert!(matches!(
        evaluate_qor(&t, &cfg, lib, datasets()),
        Err(axdse::Error::DatasetMissing(_))
    ));
}

/// Lower-WCE truncation in one adder slot never costs more PSNR than the
/// output-referred WCE bound allows, checked over seeded configurations.
#[test]
fn lower_wce_replacement_respects_bound() {
    let lib = generate_library(&LibraryConfig {
        seed: 1,
        lut_k: 6,
        classes: vec![
            ClassSweep {
                kind: SlotKind::Multiplier,
                width: 8,
                families: vec![FamilySweep::Truncated { k: vec![1, 2, 3] }],
            },
            ClassSweep {
                kind: SlotKind::Adder,
                width: 16,
                families: vec![FamilySweep::Truncated { k: vec![2, 4, 6] }],
            },
        ],
    })
    .unwrap();
    let t = gaussian_template();
    let ev = QorEvaluator::new(&t, datasets()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let psnr_of = |idx: &[usize]| {
        let recs: Vec<_> = idx.iter().map(|&i| lib.record(i)).collect();
        ev.evaluate(&recs).unwrap()
    };
    for _ in 0..100 {
        let mut idx = random_config(&t, &lib, &mut rng);
        let slot = rng.gen_range(9..17);
        let cur = lib.record(idx[slot]);
        let better = lib
            .choices(t.slots()[slot])
            .iter()
            .copied()
            .filter(|&i| lib.record(i).errors.wce < cur.errors.wce)
            .last();
        let Some(better) = better else { continue };
        let before = psnr_of(&idx);
        idx[slot] = better;
        let after = psnr_of(&idx);
        // A slot error e shifts the output by at most e >> 8 + 1 after the
        // normalising shift; PSNR with a uniform output bias b is bounded below
        // by 10 log10(255^2 / (b + rms_before)^2).
        let bias = (cur.errors.wce >> 8) as f64 + 1.0;
        let rms_before = 255.0 / 10f64.powf(before / 20.0);
        let floor = 20.0 * (255.0 / (bias + rms_before)).log10();
        assert!(after >= floor.min(before) - 1e-9, "before {before} after {after} floor {floor}");
    }
}
