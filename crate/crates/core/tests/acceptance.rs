//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if any
//! criterion fails. Tolerances are pinned as constants below.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use shiftbench::eval::backend::{BackendError, EmbeddingBackend, ImageInput, MockBackend, MockMode};
use shiftbench::eval::embedding::{classify, EmbeddingVector};
use shiftbench::eval::harness::{evaluate, tally_report, ClassificationResult, EvalOptions};
use shiftbench::eval::protocol::BackendInfo;
use shiftbench::eval::report::{EvalReport, ReportMetadata};
use shiftbench::manifest::{read_manifest, write_manifest, Manifest, ManifestHeader, Provenance, SampleRecord};
use shiftbench::prompt::{compose_baseline, compose_domain, compose_domain_plus, DescriptionRegistry, PromptMode};
use shiftbench::scene::generate::{generate_dataset, GenerationPlan};
use shiftbench::scene::occlusion::{occlusion_bin, BinOutcome, OcclusionBin};
use shiftbench::scene::render::ratio_from_masks;
use shiftbench::scene::{render, CategoryRegistry, SceneOptions};
use shiftbench::taxonomy::{DomainCombination, Taxonomy};

const TAXONOMY_TIME_LIMIT: Duration = Duration::from_secs(1);
const ORACLE_SCENES: u64 = 24;
const ORACLE_RESOLUTION: u32 = 256;
const ORACLE_TIME_LIMIT: Duration = Duration::from_secs(30);
const GENERATION_TIME_LIMIT: Duration = Duration::from_secs(600);
const CLASSIFY_INSTANCES: usize = 1000;
const CLASSIFY_TOLERANCE: f64 = 1e-6;
const ACCURACY_TOLERANCE: f64 = 1e-12;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("taxonomy counts", taxonomy_counts),
        ("occlusion bin suite", occlusion_bins),
        ("occlusion measurement oracle", occlusion_oracle),
        ("generation determinism and label integrity", generation_determinism),
        ("prompt golden strings", prompt_golden),
        ("classifier oracle equivalence", classifier_equivalence),
        ("aggregation", aggregation),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

// Independent statement of the default taxonomy and its one rule: snow only
// falls in winter.
const WEATHERS: [&str; 5] = ["clear", "sandstorm", "foggy", "rainy", "snowy"];
const VIEWS: [&str; 3] = ["front", "side", "top"];
const TIMES: [&str; 2] = ["day", "night"];
const SEASONS: [&str; 3] = ["spring-summer", "autumn", "winter"];
const OCCLUSIONS: [&str; 5] = [
    "no occlusion",
    "light occlusion",
    "partial occlusion",
    "moderate occlusion",
    "heavy occlusion",
];

fn taxonomy_counts() -> Check {
    let start = Instant::now();
    let t = Taxonomy::builtin();
    ensure(t.shifts().len() == 5, || format!("{} shifts", t.shifts().len()))?;
    ensure(t.domain_count() == 18, || format!("{} coarse domains", t.domain_count()))?;

    let enumerated: BTreeSet<Vec<(String, String)>> = t
        .enumerate_combinations()
        .iter()
        .map(|c| c.iter().map(|(s, d)| (s.to_string(), d.to_string())).collect())
        .collect();

    let (mut total, mut valid, mut excluded) = (0, 0, 0);
    for w in WEATHERS {
        for v in VIEWS {
            for ti in TIMES {
                for s in SEASONS {
                    for o in OCCLUSIONS {
                        total += 1;
                        let c = DomainCombination::new()
                            .with("weathers", w)
                            .with("views", v)
                            .with("time", ti)
                            .with("seasons", s)
                            .with("occlusion", o);
                        let ok = !(w == "snowy" && s != "winter");
                        let verdict = t.validate_combination(&c).map_err(|e| e.to_string())?;
                        ensure(verdict.is_valid() == ok, || format!("{w}/{v}/{ti}/{s}/{o}: {verdict}"))?;
                        let key: Vec<(String, String)> = c.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
                        ensure(enumerated.contains(&key) == ok, || format!("{w}/{v}/{ti}/{s}/{o} enumeration mismatch"))?;
                        if ok {
                            valid += 1;
                        } else {
                            excluded += 1;
                        }
                    }
                }
            }
        }
    }
    ensure(total == 450 && t.unconstrained_count() == 450, || format!("{total} assignments"))?;
    ensure(valid == 390 && enumerated.len() == 390, || format!("{valid} valid, {} enumerated", enumerated.len()))?;
    ensure(excluded == 60, || format!("{excluded} excluded"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < TAXONOMY_TIME_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("5 shifts, 18 domains, 450 assignments, 390 valid, 60 excluded (all snowy outside winter) in {elapsed:?}"))
}

fn occlusion_bins() -> Check {
    use OcclusionBin::*;
    let probes = [
        (0.0, BinOutcome::Bin(None)),
        (0.001, BinOutcome::Bin(Light)),
        (0.199, BinOutcome::Bin(Light)),
        (0.20, BinOutcome::Bin(Partial)),
        (0.399, BinOutcome::Bin(Partial)),
        (0.40, BinOutcome::Bin(Moderate)),
        (0.60, BinOutcome::Bin(Heavy)),
        (0.80, BinOutcome::Bin(Heavy)),
        (0.801, BinOutcome::Discard),
        (1.0, BinOutcome::Discard),
    ];
    for (r, want) in probes {
        let got = occlusion_bin(r).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("{r} -> {got:?}, want {want:?}"))?;
    }
    for bad in [-0.001, 1.001, f64::NAN] {
        ensure(occlusion_bin(bad).is_err(), || format!("{bad} accepted"))?;
    }
    Ok(format!("{} boundary probes match; out-of-range ratios rejected", probes.len()))
}

fn occlusion_oracle() -> Check {
    let start = Instant::now();
    let mut worst_margin = f64::INFINITY;
    let mut max_err: f64 = 0.0;
    for seed in 0..ORACLE_SCENES {
        let scene = common::quad_scene(seed, ORACLE_RESOLUTION);
        let out = render(&scene.spec, &scene.registry).map_err(|e| format!("seed {seed}: {e}"))?;
        let err = (out.occlusion_ratio - scene.expected_ratio).abs();
        ensure(err <= scene.tolerance, || {
            format!(
                "seed {seed}: measured {:.5}, analytic {:.5}, tolerance {:.5}",
                out.occlusion_ratio, scene.expected_ratio, scene.tolerance
            )
        })?;
        max_err = max_err.max(err);
        worst_margin = worst_margin.min(scene.tolerance - err);
    }
    let elapsed = start.elapsed();
    ensure(elapsed < ORACLE_TIME_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{ORACLE_SCENES} quad scenes at {ORACLE_RESOLUTION}px, max |error| {max_err:.5}, min slack {worst_margin:.5} in {elapsed:?}"
    ))
}

fn tree_digest(root: &Path) -> String {
    fn walk(dir: &Path, out: &mut Vec<std::path::PathBuf>) {
        let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(&p, out);
            } else {
                out.push(p);
            }
        }
    }
    let mut files = Vec::new();
    walk(root, &mut files);
    let mut h = Sha256::new();
    for f in files {
        h.update(f.strip_prefix(root).unwrap().to_string_lossy().as_bytes());
        h.update(std::fs::read(&f).unwrap());
    }
    hex::encode(h.finalize())
}

fn generation_determinism() -> Check {
    let start = Instant::now();
    let taxonomy = Taxonomy::builtin();
    let registry = CategoryRegistry::builtin();
    let plan = GenerationPlan {
        samples_per_combination: 1,
        categories: vec!["dog".into(), "car".into()],
        seed: 2024,
        options: SceneOptions::default(),
    };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut manifests = Vec::new();
    let mut digests = Vec::new();
    for d in &dirs {
        let summary = generate_dataset(&taxonomy, &registry, &plan, d.path()).map_err(|e| e.to_string())?;
        ensure(summary.failures.is_empty(), || format!("{} failed samples", summary.failures.len()))?;
        manifests.push(std::fs::read(&summary.manifest_path).unwrap());
        digests.push(tree_digest(d.path()));
    }
    ensure(manifests[0] == manifests[1], || "manifests differ between runs".into())?;
    ensure(digests[0] == digests[1], || "output trees differ between runs".into())?;

    let manifest_path = dirs[0].path().join("manifest.jsonl");
    let manifest = read_manifest(&manifest_path).map_err(|e| e.to_string())?;
    ensure(manifest.records.len() == 780, || format!("{} records", manifest.records.len()))?;
    for r in &manifest.records {
        let label = r.combination.get("occlusion").ok_or("record without occlusion label")?;
        let ratio = r.occlusion_ratio.ok_or("record without ratio")?;
        let masks = r.mask_paths.as_ref().ok_or("record without masks")?;
        let load = |rel: &str| image::open(manifest.resolve(&manifest_path, rel)).map(|i| i.to_luma8());
        let visible = load(&masks.visible).map_err(|e| e.to_string())?;
        let full = load(&masks.full).map_err(|e| e.to_string())?;
        let from_masks = ratio_from_masks(&visible, &full).ok_or("empty full mask")?;
        ensure(from_masks == ratio, || format!("{}: manifest ratio {ratio}, masks {from_masks}", r.sample_id))?;
        let bin = match occlusion_bin(ratio).map_err(|e| e.to_string())? {
            BinOutcome::Bin(b) => b,
            BinOutcome::Discard => return Err(format!("{}: discarded ratio {ratio} in manifest", r.sample_id)),
        };
        ensure(bin.domain_name() == label, || format!("{}: ratio {ratio} bins to {bin}, labeled {label}", r.sample_id))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < GENERATION_TIME_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "2 runs x 780 records at 512px byte-identical; 780/780 re-bin from masks on disk; {elapsed:?}"
    ))
}

fn prompt_golden() -> Check {
    let t = Taxonomy::builtin();
    let registry = DescriptionRegistry::from_taxonomy(&t);
    let c = DomainCombination::new()
        .with("weathers", "clear")
        .with("seasons", "autumn")
        .with("time", "day")
        .with("views", "side")
        .with("occlusion", "light occlusion");
    let domain = compose_domain(&t, "dog", &c).map_err(|e| e.to_string())?.text;
    let want = "a photo of a dog in clear autumn day from side with light occlusion.";
    ensure(domain == want, || format!("domain: {domain:?}"))?;
    let plus = compose_domain_plus(&t, "dog", &c, &registry).map_err(|e| e.to_string())?.text;
    let want_plus = "a photo of a dog in clear autumn day from side with light occlusion, \
sky is blue and unobstructed with bright and vibrant colors, \
warm tones, crisp light, and leaves changing color, \
bright and clear visibility, lots of sunlight, \
showing the object or scene from the left side, \
about 0 percent to 20 percent object are occluded.";
    ensure(plus == want_plus, || format!("domain_plus: {plus:?}"))?;
    let base = compose_baseline("dog").map_err(|e| e.to_string())?.text;
    ensure(base == "a photo of a dog", || format!("baseline: {base:?}"))?;
    Ok("baseline, domain and domain_plus strings match byte-for-byte".into())
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> EmbeddingVector {
    loop {
        let v: Vec<f32> = (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect();
        if let Ok(u) = EmbeddingVector::normalized(v) {
            return u;
        }
    }
}

/// Manifest for `records` (combination, class) pairs; images are 2x2 PNGs.
fn tiny_manifest(dir: &Path, taxonomy: &Taxonomy, classes: &[&str], records: &[(DomainCombination, &str)]) -> std::path::PathBuf {
    let mut m = Manifest::new(ManifestHeader::new(
        taxonomy.content_hash(),
        classes.iter().map(|c| c.to_string()).collect(),
    ));
    for (i, (c, class)) in records.iter().enumerate() {
        let rel = format!("images/{class}/{i}.png");
        let p = dir.join(&rel);
        std::fs::create_dir_all(p.parent().unwrap()).unwrap();
        image::RgbImage::new(2, 2).save(&p).unwrap();
        m.records.push(SampleRecord {
            sample_id: format!("s{i}"),
            image_path: rel,
            mask_paths: None,
            category: class.to_string(),
            combination: c.clone(),
            occlusion_ratio: None,
            seed: None,
            provenance: Provenance::Imported,
        });
    }
    let path = dir.join("manifest.jsonl");
    write_manifest(&path, &m).unwrap();
    path
}

fn classifier_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut max_dev: f64 = 0.0;
    for n in 0..CLASSIFY_INSTANCES {
        let dim = rng.random_range(2..64);
        let classes = rng.random_range(2..12);
        let image = random_unit(&mut rng, dim);
        let texts: Vec<EmbeddingVector> = (0..classes).map(|_| random_unit(&mut rng, dim)).collect();
        let got = classify(&image, &texts).map_err(|e| e.to_string())?;
        // scalar double loop: cosine = dot / (|a| |b|)
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (j, t) in texts.iter().enumerate() {
            let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
            for k in 0..dim {
                let a = image.values()[k] as f64;
                let b = t.values()[k] as f64;
                dot += a * b;
                na += a * a;
                nb += b * b;
            }
            let cos = dot / (na.sqrt() * nb.sqrt());
            max_dev = max_dev.max((cos - got.scores[j]).abs());
            ensure((cos - got.scores[j]).abs() <= CLASSIFY_TOLERANCE, || format!("instance {n} class {j}"))?;
            if cos > best_score {
                best_score = cos;
                best = j;
            }
        }
        ensure(got.predicted == best, || format!("instance {n}: argmax {} vs {best}", got.predicted))?;
    }

    // end to end over a small mixed manifest
    let taxonomy = Taxonomy::builtin();
    let descriptions = DescriptionRegistry::from_taxonomy(&taxonomy);
    let combos = taxonomy.enumerate_combinations();
    let classes = ["dog", "car", "horse"];
    let records: Vec<(DomainCombination, &str)> = (0..30)
        .map(|i| (combos[(i * 37) % combos.len()].clone(), classes[[0, 1, 1, 2, 2][i % 5]]))
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let path = tiny_manifest(dir.path(), &taxonomy, &classes, &records);
    let manifest = read_manifest(&path).map_err(|e| e.to_string())?;
    let owned: Vec<String> = classes.iter().map(|c| c.to_string()).collect();
    let mut results = Vec::new();
    for mode in [MockMode::Oracle, MockMode::Constant] {
        let mut backend = MockBackend::new(mode, owned.clone());
        for prompt_mode in [PromptMode::Baseline, PromptMode::Domain, PromptMode::DomainPlus] {
            let options = EvalOptions {
                mode: prompt_mode,
                ..EvalOptions::default()
            };
            let e = evaluate(&manifest, &path, &taxonomy, &descriptions, &mut backend, &options).map_err(|e| e.to_string())?;
            results.push((mode, prompt_mode, e.report.overall_accuracy.unwrap()));
        }
    }
    let base_rate = manifest.records.iter().filter(|r| r.category == classes[0]).count() as f64 / manifest.records.len() as f64;
    for (mode, prompt_mode, acc) in &results {
        let want = if *mode == MockMode::Oracle { 1.0 } else { base_rate };
        ensure((acc - want).abs() <= ACCURACY_TOLERANCE, || format!("{mode:?}/{prompt_mode}: {acc}, want {want}"))?;
    }
    Ok(format!(
        "{CLASSIFY_INSTANCES} instances, max score deviation {max_dev:.2e}, argmax agrees; oracle mock 100%; constant mock {:.4} = base rate",
        base_rate
    ))
}

/// Text side is the oracle mock; image side predicts a scripted class per
/// sample.
struct Scripted {
    text: MockBackend,
    predictions: BTreeMap<String, usize>,
    dim: usize,
}

impl EmbeddingBackend for Scripted {
    fn info(&self) -> &BackendInfo {
        self.text.info()
    }

    fn embed_texts(&mut self, texts: &[String]) -> Result<Vec<EmbeddingVector>, BackendError> {
        self.text.embed_texts(texts)
    }

    fn embed_images(&mut self, images: &[ImageInput]) -> Result<Vec<EmbeddingVector>, BackendError> {
        Ok(images
            .iter()
            .map(|i| EmbeddingVector::basis(self.dim, self.predictions[&i.key]))
            .collect())
    }
}

fn aggregation() -> Check {
    let taxonomy = Taxonomy::builtin();
    let descriptions = DescriptionRegistry::from_taxonomy(&taxonomy);
    let a = DomainCombination::new()
        .with("weathers", "clear")
        .with("views", "front")
        .with("time", "day")
        .with("seasons", "winter")
        .with("occlusion", "no occlusion");
    let b = DomainCombination::new()
        .with("weathers", "rainy")
        .with("views", "top")
        .with("time", "day")
        .with("seasons", "autumn")
        .with("occlusion", "heavy occlusion");
    let classes = ["dog", "car"];
    let records: Vec<(DomainCombination, &str)> = (0..8)
        .map(|i| (if i < 4 { a.clone() } else { b.clone() }, classes[i % 2]))
        .collect();
    // A: 1 of 4 correct, B: 4 of 4
    let correct = [true, false, false, false, true, true, true, true];
    let dir = tempfile::tempdir().unwrap();
    let path = tiny_manifest(dir.path(), &taxonomy, &classes, &records);
    let manifest = read_manifest(&path).map_err(|e| e.to_string())?;
    let owned: Vec<String> = classes.iter().map(|c| c.to_string()).collect();
    let text = MockBackend::new(MockMode::Oracle, owned.clone());
    let dim = text.info().embedding_dim;
    let predictions = (0..8)
        .map(|i| (format!("s{i}"), if correct[i] { i % 2 } else { 1 - i % 2 }))
        .collect();
    let mut backend = Scripted { text, predictions, dim };
    let e = evaluate(&manifest, &path, &taxonomy, &descriptions, &mut backend, &EvalOptions::default())
        .map_err(|e| e.to_string())?;
    let report = &e.report;

    let day = report.domain("time", "day").ok_or("no day row")?;
    ensure((day.tally.correct, day.tally.total) == (5, 8), || format!("day tally {:?}", day.tally))?;
    ensure(day.accuracy == Some(0.625), || format!("day accuracy {:?}", day.accuracy))?;

    let overall = report.overall_accuracy.ok_or("no overall accuracy")?;
    let by_combination = {
        let (c, t) = report.per_combination.iter().fold((0, 0), |(c, t), r| (c + r.tally.correct, t + r.tally.total));
        c as f64 / t as f64
    };
    ensure(overall == 0.625 && by_combination == overall, || format!("overall {overall}, from combinations {by_combination}"))?;
    for shift in taxonomy.shifts() {
        let (c, t) = report
            .per_domain
            .iter()
            .filter(|r| r.shift == shift.name)
            .fold((0, 0), |(c, t), r| (c + r.tally.correct, t + r.tally.total));
        let acc = c as f64 / t as f64;
        ensure(acc == overall, || format!("shift {}: {acc} vs overall {overall}", shift.name))?;
    }

    // the same tallies from hand-built results, in reverse order
    let results: Vec<ClassificationResult> = (0..8)
        .rev()
        .map(|i| ClassificationResult {
            sample_id: format!("s{i}"),
            predicted_class: if correct[i] { classes[i % 2] } else { classes[1 - i % 2] }.to_string(),
            true_class: classes[i % 2].to_string(),
            scores: vec![],
            combination: records[i].0.clone(),
        })
        .collect();
    let metadata: ReportMetadata = report.metadata.clone();
    let hand: EvalReport = tally_report(&taxonomy, &owned, metadata, &results, None);
    ensure(hand.per_domain == report.per_domain, || "per-domain rows differ from hand tally".into())?;
    Ok("day 5/8 = 62.5%; overall equals combination-level and every shift-level recomputation".into())
}
