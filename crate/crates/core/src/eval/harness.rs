//! Tuning-free (or adapted) classification over a manifest.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::backend::{BackendError, EmbeddingBackend, ImageInput};
use super::embedding::{classify, top_k, ClassifyError, EmbeddingVector, Scores};
use super::protocol::{AdaptConfig, AdaptPrompt};
use super::report::{ClassRow, EvalReport, ReportMetadata, Tally, TopK};
use crate::manifest::{Manifest, ManifestError, SampleRecord};
use crate::prompt::{prompt_matrix, DescriptionRegistry, PromptError, PromptMode, PromptSpec};
use crate::taxonomy::{DomainCombination, Taxonomy};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("sample `{sample_id}`: {source}")]
    Backend { sample_id: String, source: BackendError },
    #[error("text encoding: {0}")]
    TextBackend(BackendError),
    #[error("sample `{sample_id}`: {source}")]
    Classify { sample_id: String, source: ClassifyError },
    #[error("classification needs at least 2 classes, manifest lists {0}")]
    TooFewClasses(usize),
    #[error("backend lacks the `{0}` capability")]
    MissingCapability(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub mode: PromptMode,
    /// Reuse text embeddings across samples with identical prompts.
    pub text_cache: bool,
    /// Images per embedding request.
    pub batch_size: usize,
    /// Also count top-k hits when k > 1.
    pub top_k: usize,
    /// Per-sample prompt adaptation instead of tuning-free classification.
    pub adapt: Option<AdaptConfig>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            mode: PromptMode::Domain,
            text_cache: true,
            batch_size: 32,
            top_k: 1,
            adapt: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub sample_id: String,
    pub predicted_class: String,
    pub true_class: String,
    pub scores: Vec<f64>,
    pub combination: DomainCombination,
}

impl ClassificationResult {
    pub fn correct(&self) -> bool {
        self.predicted_class == self.true_class
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: EvalReport,
    pub results: Vec<ClassificationResult>,
}

/// Text embeddings keyed by prompt text.
struct TextCache {
    enabled: bool,
    vectors: HashMap<String, EmbeddingVector>,
    encodings: u64,
}

impl TextCache {
    fn embed(
        &mut self,
        backend: &mut dyn EmbeddingBackend,
        prompts: &[PromptSpec],
    ) -> Result<Vec<EmbeddingVector>, EvalError> {
        if !self.enabled {
            let texts: Vec<String> = prompts.iter().map(|p| p.text.clone()).collect();
            self.encodings += texts.len() as u64;
            return backend.embed_texts(&texts).map_err(EvalError::TextBackend);
        }
        let mut missing: Vec<String> = Vec::new();
        for p in prompts {
            if !self.vectors.contains_key(&p.text) && !missing.contains(&p.text) {
                missing.push(p.text.clone());
            }
        }
        if !missing.is_empty() {
            let vectors = backend.embed_texts(&missing).map_err(EvalError::TextBackend)?;
            self.encodings += missing.len() as u64;
            self.vectors.extend(missing.into_iter().zip(vectors));
        }
        Ok(prompts.iter().map(|p| self.vectors[&p.text].clone()).collect())
    }
}

pub fn evaluate(
    manifest: &Manifest,
    manifest_path: &Path,
    taxonomy: &Taxonomy,
    descriptions: &DescriptionRegistry,
    backend: &mut dyn EmbeddingBackend,
    options: &EvalOptions,
) -> Result<Evaluation, EvalError> {
    manifest.check_taxonomy(taxonomy)?;
    let classes = &manifest.header.classes;
    if classes.len() < 2 {
        return Err(EvalError::TooFewClasses(classes.len()));
    }
    if options.adapt.is_some() && !backend.info().capabilities.adapt {
        return Err(EvalError::MissingCapability("adapt"));
    }
    let manifest_hash = crate::manifest::file_sha256(manifest_path).map_err(|source| ManifestError::Io {
        path: manifest_path.to_path_buf(),
        source,
    })?;

    let mut cache = TextCache {
        enabled: options.text_cache,
        vectors: HashMap::new(),
        encodings: 0,
    };
    let mut results = Vec::with_capacity(manifest.records.len());
    let mut top_hits = 0u64;

    for chunk in manifest.records.chunks(options.batch_size.max(1)) {
        let inputs: Vec<ImageInput> = chunk
            .iter()
            .map(|r| ImageInput {
                path: manifest.resolve(manifest_path, &r.image_path),
                key: r.sample_id.clone(),
                class_hint: Some(r.category.clone()),
            })
            .collect();
        let image_vectors = if options.adapt.is_some() {
            Vec::new()
        } else {
            backend.embed_images(&inputs).map_err(|source| EvalError::Backend {
                sample_id: chunk[0].sample_id.clone(),
                source,
            })?
        };
        for (i, record) in chunk.iter().enumerate() {
            let prompts = prompt_matrix(taxonomy, descriptions, classes, Some(&record.combination), options.mode)?;
            let scores = match &options.adapt {
                Some(config) => adapt_one(backend, &inputs[i], record, &prompts, config)?,
                None => {
                    let texts = cache.embed(backend, &prompts)?;
                    classify(&image_vectors[i], &texts).map_err(|source| EvalError::Classify {
                        sample_id: record.sample_id.clone(),
                        source,
                    })?
                }
            };
            let truth = manifest.header.class_index(&record.category).expect("validated category");
            if options.top_k > 1 && top_k(&scores.scores, options.top_k).contains(&truth) {
                top_hits += 1;
            }
            results.push(ClassificationResult {
                sample_id: record.sample_id.clone(),
                predicted_class: classes[scores.predicted].clone(),
                true_class: record.category.clone(),
                scores: scores.scores,
                combination: record.combination.clone(),
            });
        }
    }

    let info = backend.info();
    let metadata = ReportMetadata {
        backend: info.model_id.clone(),
        model_id: info.model_id.clone(),
        embedding_dim: info.embedding_dim,
        mode: options.mode,
        adapted: options.adapt.is_some(),
        taxonomy_hash: taxonomy.content_hash(),
        manifest_hash,
        text_cache: options.text_cache,
        text_encodings: cache.encodings,
    };
    let report = tally_report(taxonomy, classes, metadata, &results, (options.top_k > 1).then_some(TopK {
        k: options.top_k,
        correct: top_hits,
    }));
    Ok(Evaluation { report, results })
}

fn adapt_one(
    backend: &mut dyn EmbeddingBackend,
    image: &ImageInput,
    record: &SampleRecord,
    prompts: &[PromptSpec],
    config: &AdaptConfig,
) -> Result<Scores, EvalError> {
    let prompts: Vec<AdaptPrompt> = prompts
        .iter()
        .map(|p| AdaptPrompt {
            text: p.text.clone(),
            prefix: p.tunable_prefix().to_string(),
            class_name: p.class_name.clone(),
            domain_segment: p.domain_segment().to_string(),
        })
        .collect();
    backend
        .adapt(image, &prompts, config)
        .map_err(|source| EvalError::Backend {
            sample_id: record.sample_id.clone(),
            source,
        })
}

/// Counts results per combination and per class; the order of `results`
/// does not matter.
pub fn tally_report(
    taxonomy: &Taxonomy,
    classes: &[String],
    metadata: ReportMetadata,
    results: &[ClassificationResult],
    top_k: Option<TopK>,
) -> EvalReport {
    let mut per_combination: BTreeMap<String, (DomainCombination, Tally)> = BTreeMap::new();
    let mut per_class: BTreeMap<&str, Tally> = BTreeMap::new();
    for r in results {
        per_combination
            .entry(taxonomy.slug(&r.combination))
            .or_insert_with(|| (r.combination.clone(), Tally::default()))
            .1
            .record(r.correct());
        per_class.entry(r.true_class.as_str()).or_default().record(r.correct());
    }
    let class_rows = classes
        .iter()
        .map(|c| ClassRow {
            class: c.clone(),
            tally: per_class.get(c.as_str()).copied().unwrap_or_default(),
        })
        .collect();
    EvalReport::build(taxonomy, metadata, per_combination.into_values(), class_rows, top_k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::backend::{MockBackend, MockMode};
    use crate::manifest::{write_manifest, ManifestHeader, Provenance};

    fn combo(w: &str, t: &str) -> DomainCombination {
        DomainCombination::new()
            .with("weathers", w)
            .with("views", "side")
            .with("time", t)
            .with("seasons", "winter")
            .with("occlusion", "light occlusion")
    }

    fn record(i: usize, class: &str, c: DomainCombination) -> SampleRecord {
        SampleRecord {
            sample_id: format!("s{i}"),
            image_path: format!("images/{class}/{i}.png"),
            mask_paths: None,
            category: class.into(),
            combination: c,
            occlusion_ratio: Some(0.1),
            seed: Some(i as u64),
            provenance: Provenance::Generated,
        }
    }

    fn manifest(t: &Taxonomy) -> (tempfile::TempDir, std::path::PathBuf, Manifest) {
        let classes = ["dog", "car", "bird"];
        let mut m = Manifest::new(ManifestHeader::new(t.content_hash(), classes.map(String::from).to_vec()));
        let combos = [combo("clear", "day"), combo("snowy", "night"), combo("foggy", "day")];
        for i in 0..30 {
            m.records.push(record(i, classes[i % 3], combos[(i / 3) % 3].clone()));
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.jsonl");
        write_manifest(&path, &m).unwrap();
        (dir, path, m)
    }

    fn run(mode: MockMode, options: &EvalOptions) -> Evaluation {
        let t = Taxonomy::builtin();
        let (_dir, path, m) = manifest(&t);
        let mut b = MockBackend::new(mode, m.header.classes.clone());
        evaluate(&m, &path, &t, &DescriptionRegistry::builtin(), &mut b, options).unwrap()
    }

    #[test]
    fn oracle_is_perfect_in_every_mode() {
        for mode in PromptMode::ALL {
            let e = run(MockMode::Oracle, &EvalOptions { mode, ..EvalOptions::default() });
            assert_eq!(e.report.overall_accuracy, Some(1.0), "{mode:?}");
        }
    }

    #[test]
    fn constant_backend_hits_the_tie_break_rate() {
        let e = run(MockMode::Constant, &EvalOptions::default());
        assert!(e.results.iter().all(|r| r.predicted_class == "dog"));
        assert_eq!(e.report.overall, Tally { correct: 10, total: 30 });
    }

    #[test]
    fn cache_is_transparent_and_bounded() {
        let on = run(MockMode::Noise, &EvalOptions::default());
        let off = run(MockMode::Noise, &EvalOptions { text_cache: false, ..EvalOptions::default() });
        assert_eq!(on.results, off.results);
        // 3 combinations x 3 classes
        assert_eq!(on.report.metadata.text_encodings, 9);
        assert_eq!(off.report.metadata.text_encodings, 90);
        let base = run(MockMode::Noise, &EvalOptions { mode: PromptMode::Baseline, ..EvalOptions::default() });
        assert_eq!(base.report.metadata.text_encodings, 3);
    }

    #[test]
    fn adapted_path_matches_tuning_free_on_mock() {
        let plain = run(MockMode::Oracle, &EvalOptions::default());
        let adapted = run(MockMode::Oracle, &EvalOptions { adapt: Some(AdaptConfig::default()), ..EvalOptions::default() });
        assert_eq!(plain.results, adapted.results);
        assert!(adapted.report.metadata.adapted);
    }

    #[test]
    fn top_k_counts() {
        let e = run(MockMode::Noise, &EvalOptions { top_k: 3, ..EvalOptions::default() });
        assert_eq!(e.report.top_k, Some(TopK { k: 3, correct: 30 }));
    }

    #[test]
    fn taxonomy_mismatch_is_rejected() {
        let t = Taxonomy::builtin();
        let (_dir, path, mut m) = manifest(&t);
        m.records[4].combination.set("weathers", "hail");
        let mut b = MockBackend::new(MockMode::Oracle, m.header.classes.clone());
        let err = evaluate(&m, &path, &t, &DescriptionRegistry::builtin(), &mut b, &EvalOptions::default()).unwrap_err();
        assert!(err.to_string().contains("hail"), "{err}");
    }

    #[test]
    fn tally_is_order_independent() {
        let e = run(MockMode::Noise, &EvalOptions::default());
        let t = Taxonomy::builtin();
        let mut rev = e.results.clone();
        rev.reverse();
        let classes: Vec<String> = ["dog", "car", "bird"].map(String::from).to_vec();
        let a = tally_report(&t, &classes, e.report.metadata.clone(), &e.results, None);
        let b = tally_report(&t, &classes, e.report.metadata.clone(), &rev, None);
        assert_eq!(a, b);
    }
}
