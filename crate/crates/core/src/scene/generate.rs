//! Dataset generation over every valid combination.
//!
//! Each record's seed is a hash of (plan seed, combination slug, category,
//! sample index), so outputs do not depend on scheduling and rendering runs
//! in parallel.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::occlusion::OcclusionBin;
use super::registry::CategoryRegistry;
use super::render::render;
use super::sample::{sample_scene, sample_unoccluded, SceneDomains, SceneOptions, SceneSpec, OCCLUSION_SHIFT};
use crate::manifest::{
    ManifestError, ManifestHeader, ManifestWriter, MaskPaths, Provenance, SampleRecord, MANIFEST_FILE_NAME,
};
use crate::taxonomy::{DomainCombination, Taxonomy};

pub const FAILURES_FILE_NAME: &str = "failures.jsonl";

#[derive(Debug, thiserror::Error)]
pub enum GenerateError {
    #[error("samples_per_combination must be ≥1")]
    ZeroSamples,
    #[error("no categories requested")]
    NoCategories,
    #[error("category `{0}` requested twice")]
    DuplicateCategory(String),
    #[error(transparent)]
    Registry(#[from] super::registry::RegistryError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Image { path: PathBuf, source: image::ImageError },
    #[error(transparent)]
    Manifest(#[from] ManifestError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationPlan {
    pub samples_per_combination: usize,
    pub categories: Vec<String>,
    pub seed: u64,
    pub options: SceneOptions,
}

/// A record that could not be produced, with enough context to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationFailure {
    pub sample_id: String,
    pub category: String,
    pub combination: DomainCombination,
    pub seed: u64,
    pub error: String,
    pub spec: Option<SceneSpec>,
}

#[derive(Debug, Clone)]
pub struct GenerationSummary {
    pub manifest_path: PathBuf,
    pub records: Vec<SampleRecord>,
    pub failures: Vec<GenerationFailure>,
}

/// Stable per-record seed.
pub fn record_seed(plan_seed: u64, slug: &str, category: &str, index: usize) -> u64 {
    let digest = Sha256::digest(format!("{plan_seed}/{slug}/{category}/{index}"));
    u64::from_be_bytes(digest[..8].try_into().expect("8 bytes"))
}

struct Job<'a> {
    combination: &'a DomainCombination,
    slug: &'a str,
    category: &'a str,
    index: usize,
    seed: u64,
}

pub fn generate_dataset(
    taxonomy: &Taxonomy,
    registry: &CategoryRegistry,
    plan: &GenerationPlan,
    out: impl AsRef<Path>,
) -> Result<GenerationSummary, GenerateError> {
    let out = out.as_ref();
    if plan.samples_per_combination == 0 {
        return Err(GenerateError::ZeroSamples);
    }
    if plan.categories.is_empty() {
        return Err(GenerateError::NoCategories);
    }
    let mut seen = HashSet::new();
    for c in &plan.categories {
        registry.get(c)?;
        if !seen.insert(c) {
            return Err(GenerateError::DuplicateCategory(c.clone()));
        }
    }
    std::fs::create_dir_all(out).map_err(|source| GenerateError::Io {
        path: out.to_path_buf(),
        source,
    })?;

    let combinations = taxonomy.enumerate_combinations();
    let slugs: Vec<String> = combinations.iter().map(|c| taxonomy.slug(c)).collect();
    let mut jobs = Vec::with_capacity(combinations.len() * plan.categories.len() * plan.samples_per_combination);
    for (combination, slug) in combinations.iter().zip(&slugs) {
        for category in &plan.categories {
            for index in 0..plan.samples_per_combination {
                jobs.push(Job {
                    combination,
                    slug,
                    category,
                    index,
                    seed: record_seed(plan.seed, slug, category, index),
                });
            }
        }
    }
    log::info!("generating {} samples into {}", jobs.len(), out.display());

    let results: Vec<Result<Result<SampleRecord, GenerationFailure>, GenerateError>> = jobs
        .par_iter()
        .map(|job| run_job(taxonomy, registry, &plan.options, job, out))
        .collect();

    let mut header = ManifestHeader::new(taxonomy.content_hash(), plan.categories.clone());
    header.seed = Some(plan.seed);
    let manifest_path = out.join(MANIFEST_FILE_NAME);
    let mut writer = ManifestWriter::create(&manifest_path, header)?;
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r? {
            Ok(record) => {
                writer.append(&record)?;
                records.push(record);
            }
            Err(f) => {
                log::warn!("sample {} failed: {}", f.sample_id, f.error);
                failures.push(f);
            }
        }
    }
    writer.finish()?;
    write_failures(&out.join(FAILURES_FILE_NAME), &failures)?;
    Ok(GenerationSummary {
        manifest_path,
        records,
        failures,
    })
}

fn run_job(
    taxonomy: &Taxonomy,
    registry: &CategoryRegistry,
    options: &SceneOptions,
    job: &Job<'_>,
    out: &Path,
) -> Result<Result<SampleRecord, GenerationFailure>, GenerateError> {
    let sample_id = format!("{}/{}/{:04}", job.slug, job.category, job.index);
    let fail = |error: String| {
        Ok(Err(GenerationFailure {
            sample_id: sample_id.clone(),
            category: job.category.to_string(),
            combination: job.combination.clone(),
            seed: job.seed,
            error,
            spec: sample_unoccluded(taxonomy, registry, job.combination, job.category, job.seed, options).ok(),
        }))
    };
    let spec = match sample_scene(taxonomy, registry, job.combination, job.category, job.seed, options) {
        Ok(s) => s,
        Err(e) => return fail(e.to_string()),
    };
    let output = match render(&spec, registry) {
        Ok(o) => o,
        Err(e) => return fail(e.to_string()),
    };
    if taxonomy.shift(OCCLUSION_SHIFT).is_some() {
        let expected = SceneDomains::from_combination(taxonomy, job.combination)
            .map(|d| d.occlusion)
            .unwrap_or(OcclusionBin::None);
        if !expected.contains(output.occlusion_ratio) {
            return fail(format!(
                "measured ratio {} does not fall in `{expected}`",
                output.occlusion_ratio
            ));
        }
    }

    let stem = format!("{}/{}/{:016x}", job.slug, job.category, job.seed);
    let image_path = format!("images/{stem}.png");
    let masks = MaskPaths {
        visible: format!("masks/{stem}.visible.png"),
        full: format!("masks/{stem}.full.png"),
    };
    save(out, &image_path, |p| output.image.save(p))?;
    save(out, &masks.visible, |p| output.mask_with_occluders.save(p))?;
    save(out, &masks.full, |p| output.mask_without_occluders.save(p))?;

    Ok(Ok(SampleRecord {
        sample_id,
        image_path,
        mask_paths: Some(masks),
        category: job.category.to_string(),
        combination: job.combination.clone(),
        occlusion_ratio: Some(output.occlusion_ratio),
        seed: Some(job.seed),
        provenance: Provenance::Generated,
    }))
}

fn save(
    out: &Path,
    relative: &str,
    write: impl FnOnce(&Path) -> image::ImageResult<()>,
) -> Result<(), GenerateError> {
    let path = out.join(relative);
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|source| GenerateError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    write(&path).map_err(|source| GenerateError::Image { path, source })
}

fn write_failures(path: &Path, failures: &[GenerationFailure]) -> Result<(), GenerateError> {
    let io = |source| GenerateError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for f in failures {
        writeln!(w, "{}", serde_json::to_string(f).expect("failure serializes")).map_err(io)?;
    }
    w.flush().map_err(io)
}
