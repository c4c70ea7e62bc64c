//! Line-delimited manifests: a header object on the first line, then one
//! [`SampleRecord`] per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::taxonomy::{DomainCombination, Taxonomy, TaxonomyError};

pub const MANIFEST_FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE_NAME: &str = "manifest.jsonl";

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("manifest is empty (missing header line)")]
    MissingHeader,
    #[error("unsupported manifest format_version {0}")]
    UnsupportedVersion(u32),
    #[error("manifest was built for taxonomy {manifest} but the loaded taxonomy hashes to {loaded}")]
    TaxonomyMismatch { manifest: String, loaded: String },
    #[error("line {line}: {source}")]
    Label { line: usize, source: TaxonomyError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Generated,
    Imported,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskPaths {
    /// Target pixels visible with occluders.
    pub visible: String,
    /// Target pixels with occluders removed.
    pub full: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    pub sample_id: String,
    /// Relative to the manifest's root, `/`-separated.
    pub image_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_paths: Option<MaskPaths>,
    pub category: String,
    pub combination: DomainCombination,
    pub occlusion_ratio: Option<f64>,
    pub seed: Option<u64>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestHeader {
    pub format_version: u32,
    pub taxonomy_hash: String,
    pub classes: Vec<String>,
    pub generator: String,
    /// Directory record paths are relative to, itself relative to the
    /// manifest file's directory.
    pub root: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ManifestHeader {
    pub fn new(taxonomy_hash: impl Into<String>, classes: Vec<String>) -> Self {
        Self {
            format_version: MANIFEST_FORMAT_VERSION,
            taxonomy_hash: taxonomy_hash.into(),
            classes,
            generator: generator_id(),
            root: ".".into(),
            seed: None,
        }
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == name)
    }

    /// Checks one record against the header; `line` is used for messages.
    pub fn check_record(&self, r: &SampleRecord, line: usize) -> Result<(), ManifestError> {
        let err = |message: String| Err(ManifestError::Schema { line, message });
        if r.sample_id.is_empty() {
            return err("empty sample_id".into());
        }
        if self.class_index(&r.category).is_none() {
            return err(format!("category `{}` is not in the header class list", r.category));
        }
        if let Some(x) = r.occlusion_ratio {
            if !(0.0..=1.0).contains(&x) {
                return err(format!("occlusion_ratio {x} outside [0, 1]"));
            }
        }
        if r.provenance == Provenance::Generated && (r.occlusion_ratio.is_none() || r.seed.is_none()) {
            return err("generated records need occlusion_ratio and seed".into());
        }
        Ok(())
    }
}

pub fn generator_id() -> String {
    format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub header: ManifestHeader,
    pub records: Vec<SampleRecord>,
}

impl Manifest {
    pub fn new(header: ManifestHeader) -> Self {
        Self {
            header,
            records: Vec::new(),
        }
    }

    /// Absolute location of a record path for a manifest stored at
    /// `manifest_path`.
    pub fn resolve(&self, manifest_path: &Path, relative: &str) -> PathBuf {
        let dir = manifest_path.parent().unwrap_or(Path::new("."));
        dir.join(&self.header.root).join(relative)
    }

    /// Header hash matches and every record's labels exist in `taxonomy`.
    pub fn check_taxonomy(&self, taxonomy: &Taxonomy) -> Result<(), ManifestError> {
        let loaded = taxonomy.content_hash();
        if loaded != self.header.taxonomy_hash {
            return Err(ManifestError::TaxonomyMismatch {
                manifest: self.header.taxonomy_hash.clone(),
                loaded,
            });
        }
        for (i, r) in self.records.iter().enumerate() {
            taxonomy
                .check_labels(&r.combination)
                .map_err(|source| ManifestError::Label { line: i + 2, source })?;
        }
        Ok(())
    }
}

/// Streams a manifest to disk; the header is written on creation.
pub struct ManifestWriter {
    header: ManifestHeader,
    out: BufWriter<File>,
    path: PathBuf,
    lines: usize,
}

impl ManifestWriter {
    pub fn create(path: impl AsRef<Path>, header: ManifestHeader) -> Result<Self, ManifestError> {
        let path = path.as_ref().to_path_buf();
        let io = |source| ManifestError::Io {
            path: path.clone(),
            source,
        };
        let file = File::create(&path).map_err(io)?;
        let mut w = Self {
            out: BufWriter::new(file),
            header,
            path: path.clone(),
            lines: 1,
        };
        let line = serde_json::to_string(&w.header).expect("header serializes");
        writeln!(w.out, "{line}").map_err(io)?;
        Ok(w)
    }

    pub fn append(&mut self, record: &SampleRecord) -> Result<(), ManifestError> {
        self.lines += 1;
        self.header.check_record(record, self.lines)?;
        let line = serde_json::to_string(record).expect("record serializes");
        writeln!(self.out, "{line}").map_err(|source| ManifestError::Io {
            path: self.path.clone(),
            source,
        })
    }

    pub fn finish(mut self) -> Result<(), ManifestError> {
        self.out.flush().map_err(|source| ManifestError::Io {
            path: self.path.clone(),
            source,
        })
    }
}

pub fn write_manifest(path: impl AsRef<Path>, manifest: &Manifest) -> Result<(), ManifestError> {
    for (i, r) in manifest.records.iter().enumerate() {
        manifest.header.check_record(r, i + 2)?;
    }
    let mut w = ManifestWriter::create(path, manifest.header.clone())?;
    for r in &manifest.records {
        w.append(r)?;
    }
    w.finish()
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Manifest, ManifestError> {
    let path = path.as_ref();
    let io = |source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(io)?;
    parse_lines(BufReader::new(file).lines().map(|l| l.map_err(io)))
}

pub fn parse_manifest(text: &str) -> Result<Manifest, ManifestError> {
    parse_lines(text.lines().map(|l| Ok(l.to_string())))
}

fn parse_lines(lines: impl Iterator<Item = Result<String, ManifestError>>) -> Result<Manifest, ManifestError> {
    let mut header: Option<ManifestHeader> = None;
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        match &header {
            None => {
                let h: ManifestHeader = serde_json::from_str(&line).map_err(|e| ManifestError::Schema {
                    line: n,
                    message: format!("bad header: {e}"),
                })?;
                if h.format_version != MANIFEST_FORMAT_VERSION {
                    return Err(ManifestError::UnsupportedVersion(h.format_version));
                }
                header = Some(h);
            }
            Some(h) => {
                let r: SampleRecord = serde_json::from_str(&line).map_err(|e| ManifestError::Schema {
                    line: n,
                    message: e.to_string(),
                })?;
                h.check_record(&r, n)?;
                records.push(r);
            }
        }
    }
    let header = header.ok_or(ManifestError::MissingHeader)?;
    Ok(Manifest { header, records })
}

/// Hex SHA-256 of a file's bytes.
pub fn file_sha256(path: impl AsRef<Path>) -> std::io::Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
