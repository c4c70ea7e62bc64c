//! Importing existing image folders as manifests with partial combinations.
//!
//! A mapping file names the data root and, for every image folder under it,
//! the class and the (possibly partial) domain labels its images carry:
//!
//! ```toml
//! format_version = 1
//! root = "pacs"                 # relative to the mapping file
//!
//! [[folders]]
//! path = "sketch/dog"           # relative to root
//! class = "dog"
//! combination = { style = "sketch" }
//! ```
//!
//! Every folder under the root that directly contains images must be mapped.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::manifest::{Manifest, ManifestHeader, Provenance, SampleRecord};
use crate::taxonomy::{DomainCombination, Taxonomy, TaxonomyError};

pub const IMPORT_FORMAT_VERSION: u32 = 1;
pub const IMAGE_EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "bmp"];

#[derive(Debug, thiserror::Error)]
pub enum ImportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("mapping file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unsupported mapping format_version {0}")]
    UnsupportedVersion(u32),
    #[error("mapped folder {0} does not exist")]
    MissingFolder(PathBuf),
    #[error("folder {0} holds images but is not in the mapping")]
    UnmappedFolder(PathBuf),
    #[error("folder `{0}` is mapped twice")]
    DuplicateFolder(String),
    #[error("folder `{path}`: {source}")]
    Label { path: String, source: TaxonomyError },
    #[error("folder `{0}` has an empty class name")]
    EmptyClass(String),
    #[error("unreadable image {path}: {source}")]
    Image { path: PathBuf, source: image::ImageError },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FolderMapping {
    pub path: String,
    pub class: String,
    #[serde(default)]
    pub combination: DomainCombination,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImportMapping {
    pub format_version: u32,
    pub root: PathBuf,
    pub folders: Vec<FolderMapping>,
}

impl ImportMapping {
    pub fn from_toml_str(text: &str) -> Result<Self, ImportError> {
        let m: ImportMapping = toml::from_str(text)?;
        if m.format_version != IMPORT_FORMAT_VERSION {
            return Err(ImportError::UnsupportedVersion(m.format_version));
        }
        Ok(m)
    }

    /// Loads a mapping; a relative `root` is resolved against the file's
    /// directory.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ImportError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ImportError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut m = Self::from_toml_str(&text)?;
        if m.root.is_relative() {
            m.root = path.parent().unwrap_or(Path::new(".")).join(&m.root);
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ImportWarning {
    EmptyFolder(String),
}

impl std::fmt::Display for ImportWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ImportWarning::EmptyFolder(p) => write!(f, "folder `{p}` has no images"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ImportOutcome {
    pub manifest: Manifest,
    pub warnings: Vec<ImportWarning>,
}

fn is_image(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

fn list_dir(dir: &Path) -> Result<Vec<PathBuf>, ImportError> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|source| ImportError::Io {
            path: dir.to_path_buf(),
            source,
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    out.sort();
    Ok(out)
}

/// Directories under `root` (relative, `/`-separated) that directly hold images.
fn image_folders(root: &Path) -> Result<BTreeSet<String>, ImportError> {
    let mut found = BTreeSet::new();
    let mut stack = vec![PathBuf::new()];
    while let Some(rel) = stack.pop() {
        let entries = list_dir(&root.join(&rel))?;
        if entries.iter().any(|p| p.is_file() && is_image(p)) {
            found.insert(to_slash(&rel));
        }
        for p in entries.into_iter().filter(|p| p.is_dir()) {
            stack.push(rel.join(p.file_name().expect("entry has a name")));
        }
    }
    Ok(found)
}

fn to_slash(p: &Path) -> String {
    p.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

fn normalize(p: &str) -> String {
    to_slash(Path::new(p.trim_matches('/')))
}

/// Builds the manifest; record paths are relative to `mapping.root`, which
/// becomes the header root unchanged.
pub fn import_external(mapping: &ImportMapping, taxonomy: &Taxonomy) -> Result<ImportOutcome, ImportError> {
    let root = &mapping.root;
    let mut mapped = BTreeSet::new();
    let mut classes: Vec<String> = Vec::new();
    for f in &mapping.folders {
        let key = normalize(&f.path);
        if !mapped.insert(key.clone()) {
            return Err(ImportError::DuplicateFolder(key));
        }
        if f.class.trim().is_empty() {
            return Err(ImportError::EmptyClass(key));
        }
        taxonomy.check_labels(&f.combination).map_err(|source| ImportError::Label {
            path: key.clone(),
            source,
        })?;
        if !root.join(&key).is_dir() {
            return Err(ImportError::MissingFolder(root.join(&key)));
        }
        if !classes.contains(&f.class) {
            classes.push(f.class.clone());
        }
    }
    if let Some(extra) = image_folders(root)?.difference(&mapped).next() {
        return Err(ImportError::UnmappedFolder(root.join(extra)));
    }

    let mut header = ManifestHeader::new(taxonomy.content_hash(), classes);
    header.root = root.to_string_lossy().into_owned();
    let mut manifest = Manifest::new(header);
    let mut warnings = Vec::new();
    for f in &mapping.folders {
        let key = normalize(&f.path);
        let images: Vec<PathBuf> = list_dir(&root.join(&key))?
            .into_iter()
            .filter(|p| p.is_file() && is_image(p))
            .collect();
        if images.is_empty() {
            log::warn!("folder `{key}` has no images");
            warnings.push(ImportWarning::EmptyFolder(key.clone()));
            continue;
        }
        for path in images {
            image::image_dimensions(&path).map_err(|source| ImportError::Image {
                path: path.clone(),
                source,
            })?;
            let name = path.file_name().expect("file has a name").to_string_lossy();
            let rel = if key.is_empty() { name.to_string() } else { format!("{key}/{name}") };
            manifest.records.push(SampleRecord {
                sample_id: rel.clone(),
                image_path: rel,
                mask_paths: None,
                category: f.class.clone(),
                combination: f.combination.clone(),
                occlusion_ratio: None,
                seed: None,
                provenance: Provenance::Imported,
            });
        }
    }
    Ok(ImportOutcome { manifest, warnings })
}
