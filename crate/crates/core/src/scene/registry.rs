use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::archetype::{self, DEFAULT_CATEGORIES, VARIANTS_PER_CATEGORY};
use super::mesh::{Mesh, MeshError};

/// Bounding half-diagonal every registered mesh is scaled to.
pub const OBJECT_RADIUS: f32 = 1.0;

pub const MESH_FILE_EXTENSION: &str = "mesh";

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("category `{category}` has no mesh variant {variant}")]
    UnknownVariant { category: String, variant: usize },
    #[error("mesh file {path}: {source}")]
    Mesh { path: PathBuf, source: MeshError },
    #[error("failed to scan mesh directory {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum MeshSource {
    Procedural { archetype: String, variant: usize },
    File { path: PathBuf },
}

#[derive(Debug, Clone)]
pub struct MeshVariant {
    pub source: MeshSource,
    mesh: Arc<Mesh>,
}

impl MeshVariant {
    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }
}

#[derive(Debug, Clone)]
pub struct Category {
    pub name: String,
    pub variants: Vec<MeshVariant>,
}

/// Categories and their mesh variants. Meshes are loaded and normalized at
/// construction; lookups are read-only afterwards.
#[derive(Debug, Clone, Default)]
pub struct CategoryRegistry {
    categories: Vec<Category>,
}

impl CategoryRegistry {
    /// The fourteen default categories with their procedural variants.
    pub fn builtin() -> Self {
        let categories = DEFAULT_CATEGORIES
            .iter()
            .map(|&name| Category {
                name: name.to_string(),
                variants: (0..VARIANTS_PER_CATEGORY)
                    .map(|v| MeshVariant {
                        source: MeshSource::Procedural {
                            archetype: name.to_string(),
                            variant: v,
                        },
                        mesh: Arc::new(
                            archetype::build(name, v)
                                .expect("default archetype")
                                .normalized(OBJECT_RADIUS),
                        ),
                    })
                    .collect(),
            })
            .collect();
        Self { categories }
    }

    /// Adds every `<dir>/<category>/*.mesh` file as an extra variant, in file
    /// name order. Unknown category folders create new categories.
    pub fn with_mesh_dir(mut self, dir: impl AsRef<Path>) -> Result<Self, RegistryError> {
        let dir = dir.as_ref();
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| RegistryError::Io { path, source }
        };
        let mut folders: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(io(dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        folders.sort();
        for folder in folders {
            let name = folder
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            let mut files: Vec<PathBuf> = std::fs::read_dir(&folder)
                .map_err(io(&folder))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == MESH_FILE_EXTENSION))
                .collect();
            files.sort();
            for path in files {
                let mesh = Mesh::load(&path).map_err(|source| RegistryError::Mesh {
                    path: path.clone(),
                    source,
                })?;
                self.add_variant(&name, MeshSource::File { path }, mesh);
            }
        }
        Ok(self)
    }

    pub fn add_variant(&mut self, category: &str, source: MeshSource, mesh: Mesh) {
        let variant = MeshVariant {
            source,
            mesh: Arc::new(mesh.normalized(OBJECT_RADIUS)),
        };
        match self.categories.iter_mut().find(|c| c.name == category) {
            Some(c) => c.variants.push(variant),
            None => self.categories.push(Category {
                name: category.to_string(),
                variants: vec![variant],
            }),
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.categories.iter().map(|c| c.name.as_str())
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn get(&self, name: &str) -> Result<&Category, RegistryError> {
        self.categories
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| RegistryError::UnknownCategory(name.to_string()))
    }

    pub fn mesh(&self, category: &str, variant: usize) -> Result<&Mesh, RegistryError> {
        self.get(category)?
            .variants
            .get(variant)
            .map(MeshVariant::mesh)
            .ok_or_else(|| RegistryError::UnknownVariant {
                category: category.to_string(),
                variant,
            })
    }
}
