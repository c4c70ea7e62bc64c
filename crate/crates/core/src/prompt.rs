//! Baseline, domain, and domain-plus prompt composition.
//!
//! Domain prompts insert the labeled domain names into the standard
//! `a photo of a {class}` template, one slot per shift in the taxonomy's
//! prompt order. Consecutive slots that share a connective are grouped, so
//! the default taxonomy yields
//! `a photo of a dog in clear autumn day from side with light occlusion.`
//! Slots whose shift is unlabeled are dropped together with their
//! connective. Domain-plus prompts append the registry description of every
//! labeled domain in the same slot order.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::taxonomy::{DomainCombination, DomainRef, Taxonomy, TaxonomyError};

pub const PROMPT_PREFIX: &str = "a photo of a";

const BUILTIN_DESCRIPTIONS: &str = include_str!("../data/descriptions.toml");

#[derive(Debug, thiserror::Error)]
pub enum PromptError {
    #[error("class name must be non-empty")]
    EmptyClassName,
    #[error("duplicate class name `{0}`")]
    DuplicateClass(String),
    #[error("prompt matrix needs at least one class")]
    NoClasses,
    #[error("{0:?} prompts require a domain combination")]
    MissingCombination(PromptMode),
    #[error("no description for ({shift}, {domain})")]
    MissingDescription { shift: String, domain: String },
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error("failed to parse description registry: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("failed to read description registry: {0}")]
    Io(#[from] std::io::Error),
    #[error("description for `{0}` is empty")]
    EmptyDescription(String),
    #[error("unknown prompt mode `{0}` (expected baseline, domain, or domain_plus)")]
    UnknownMode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptMode {
    Baseline,
    Domain,
    DomainPlus,
}

impl PromptMode {
    pub const ALL: [PromptMode; 3] = [PromptMode::Baseline, PromptMode::Domain, PromptMode::DomainPlus];

    pub fn as_str(self) -> &'static str {
        match self {
            PromptMode::Baseline => "baseline",
            PromptMode::Domain => "domain",
            PromptMode::DomainPlus => "domain_plus",
        }
    }
}

impl fmt::Display for PromptMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PromptMode {
    type Err = PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(PromptMode::Baseline),
            "domain" => Ok(PromptMode::Domain),
            "domain_plus" | "domain++" => Ok(PromptMode::DomainPlus),
            other => Err(PromptError::UnknownMode(other.to_string())),
        }
    }
}

/// A composed prompt and the inputs it was composed from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub mode: PromptMode,
    pub class_name: String,
    pub combination: Option<DomainCombination>,
    pub text: String,
    /// Set when a domain prompt had no labeled slot and fell back to the
    /// baseline text.
    pub fell_back: bool,
}

impl PromptSpec {
    /// The generic prefix that test-time adaptation may tune.
    pub fn tunable_prefix(&self) -> &str {
        PROMPT_PREFIX
    }

    /// Everything after the class name: the domain slots and descriptions,
    /// which stay frozen during adaptation. Empty for baseline prompts.
    pub fn domain_segment(&self) -> &str {
        let head = PROMPT_PREFIX.len() + 1 + self.class_name.len();
        &self.text[head.min(self.text.len())..]
    }
}

pub fn compose_baseline(class_name: &str) -> Result<PromptSpec, PromptError> {
    check_class(class_name)?;
    Ok(PromptSpec {
        mode: PromptMode::Baseline,
        class_name: class_name.to_string(),
        combination: None,
        text: baseline_text(class_name),
        fell_back: false,
    })
}

pub fn compose_domain(
    taxonomy: &Taxonomy,
    class_name: &str,
    combination: &DomainCombination,
) -> Result<PromptSpec, PromptError> {
    check_class(class_name)?;
    taxonomy.check_labels(combination)?;
    let text = match domain_stem(taxonomy, class_name, combination) {
        Some(stem) => stem + ".",
        None => return Ok(fallback(PromptMode::Domain, class_name, combination)),
    };
    Ok(PromptSpec {
        mode: PromptMode::Domain,
        class_name: class_name.to_string(),
        combination: Some(combination.clone()),
        text,
        fell_back: false,
    })
}

pub fn compose_domain_plus(
    taxonomy: &Taxonomy,
    class_name: &str,
    combination: &DomainCombination,
    registry: &DescriptionRegistry,
) -> Result<PromptSpec, PromptError> {
    check_class(class_name)?;
    taxonomy.check_labels(combination)?;
    let Some(stem) = domain_stem(taxonomy, class_name, combination) else {
        return Ok(fallback(PromptMode::DomainPlus, class_name, combination));
    };
    let mut descriptions = Vec::new();
    for shift in taxonomy.prompt_slots() {
        if let Some(domain) = combination.get(&shift.name) {
            let text = registry.get(&shift.name, domain).ok_or_else(|| {
                PromptError::MissingDescription {
                    shift: shift.name.clone(),
                    domain: domain.to_string(),
                }
            })?;
            descriptions.push(text);
        }
    }
    Ok(PromptSpec {
        mode: PromptMode::DomainPlus,
        class_name: class_name.to_string(),
        combination: Some(combination.clone()),
        text: format!("{stem}, {}.", descriptions.join(", ")),
        fell_back: false,
    })
}

/// Dispatches on `mode`. Baseline ignores `combination`.
pub fn compose(
    taxonomy: &Taxonomy,
    registry: &DescriptionRegistry,
    class_name: &str,
    combination: Option<&DomainCombination>,
    mode: PromptMode,
) -> Result<PromptSpec, PromptError> {
    match (mode, combination) {
        (PromptMode::Baseline, _) => compose_baseline(class_name),
        (PromptMode::Domain, Some(c)) => compose_domain(taxonomy, class_name, c),
        (PromptMode::DomainPlus, Some(c)) => compose_domain_plus(taxonomy, class_name, c, registry),
        (mode, None) => Err(PromptError::MissingCombination(mode)),
    }
}

/// One prompt per class, in the given class order.
pub fn prompt_matrix(
    taxonomy: &Taxonomy,
    registry: &DescriptionRegistry,
    class_names: &[String],
    combination: Option<&DomainCombination>,
    mode: PromptMode,
) -> Result<Vec<PromptSpec>, PromptError> {
    if class_names.is_empty() {
        return Err(PromptError::NoClasses);
    }
    let mut seen = HashSet::new();
    for name in class_names {
        if !seen.insert(name.as_str()) {
            return Err(PromptError::DuplicateClass(name.clone()));
        }
    }
    class_names
        .iter()
        .map(|c| compose(taxonomy, registry, c, combination, mode))
        .collect()
}

fn check_class(class_name: &str) -> Result<(), PromptError> {
    if class_name.trim().is_empty() {
        Err(PromptError::EmptyClassName)
    } else {
        Ok(())
    }
}

fn baseline_text(class_name: &str) -> String {
    format!("{PROMPT_PREFIX} {class_name}")
}

fn fallback(mode: PromptMode, class_name: &str, combination: &DomainCombination) -> PromptSpec {
    log::warn!("no labeled domain slot for class `{class_name}`; using the baseline prompt");
    PromptSpec {
        mode,
        class_name: class_name.to_string(),
        combination: Some(combination.clone()),
        text: baseline_text(class_name),
        fell_back: true,
    }
}

/// Prompt text up to, but excluding, the final period. `None` when no slot
/// is labeled.
fn domain_stem(
    taxonomy: &Taxonomy,
    class_name: &str,
    combination: &DomainCombination,
) -> Option<String> {
    let mut text = baseline_text(class_name);
    let mut current: Option<&str> = None;
    let mut any = false;
    for shift in taxonomy.prompt_slots() {
        let Some(domain) = combination.get(&shift.name) else {
            continue;
        };
        if current != Some(shift.connective.as_str()) {
            text.push(' ');
            text.push_str(&shift.connective);
            current = Some(&shift.connective);
        }
        text.push(' ');
        text.push_str(domain);
        any = true;
    }
    any.then_some(text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescriptionOrigin {
    /// Fixed strings pinned by golden tests.
    Reference,
    Curated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Description {
    pub text: String,
    pub origin: DescriptionOrigin,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    #[serde(default)]
    #[allow(dead_code)]
    format_version: Option<u32>,
    #[serde(default)]
    entry: Vec<RegistryEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryEntry {
    key: String,
    text: String,
    #[serde(default = "curated")]
    origin: DescriptionOrigin,
}

fn curated() -> DescriptionOrigin {
    DescriptionOrigin::Curated
}

/// Visual descriptions keyed by `shift.domain`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DescriptionRegistry {
    entries: BTreeMap<DomainRef, Description>,
}

impl DescriptionRegistry {
    pub fn builtin() -> Self {
        Self::from_toml_str(BUILTIN_DESCRIPTIONS).expect("built-in description registry is valid")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, PromptError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, PromptError> {
        let file: RegistryFile = toml::from_str(text)?;
        let mut entries = BTreeMap::new();
        for e in file.entry {
            if e.text.trim().is_empty() {
                return Err(PromptError::EmptyDescription(e.key));
            }
            entries.insert(
                DomainRef::parse(&e.key)?,
                Description {
                    text: e.text,
                    origin: e.origin,
                },
            );
        }
        Ok(Self { entries })
    }

    /// Collects the inline descriptions of a taxonomy.
    pub fn from_taxonomy(taxonomy: &Taxonomy) -> Self {
        let mut entries = BTreeMap::new();
        for shift in taxonomy.shifts() {
            for d in &shift.domains {
                if !d.description.is_empty() {
                    entries.insert(
                        DomainRef::new(&shift.name, &d.name),
                        Description {
                            text: d.description.clone(),
                            origin: DescriptionOrigin::Curated,
                        },
                    );
                }
            }
        }
        Self { entries }
    }

    /// Entries of `other` replace entries of `self` with the same key.
    pub fn merged(mut self, other: DescriptionRegistry) -> Self {
        self.entries.extend(other.entries);
        self
    }

    pub fn insert(&mut self, key: DomainRef, text: impl Into<String>, origin: DescriptionOrigin) {
        self.entries.insert(
            key,
            Description {
                text: text.into(),
                origin,
            },
        );
    }

    pub fn remove(&mut self, key: &DomainRef) -> Option<Description> {
        self.entries.remove(key)
    }

    pub fn get(&self, shift: &str, domain: &str) -> Option<&str> {
        self.entries
            .get(&DomainRef::new(shift, domain))
            .map(|d| d.text.as_str())
    }

    pub fn entry(&self, key: &DomainRef) -> Option<&Description> {
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Domains of `taxonomy` without a description.
    pub fn missing(&self, taxonomy: &Taxonomy) -> Vec<DomainRef> {
        taxonomy
            .domains()
            .filter(|d| !self.entries.contains_key(d))
            .collect()
    }
}
