//! Domain shifts, their domains, pairwise exclusions, and the fine-grained
//! combinations they generate.
//!
//! A [`Taxonomy`] is loaded from a TOML document (see `data/taxonomy.toml` for
//! the schema) or taken from the compiled-in default via [`Taxonomy::builtin`].
//! It is immutable after construction.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::prompt::DescriptionRegistry;

const BUILTIN_TAXONOMY: &str = include_str!("../data/taxonomy.toml");
pub const TAXONOMY_FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum TaxonomyError {
    #[error("failed to parse taxonomy config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("failed to read taxonomy config: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported taxonomy format_version {0}")]
    UnsupportedVersion(u32),
    #[error("duplicate shift id `{0}`")]
    DuplicateShift(String),
    #[error("duplicate domain `{domain}` in shift `{shift}`")]
    DuplicateDomain { shift: String, domain: String },
    #[error("shift needs ≥2 domains: `{0}`")]
    TooFewDomains(String),
    #[error("invalid name `{0}`: names must be non-empty, lowercase, and free of `.` and `/`")]
    InvalidName(String),
    #[error("unknown shift `{0}`")]
    UnknownShift(String),
    #[error("unknown domain `{domain}` in shift `{shift}`")]
    UnknownDomain { shift: String, domain: String },
    #[error("malformed domain path `{0}`, expected `shift.domain`")]
    MalformedPath(String),
    #[error("exclusion {0} pairs two domains of the same shift")]
    SameShiftExclusion(String),
    #[error("prompt_order lists `{0}` more than once")]
    DuplicatePromptSlot(String),
    #[error("invalid combination: {0}")]
    InvalidCombination(Verdict),
}

/// Reference to one domain of one shift, written `shift.domain`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DomainRef {
    pub shift: String,
    pub domain: String,
}

impl DomainRef {
    pub fn new(shift: impl Into<String>, domain: impl Into<String>) -> Self {
        Self {
            shift: shift.into(),
            domain: domain.into(),
        }
    }

    /// Parses `shift.domain`. The shift name ends at the first `.`.
    pub fn parse(path: &str) -> Result<Self, TaxonomyError> {
        match path.split_once('.') {
            Some((shift, domain)) if !shift.is_empty() && !domain.is_empty() => {
                Ok(Self::new(shift, domain))
            }
            _ => Err(TaxonomyError::MalformedPath(path.to_string())),
        }
    }
}

impl fmt::Display for DomainRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.shift, self.domain)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Domain {
    pub shift_id: String,
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DomainShift {
    pub name: String,
    /// Word that introduces this shift's slot in a domain prompt.
    pub connective: String,
    pub domains: Vec<Domain>,
}

impl DomainShift {
    pub fn domain_index(&self, name: &str) -> Option<usize> {
        self.domains.iter().position(|d| d.name == name)
    }
}

/// Two domains of different shifts that may not appear together.
///
/// Equality ignores the order of the pair.
#[derive(Debug, Clone, Eq, Serialize)]
pub struct ExclusionConstraint {
    pub a: DomainRef,
    pub b: DomainRef,
}

impl ExclusionConstraint {
    pub fn involves(&self, d: &DomainRef) -> bool {
        &self.a == d || &self.b == d
    }

    fn canonical(&self) -> (&DomainRef, &DomainRef) {
        if self.a <= self.b {
            (&self.a, &self.b)
        } else {
            (&self.b, &self.a)
        }
    }
}

impl PartialEq for ExclusionConstraint {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

impl fmt::Display for ExclusionConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}⊥{}", self.a, self.b)
    }
}

/// Assignment of domains to shifts.
///
/// A combination used for generation covers every shift exactly once.
/// Imported datasets may carry partial combinations that label only some
/// shifts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DomainCombination {
    assignment: BTreeMap<String, String>,
}

impl DomainCombination {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<S, D>(pairs: impl IntoIterator<Item = (S, D)>) -> Self
    where
        S: Into<String>,
        D: Into<String>,
    {
        Self {
            assignment: pairs
                .into_iter()
                .map(|(s, d)| (s.into(), d.into()))
                .collect(),
        }
    }

    pub fn with(mut self, shift: impl Into<String>, domain: impl Into<String>) -> Self {
        self.assignment.insert(shift.into(), domain.into());
        self
    }

    pub fn set(&mut self, shift: impl Into<String>, domain: impl Into<String>) {
        self.assignment.insert(shift.into(), domain.into());
    }

    pub fn remove(&mut self, shift: &str) -> Option<String> {
        self.assignment.remove(shift)
    }

    pub fn get(&self, shift: &str) -> Option<&str> {
        self.assignment.get(shift).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Pairs in shift-name order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.assignment
            .iter()
            .map(|(s, d)| (s.as_str(), d.as_str()))
    }

    pub fn contains(&self, d: &DomainRef) -> bool {
        self.get(&d.shift) == Some(d.domain.as_str())
    }
}

/// Outcome of [`Taxonomy::validate_combination`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Incomplete { missing: Vec<String> },
    Excluded(ExclusionConstraint),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid => f.write_str("valid"),
            Verdict::Incomplete { missing } => {
                write!(f, "incomplete assignment (missing {})", missing.join(", "))
            }
            Verdict::Excluded(c) => write!(f, "violates exclusion {c}"),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaxonomyConfig {
    #[serde(default = "default_format_version")]
    format_version: u32,
    shifts: Vec<ShiftConfig>,
    #[serde(default)]
    exclusions: Vec<[String; 2]>,
    #[serde(default)]
    prompt_order: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShiftConfig {
    name: String,
    #[serde(default = "default_connective")]
    connective: String,
    domains: Vec<DomainConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainConfig {
    name: String,
    #[serde(default)]
    description: String,
}

fn default_format_version() -> u32 {
    TAXONOMY_FORMAT_VERSION
}

fn default_connective() -> String {
    "in".to_string()
}

#[derive(Debug, Clone)]
pub struct Taxonomy {
    shifts: Vec<DomainShift>,
    exclusions: Vec<ExclusionConstraint>,
    // (shift index, domain index) pairs mirroring `exclusions`
    excluded_pairs: Vec<((usize, usize), (usize, usize))>,
    prompt_order: Vec<usize>,
}

impl Taxonomy {
    /// The compiled-in five-shift outdoor taxonomy, with descriptions filled
    /// from the built-in description registry.
    pub fn builtin() -> Self {
        let mut taxonomy =
            Self::from_toml_str(BUILTIN_TAXONOMY).expect("built-in taxonomy is valid");
        let registry = DescriptionRegistry::builtin();
        for shift in &mut taxonomy.shifts {
            for domain in &mut shift.domains {
                if let Some(text) = registry.get(&shift.name, &domain.name) {
                    domain.description = text.to_string();
                }
            }
        }
        taxonomy
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, TaxonomyError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, TaxonomyError> {
        let config: TaxonomyConfig = toml::from_str(text)?;
        Self::from_config(config)
    }

    fn from_config(config: TaxonomyConfig) -> Result<Self, TaxonomyError> {
        if config.format_version != TAXONOMY_FORMAT_VERSION {
            return Err(TaxonomyError::UnsupportedVersion(config.format_version));
        }
        let mut seen_shifts = HashSet::new();
        let mut shifts = Vec::with_capacity(config.shifts.len());
        for shift in config.shifts {
            check_name(&shift.name)?;
            if !seen_shifts.insert(shift.name.clone()) {
                return Err(TaxonomyError::DuplicateShift(shift.name));
            }
            if shift.domains.len() < 2 {
                return Err(TaxonomyError::TooFewDomains(shift.name));
            }
            let mut seen_domains = HashSet::new();
            let mut domains = Vec::with_capacity(shift.domains.len());
            for domain in shift.domains {
                check_name(&domain.name)?;
                if !seen_domains.insert(domain.name.clone()) {
                    return Err(TaxonomyError::DuplicateDomain {
                        shift: shift.name,
                        domain: domain.name,
                    });
                }
                domains.push(Domain {
                    shift_id: shift.name.clone(),
                    name: domain.name,
                    description: domain.description,
                });
            }
            shifts.push(DomainShift {
                name: shift.name,
                connective: shift.connective,
                domains,
            });
        }

        let mut taxonomy = Taxonomy {
            shifts,
            exclusions: Vec::new(),
            excluded_pairs: Vec::new(),
            prompt_order: Vec::new(),
        };

        for [a, b] in config.exclusions {
            let a = DomainRef::parse(&a)?;
            let b = DomainRef::parse(&b)?;
            let ia = taxonomy.resolve(&a)?;
            let ib = taxonomy.resolve(&b)?;
            let constraint = ExclusionConstraint { a, b };
            if ia.0 == ib.0 {
                return Err(TaxonomyError::SameShiftExclusion(constraint.to_string()));
            }
            if !taxonomy.exclusions.contains(&constraint) {
                taxonomy.exclusions.push(constraint);
                taxonomy.excluded_pairs.push((ia, ib));
            }
        }

        let mut order = Vec::with_capacity(taxonomy.shifts.len());
        for name in &config.prompt_order {
            let index = taxonomy
                .shift_index(name)
                .ok_or_else(|| TaxonomyError::UnknownShift(name.clone()))?;
            if order.contains(&index) {
                return Err(TaxonomyError::DuplicatePromptSlot(name.clone()));
            }
            order.push(index);
        }
        for index in 0..taxonomy.shifts.len() {
            if !order.contains(&index) {
                order.push(index);
            }
        }
        taxonomy.prompt_order = order;
        Ok(taxonomy)
    }

    pub fn shifts(&self) -> &[DomainShift] {
        &self.shifts
    }

    pub fn exclusions(&self) -> &[ExclusionConstraint] {
        &self.exclusions
    }

    /// Shifts in prompt slot order.
    pub fn prompt_slots(&self) -> impl Iterator<Item = &DomainShift> {
        self.prompt_order.iter().map(|&i| &self.shifts[i])
    }

    pub fn shift(&self, name: &str) -> Option<&DomainShift> {
        self.shifts.iter().find(|s| s.name == name)
    }

    pub fn shift_index(&self, name: &str) -> Option<usize> {
        self.shifts.iter().position(|s| s.name == name)
    }

    pub fn domain_count(&self) -> usize {
        self.shifts.iter().map(|s| s.domains.len()).sum()
    }

    /// All coarse domains in declaration order.
    pub fn domains(&self) -> impl Iterator<Item = DomainRef> + '_ {
        self.shifts.iter().flat_map(|s| {
            s.domains
                .iter()
                .map(move |d| DomainRef::new(&s.name, &d.name))
        })
    }

    /// Number of full assignments ignoring exclusions.
    pub fn unconstrained_count(&self) -> usize {
        self.shifts.iter().map(|s| s.domains.len()).product()
    }

    /// Returns a copy of this taxonomy with every exclusion dropped.
    pub fn without_exclusions(&self) -> Self {
        Self {
            exclusions: Vec::new(),
            excluded_pairs: Vec::new(),
            ..self.clone()
        }
    }

    pub fn resolve(&self, d: &DomainRef) -> Result<(usize, usize), TaxonomyError> {
        let si = self
            .shift_index(&d.shift)
            .ok_or_else(|| TaxonomyError::UnknownShift(d.shift.clone()))?;
        let di = self.shifts[si]
            .domain_index(&d.domain)
            .ok_or_else(|| TaxonomyError::UnknownDomain {
                shift: d.shift.clone(),
                domain: d.domain.clone(),
            })?;
        Ok((si, di))
    }

    /// Checks that every label in `c` names a known shift and domain.
    /// Partial assignments are accepted.
    pub fn check_labels(&self, c: &DomainCombination) -> Result<(), TaxonomyError> {
        for (shift, domain) in c.iter() {
            self.resolve(&DomainRef::new(shift, domain))?;
        }
        Ok(())
    }

    /// Every full assignment that violates no exclusion, in lexicographic
    /// order of (shift declaration order, domain declaration order).
    pub fn enumerate_combinations(&self) -> Vec<DomainCombination> {
        self.enumerate_indices()
            .into_iter()
            .map(|idx| self.combination_from_indices(&idx))
            .collect()
    }

    /// Index form of [`Self::enumerate_combinations`]: `idx[s]` is the
    /// domain index chosen for shift `s`.
    pub fn enumerate_indices(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        if self.shifts.is_empty() {
            return out;
        }
        let mut idx = vec![0usize; self.shifts.len()];
        loop {
            if !self.indices_excluded(&idx) {
                out.push(idx.clone());
            }
            // odometer, last shift fastest
            let mut pos = self.shifts.len();
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < self.shifts[pos].domains.len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }

    fn indices_excluded(&self, idx: &[usize]) -> bool {
        self.excluded_pairs
            .iter()
            .any(|&((sa, da), (sb, db))| idx[sa] == da && idx[sb] == db)
    }

    pub fn combination_from_indices(&self, idx: &[usize]) -> DomainCombination {
        DomainCombination::from_pairs(
            self.shifts
                .iter()
                .zip(idx)
                .map(|(s, &d)| (s.name.clone(), s.domains[d].name.clone())),
        )
    }

    pub fn validate_combination(&self, c: &DomainCombination) -> Result<Verdict, TaxonomyError> {
        self.check_labels(c)?;
        let missing: Vec<String> = self
            .shifts
            .iter()
            .filter(|s| c.get(&s.name).is_none())
            .map(|s| s.name.clone())
            .collect();
        if !missing.is_empty() {
            return Ok(Verdict::Incomplete { missing });
        }
        for constraint in &self.exclusions {
            if c.contains(&constraint.a) && c.contains(&constraint.b) {
                return Ok(Verdict::Excluded(constraint.clone()));
            }
        }
        Ok(Verdict::Valid)
    }

    /// The coarse domains under which samples of `c` are counted, one per
    /// shift in declaration order.
    pub fn coarse_domain_membership(
        &self,
        c: &DomainCombination,
    ) -> Result<Vec<DomainRef>, TaxonomyError> {
        match self.validate_combination(c)? {
            Verdict::Valid => Ok(self.labeled_domains(c)),
            verdict => Err(TaxonomyError::InvalidCombination(verdict)),
        }
    }

    /// Labeled domains of a possibly partial combination, in shift
    /// declaration order. Unknown labels are skipped.
    pub fn labeled_domains(&self, c: &DomainCombination) -> Vec<DomainRef> {
        self.shifts
            .iter()
            .filter_map(|s| c.get(&s.name).map(|d| DomainRef::new(&s.name, d)))
            .collect()
    }

    /// Filesystem-safe name for a combination: domains in shift declaration
    /// order joined by `_`, spaces replaced by `-`.
    pub fn slug(&self, c: &DomainCombination) -> String {
        self.labeled_domains(c)
            .iter()
            .map(|d| d.domain.replace(' ', "-"))
            .collect::<Vec<_>>()
            .join("_")
    }

    /// SHA-256 over shift names, domain names, and exclusions. Descriptions
    /// and prompt layout are not part of the label space and are left out.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for shift in &self.shifts {
            hasher.update(b"shift\0");
            hasher.update(shift.name.as_bytes());
            for domain in &shift.domains {
                hasher.update(b"\0domain\0");
                hasher.update(domain.name.as_bytes());
            }
            hasher.update(b"\n");
        }
        let mut exclusions: Vec<String> = self
            .exclusions
            .iter()
            .map(|c| {
                let (a, b) = c.canonical();
                format!("{a}|{b}")
            })
            .collect();
        exclusions.sort();
        for e in exclusions {
            hasher.update(b"exclude\0");
            hasher.update(e.as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }
}

impl Default for Taxonomy {
    fn default() -> Self {
        Self::builtin()
    }
}

fn check_name(name: &str) -> Result<(), TaxonomyError> {
    let ok = !name.trim().is_empty()
        && !name.contains(['.', '/', '\\'])
        && name.chars().all(|c| !c.is_uppercase());
    if ok {
        Ok(())
    } else {
        Err(TaxonomyError::InvalidName(name.to_string()))
    }
}
