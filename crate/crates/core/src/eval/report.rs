//! Evaluation reports, their aggregation, and report comparison.
//!
//! Coarse-domain accuracy is sample-weighted: the correct counts of every
//! combination labeling the domain, over their summed totals. The
//! equal-weight mean over domains is reported alongside.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::prompt::PromptMode;
use crate::taxonomy::{DomainCombination, Taxonomy};

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("reports were computed on different manifests ({a} vs {b})")]
    ManifestMismatch { a: String, b: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("unsupported report format_version {0}")]
    UnsupportedVersion(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Tally {
    pub correct: u64,
    pub total: u64,
}

impl Tally {
    pub fn record(&mut self, correct: bool) {
        self.total += 1;
        self.correct += correct as u64;
    }

    pub fn merge(&mut self, other: Tally) {
        self.correct += other.correct;
        self.total += other.total;
    }

    pub fn accuracy(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct as f64 / self.total as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationRow {
    pub slug: String,
    pub combination: DomainCombination,
    #[serde(flatten)]
    pub tally: Tally,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainRow {
    pub shift: String,
    pub domain: String,
    #[serde(flatten)]
    pub tally: Tally,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub class: String,
    #[serde(flatten)]
    pub tally: Tally,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub backend: String,
    pub model_id: String,
    pub embedding_dim: usize,
    pub mode: PromptMode,
    pub adapted: bool,
    pub taxonomy_hash: String,
    pub manifest_hash: String,
    pub text_cache: bool,
    /// Number of prompt texts sent to the backend.
    pub text_encodings: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopK {
    pub k: usize,
    pub correct: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub format_version: u32,
    pub metadata: ReportMetadata,
    pub per_combination: Vec<CombinationRow>,
    pub per_domain: Vec<DomainRow>,
    pub per_class: Vec<ClassRow>,
    pub overall: Tally,
    pub overall_accuracy: Option<f64>,
    /// Unweighted mean over domains with at least one sample.
    pub domain_mean_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_k: Option<TopK>,
}

impl EvalReport {
    /// Derives coarse-domain and overall figures from per-combination tallies.
    pub fn build(
        taxonomy: &Taxonomy,
        metadata: ReportMetadata,
        combinations: impl IntoIterator<Item = (DomainCombination, Tally)>,
        per_class: Vec<ClassRow>,
        top_k: Option<TopK>,
    ) -> Self {
        let mut by_slug: BTreeMap<String, CombinationRow> = BTreeMap::new();
        for (combination, tally) in combinations {
            let slug = taxonomy.slug(&combination);
            by_slug
                .entry(slug.clone())
                .or_insert_with(|| CombinationRow {
                    slug,
                    combination,
                    tally: Tally::default(),
                })
                .tally
                .merge(tally);
        }
        let per_combination: Vec<CombinationRow> = by_slug.into_values().collect();

        let mut domain_tallies: BTreeMap<(usize, usize), Tally> = BTreeMap::new();
        let mut overall = Tally::default();
        for row in &per_combination {
            overall.merge(row.tally);
            for d in taxonomy.labeled_domains(&row.combination) {
                if let Ok(key) = taxonomy.resolve(&d) {
                    domain_tallies.entry(key).or_default().merge(row.tally);
                }
            }
        }
        let per_domain: Vec<DomainRow> = taxonomy
            .shifts()
            .iter()
            .enumerate()
            .flat_map(|(si, s)| {
                let tallies = &domain_tallies;
                s.domains.iter().enumerate().map(move |(di, d)| {
                    let tally = tallies.get(&(si, di)).copied().unwrap_or_default();
                    DomainRow {
                        shift: s.name.clone(),
                        domain: d.name.clone(),
                        tally,
                        accuracy: tally.accuracy(),
                    }
                })
            })
            .collect();
        let present: Vec<f64> = per_domain.iter().filter_map(|d| d.accuracy).collect();
        let domain_mean_accuracy = (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64);
        Self {
            format_version: REPORT_FORMAT_VERSION,
            metadata,
            per_combination,
            per_domain,
            per_class,
            overall,
            overall_accuracy: overall.accuracy(),
            domain_mean_accuracy,
            top_k,
        }
    }

    pub fn domain(&self, shift: &str, domain: &str) -> Option<&DomainRow> {
        self.per_domain.iter().find(|d| d.shift == shift && d.domain == domain)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ReportError> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("report serializes");
        std::fs::write(path, text + "\n").map_err(|source| ReportError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ReportError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ReportError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let r: Self = serde_json::from_str(&text).map_err(|source| ReportError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        if r.format_version != REPORT_FORMAT_VERSION {
            return Err(ReportError::UnsupportedVersion(r.format_version));
        }
        Ok(r)
    }

    /// Aligned shift / domain / accuracy table.
    pub fn to_table(&self) -> String {
        let m = &self.metadata;
        let mut out = String::new();
        let _ = writeln!(out, "model {}  backend {}  mode {}{}", m.model_id, m.backend, m.mode, if m.adapted { " (adapted)" } else { "" });
        let _ = writeln!(out, "{:<12} {:<22} {:>9} {:>8}", "shift", "domain", "accuracy", "n");
        let mut last = "";
        for d in &self.per_domain {
            let shift = if d.shift == last { "" } else { d.shift.as_str() };
            last = &d.shift;
            let _ = writeln!(out, "{:<12} {:<22} {:>9} {:>8}", shift, d.domain, pct(d.accuracy), d.tally.total);
        }
        let _ = writeln!(out, "{:<35} {:>9} {:>8}", "overall (sample-weighted)", pct(self.overall_accuracy), self.overall.total);
        let _ = writeln!(out, "{:<35} {:>9}", "domain mean (equal weight)", pct(self.domain_mean_accuracy));
        if let Some(t) = &self.top_k {
            let acc = (self.overall.total > 0).then(|| t.correct as f64 / self.overall.total as f64);
            let _ = writeln!(out, "{:<35} {:>9}", format!("top-{}", t.k), pct(acc));
        }
        out
    }
}

fn pct(x: Option<f64>) -> String {
    x.map(|v| format!("{:.2}", v * 100.0)).unwrap_or_else(|| "-".into())
}

fn signed_pct(x: Option<f64>) -> String {
    x.map(|v| format!("{:+.2}", v * 100.0)).unwrap_or_else(|| "-".into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// `b − a`.
    pub delta: Option<f64>,
}

impl Delta {
    fn new(a: Option<f64>, b: Option<f64>) -> Self {
        Self {
            a,
            b,
            delta: a.zip(b).map(|(a, b)| b - a),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainDelta {
    pub shift: String,
    pub domain: String,
    #[serde(flatten)]
    pub delta: Delta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub manifest_hash: String,
    pub a: String,
    pub b: String,
    pub per_domain: Vec<DomainDelta>,
    /// Overall accuracy, i.e. sample-weighted.
    pub weighted_average: Delta,
    /// Mean over coarse domains, each weighted equally.
    pub equal_average: Delta,
}

fn label(r: &EvalReport) -> String {
    format!(
        "{}/{}{}",
        r.metadata.model_id,
        r.metadata.mode,
        if r.metadata.adapted { "-adapted" } else { "" }
    )
}

pub fn compare_reports(a: &EvalReport, b: &EvalReport) -> Result<Comparison, ReportError> {
    if a.metadata.manifest_hash != b.metadata.manifest_hash {
        return Err(ReportError::ManifestMismatch {
            a: a.metadata.manifest_hash.clone(),
            b: b.metadata.manifest_hash.clone(),
        });
    }
    let mut per_domain: Vec<DomainDelta> = a
        .per_domain
        .iter()
        .map(|d| DomainDelta {
            shift: d.shift.clone(),
            domain: d.domain.clone(),
            delta: Delta::new(d.accuracy, b.domain(&d.shift, &d.domain).and_then(|x| x.accuracy)),
        })
        .collect();
    for d in &b.per_domain {
        if a.domain(&d.shift, &d.domain).is_none() {
            per_domain.push(DomainDelta {
                shift: d.shift.clone(),
                domain: d.domain.clone(),
                delta: Delta::new(None, d.accuracy),
            });
        }
    }
    Ok(Comparison {
        manifest_hash: a.metadata.manifest_hash.clone(),
        a: label(a),
        b: label(b),
        per_domain,
        weighted_average: Delta::new(a.overall_accuracy, b.overall_accuracy),
        equal_average: Delta::new(a.domain_mean_accuracy, b.domain_mean_accuracy),
    })
}

impl Comparison {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "A = {}   B = {}", self.a, self.b);
        let _ = writeln!(out, "{:<12} {:<22} {:>8} {:>8} {:>8}", "shift", "domain", "A", "B", "B-A");
        let mut last = "";
        for d in &self.per_domain {
            let shift = if d.shift == last { "" } else { d.shift.as_str() };
            last = &d.shift;
            let x = &d.delta;
            let _ = writeln!(out, "{:<12} {:<22} {:>8} {:>8} {:>8}", shift, d.domain, pct(x.a), pct(x.b), signed_pct(x.delta));
        }
        for (name, x) in [("average (sample-weighted)", &self.weighted_average), ("average (equal weight)", &self.equal_average)] {
            let _ = writeln!(out, "{:<35} {:>8} {:>8} {:>8}", name, pct(x.a), pct(x.b), signed_pct(x.delta));
        }
        out
    }
}
