use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use shiftbench::eval::backend::{BackendSpec, MockBackend, MockMode};
use shiftbench::eval::harness::{evaluate, EvalOptions};
use shiftbench::eval::mock_server;
use shiftbench::eval::protocol::AdaptConfig;
use shiftbench::eval::report::{compare_reports, EvalReport};
use shiftbench::import::{import_external, ImportMapping};
use shiftbench::manifest::{read_manifest, write_manifest};
use shiftbench::prompt::{DescriptionRegistry, PromptMode};
use shiftbench::scene::generate::{generate_dataset, GenerationPlan, FAILURES_FILE_NAME};
use shiftbench::scene::registry::CategoryRegistry;
use shiftbench::scene::sample::SceneOptions;
use shiftbench::taxonomy::{DomainCombination, Taxonomy};

#[derive(Parser)]
#[command(name = "shiftbench", version, about = "Domain-shift benchmark generator and zero-shot evaluation harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect, enumerate or validate a taxonomy
    Taxonomy {
        #[command(subcommand)]
        action: TaxonomyAction,
    },
    /// Render a dataset covering every valid combination
    Generate(GenerateArgs),
    /// Build a manifest from an existing folder layout
    Import(ImportArgs),
    /// Classify every manifest sample and write an accuracy report
    Evaluate(EvaluateArgs),
    /// Per-domain accuracy deltas between two reports (B minus A)
    Compare(CompareArgs),
    /// Print a saved report as a table
    Report {
        report: PathBuf,
    },
    /// Serve deterministic mock embeddings over the stdio protocol
    MockBackend {
        #[arg(long, value_enum, default_value = "oracle")]
        mode: MockModeArg,
        /// Class names, comma-separated; oracle vectors become basis vectors
        #[arg(long, value_delimiter = ',')]
        classes: Vec<String>,
    },
}

#[derive(Args)]
struct TaxonomyArg {
    /// Taxonomy file; the built-in default when omitted
    #[arg(long, global = true)]
    taxonomy: Option<PathBuf>,
}

impl TaxonomyArg {
    fn load(&self) -> Result<Taxonomy> {
        match &self.taxonomy {
            Some(p) => Taxonomy::from_path(p).with_context(|| format!("loading taxonomy {}", p.display())),
            None => Ok(Taxonomy::builtin()),
        }
    }
}

#[derive(Subcommand)]
enum TaxonomyAction {
    /// Shifts, domains, exclusions and counts
    Show {
        #[command(flatten)]
        taxonomy: TaxonomyArg,
    },
    /// Print the number of valid combinations, then one per line
    Enumerate {
        #[command(flatten)]
        taxonomy: TaxonomyArg,
        #[arg(long, value_enum, default_value = "text")]
        format: ListFormat,
    },
    /// Check one combination, e.g. `weathers=snowy,seasons=winter,...`
    Validate {
        #[command(flatten)]
        taxonomy: TaxonomyArg,
        combination: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ListFormat {
    Text,
    Jsonl,
}

#[derive(Clone, Copy, ValueEnum)]
enum MockModeArg {
    Oracle,
    Constant,
    Noise,
}

impl From<MockModeArg> for MockMode {
    fn from(m: MockModeArg) -> Self {
        match m {
            MockModeArg::Oracle => MockMode::Oracle,
            MockModeArg::Constant => MockMode::Constant,
            MockModeArg::Noise => MockMode::Noise,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    taxonomy: TaxonomyArg,
    /// Output directory
    #[arg(long, default_value = "dataset")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    per_combination: usize,
    /// Comma-separated categories; all registered categories when omitted
    #[arg(long, value_delimiter = ',')]
    categories: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Square image side in pixels
    #[arg(long, default_value_t = 512)]
    resolution: u32,
    /// Camera jitter bound per axis, degrees
    #[arg(long, default_value_t = 5.0)]
    jitter: f32,
    /// Occluder placements tried before a sample fails
    #[arg(long, default_value_t = 64)]
    attempts: usize,
    /// Extra meshes as <dir>/<category>/*.mesh
    #[arg(long)]
    mesh_dir: Option<PathBuf>,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct ImportArgs {
    #[command(flatten)]
    taxonomy: TaxonomyArg,
    /// Mapping file (TOML)
    #[arg(long)]
    mapping: PathBuf,
    /// Manifest to write
    #[arg(long, default_value = "manifest.jsonl")]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    taxonomy: TaxonomyArg,
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value = "domain")]
    mode: PromptMode,
    /// mock:oracle, mock:constant, mock:noise or stdio:<command>
    #[arg(long, env = "SHIFTBENCH_BACKEND", default_value = "mock:oracle")]
    backend: String,
    /// Extra domain descriptions (TOML), overriding built-in ones
    #[arg(long)]
    descriptions: Option<PathBuf>,
    /// Report file (JSON)
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    /// Per-sample predictions (JSON lines)
    #[arg(long)]
    predictions: Option<PathBuf>,
    #[arg(long)]
    no_text_cache: bool,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    #[arg(long, default_value_t = 1)]
    top_k: usize,
    /// Test-time prompt adaptation (backend must support it)
    #[arg(long)]
    adapt: bool,
    #[arg(long, default_value_t = 64)]
    adapt_views: usize,
    #[arg(long, default_value_t = 1)]
    adapt_steps: usize,
    #[arg(long, default_value_t = 5e-3)]
    adapt_step_size: f64,
    #[arg(long, default_value_t = 0.1)]
    adapt_confidence: f64,
    /// Seed for adaptation augmentations
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
    /// Also write the comparison as JSON
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Taxonomy { action } => taxonomy_cmd(action),
        Command::Generate(a) => generate_cmd(a),
        Command::Import(a) => import_cmd(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Compare(a) => {
            let ra = EvalReport::load(&a.a)?;
            let rb = EvalReport::load(&a.b)?;
            let c = compare_reports(&ra, &rb)?;
            print!("{}", c.to_table());
            if let Some(out) = a.out {
                std::fs::write(&out, serde_json::to_string_pretty(&c)? + "\n")
                    .with_context(|| format!("writing {}", out.display()))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { report } => {
            print!("{}", EvalReport::load(&report)?.to_table());
            Ok(ExitCode::SUCCESS)
        }
        Command::MockBackend { mode, classes } => {
            let mut backend = MockBackend::new(mode.into(), classes);
            let stdin = io::stdin().lock();
            mock_server::serve(&mut backend, stdin, io::stdout().lock())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn parse_combination(text: &str) -> Result<DomainCombination> {
    let mut c = DomainCombination::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let Some((shift, domain)) = part.split_once('=') else {
            bail!("expected shift=domain, got `{part}`");
        };
        c.set(shift.trim(), domain.trim());
    }
    Ok(c)
}

fn taxonomy_cmd(action: TaxonomyAction) -> Result<ExitCode> {
    let out = io::stdout();
    let mut out = BufWriter::new(out.lock());
    match action {
        TaxonomyAction::Show { taxonomy } => {
            let t = taxonomy.load()?;
            for s in t.shifts() {
                let names: Vec<&str> = s.domains.iter().map(|d| d.name.as_str()).collect();
                writeln!(out, "{} ({}): {}", s.name, s.connective, names.join(", "))?;
            }
            for e in t.exclusions() {
                writeln!(out, "exclusion: {e}")?;
            }
            let valid = t.enumerate_indices().len();
            writeln!(out, "shifts: {}", t.shifts().len())?;
            writeln!(out, "coarse domains: {}", t.domain_count())?;
            writeln!(out, "unconstrained assignments: {}", t.unconstrained_count())?;
            writeln!(out, "valid combinations: {valid}")?;
            writeln!(out, "excluded assignments: {}", t.unconstrained_count() - valid)?;
            writeln!(out, "hash: {}", t.content_hash())?;
        }
        TaxonomyAction::Enumerate { taxonomy, format } => {
            let t = taxonomy.load()?;
            let all = t.enumerate_combinations();
            match format {
                ListFormat::Text => {
                    writeln!(out, "{}", all.len())?;
                    for c in &all {
                        let names: Vec<&str> = t.shifts().iter().filter_map(|s| c.get(&s.name)).collect();
                        writeln!(out, "{}", names.join(" | "))?;
                    }
                }
                ListFormat::Jsonl => {
                    for c in &all {
                        writeln!(out, "{}", serde_json::to_string(c)?)?;
                    }
                }
            }
        }
        TaxonomyAction::Validate { taxonomy, combination } => {
            let t = taxonomy.load()?;
            let verdict = t.validate_combination(&parse_combination(&combination)?)?;
            writeln!(out, "{verdict}")?;
            out.flush()?;
            return Ok(if verdict.is_valid() { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn generate_cmd(a: GenerateArgs) -> Result<ExitCode> {
    let taxonomy = a.taxonomy.load()?;
    let mut registry = CategoryRegistry::builtin();
    if let Some(dir) = &a.mesh_dir {
        registry = registry.with_mesh_dir(dir)?;
    }
    let categories = if a.categories.is_empty() {
        registry.names().map(String::from).collect()
    } else {
        a.categories
    };
    if a.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(a.threads)
            .build_global()
            .context("configuring worker threads")?;
    }
    let plan = GenerationPlan {
        samples_per_combination: a.per_combination,
        categories,
        seed: a.seed,
        options: SceneOptions {
            width: a.resolution,
            height: a.resolution,
            jitter_deg: a.jitter,
            occluder_attempts: a.attempts,
            ..SceneOptions::default()
        },
    };
    let summary = generate_dataset(&taxonomy, &registry, &plan, &a.out)?;
    println!(
        "{} records written to {}",
        summary.records.len(),
        summary.manifest_path.display()
    );
    if !summary.failures.is_empty() {
        println!(
            "{} samples failed; see {}",
            summary.failures.len(),
            a.out.join(FAILURES_FILE_NAME).display()
        );
    }
    Ok(ExitCode::SUCCESS)
}

/// `target` expressed relative to `base` when it lies inside it.
fn relative_to(target: &Path, base: &Path) -> String {
    let t = target.canonicalize().unwrap_or_else(|_| target.to_path_buf());
    let b = base.canonicalize().unwrap_or_else(|_| base.to_path_buf());
    match t.strip_prefix(&b) {
        Ok(rel) if rel.as_os_str().is_empty() => ".".into(),
        Ok(rel) => rel.to_string_lossy().into_owned(),
        Err(_) => t.to_string_lossy().into_owned(),
    }
}

fn import_cmd(a: ImportArgs) -> Result<ExitCode> {
    let taxonomy = a.taxonomy.load()?;
    let mapping = ImportMapping::from_path(&a.mapping)?;
    let outcome = import_external(&mapping, &taxonomy)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let mut manifest = outcome.manifest;
    let out_dir = match a.out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    manifest.header.root = relative_to(&mapping.root, &out_dir);
    write_manifest(&a.out, &manifest)?;
    println!("{} records written to {}", manifest.records.len(), a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<ExitCode> {
    let taxonomy = a.taxonomy.load()?;
    let mut descriptions = DescriptionRegistry::from_taxonomy(&taxonomy);
    if let Some(p) = &a.descriptions {
        descriptions = descriptions.merged(DescriptionRegistry::from_path(p)?);
    }
    let manifest = read_manifest(&a.manifest)?;
    let spec: BackendSpec = a.backend.parse()?;
    let mut backend = spec.connect(&manifest.header.classes)?;
    let options = EvalOptions {
        mode: a.mode,
        text_cache: !a.no_text_cache,
        batch_size: a.batch_size,
        top_k: a.top_k,
        adapt: a.adapt.then(|| AdaptConfig {
            n_views: a.adapt_views,
            steps: a.adapt_steps,
            step_size: a.adapt_step_size,
            confidence_fraction: a.adapt_confidence,
            seed: a.seed,
            ..AdaptConfig::default()
        }),
    };
    let mut evaluation = evaluate(&manifest, &a.manifest, &taxonomy, &descriptions, backend.as_mut(), &options)?;
    evaluation.report.metadata.backend = spec.id();
    evaluation.report.save(&a.out)?;
    if let Some(p) = &a.predictions {
        let mut w = BufWriter::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?);
        for r in &evaluation.results {
            writeln!(w, "{}", serde_json::to_string(r)?)?;
        }
        w.flush()?;
    }
    print!("{}", evaluation.report.to_table());
    Ok(ExitCode::SUCCESS)
}
