//! The `hatesynth` command line.
//!
//! Every subcommand reads its inputs from files, writes its outputs to files
//! and prints a one-line JSON summary on stdout. Failures print
//! `{"error": {"kind", "message", "details"}}` on stderr and exit with 2
//! (configuration), 3 (backend) or 4 (data).
//!
//! Settings come from built-in defaults, then `--config <file.toml>`, then
//! flags.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::backends::http::{HttpGenerator, HttpNer, HttpTranslator};
use crate::backends::mock::{MockGenerator, MockNer, MockTranslator};
use crate::backends::{
    apply_to_masked, mt_posts, translate_batch, BackendError, BatchOptions, GenerationBackend, NerBackend,
    TranslateError, TranslatedText, TranslationBackend,
};
use crate::ces::{self, MaskError, MaskedFileError, NerFallback, SubstituteError};
use crate::classifier::{self, ClassifierError, EvalReport, Model};
use crate::config::{ConfigError, GeneratorConfig, MockGenerationMode, NerConfig, PipelineConfig, TranslatorConfig};
use crate::corpus::{self, CorpusError, Dataset};
use crate::entity_table::{self, EntityTable, MaskCategory, TableError};
use crate::experiment::{self, ExperimentError, Pool, Pools, Schedule};
use crate::lm_gen::{self, LmGenError};

#[derive(Debug, Parser)]
#[command(name = "hatesynth", version, about = "Synthetic hate-speech training data for limited-data languages")]
pub struct Cli {
    /// TOML pipeline configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides every rng_seed in the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides paths.output_root.
    #[arg(long, global = true)]
    pub output_root: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct InOut {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean posts and drop those with two or fewer tokens.
    Preprocess {
        #[command(flatten)]
        io: InOut,
        /// Reject posts whose lang differs.
        #[arg(long)]
        lang: Option<String>,
    },
    /// Inspect entity tables.
    #[command(subcommand)]
    Table(TableCommand),
    /// Replace entity-table surfaces with mask tokens.
    Mask {
        #[command(flatten)]
        io: InOut,
        /// Language code or CSV path; defaults to the posts' language.
        #[arg(long)]
        table: Option<String>,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Translate posts, or masked posts with `--masked`.
    Translate {
        #[command(flatten)]
        io: InOut,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        masked: bool,
        /// Writes one mask audit per post as JSON-Lines.
        #[arg(long)]
        audit: Option<PathBuf>,
    },
    /// Fill masks of translated masked posts from the target table.
    Substitute {
        #[command(flatten)]
        io: InOut,
        /// Language code or CSV path; defaults to the posts' language.
        #[arg(long)]
        table: Option<String>,
        /// Variants per masked post.
        #[arg(long)]
        variants: Option<u32>,
    },
    /// Few-shot generation from the hateful posts of a corpus.
    Generate {
        #[command(flatten)]
        io: InOut,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        target_group: Option<String>,
    },
    /// Write the augmentation schedule.
    Schedule {
        /// Defaults to <output_root>/runs/<schedule-id>/schedule.json.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        id: Option<String>,
        #[arg(long)]
        max_total_hateful: Option<usize>,
        #[arg(long)]
        step: Option<usize>,
        #[arg(long)]
        baseline: Option<usize>,
    },
    /// Write train sets and manifests for the arms of a schedule.
    Materialize {
        #[arg(long)]
        schedule: PathBuf,
        /// Only this arm.
        #[arg(long)]
        arm: Option<String>,
        /// Corpus holding the non-hateful pool (and the original hateful
        /// pool unless --original-hateful is given).
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        original_hateful: Option<PathBuf>,
        #[arg(long)]
        mt: Option<PathBuf>,
        #[arg(long)]
        ces: Option<PathBuf>,
        #[arg(long)]
        lm: Option<PathBuf>,
        /// Manifest timestamp; defaults to SOURCE_DATE_EPOCH or the epoch.
        #[arg(long)]
        timestamp: Option<String>,
    },
    /// Train one classifier.
    Train {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Train `training.runs` classifiers and report macro F1 on a test set.
    Eval {
        #[arg(long)]
        test: PathBuf,
        #[arg(long, conflicts_with = "schedule", required_unless_present = "schedule")]
        train: Option<PathBuf>,
        /// Evaluates every materialized arm, writing eval.json beside each manifest.
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[arg(long, conflicts_with = "schedule")]
        output: Option<PathBuf>,
    },
    /// Rank the words driving a model's predictions.
    Attribute {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Language code or CSV path; defaults to the test posts' language.
        #[arg(long)]
        table: Option<String>,
        #[arg(long, default_value_t = 20)]
        k: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Aggregate per-arm evaluations into one CSV.
    Report {
        #[arg(long)]
        schedule: PathBuf,
        /// Defaults to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum TableCommand {
    /// Check that a target table can fill every category masked by a source table.
    Validate {
        /// Language code or CSV path.
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
    },
    /// Entries per category.
    Stats {
        #[arg(long, required_unless_present = "table")]
        lang: Option<String>,
        #[arg(long, conflicts_with = "lang")]
        table: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Backend,
    Data,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Backend => 3,
            ErrorKind::Data => 4,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Config => "config",
            ErrorKind::Backend => "backend",
            ErrorKind::Data => "data",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
    pub details: Vec<String>,
}

impl CliError {
    fn new(kind: ErrorKind, message: impl ToString) -> Self {
        CliError { kind, message: message.to_string(), details: Vec::new() }
    }

    fn data(message: impl ToString) -> Self {
        CliError::new(ErrorKind::Data, message)
    }

    pub fn to_json(&self) -> String {
        json!({"error": {"kind": self.kind.as_str(), "message": self.message, "details": self.details}}).to_string()
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError { kind: ErrorKind::Config, message: "invalid configuration".into(), details: e.violations }
    }
}

impl From<BackendError> for CliError {
    fn from(e: BackendError) -> Self {
        CliError::new(ErrorKind::Backend, e)
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::data(e)
    }
}

impl From<TableError> for CliError {
    fn from(e: TableError) -> Self {
        CliError::data(e)
    }
}

impl From<MaskedFileError> for CliError {
    fn from(e: MaskedFileError) -> Self {
        CliError::data(e)
    }
}

impl From<SubstituteError> for CliError {
    fn from(e: SubstituteError) -> Self {
        match e {
            SubstituteError::ZeroVariants => CliError::new(ErrorKind::Config, e),
            other => CliError::data(other),
        }
    }
}

impl From<MaskError> for CliError {
    fn from(e: MaskError) -> Self {
        match e {
            MaskError::MissingNer => CliError::new(ErrorKind::Config, e),
            other => CliError::new(ErrorKind::Backend, other),
        }
    }
}

impl From<TranslateError> for CliError {
    fn from(e: TranslateError) -> Self {
        match e {
            TranslateError::InvalidBatchSize => CliError::new(ErrorKind::Config, e),
            other => CliError::new(ErrorKind::Backend, other),
        }
    }
}

impl From<LmGenError> for CliError {
    fn from(e: LmGenError) -> Self {
        match e {
            LmGenError::Backend { .. } => CliError::new(ErrorKind::Backend, e),
            LmGenError::ZeroShots | LmGenError::NothingRequested => CliError::new(ErrorKind::Config, e),
            other => CliError::data(other),
        }
    }
}

impl From<ClassifierError> for CliError {
    fn from(e: ClassifierError) -> Self {
        match e {
            ClassifierError::Config(_) => CliError::new(ErrorKind::Config, e),
            other => CliError::data(other),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::InvalidSchedule(problems) => CliError {
                kind: ErrorKind::Config,
                message: "invalid schedule".into(),
                details: problems,
            },
            other => CliError::data(other),
        }
    }
}

/// Entry point for the binary: parses `std::env::args` and returns the exit code.
pub fn main() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}

/// Runs one invocation with explicit output streams.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
            } else {
                let _ = write!(stdout, "{rendered}");
            }
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(summary) => {
            let _ = writeln!(stdout, "{summary}");
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.to_json());
            e.kind.exit_code()
        }
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.set_seed(seed);
    }
    if let Some(root) = &cli.output_root {
        config.paths.output_root = root.clone();
    }
    Ok(config)
}

/// Runs a parsed command and returns its stdout summary.
pub fn execute(cli: Cli) -> Result<String, CliError> {
    let mut config = load_config(&cli)?;
    // Flag overrides are applied before validation so that a flag can
    // repair a bad file value.
    match &cli.command {
        Command::Mask { threshold: Some(t), .. } => config.masking.threshold = *t,
        Command::Substitute { variants: Some(v), .. } => config.substitution.replacement_seed = *v,
        Command::Generate { target_group: Some(g), .. } => config.generation.target_group = Some(g.clone()),
        Command::Schedule { id, max_total_hateful, step, baseline, .. } => {
            if let Some(id) = id {
                config.schedule.id = id.clone();
            }
            if let Some(v) = max_total_hateful {
                config.schedule.max_total_hateful = *v;
            }
            if let Some(v) = step {
                config.schedule.step = *v;
            }
            if let Some(v) = baseline {
                config.schedule.baseline_original = *v;
            }
        }
        _ => {}
    }
    config.validate()?;

    match cli.command {
        Command::Preprocess { io, lang } => {
            let dataset = corpus::load_corpus(&io.input, lang.as_deref())?;
            let cleaned = corpus::preprocess_dataset(&dataset);
            corpus::save_corpus(&cleaned, &io.output)?;
            Ok(json!({"command": "preprocess", "read": dataset.len(), "kept": cleaned.len()}).to_string())
        }
        Command::Table(TableCommand::Stats { lang, table }) => {
            let table = match (table, lang) {
                (Some(path), _) => entity_table::load_entity_table(path)?,
                (None, Some(lang)) => resolve_table(&config, &lang)?,
                (None, None) => unreachable!("clap requires --lang or --table"),
            };
            let stats = entity_table::table_stats(&table);
            let order = [MaskCategory::HT, MaskCategory::G, MaskCategory::I, MaskCategory::CT, MaskCategory::P, MaskCategory::NT];
            Ok(order.iter().map(|c| format!("{c}={}", stats[c])).collect::<Vec<_>>().join(","))
        }
        Command::Table(TableCommand::Validate { source, target }) => {
            let source = resolve_table(&config, &source)?;
            let target = resolve_table(&config, &target)?;
            let report = entity_table::validate_pair(&source, &target);
            for warning in &report.warnings {
                log::warn!("{warning}");
            }
            if report.is_ok() {
                Ok(json!({"command": "table validate", "errors": [], "warnings": report.warnings}).to_string())
            } else {
                Err(CliError { kind: ErrorKind::Data, message: "entity tables do not pair".into(), details: report.errors })
            }
        }
        Command::Mask { io, table, .. } => {
            let dataset = corpus::load_corpus(&io.input, None)?;
            let table = table_for(&config, table.as_deref(), &dataset)?;
            let ner = match config.masking.ner_fallback {
                NerFallback::External => Some(ner_backend(&config)?),
                NerFallback::Off => None,
            };
            let masked = ces::mask_posts(&dataset.posts, &table, &config.masking, ner.as_deref())?;
            ces::save_masked(&masked, &io.output)?;
            let spans: usize = masked.iter().map(|m| m.spans.len()).sum();
            Ok(json!({"command": "mask", "posts": masked.len(), "spans": spans}).to_string())
        }
        Command::Translate { io, from, to, masked, audit } => {
            let backend = translation_backend(&config);
            let options = BatchOptions {
                batch_size: config.translation.batch_size,
                concurrency: config.translation.concurrency,
                retry: config.translation.retry,
            };
            let (translated, kept) = if masked {
                let posts = ces::load_masked(&io.input)?;
                let translated = translate_batch(&posts, backend.as_ref(), &from, &to, &options)?;
                let out = apply_to_masked(&posts, &translated, &to);
                ces::save_masked(&out, &io.output)?;
                (translated, out.len())
            } else {
                let dataset = corpus::load_corpus(&io.input, Some(&from))?;
                let translated = translate_batch(&dataset.posts, backend.as_ref(), &from, &to, &options)?;
                let out = Dataset::new(mt_posts(&dataset.posts, &translated, &to));
                corpus::save_corpus(&out, &io.output)?;
                (translated, out.len())
            };
            if let Some(path) = audit {
                write_audits(&path, &translated)?;
            }
            let count = |v: crate::backends::AuditVerdict| translated.iter().filter(|t| t.audit.verdict == v).count();
            use crate::backends::AuditVerdict as V;
            Ok(json!({
                "command": "translate",
                "posts": translated.len(),
                "kept": kept,
                "preserved": count(V::Preserved),
                "repaired": count(V::Repaired),
                "dropped": count(V::Dropped),
            })
            .to_string())
        }
        Command::Substitute { io, table, .. } => {
            let masked = ces::load_masked(&io.input)?;
            let table = match table {
                Some(t) => resolve_table(&config, &t)?,
                None => {
                    let lang = masked.first().map(|m| m.lang.clone()).ok_or_else(|| CliError::data("no masked posts"))?;
                    resolve_table(&config, &lang)?
                }
            };
            let posts = ces::substitute_all(&masked, &table, &config.substitution)?;
            let out = Dataset::new(posts);
            corpus::save_corpus(&out, &io.output)?;
            Ok(json!({"command": "substitute", "masked": masked.len(), "posts": out.len()}).to_string())
        }
        Command::Generate { io, n, .. } => {
            let dataset = corpus::load_corpus(&io.input, None)?;
            let seeds: Vec<_> = dataset.hateful().cloned().collect();
            let backend = generation_backend(&config)?;
            match lm_gen::generate_posts(&seeds, n, backend.as_ref(), &config.generation) {
                Ok(outcome) => {
                    corpus::save_corpus(&Dataset::new(outcome.posts.clone()), &io.output)?;
                    Ok(json!({
                        "command": "generate",
                        "posts": outcome.posts.len(),
                        "passes": outcome.passes,
                        "prompts": outcome.prompts_issued,
                        "rejected": outcome.rejected,
                    })
                    .to_string())
                }
                Err(e) => {
                    // Keep whatever was accepted before the failure.
                    if let LmGenError::Backend { partial, .. } | LmGenError::TooManyRejections { partial, .. } = &e {
                        corpus::save_corpus(&Dataset::new(partial.clone()), &io.output)?;
                    }
                    Err(e.into())
                }
            }
        }
        Command::Schedule { output, .. } => {
            let schedule = Schedule::build(&config.schedule)?;
            let path = output.unwrap_or_else(|| {
                config.paths.output_root.join("runs").join(&schedule.id).join("schedule.json")
            });
            write_file(&path, schedule.to_json().as_bytes())?;
            Ok(json!({"command": "schedule", "id": schedule.id, "arms": schedule.arms.len(), "path": path}).to_string())
        }
        Command::Materialize { schedule, arm, original, original_hateful, mt, ces, lm, timestamp } => {
            let schedule = Schedule::load(&schedule)?;
            let non_hateful = Pool::load(&original)?;
            let original_hateful = match original_hateful {
                Some(path) => Pool::load(path)?,
                None => non_hateful.clone(),
            };
            let mut synthetic = std::collections::BTreeMap::new();
            for (method, path) in [(experiment::ArmMethod::Mt, mt), (experiment::ArmMethod::Ces, ces), (experiment::ArmMethod::Lm, lm)] {
                if let Some(path) = path {
                    synthetic.insert(method, Pool::load(path)?);
                }
            }
            let pools = Pools { non_hateful, original_hateful, synthetic };
            let timestamp = match timestamp {
                Some(t) => t,
                None => default_timestamp()?,
            };
            let root = &config.paths.output_root;
            let manifests = match arm {
                Some(id) => {
                    let spec = schedule.arm(&id).ok_or_else(|| CliError::data(format!("schedule has no arm {id:?}")))?;
                    vec![experiment::materialize(&schedule, spec, &pools, root, &timestamp)?]
                }
                None => experiment::materialize_all(&schedule, &pools, root, &timestamp)?,
            };
            let posts: usize = manifests.iter().map(|m| m.output.posts).sum();
            Ok(json!({"command": "materialize", "arms": manifests.len(), "posts": posts}).to_string())
        }
        Command::Train { input, model } => {
            let dataset = corpus::load_corpus(&input, None)?;
            let trained = classifier::train(&dataset, &config.features, &config.training)?;
            trained.save(&model)?;
            let last = trained.history.last();
            Ok(json!({
                "command": "train",
                "posts": dataset.len(),
                "epochs": trained.history.len(),
                "val_loss": last.map(|s| s.val_loss),
                "val_accuracy": last.map(|s| s.val_accuracy),
            })
            .to_string())
        }
        Command::Eval { test, train, schedule, output } => {
            let test_set = corpus::load_corpus(&test, None)?;
            match (train, schedule) {
                (Some(train), _) => {
                    let train_set = corpus::load_corpus(&train, None)?;
                    let report = classifier::evaluate_runs(&train_set, &test_set, &config.features, &config.training)?;
                    if let Some(path) = output {
                        write_file(&path, report.to_json().as_bytes())?;
                    }
                    Ok(json!({"command": "eval", "mean": report.mean, "macro_f1_runs": report.macro_f1_runs}).to_string())
                }
                (None, Some(schedule)) => {
                    let schedule = Schedule::load(&schedule)?;
                    let reports = eval_schedule(&schedule, &config, &test_set)?;
                    let means: Vec<f64> = reports.iter().map(|r| r.mean).collect();
                    Ok(json!({"command": "eval", "arms": reports.len(), "means": means}).to_string())
                }
                (None, None) => unreachable!("clap requires --train or --schedule"),
            }
        }
        Command::Attribute { model, test, table, k, output } => {
            let model = Model::load(&model)?;
            let test_set = corpus::load_corpus(&test, None)?;
            let table = table_for(&config, table.as_deref(), &test_set)?;
            let report = classifier::attribute(&model, &test_set, &table, k)?;
            let body = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            if let Some(path) = output {
                write_file(&path, body.as_bytes())?;
            }
            Ok(json!({"command": "attribute", "tokens": report.top_tokens.len(), "entity_share": report.entity_share}).to_string())
        }
        Command::Report { schedule, output } => {
            let schedule = Schedule::load(&schedule)?;
            let rows = experiment::collect_report(&schedule, &config.paths.output_root)?;
            let csv = experiment::report_csv(&rows);
            match output {
                Some(path) => {
                    write_file(&path, csv.as_bytes())?;
                    Ok(json!({"command": "report", "rows": rows.len(), "path": path}).to_string())
                }
                None => Ok(csv.trim_end().to_string()),
            }
        }
    }
}

/// A `--table` value is a CSV path when it names an existing file or ends
/// in `.csv`; otherwise it is a language code looked up in `[tables]`, then
/// among the built-in tables.
fn resolve_table(config: &PipelineConfig, spec: &str) -> Result<EntityTable, CliError> {
    let as_path = Path::new(spec);
    if spec.ends_with(".csv") || as_path.is_file() {
        return Ok(entity_table::load_entity_table(as_path)?);
    }
    match config.tables.get(spec) {
        Some(path) => {
            let mut table = entity_table::load_entity_table(path)?;
            table.lang = spec.to_string();
            Ok(table)
        }
        None => Ok(entity_table::builtin(spec)?),
    }
}

fn table_for(config: &PipelineConfig, spec: Option<&str>, dataset: &Dataset) -> Result<EntityTable, CliError> {
    match spec {
        Some(spec) => resolve_table(config, spec),
        None => {
            let lang = dataset.posts.first().map(|p| p.lang.as_str()).ok_or_else(|| CliError::data("input corpus is empty"))?;
            resolve_table(config, lang)
        }
    }
}

fn translation_backend(config: &PipelineConfig) -> Box<dyn TranslationBackend> {
    match &config.backends.translation {
        TranslatorConfig::Mock { prefix } => Box::new(MockTranslator::with_prefix(prefix.clone())),
        TranslatorConfig::Http(endpoint) => Box::new(HttpTranslator::new(endpoint.clone())),
    }
}

fn generation_backend(config: &PipelineConfig) -> Result<Box<dyn GenerationBackend>, CliError> {
    Ok(match &config.backends.generation {
        GeneratorConfig::Mock { fixture: Some(path), .. } => Box::new(MockGenerator::from_fixture_file(path)?),
        GeneratorConfig::Mock { mode: MockGenerationMode::Derived, .. } => Box::new(MockGenerator::derived()),
        GeneratorConfig::Mock { mode: MockGenerationMode::Echo, .. } => Box::new(MockGenerator::echo()),
        GeneratorConfig::Http(endpoint) => Box::new(HttpGenerator::new(endpoint.clone())),
    })
}

fn ner_backend(config: &PipelineConfig) -> Result<Box<dyn NerBackend>, CliError> {
    match &config.backends.ner {
        Some(NerConfig::Mock { fixture }) => Ok(Box::new(MockNer::from_fixture_file(fixture)?)),
        Some(NerConfig::Http(endpoint)) => Ok(Box::new(HttpNer::new(endpoint.clone()))),
        None => Err(CliError::new(ErrorKind::Config, "masking needs [backends.ner]")),
    }
}

fn eval_schedule(schedule: &Schedule, config: &PipelineConfig, test_set: &Dataset) -> Result<Vec<EvalReport>, CliError> {
    let root = &config.paths.output_root;
    std::thread::scope(|scope| {
        let handles: Vec<_> = schedule
            .arms
            .iter()
            .map(|arm| {
                scope.spawn(move || -> Result<EvalReport, CliError> {
                    let dir = experiment::arm_dir(root, &schedule.id, &arm.id);
                    experiment::verify_arm(&dir)?;
                    let train_set = corpus::load_corpus(dir.join(experiment::TRAIN_FILE), None)?;
                    let report = classifier::evaluate_runs(&train_set, test_set, &config.features, &config.training)?;
                    write_file(&dir.join(experiment::EVAL_FILE), report.to_json().as_bytes())?;
                    Ok(report)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("eval thread panicked")).collect()
    })
}

fn write_audits(path: &Path, translated: &[TranslatedText]) -> Result<(), CliError> {
    let mut body = String::new();
    for t in translated {
        body.push_str(&serde_json::to_string(&t.audit).expect("audit serializes"));
        body.push('\n');
    }
    write_file(path, body.as_bytes())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::data(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

/// RFC 3339 time of `SOURCE_DATE_EPOCH`, or the Unix epoch when unset, so
/// repeated runs write identical manifests.
fn default_timestamp() -> Result<String, CliError> {
    let secs = match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(v) => v
            .trim()
            .parse::<i64>()
            .map_err(|_| CliError::new(ErrorKind::Config, format!("SOURCE_DATE_EPOCH is not an integer: {v:?}")))?,
        Err(_) => 0,
    };
    let time = time::OffsetDateTime::from_unix_timestamp(secs)
        .map_err(|e| CliError::new(ErrorKind::Config, format!("SOURCE_DATE_EPOCH out of range: {e}")))?;
    Ok(time.format(&time::format_description::well_known::Rfc3339).expect("valid timestamp formats"))
}
