//! Incremental augmentation arms: schedules, materialized train sets with
//! manifests, and the per-arm comparison report.
//!
//! Every arm of a schedule draws its non-hateful and original hateful posts
//! as prefixes of one seeded shuffle per pool, so the baseline is the same
//! set of posts in every arm and larger arms extend smaller ones.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::EvalReport;
use crate::corpus::{self, CorpusError, Dataset, Label, Post};
use crate::seed::{derive_seed, rng_from_seed, sha256_hex, shuffle};

pub const TRAIN_FILE: &str = "train.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const EVAL_FILE: &str = "eval.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmMethod {
    AllOrig,
    Mt,
    Ces,
    Lm,
}

impl ArmMethod {
    pub const SYNTHETIC: [ArmMethod; 3] = [ArmMethod::Mt, ArmMethod::Ces, ArmMethod::Lm];

    pub fn as_str(self) -> &'static str {
        match self {
            ArmMethod::AllOrig => "all_orig",
            ArmMethod::Mt => "mt",
            ArmMethod::Ces => "ces",
            ArmMethod::Lm => "lm",
        }
    }

    /// Arm id suffix within an increment row.
    fn letter(self) -> char {
        match self {
            ArmMethod::AllOrig => 'a',
            ArmMethod::Mt => 'b',
            ArmMethod::Ces => 'c',
            ArmMethod::Lm => 'd',
        }
    }
}

impl fmt::Display for ArmMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArmSpec {
    /// "1" for the base arm, then "2a".."2d", "3a".. per increment.
    pub id: String,
    pub method: ArmMethod,
    pub non_hateful: usize,
    pub original_hateful: usize,
    pub synthetic_hateful: usize,
    /// Seeds the final shuffle of the arm's train file.
    pub rng_seed: u64,
}

impl ArmSpec {
    pub fn total(&self) -> usize {
        self.non_hateful + self.original_hateful + self.synthetic_hateful
    }

    pub fn hateful_fraction(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        (self.original_hateful + self.synthetic_hateful) as f64 / total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScheduleConfig {
    pub id: String,
    pub max_total_hateful: usize,
    pub step: usize,
    pub baseline_original: usize,
    pub non_hateful: usize,
    pub rng_seed: u64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            id: "default".into(),
            max_total_hateful: 450,
            step: 50,
            baseline_original: 100,
            non_hateful: 450,
            rng_seed: 1,
        }
    }
}

impl ScheduleConfig {
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errors = Vec::new();
        if self.id.is_empty() || self.id.contains(['/', '\\']) || self.id == "." || self.id == ".." {
            errors.push(format!("schedule.id must be a plain directory name, got {:?}", self.id));
        }
        if self.step == 0 {
            errors.push("schedule.step must be > 0".into());
        }
        if self.baseline_original > self.max_total_hateful {
            errors.push(format!(
                "schedule.baseline_original ({}) must be <= schedule.max_total_hateful ({})",
                self.baseline_original, self.max_total_hateful
            ));
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }
}

/// A schedule as written by the `schedule` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub id: String,
    pub rng_seed: u64,
    pub arms: Vec<ArmSpec>,
}

impl Schedule {
    pub fn build(config: &ScheduleConfig) -> Result<Schedule, ExperimentError> {
        config.validate().map_err(ExperimentError::InvalidSchedule)?;
        let mut arms = build_schedule(config.max_total_hateful, config.step, config.baseline_original, config.rng_seed)?;
        for arm in &mut arms {
            arm.non_hateful = config.non_hateful;
        }
        Ok(Schedule { id: config.id.clone(), rng_seed: config.rng_seed, arms })
    }

    pub fn arm(&self, id: &str) -> Option<&ArmSpec> {
        self.arms.iter().find(|a| a.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serialization is infallible") + "\n"
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Schedule, ExperimentError> {
        read_json(path.as_ref())
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid schedule: {}", .0.join("; "))]
    InvalidSchedule(Vec<String>),
    #[error("{pool}: need {need}, have {have}")]
    PoolUnderflow { pool: String, need: usize, have: usize },
    #[error("post id {0:?} appears in more than one pool")]
    DuplicateId(String),
    #[error("no synthetic pool for method {0}")]
    MissingPool(ArmMethod),
    #[error("manifest check failed for {path}: {message}")]
    ManifestMismatch { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Emits the base arm and, for each increment `k` that stays within
/// `max_total_hateful`, an all-original arm and one arm per synthetic method.
pub fn build_schedule(
    max_total_hateful: usize,
    step: usize,
    baseline_original: usize,
    rng_seed: u64,
) -> Result<Vec<ArmSpec>, ExperimentError> {
    let mut problems = Vec::new();
    if step == 0 {
        problems.push("step must be > 0".to_string());
    }
    if baseline_original > max_total_hateful {
        problems.push(format!("baseline_original ({baseline_original}) exceeds max_total_hateful ({max_total_hateful})"));
    }
    if !problems.is_empty() {
        return Err(ExperimentError::InvalidSchedule(problems));
    }
    if baseline_original == 0 {
        log::warn!("baseline arm has no hateful posts");
    }

    let arm = |id: String, method: ArmMethod, original: usize, synthetic: usize, k: usize| ArmSpec {
        rng_seed: derive_seed(rng_seed, &["arm", method.as_str(), &k.to_string()]),
        id,
        method,
        non_hateful: 450,
        original_hateful: original,
        synthetic_hateful: synthetic,
    };

    let mut arms = vec![arm("1".into(), ArmMethod::AllOrig, baseline_original, 0, 0)];
    let mut k = 1;
    while baseline_original + step * k <= max_total_hateful {
        let extra = step * k;
        arms.push(arm(format!("{}a", k + 1), ArmMethod::AllOrig, baseline_original + extra, 0, k));
        for method in ArmMethod::SYNTHETIC {
            arms.push(arm(format!("{}{}", k + 1, method.letter()), method, baseline_original, extra, k));
        }
        k += 1;
    }
    Ok(arms)
}

/// A pool of candidate posts and where it came from.
#[derive(Debug, Clone)]
pub struct Pool {
    pub dataset: Dataset,
    pub path: Option<PathBuf>,
    pub sha256: String,
}

impl Pool {
    pub fn from_dataset(dataset: Dataset) -> Pool {
        let sha256 = sha256_hex(dataset.to_jsonl().as_bytes());
        Pool { dataset, path: None, sha256 }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Pool, ExperimentError> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| io_error(path, e))?;
        let dataset = corpus::load_corpus(path, None)?;
        Ok(Pool { dataset, path: Some(path.to_path_buf()), sha256: sha256_hex(&bytes) })
    }
}

/// Inputs to [`materialize`]. Only posts with the matching label are drawn
/// from each pool, so one mixed corpus may serve as both original pools.
#[derive(Debug, Clone)]
pub struct Pools {
    pub non_hateful: Pool,
    pub original_hateful: Pool,
    pub synthetic: BTreeMap<ArmMethod, Pool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRecord {
    pub pool: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub sha256: String,
    pub drawn: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub posts: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestCounts {
    pub non_hateful: usize,
    pub hateful: usize,
    pub original_hateful: usize,
    pub synthetic_hateful: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub schedule_id: String,
    pub arm: ArmSpec,
    pub sources: Vec<SourceRecord>,
    pub output: OutputRecord,
    pub counts: ManifestCounts,
    pub tool_version: String,
    pub timestamp: String,
}

impl ExperimentManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialization is infallible") + "\n"
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ExperimentManifest, ExperimentError> {
        read_json(path.as_ref())
    }
}

/// `<root>/runs/<schedule-id>/<arm-id>`
pub fn arm_dir(root: &Path, schedule_id: &str, arm_id: &str) -> PathBuf {
    root.join("runs").join(schedule_id).join(arm_id)
}

/// The first `n` posts with `label` after a shuffle seeded only by the
/// schedule seed and pool name.
fn draw<'a>(pool: &'a Pool, name: &str, label: Label, n: usize, schedule_seed: u64) -> Result<Vec<&'a Post>, ExperimentError> {
    let mut candidates: Vec<&Post> = pool.dataset.posts.iter().filter(|p| p.label == label).collect();
    if candidates.len() < n {
        return Err(ExperimentError::PoolUnderflow { pool: name.to_string(), need: n, have: candidates.len() });
    }
    shuffle(&mut rng_from_seed(derive_seed(schedule_seed, &["pool", name])), &mut candidates);
    candidates.truncate(n);
    Ok(candidates)
}

/// Samples the arm's posts, writes `train.jsonl` and `manifest.json` under
/// [`arm_dir`] and returns the manifest.
pub fn materialize(
    schedule: &Schedule,
    arm: &ArmSpec,
    pools: &Pools,
    root: &Path,
    timestamp: &str,
) -> Result<ExperimentManifest, ExperimentError> {
    let synthetic_name = format!("synthetic/{}", arm.method);
    let mut picks: Vec<(&str, &Pool, Vec<&Post>)> = vec![
        ("non_hateful", &pools.non_hateful, draw(&pools.non_hateful, "non_hateful", Label::NonHateful, arm.non_hateful, schedule.rng_seed)?),
        (
            "original_hateful",
            &pools.original_hateful,
            draw(&pools.original_hateful, "original_hateful", Label::Hateful, arm.original_hateful, schedule.rng_seed)?,
        ),
    ];
    if arm.synthetic_hateful > 0 {
        let pool = pools.synthetic.get(&arm.method).ok_or(ExperimentError::MissingPool(arm.method))?;
        let drawn = draw(pool, &synthetic_name, Label::Hateful, arm.synthetic_hateful, schedule.rng_seed)?;
        picks.push((&synthetic_name, pool, drawn));
    }

    let mut seen = HashSet::new();
    let mut posts = Vec::with_capacity(arm.total());
    for (_, _, drawn) in &picks {
        for post in drawn {
            if !seen.insert(post.id.as_str()) {
                return Err(ExperimentError::DuplicateId(post.id.clone()));
            }
            posts.push((*post).clone());
        }
    }
    shuffle(&mut rng_from_seed(arm.rng_seed), &mut posts);
    let dataset = Dataset::new(posts);
    let body = dataset.to_jsonl();

    let dir = arm_dir(root, &schedule.id, &arm.id);
    fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
    let train_path = dir.join(TRAIN_FILE);
    fs::write(&train_path, &body).map_err(|e| io_error(&train_path, e))?;

    let counts = dataset.counts();
    let manifest = ExperimentManifest {
        schedule_id: schedule.id.clone(),
        arm: arm.clone(),
        sources: picks
            .iter()
            .map(|(name, pool, drawn)| SourceRecord {
                pool: name.to_string(),
                path: pool.path.as_ref().map(|p| p.display().to_string()),
                sha256: pool.sha256.clone(),
                drawn: drawn.len(),
            })
            .collect(),
        output: OutputRecord { file: TRAIN_FILE.into(), sha256: sha256_hex(body.as_bytes()), posts: dataset.len() },
        counts: ManifestCounts {
            non_hateful: counts.non_hateful,
            hateful: counts.hateful,
            original_hateful: arm.original_hateful,
            synthetic_hateful: arm.synthetic_hateful,
        },
        tool_version: env!("CARGO_PKG_VERSION").into(),
        timestamp: timestamp.into(),
    };
    let manifest_path = dir.join(MANIFEST_FILE);
    fs::write(&manifest_path, manifest.to_json()).map_err(|e| io_error(&manifest_path, e))?;
    Ok(manifest)
}

/// Materializes every arm, one thread per arm. Manifests come back in
/// schedule order.
pub fn materialize_all(
    schedule: &Schedule,
    pools: &Pools,
    root: &Path,
    timestamp: &str,
) -> Result<Vec<ExperimentManifest>, ExperimentError> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = schedule
            .arms
            .iter()
            .map(|arm| scope.spawn(move || materialize(schedule, arm, pools, root, timestamp)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("materialize thread panicked")).collect()
    })
}

/// Re-reads an arm directory and checks the manifest against the train file
/// on disk: digest, post count and per-label counts.
pub fn verify_arm(dir: &Path) -> Result<ExperimentManifest, ExperimentError> {
    let manifest = ExperimentManifest::load(dir.join(MANIFEST_FILE))?;
    let train_path = dir.join(&manifest.output.file);
    let mismatch = |message: String| ExperimentError::ManifestMismatch { path: dir.to_path_buf(), message };
    let bytes = fs::read(&train_path).map_err(|e| io_error(&train_path, e))?;
    let digest = sha256_hex(&bytes);
    if digest != manifest.output.sha256 {
        return Err(mismatch(format!("train file digest {digest} != {}", manifest.output.sha256)));
    }
    let counts = corpus::load_corpus(&train_path, None)?.counts();
    if counts.total() != manifest.output.posts
        || counts.hateful != manifest.counts.hateful
        || counts.non_hateful != manifest.counts.non_hateful
    {
        return Err(mismatch(format!(
            "recount hateful={} non_hateful={} differs from manifest hateful={} non_hateful={}",
            counts.hateful, counts.non_hateful, manifest.counts.hateful, manifest.counts.non_hateful
        )));
    }
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub arm_id: String,
    pub method: ArmMethod,
    pub original_hateful: usize,
    pub synthetic_hateful: usize,
    pub mean_macro_f1: f64,
    /// Per-run scores joined with ';'.
    pub f1_runs: String,
}

/// One row per arm that has both a manifest and an evaluation report,
/// in schedule order.
pub fn collect_report(schedule: &Schedule, root: &Path) -> Result<Vec<ReportRow>, ExperimentError> {
    let mut rows = Vec::new();
    for arm in &schedule.arms {
        let dir = arm_dir(root, &schedule.id, &arm.id);
        let eval_path = dir.join(EVAL_FILE);
        if !eval_path.exists() {
            log::warn!("arm {} has no {}; skipped", arm.id, EVAL_FILE);
            continue;
        }
        let manifest = ExperimentManifest::load(dir.join(MANIFEST_FILE))?;
        let eval = EvalReport::load(&eval_path).map_err(|e| ExperimentError::Io { path: eval_path.clone(), message: e.to_string() })?;
        rows.push(ReportRow {
            arm_id: manifest.arm.id.clone(),
            method: manifest.arm.method,
            original_hateful: manifest.counts.original_hateful,
            synthetic_hateful: manifest.counts.synthetic_hateful,
            mean_macro_f1: eval.mean,
            f1_runs: eval.macro_f1_runs.iter().map(|f| format!("{f:.6}")).collect::<Vec<_>>().join(";"),
        });
    }
    Ok(rows)
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).expect("writing to memory");
    }
    if rows.is_empty() {
        writer
            .write_record(["arm_id", "method", "original_hateful", "synthetic_hateful", "mean_macro_f1", "f1_runs"])
            .expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("flush to memory")).expect("csv output is utf-8")
}

fn io_error(path: &Path, e: impl fmt::Display) -> ExperimentError {
    ExperimentError::Io { path: path.to_path_buf(), message: e.to_string() }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ExperimentError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| io_error(path, e))
}
