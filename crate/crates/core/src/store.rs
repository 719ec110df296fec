//! On-disk layout for datasets and result stores.
//!
//! ```text
//! dataset/
//!   manifest.json     generation spec, hashes, chance levels
//!   trials.jsonl      one TrialRecord per line, generation order
//!   images/*.png
//! results/
//!   run.json          dataset hash + subject the results belong to
//!   results.jsonl     one ResultRecord per line, completion order
//! ```

use crate::dataset::GenerationSpec;
use crate::scoring::ScoredResponse;
use crate::transcript::Transcript;
use crate::trial::{Trial, TrialFormat};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use thiserror::Error;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRIALS_FILE: &str = "trials.jsonl";
pub const IMAGES_DIR: &str = "images";
pub const RESULTS_FILE: &str = "results.jsonl";
pub const RUN_FILE: &str = "run.json";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {source}")]
    Json { path: PathBuf, line: usize, source: serde_json::Error },
    #[error("integrity check failed: {0}")]
    Integrity(String),
    #[error("trial {trial_id} references missing image {path}")]
    MissingImage { trial_id: String, path: PathBuf },
    #[error("result for ({trial_id}, {subject}) already recorded")]
    Duplicate { trial_id: String, subject: String },
    #[error("result store does not match: {0}")]
    Mismatch(String),
    #[error("{0} exists and is not a dataset; refusing to replace it")]
    NotADataset(PathBuf),
    #[error("rendering {trial_id}: {message}")]
    Render { trial_id: String, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    #[serde(flatten)]
    pub trial: Trial,
    pub format: TrialFormat,
    /// Dataset-relative image path for IMAGE trials.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
    /// The grid document for ASCII trials.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ascii: Option<String>,
}

impl TrialRecord {
    pub fn trial_id(&self) -> &str {
        self.trial.trial_id()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub toolkit_version: String,
    pub scoring_version: String,
    pub task: String,
    pub generation: GenerationSpec,
    pub seed: u64,
    pub n: usize,
    pub trial_count: usize,
    pub image_count: usize,
    /// Keyed by `{set}/{question}`.
    pub chance_levels: BTreeMap<String, f64>,
    pub created_unix: u64,
    pub trials_sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn trials_jsonl(records: &[TrialRecord]) -> Result<Vec<u8>, StoreError> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|source| StoreError::Json {
            path: PathBuf::from(TRIALS_FILE),
            line: 0,
            source,
        })?;
        out.push(b'\n');
    }
    Ok(out)
}

fn partial_dir(dir: &Path) -> PathBuf {
    let mut name = dir.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".partial");
    dir.with_file_name(name)
}

/// Writes a dataset through a `<dir>.partial` staging directory that is
/// renamed into place only once every file is complete. On failure the
/// staging directory is left behind for inspection and `dir` is untouched.
///
/// `render` returns PNG bytes for records that carry an image; it is called
/// once per distinct image path, in parallel.
pub fn write_dataset<F>(
    dir: &Path,
    mut manifest: DatasetManifest,
    records: &[TrialRecord],
    render: F,
) -> Result<DatasetManifest, StoreError>
where
    F: Fn(&TrialRecord) -> Result<Vec<u8>, String> + Sync,
{
    if dir.exists() && !dir.join(MANIFEST_FILE).exists() && fs::read_dir(dir).map_err(io_err(dir))?.next().is_some() {
        return Err(StoreError::NotADataset(dir.to_path_buf()));
    }
    let staging = partial_dir(dir);
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(io_err(&staging))?;
    }
    let images = staging.join(IMAGES_DIR);
    fs::create_dir_all(&images).map_err(io_err(&images))?;

    let jsonl = trials_jsonl(records)?;
    let trials_path = staging.join(TRIALS_FILE);
    fs::write(&trials_path, &jsonl).map_err(io_err(&trials_path))?;

    let mut seen = HashSet::new();
    let to_render: Vec<&TrialRecord> =
        records.iter().filter(|r| r.image.as_ref().is_some_and(|p| seen.insert(p.clone()))).collect();
    to_render.par_iter().try_for_each(|r| {
        let rel = r.image.as_ref().expect("filtered");
        let png = render(r).map_err(|message| StoreError::Render { trial_id: r.trial_id().to_string(), message })?;
        let path = staging.join(rel);
        fs::write(&path, png).map_err(io_err(&path))
    })?;

    manifest.trial_count = records.len();
    manifest.image_count = to_render.len();
    manifest.trials_sha256 = sha256_hex(&jsonl);
    let manifest_path = staging.join(MANIFEST_FILE);
    let body = serde_json::to_vec_pretty(&manifest).map_err(|source| StoreError::Json {
        path: manifest_path.clone(),
        line: 0,
        source,
    })?;
    fs::write(&manifest_path, body).map_err(io_err(&manifest_path))?;

    if dir.exists() {
        fs::remove_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::rename(&staging, dir).map_err(io_err(dir))?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<DatasetManifest, StoreError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read(&path).map_err(io_err(&path))?;
    serde_json::from_slice(&text).map_err(|source| StoreError::Json { path, line: 1, source })
}

pub fn read_dataset(dir: &Path) -> Result<(DatasetManifest, Vec<TrialRecord>), StoreError> {
    let manifest = read_manifest(dir)?;
    let path = dir.join(TRIALS_FILE);
    let bytes = fs::read(&path).map_err(io_err(&path))?;
    let actual = sha256_hex(&bytes);
    if actual != manifest.trials_sha256 {
        return Err(StoreError::Integrity(format!(
            "{} hashes to {actual}, manifest records {}",
            path.display(),
            manifest.trials_sha256
        )));
    }
    let text = String::from_utf8(bytes).map_err(|e| StoreError::Integrity(e.to_string()))?;
    let mut records = Vec::with_capacity(manifest.trial_count);
    for (i, line) in text.lines().enumerate() {
        let r: TrialRecord =
            serde_json::from_str(line).map_err(|source| StoreError::Json { path: path.clone(), line: i + 1, source })?;
        if let Some(rel) = &r.image {
            let p = dir.join(rel);
            if !p.is_file() {
                return Err(StoreError::MissingImage { trial_id: r.trial_id().to_string(), path: p });
            }
        }
        records.push(r);
    }
    if records.len() != manifest.trial_count {
        return Err(StoreError::Integrity(format!(
            "{} trials on disk, manifest records {}",
            records.len(),
            manifest.trial_count
        )));
    }
    Ok((manifest, records))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub trial_id: String,
    pub subject: String,
    pub transcript: Transcript,
    pub scored: ScoredResponse,
    pub started_unix_ms: u64,
    pub duration_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunInfo {
    pub dataset: PathBuf,
    pub dataset_sha256: String,
    pub subject: String,
    pub toolkit_version: String,
    pub scoring_version: String,
    /// Command-line flags the run was started with.
    #[serde(default)]
    pub flags: Vec<String>,
}

/// Append-only result log shared by many worker threads.
pub struct ResultStore {
    dir: PathBuf,
    run: RunInfo,
    inner: Mutex<(File, HashSet<(String, String)>)>,
}

impl ResultStore {
    /// Opens `dir`, creating it if needed. An existing store must belong to
    /// the same dataset hash; a torn final line from an interrupted run is
    /// dropped.
    pub fn open(dir: &Path, run: RunInfo) -> Result<ResultStore, StoreError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let run_path = dir.join(RUN_FILE);
        if run_path.exists() {
            let text = fs::read(&run_path).map_err(io_err(&run_path))?;
            let existing: RunInfo =
                serde_json::from_slice(&text).map_err(|source| StoreError::Json { path: run_path.clone(), line: 1, source })?;
            if existing.dataset_sha256 != run.dataset_sha256 {
                return Err(StoreError::Mismatch(format!(
                    "store was created for dataset {}, not {}",
                    existing.dataset_sha256, run.dataset_sha256
                )));
            }
            if existing.subject != run.subject {
                return Err(StoreError::Mismatch(format!(
                    "store holds results for {}, not {}",
                    existing.subject, run.subject
                )));
            }
        } else {
            let body = serde_json::to_vec_pretty(&run).expect("run info serializes");
            fs::write(&run_path, body).map_err(io_err(&run_path))?;
        }

        let path = dir.join(RESULTS_FILE);
        let mut completed = HashSet::new();
        let mut good_len = 0u64;
        if path.exists() {
            let f = File::open(&path).map_err(io_err(&path))?;
            let mut reader = BufReader::new(f);
            let mut line = String::new();
            loop {
                line.clear();
                let n = reader.read_line(&mut line).map_err(io_err(&path))?;
                if n == 0 || !line.ends_with('\n') {
                    break;
                }
                match serde_json::from_str::<ResultRecord>(&line) {
                    Ok(r) => {
                        completed.insert((r.trial_id, r.subject));
                        good_len += n as u64;
                    }
                    Err(_) => break,
                }
            }
        }
        let mut file = OpenOptions::new().create(true).append(false).write(true).truncate(false).open(&path).map_err(io_err(&path))?;
        file.set_len(good_len).map_err(io_err(&path))?;
        file.seek(SeekFrom::End(0)).map_err(io_err(&path))?;
        Ok(ResultStore { dir: dir.to_path_buf(), run, inner: Mutex::new((file, completed)) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn run_info(&self) -> &RunInfo {
        &self.run
    }

    /// Writes one record as a single line with one `write_all` under the lock.
    pub fn append(&self, record: &ResultRecord) -> Result<(), StoreError> {
        let mut line = serde_json::to_vec(record).expect("result record serializes");
        line.push(b'\n');
        let key = (record.trial_id.clone(), record.subject.clone());
        let mut guard = self.inner.lock().expect("result store lock");
        let (file, completed) = &mut *guard;
        if completed.contains(&key) {
            return Err(StoreError::Duplicate { trial_id: key.0, subject: key.1 });
        }
        let path = self.dir.join(RESULTS_FILE);
        file.write_all(&line).map_err(io_err(&path))?;
        file.flush().map_err(io_err(&path))?;
        completed.insert(key);
        Ok(())
    }

    pub fn completed_pairs(&self) -> HashSet<(String, String)> {
        self.inner.lock().expect("result store lock").1.clone()
    }
}

pub fn read_run_info(dir: &Path) -> Result<RunInfo, StoreError> {
    let path = dir.join(RUN_FILE);
    let text = fs::read(&path).map_err(io_err(&path))?;
    serde_json::from_slice(&text).map_err(|source| StoreError::Json { path, line: 1, source })
}

/// Every complete record in a result store, in file order.
pub fn read_results(dir: &Path) -> Result<Vec<ResultRecord>, StoreError> {
    let path = dir.join(RESULTS_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let mut out = Vec::new();
    for (i, line) in text.split_inclusive('\n').enumerate() {
        if !line.ends_with('\n') {
            break;
        }
        out.push(serde_json::from_str(line).map_err(|source| StoreError::Json { path: path.clone(), line: i + 1, source })?);
    }
    Ok(out)
}
