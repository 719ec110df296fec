//! Turns a generation spec into dataset records and back again.

use crate::director::{generate_condition_grid, DirectorConfig, DirectorError, ItemLibrary};
use crate::render::{render_director_ascii, render_director_image, render_rft_image, Canvas};
use crate::rft::{generate_set, RftConfig, RftError, RftSet};
use crate::scoring::{chance_level, SCORING_VERSION};
use crate::store::{write_dataset, DatasetManifest, StoreError, TrialRecord, IMAGES_DIR};
use crate::trial::{Trial, TrialFormat};
use crate::TOOLKIT_VERSION;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Rft(#[from] RftError),
    #[error(transparent)]
    Director(#[from] DirectorError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Everything needed to regenerate a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "lowercase")]
pub enum GenerationSpec {
    Rft {
        set: RftSet,
        n: usize,
        seed: u64,
        config: RftConfig,
    },
    /// Uses the built-in item library.
    Director {
        n: usize,
        seed: u64,
        config: DirectorConfig,
        /// Also emit an ASCII twin of every trial.
        ascii: bool,
    },
}

impl GenerationSpec {
    pub fn task(&self) -> &'static str {
        match self {
            GenerationSpec::Rft { .. } => "rft",
            GenerationSpec::Director { .. } => "director",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            GenerationSpec::Rft { seed, .. } | GenerationSpec::Director { seed, .. } => *seed,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            GenerationSpec::Rft { n, .. } | GenerationSpec::Director { n, .. } => *n,
        }
    }
}

/// Trial records in generation order. RFT question variants of one scene
/// share an image; Director ASCII twins follow the image trials.
pub fn build_records(spec: &GenerationSpec) -> Result<Vec<TrialRecord>, DatasetError> {
    match spec {
        GenerationSpec::Rft { set, n, seed, config } => Ok(generate_set(*set, *n, *seed, config)?
            .into_iter()
            .map(|t| TrialRecord {
                image: Some(format!("{IMAGES_DIR}/{}.png", t.scene_id)),
                trial: Trial::Rft(t),
                format: TrialFormat::Image,
                ascii: None,
            })
            .collect()),
        GenerationSpec::Director { n, seed, config, ascii } => {
            let trials = generate_condition_grid(*n, *seed, config, &ItemLibrary::builtin())?;
            let mut records: Vec<TrialRecord> = trials
                .iter()
                .map(|t| TrialRecord {
                    image: Some(format!("{IMAGES_DIR}/{}.png", t.trial_id)),
                    trial: Trial::Director(t.clone()),
                    format: TrialFormat::Image,
                    ascii: None,
                })
                .collect();
            if *ascii {
                records.extend(trials.into_iter().map(|mut t| {
                    t.trial_id = t.trial_id.replacen("director-grid-", "director-grid_ascii-", 1);
                    let text = render_director_ascii(&t.grid).text;
                    TrialRecord { trial: Trial::Director(t), format: TrialFormat::Ascii, image: None, ascii: Some(text) }
                }));
            }
            Ok(records)
        }
    }
}

pub fn render_record(record: &TrialRecord) -> Result<Vec<u8>, String> {
    let img = match &record.trial {
        Trial::Rft(t) => render_rft_image(t, Canvas::RFT),
        Trial::Director(t) => render_director_image(t, Canvas::DIRECTOR),
    };
    img.map(|i| i.png).map_err(|e| e.to_string())
}

/// Chance level per `{set}/{question}` series.
pub fn chance_levels(records: &[TrialRecord]) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for r in records {
        let key = match &r.trial {
            Trial::Rft(t) => format!("{}/{}", t.set.as_str(), t.question_type.as_str()),
            Trial::Director(_) => format!("grid/{}", r.format.as_str()),
        };
        out.entry(key).or_insert_with(|| chance_level(&r.trial));
    }
    out
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Generates, renders and writes a dataset to `dir`.
pub fn generate_dataset(spec: &GenerationSpec, dir: &Path) -> Result<DatasetManifest, DatasetError> {
    let records = build_records(spec)?;
    let manifest = DatasetManifest {
        toolkit_version: TOOLKIT_VERSION.to_string(),
        scoring_version: SCORING_VERSION.to_string(),
        task: spec.task().to_string(),
        generation: spec.clone(),
        seed: spec.seed(),
        n: spec.n(),
        trial_count: records.len(),
        image_count: 0,
        chance_levels: chance_levels(&records),
        created_unix: now_unix(),
        trials_sha256: String::new(),
    };
    Ok(write_dataset(dir, manifest, &records, render_record)?)
}

/// Rebuilds a dataset from a manifest's recorded generation spec.
pub fn regenerate(manifest: &DatasetManifest, dir: &Path) -> Result<DatasetManifest, DatasetError> {
    generate_dataset(&manifest.generation, dir)
}
