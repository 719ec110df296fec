use crate::director::DirectorTrial;
use crate::rft::RftTrial;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "lowercase")]
pub enum Trial {
    Rft(RftTrial),
    Director(DirectorTrial),
}

/// How a trial is shown to a subject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TrialFormat {
    Image,
    Ascii,
}

impl TrialFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            TrialFormat::Image => "IMAGE",
            TrialFormat::Ascii => "ASCII",
        }
    }
}

impl Trial {
    pub fn trial_id(&self) -> &str {
        match self {
            Trial::Rft(t) => &t.trial_id,
            Trial::Director(t) => &t.trial_id,
        }
    }

    pub fn task(&self) -> &'static str {
        match self {
            Trial::Rft(_) => "rft",
            Trial::Director(_) => "director",
        }
    }

    pub fn ground_truth(&self) -> String {
        match self {
            Trial::Rft(t) => t.ground_truth.clone(),
            Trial::Director(t) => t.ground_truth.to_string(),
        }
    }

    pub fn as_rft(&self) -> Option<&RftTrial> {
        match self {
            Trial::Rft(t) => Some(t),
            Trial::Director(_) => None,
        }
    }

    pub fn as_director(&self) -> Option<&DirectorTrial> {
        match self {
            Trial::Director(t) => Some(t),
            Trial::Rft(_) => None,
        }
    }
}
