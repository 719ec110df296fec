//! Strict exact-match scoring against each question's closed vocabulary.

use crate::director::CellRef;
use crate::rft::{QuestionType, RftSet};
use crate::symbols::Glyph;
use crate::trial::Trial;
use serde::{Deserialize, Serialize};

/// Bumped whenever normalisation rules change; recorded in manifests.
pub const SCORING_VERSION: &str = "1";

const QUOTES: &[char] = &['"', '\'', '`', '\u{2018}', '\u{2019}', '\u{201C}', '\u{201D}'];
const TERMINAL: &[char] = &['.', ',', '!', '?', ';', ':'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnswerKind {
    Glyph,
    LeftRight,
    WallColor,
    WallSide,
    Visibility,
    FrontBehind,
    Cell,
}

impl AnswerKind {
    pub fn of(trial: &Trial) -> AnswerKind {
        match trial {
            Trial::Director(_) => AnswerKind::Cell,
            Trial::Rft(t) => match (t.set, t.question_type) {
                (RftSet::Control2, QuestionType::Visual) => AnswerKind::WallColor,
                (RftSet::Control2, _) => AnswerKind::WallSide,
                (RftSet::Test1, QuestionType::Visual) => AnswerKind::Visibility,
                (RftSet::Test1, _) => AnswerKind::FrontBehind,
                (_, QuestionType::Spatial) => AnswerKind::LeftRight,
                _ => AnswerKind::Glyph,
            },
        }
    }

    pub fn valid_set(self) -> Vec<String> {
        let words = |w: &[&str]| w.iter().map(|s| s.to_string()).collect();
        match self {
            AnswerKind::Glyph => Glyph::ALL.iter().map(|g| g.to_string()).collect(),
            AnswerKind::LeftRight => words(&["LEFT", "RIGHT"]),
            AnswerKind::WallColor => words(&["RED", "GREEN", "BLUE", "BLACK"]),
            AnswerKind::WallSide => words(&["LEFT", "RIGHT", "TOP", "BOTTOM"]),
            AnswerKind::Visibility => words(&["CAN SEE", "CANNOT SEE"]),
            AnswerKind::FrontBehind => words(&["FRONT", "BEHIND"]),
            AnswerKind::Cell => CellRef::all().map(|c| c.to_string()).collect(),
        }
    }

    /// Canonical spelling of a normalised answer, or `None` when it is not
    /// in the vocabulary.
    pub fn canonicalize(self, normalized: &str) -> Option<String> {
        match self {
            AnswerKind::Glyph => normalized.to_lowercase().parse::<Glyph>().ok().map(|g| g.to_string()),
            AnswerKind::Cell => normalized.parse::<CellRef>().ok().map(|c| c.to_string()),
            _ => self.valid_set().into_iter().find(|v| v == normalized),
        }
    }
}

pub fn normalize(raw: &str) -> String {
    let mut s = raw.split_whitespace().collect::<Vec<_>>().join(" ");
    loop {
        let before = s.len();
        let t = s.trim_end_matches(TERMINAL).trim();
        let t = match (t.chars().next(), t.chars().last()) {
            (Some(a), Some(b)) if t.chars().count() >= 2 && QUOTES.contains(&a) && QUOTES.contains(&b) => {
                t[a.len_utf8()..t.len() - b.len_utf8()].trim()
            }
            _ => t,
        };
        s = t.to_string();
        if s.len() == before {
            break;
        }
    }
    s.to_uppercase()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoredResponse {
    pub trial_id: String,
    pub subject: String,
    pub raw_answer: Option<String>,
    pub normalized_answer: Option<String>,
    pub valid: bool,
    pub correct: bool,
    pub failure_reason: Option<String>,
}

/// `outcome` is the submitted answer, or the reason no answer was given.
pub fn score_response(trial: &Trial, subject: &str, outcome: Result<&str, &str>) -> ScoredResponse {
    let kind = AnswerKind::of(trial);
    match outcome {
        Err(reason) => ScoredResponse {
            trial_id: trial.trial_id().to_string(),
            subject: subject.to_string(),
            raw_answer: None,
            normalized_answer: None,
            valid: false,
            correct: false,
            failure_reason: Some(reason.to_string()),
        },
        Ok(raw) => {
            let normalized = normalize(raw);
            let canonical = kind.canonicalize(&normalized);
            let truth = kind.canonicalize(&normalize(&trial.ground_truth()));
            ScoredResponse {
                trial_id: trial.trial_id().to_string(),
                subject: subject.to_string(),
                raw_answer: Some(raw.to_string()),
                valid: canonical.is_some(),
                correct: canonical.is_some() && canonical == truth,
                normalized_answer: Some(canonical.unwrap_or(normalized)),
                failure_reason: None,
            }
        }
    }
}

/// Chance accuracy for a set's question: one over the number of answers a
/// subject could plausibly confuse. Glyph questions count the glyphs on
/// screen and their rotation partners rather than the whole alphabet.
pub fn chance_level(trial: &Trial) -> f64 {
    let n = match (AnswerKind::of(trial), trial) {
        (AnswerKind::Glyph, Trial::Rft(t)) => {
            let mut seen: Vec<Glyph> = t.symbols.iter().flat_map(|s| [s.glyph, s.glyph.rotation_pair()]).collect();
            seen.sort();
            seen.dedup();
            seen.len().max(1)
        }
        (kind, _) => kind.valid_set().len(),
    };
    1.0 / n as f64
}
