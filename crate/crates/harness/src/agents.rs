//! Reference agents that read trial structure directly. They model a
//! reasoning strategy, not perception.

use crate::bundle::TrialBundle;
use crate::subject::{Reply, Subject, SubjectError};
use rand::seq::SliceRandom;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;
use vpt_core::director::{DirectorTrial, Pov};
use vpt_core::geometry::{signed_offset, Angle, Side, Wall};
use vpt_core::oracle::{answer_rft, disparity_of, resolve, Frame, OracleError, ResolverPolicy};
use vpt_core::rft::{QuestionType, RftSet, RftTrial};
use vpt_core::symbols::{viewer_snap_reading, PlacedSymbol};
use vpt_core::scoring::AnswerKind;
use vpt_core::seed::rng_for;
use vpt_core::transcript::Transcript;
use vpt_core::trial::Trial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentKind {
    /// Always right.
    Oracle,
    /// Judges everything from the viewer's own frame.
    Egocentric,
    /// Egocentric, plus a full 180° correction once the figure faces away.
    Mirror,
    /// Uniform over the question's answer vocabulary.
    Random,
}

impl AgentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Oracle => "oracle",
            AgentKind::Egocentric => "egocentric",
            AgentKind::Mirror => "mirror",
            AgentKind::Random => "random",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("unknown agent {0:?}; expected oracle, egocentric, mirror or random")]
pub struct UnknownAgent(pub String);

impl FromStr for AgentKind {
    type Err = UnknownAgent;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "oracle" => Ok(AgentKind::Oracle),
            "egocentric" => Ok(AgentKind::Egocentric),
            "mirror" => Ok(AgentKind::Mirror),
            "random" => Ok(AgentKind::Random),
            _ => Err(UnknownAgent(s.to_string())),
        }
    }
}

/// Judgments made from the viewer's own frame: image up is "forward".
/// Like glyph reading, spatial judgments tolerate small rotations: the
/// scene is read snapped to whichever of upright or inverted is nearer.
/// `flip` applies a whole-frame 180° correction on top of that.
fn rft_viewer_frame(trial: &RftTrial, flip: bool) -> Result<String, OracleError> {
    let first = || trial.symbols.first().ok_or(OracleError::MissingSymbol);
    let snap = if disparity_of(trial) <= 90.0 { 0.0 } else { 180.0 };
    let snapped = |s: &PlacedSymbol| Angle::new(snap + signed_offset(s.position_angle, trial.figure_orientation));
    let x = |s: &PlacedSymbol| snapped(s).unit_vector().0;
    let up = Angle::new(if flip { 180.0 } else { 0.0 });
    let right = |s: &PlacedSymbol| (x(s) > 0.0) != flip;
    let front = |s: &PlacedSymbol| (snapped(s).unit_vector().1 < 0.0) != flip;
    let reading = |s: &PlacedSymbol| {
        let g = viewer_snap_reading(s);
        if flip { g.rotation_pair() } else { g }
    };
    let wall = if flip { Wall::Bottom } else { Wall::Top };
    let lr = |b: bool| if b { "RIGHT" } else { "LEFT" }.to_string();
    let answer = match (trial.set, trial.question_type) {
        (RftSet::Control1, QuestionType::Visual) => first()?.glyph.to_string(),
        (RftSet::Control1, _) => lr(first()?.offset_from_center().0 > 0.0),
        (RftSet::Control2, QuestionType::Visual) => trial.wall_colors.color_of(wall).as_str().to_string(),
        (RftSet::Control2, _) => wall.as_str().to_string(),
        (RftSet::Test1, QuestionType::Visual) => {
            let seen = signed_offset(snapped(first()?), up).abs() <= trial.fov_half_angle;
            if seen { "CAN SEE" } else { "CANNOT SEE" }.to_string()
        }
        (RftSet::Test1, _) => if front(first()?) { "FRONT" } else { "BEHIND" }.to_string(),
        (RftSet::Test2, QuestionType::Visual) => reading(first()?).to_string(),
        (RftSet::Test2, _) => lr(right(first()?)),
        (RftSet::Test3, _) => {
            // The symbol furthest toward the queried side in this frame.
            let want_right = trial.queried_side.ok_or(OracleError::MissingSymbol)? == Side::Right;
            let toward = |s: &PlacedSymbol| if want_right != flip { x(s) } else { -x(s) };
            let s = trial
                .symbols
                .iter()
                .max_by(|a, b| toward(a).total_cmp(&toward(b)))
                .ok_or(OracleError::MissingSymbol)?;
            reading(s).to_string()
        }
    };
    Ok(answer)
}

fn director_answer(kind: AgentKind, trial: &DirectorTrial) -> Result<String, OracleError> {
    let mut instruction = trial.instruction.clone();
    let policy = match kind {
        AgentKind::Egocentric => ResolverPolicy::EGOCENTRIC,
        AgentKind::Mirror => {
            // Horizontal words from the director's side are flipped once,
            // then read in the participant's own frame.
            if instruction.pov == Pov::Mine {
                instruction.adjective = instruction.adjective.mirrored();
            }
            ResolverPolicy { respect_occlusion: true, frame_override: Some(Frame::Participant), scan_tie_break: true }
        }
        _ => ResolverPolicy::DIRECTOR,
    };
    Ok(resolve(&trial.grid, &instruction, policy)?.to_string())
}

/// What a built-in agent submits for `trial`. `seed` only affects RANDOM.
pub fn builtin_answer(kind: AgentKind, trial: &Trial, seed: u64) -> Result<String, OracleError> {
    match (kind, trial) {
        (AgentKind::Random, _) => {
            let options = AnswerKind::of(trial).valid_set();
            let mut rng = rng_for(seed, &format!("random/{}", trial.trial_id()), 0);
            Ok(options.choose(&mut rng).expect("non-empty vocabulary").clone())
        }
        (AgentKind::Oracle, Trial::Rft(t)) => answer_rft(t),
        (AgentKind::Egocentric, Trial::Rft(t)) => rft_viewer_frame(t, false),
        (AgentKind::Mirror, Trial::Rft(t)) => rft_viewer_frame(t, disparity_of(t) > 90.0),
        (kind, Trial::Director(t)) => director_answer(kind, t),
    }
}

/// A built-in agent wrapped as a one-turn subject.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuiltinAgent {
    pub kind: AgentKind,
    pub seed: u64,
}

impl BuiltinAgent {
    pub fn new(kind: AgentKind, seed: u64) -> Self {
        BuiltinAgent { kind, seed }
    }
}

impl Subject for BuiltinAgent {
    fn id(&self) -> String {
        self.kind.as_str().to_string()
    }

    fn reply(&self, bundle: &TrialBundle, _transcript: &Transcript) -> Result<Reply, SubjectError> {
        builtin_answer(self.kind, &bundle.trial, self.seed)
            .map(|a| Reply::submit(&a))
            .map_err(|e| SubjectError::Malformed(format!("{} agent: {e}", self.kind)))
    }
}
