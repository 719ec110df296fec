//! Ground truth for both tasks, plus the egocentric resolver used to model
//! perspective failures.

use crate::director::grid::{CellRef, Grid};
use crate::director::instruction::{Adjective, Instruction, Pov};
use crate::geometry::{
    facing_wall, fold_disparity, front_or_behind, side_of_figure, signed_offset, GeometryError,
    Placement,
};
use crate::rft::{QuestionType, RftSet, RftTrial};
use crate::symbols::{Glyph, PlacedSymbol};
use crate::geometry::Angle;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{set} has no {question:?} question")]
    QuestionMismatch { set: RftSet, question: QuestionType },
    #[error("trial is missing its symbol")]
    MissingSymbol,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("no item matches the description")]
    NoCandidates,
    #[error("{0} cells remain after applying the adjective")]
    Ambiguous(usize),
}

/// How the figure itself reads a symbol: the drawn glyph when its top is
/// within 90° of the figure's heading, else the rotation partner.
pub fn figure_reading(symbol: &PlacedSymbol, heading: Angle) -> Glyph {
    if signed_offset(symbol.rendered_up, heading).abs() <= 90.0 {
        symbol.glyph
    } else {
        symbol.glyph.rotation_pair()
    }
}

pub fn answer_rft(trial: &RftTrial) -> Result<String, OracleError> {
    let heading = trial.figure_orientation;
    let q = trial.question_type;
    let mismatch = || OracleError::QuestionMismatch { set: trial.set, question: q };
    let first = || trial.symbols.first().ok_or(OracleError::MissingSymbol);
    let answer = match (trial.set, q) {
        (RftSet::Test3, QuestionType::Visuospatial) => {
            let want = trial.queried_side.ok_or(OracleError::MissingSymbol)?;
            let mut found = None;
            for s in &trial.symbols {
                if side_of_figure(s.position_angle, heading)? == want {
                    found = Some(figure_reading(s, heading));
                }
            }
            found.ok_or(OracleError::MissingSymbol)?.to_string()
        }
        (RftSet::Test3, _) | (_, QuestionType::Visuospatial) => return Err(mismatch()),
        (RftSet::Control1, QuestionType::Visual) => first()?.glyph.to_string(),
        (RftSet::Control1, QuestionType::Spatial) => {
            let (x, _) = first()?.offset_from_center();
            if x > 0.0 { "RIGHT" } else { "LEFT" }.to_string()
        }
        (RftSet::Control2, QuestionType::Visual) => {
            trial.wall_colors.color_of(facing_wall(heading).side).as_str().to_string()
        }
        (RftSet::Control2, QuestionType::Spatial) => facing_wall(heading).side.as_str().to_string(),
        (RftSet::Test1, q) => {
            let placement = front_or_behind(first()?.position_angle, heading, trial.fov_half_angle)?;
            match (q, placement) {
                (QuestionType::Visual, Placement::Front) => "CAN SEE".to_string(),
                (QuestionType::Visual, Placement::Behind) => "CANNOT SEE".to_string(),
                (_, p) => p.as_str().to_string(),
            }
        }
        (RftSet::Test2, QuestionType::Visual) => figure_reading(first()?, heading).to_string(),
        (RftSet::Test2, QuestionType::Spatial) => {
            side_of_figure(first()?.position_angle, heading)?.as_str().to_string()
        }
    };
    Ok(answer)
}

/// Whose left/right a horizontal adjective is evaluated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Participant,
    Director,
}

impl Frame {
    pub fn named_by(pov: Pov) -> Frame {
        match pov {
            Pov::Mine => Frame::Director,
            Pov::Yours => Frame::Participant,
        }
    }
}

/// Larger values are "more" of the adjective; ties mean equally extreme.
pub fn extremeness(adjective: Adjective, frame: Frame, cell: CellRef, size_level: u8) -> i32 {
    let col = match frame {
        Frame::Participant => cell.col,
        Frame::Director => cell.director_col(),
    } as i32;
    let row = cell.row as i32;
    match adjective {
        Adjective::None => 0,
        Adjective::SizeLargest => size_level as i32,
        Adjective::SizeSmallest => -(size_level as i32),
        Adjective::VTopmost => -row,
        Adjective::VBottommost => row,
        Adjective::HRightmost => col,
        Adjective::HLeftmost => -col,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolverPolicy {
    pub respect_occlusion: bool,
    /// `None` follows the instruction's point of view.
    pub frame_override: Option<Frame>,
    /// Break remaining ties by topmost-then-leftmost scan instead of failing.
    pub scan_tie_break: bool,
}

impl ResolverPolicy {
    pub const DIRECTOR: ResolverPolicy =
        ResolverPolicy { respect_occlusion: true, frame_override: None, scan_tie_break: false };
    pub const EGOCENTRIC: ResolverPolicy = ResolverPolicy {
        respect_occlusion: false,
        frame_override: Some(Frame::Participant),
        scan_tie_break: true,
    };
}

/// Items matching the description, optionally restricted to cells the
/// director can see, in row-major order.
pub fn matching_cells(grid: &Grid, instruction: &Instruction, visible_only: bool) -> Vec<CellRef> {
    grid.occupied()
        .filter(|(c, item)| {
            instruction.description.matches(item) && !(visible_only && grid.cell(*c).occluded)
        })
        .map(|(c, _)| c)
        .collect()
}

pub fn resolve(grid: &Grid, instruction: &Instruction, policy: ResolverPolicy) -> Result<CellRef, OracleError> {
    let candidates = matching_cells(grid, instruction, policy.respect_occlusion);
    if candidates.is_empty() {
        return Err(OracleError::NoCandidates);
    }
    let frame = policy.frame_override.unwrap_or(Frame::named_by(instruction.pov));
    let score = |c: CellRef| {
        let size = grid.cell(c).item.as_ref().map_or(0, |i| i.size_level);
        extremeness(instruction.adjective, frame, c, size)
    };
    let best = candidates.iter().map(|&c| score(c)).max().expect("non-empty");
    let remaining: Vec<CellRef> = candidates.into_iter().filter(|&c| score(c) == best).collect();
    match remaining.len() {
        1 => Ok(remaining[0]),
        // row-major order is already topmost-then-leftmost
        _ if policy.scan_tie_break => Ok(remaining[0]),
        n => Err(OracleError::Ambiguous(n)),
    }
}

pub fn answer_director(grid: &Grid, instruction: &Instruction) -> Result<CellRef, OracleError> {
    resolve(grid, instruction, ResolverPolicy::DIRECTOR)
}

/// Resolution by a listener who cannot set aside their own view: occluded
/// items count as candidates and left/right is always the participant's.
pub fn answer_director_egocentric(grid: &Grid, instruction: &Instruction) -> Result<CellRef, OracleError> {
    resolve(grid, instruction, ResolverPolicy::EGOCENTRIC)
}

/// Convenience used by agents and tests: folded disparity of a trial.
pub fn disparity_of(trial: &RftTrial) -> f64 {
    fold_disparity(trial.figure_orientation).degrees()
}
