//! Rotating Figure Task: stimulus sets, trial generation and prompts.

use crate::geometry::{
    bin_disparity, facing_wall, fold_disparity, normalize, sample_cone_position, Angle,
    ConeConfig, ConeMode, Disparity, DisparityBin, Placement, Side, Wall,
};
use crate::prompts;
use crate::seed::{derive_seed, rng_for};
use crate::symbols::{Glyph, OrientationMode, PlacedSymbol};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RftError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("n must be at least 1")]
    EmptyRequest,
    #[error("unknown stimulus set {0:?}")]
    UnknownSet(String),
    #[error("could not separate symbols for scene {0}")]
    Placement(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RftSet {
    Control1,
    Control2,
    Test1,
    Test2,
    Test3,
}

impl RftSet {
    pub const ALL: [RftSet; 5] = [
        RftSet::Control1,
        RftSet::Control2,
        RftSet::Test1,
        RftSet::Test2,
        RftSet::Test3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RftSet::Control1 => "control_1",
            RftSet::Control2 => "control_2",
            RftSet::Test1 => "test_1",
            RftSet::Test2 => "test_2",
            RftSet::Test3 => "test_3",
        }
    }

    /// Question variants generated for each scene.
    pub fn question_types(self) -> &'static [QuestionType] {
        match self {
            RftSet::Test3 => &[QuestionType::Visuospatial],
            _ => &[QuestionType::Visual, QuestionType::Spatial],
        }
    }

    pub fn is_test(self) -> bool {
        matches!(self, RftSet::Test1 | RftSet::Test2 | RftSet::Test3)
    }
}

impl fmt::Display for RftSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RftSet {
    type Err = RftError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RftSet::ALL
            .into_iter()
            .find(|set| set.as_str() == s)
            .ok_or_else(|| RftError::UnknownSet(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum QuestionType {
    Visual,
    Spatial,
    Visuospatial,
}

impl QuestionType {
    pub fn as_str(self) -> &'static str {
        match self {
            QuestionType::Visual => "VISUAL",
            QuestionType::Spatial => "SPATIAL",
            QuestionType::Visuospatial => "VISUOSPATIAL",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum WallColor {
    Red,
    Green,
    Blue,
    Black,
}

impl WallColor {
    pub const ALL: [WallColor; 4] = [WallColor::Red, WallColor::Green, WallColor::Blue, WallColor::Black];

    pub fn as_str(self) -> &'static str {
        match self {
            WallColor::Red => "RED",
            WallColor::Green => "GREEN",
            WallColor::Blue => "BLUE",
            WallColor::Black => "BLACK",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallColors {
    pub top: WallColor,
    pub right: WallColor,
    pub bottom: WallColor,
    pub left: WallColor,
}

impl WallColors {
    pub fn color_of(&self, wall: Wall) -> WallColor {
        match wall {
            Wall::Top => self.top,
            Wall::Right => self.right,
            Wall::Bottom => self.bottom,
            Wall::Left => self.left,
        }
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = [self.top, self.right, self.bottom, self.left];
        seen.sort();
        seen == WallColor::ALL
    }

    fn shuffled<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut c = WallColor::ALL;
        c.shuffle(rng);
        WallColors { top: c[0], right: c[1], bottom: c[2], left: c[3] }
    }
}

/// Placement ranges for all five sets. Radii and sizes are fractions of the
/// room half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RftConfig {
    pub cone: ConeConfig,
    pub jitter_bound: f64,
    pub control1_orientation_min: u16,
    pub control1_orientation_max: u16,
    /// Control 1 symbols sit within this many degrees of due left/right.
    pub control1_spread: f64,
    /// Glyph half-width.
    pub symbol_size: f64,
    /// Minimum center distance between the two Test 3 symbols.
    pub min_symbol_separation: f64,
}

impl Default for RftConfig {
    fn default() -> Self {
        RftConfig {
            cone: ConeConfig::default(),
            jitter_bound: 10.0,
            control1_orientation_min: 70,
            control1_orientation_max: 110,
            control1_spread: 30.0,
            symbol_size: 0.1,
            min_symbol_separation: 0.25,
        }
    }
}

impl RftConfig {
    pub fn validate(&self) -> Result<(), RftError> {
        let c = &self.cone;
        let bad = |m: &str| Err(RftError::InvalidConfig(m.to_string()));
        if !(c.fov_half_angle > 0.0 && c.fov_half_angle < 90.0) {
            return bad("fov_half_angle must be in (0, 90)");
        }
        if !(c.lateral_min > 0.0 && c.lateral_min <= c.lateral_max && c.lateral_max <= c.fov_half_angle) {
            return bad("lateral offsets must satisfy 0 < min <= max <= fov_half_angle");
        }
        if !(c.radius_min > 0.0 && c.radius_min <= c.radius_max && c.radius_max + self.symbol_size <= 1.0) {
            return bad("radii must satisfy 0 < min <= max and max + symbol_size <= 1");
        }
        if !(0.0..45.0).contains(&self.jitter_bound) {
            return bad("jitter_bound must be in [0, 45)");
        }
        if self.control1_orientation_min > self.control1_orientation_max
            || self.control1_orientation_max >= 360
        {
            return bad("control 1 orientation range must be ordered and below 360");
        }
        if !(0.0..90.0).contains(&self.control1_spread) {
            return bad("control1_spread must be in [0, 90)");
        }
        if self.symbol_size <= 0.0 || self.min_symbol_separation < 0.0 {
            return bad("symbol_size must be positive and separation non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RftPrompts {
    pub context: String,
    pub question: String,
}

/// Where a trial's randomness came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub base: u64,
    pub stream: u64,
    pub derived: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RftTrial {
    pub trial_id: String,
    pub scene_id: String,
    pub set: RftSet,
    pub figure_orientation: Angle,
    pub symbols: Vec<PlacedSymbol>,
    pub wall_colors: WallColors,
    pub question_type: QuestionType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queried_side: Option<Side>,
    pub prompts: RftPrompts,
    pub ground_truth: String,
    pub disparity: Disparity,
    pub bin: DisparityBin,
    pub corner_flag: bool,
    pub fov_half_angle: f64,
    pub symbol_size: f64,
    pub seed: SeedRecord,
}

/// One rendered scene shared by a trial's question variants.
#[derive(Debug, Clone, PartialEq)]
struct Scene {
    orientation: Angle,
    symbols: Vec<PlacedSymbol>,
    walls: WallColors,
    queried_side: Option<Side>,
    // Generator-side truth, derived from the sampling choices rather than
    // from the geometry of the finished scene.
    intended_side: Option<Side>,
    intended_placement: Option<Placement>,
    intended_glyph: Option<Glyph>,
}

fn uniform_orientation<R: Rng + ?Sized>(rng: &mut R, lo: u16, hi: u16) -> Angle {
    Angle::new(rng.gen_range(lo..=hi) as f64)
}

fn balanced_flags(n: usize, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let mut flags: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
    flags.shuffle(rng);
    flags
}

fn random_glyph<R: Rng + ?Sized>(rng: &mut R) -> Glyph {
    *Glyph::ALL.choose(rng).expect("alphabet is non-empty")
}

fn distance(a: &PlacedSymbol, b: &PlacedSymbol) -> f64 {
    let (ax, ay) = a.offset_from_center();
    let (bx, by) = b.offset_from_center();
    ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt()
}

fn sample_scene(
    set: RftSet,
    cfg: &RftConfig,
    flag: bool,
    rng: &mut ChaCha8Rng,
    scene_index: u64,
) -> Result<Scene, RftError> {
    let walls = WallColors::shuffled(rng);
    let jitter = |rng: &mut ChaCha8Rng| {
        if cfg.jitter_bound > 0.0 {
            rng.gen_range(-cfg.jitter_bound..=cfg.jitter_bound)
        } else {
            0.0
        }
    };
    let mut scene = Scene {
        orientation: Angle::new(0.0),
        symbols: Vec::new(),
        walls,
        queried_side: None,
        intended_side: None,
        intended_placement: None,
        intended_glyph: None,
    };
    match set {
        RftSet::Control1 => {
            scene.orientation =
                uniform_orientation(rng, cfg.control1_orientation_min, cfg.control1_orientation_max);
            let side = if flag { Side::Right } else { Side::Left };
            let center = if side == Side::Right { 90.0 } else { 270.0 };
            let spread = if cfg.control1_spread > 0.0 {
                rng.gen_range(-cfg.control1_spread..=cfg.control1_spread)
            } else {
                0.0
            };
            let radius = rng.gen_range(cfg.cone.radius_min..=cfg.cone.radius_max);
            scene.symbols.push(PlacedSymbol {
                glyph: random_glyph(rng),
                orientation_mode: OrientationMode::Upright,
                jitter: 0.0,
                position_angle: Angle::new(center + spread),
                radius,
                rendered_up: Angle::new(0.0),
            });
            scene.intended_side = Some(side);
        }
        RftSet::Control2 => {
            scene.orientation = uniform_orientation(rng, 0, 359);
        }
        RftSet::Test1 => {
            scene.orientation = uniform_orientation(rng, 0, 359);
            let placement = if flag { Placement::Front } else { Placement::Behind };
            let mode = if rng.gen_bool(0.5) { OrientationMode::Upright } else { OrientationMode::Inverted };
            let cone = match placement {
                Placement::Front => ConeMode::Front,
                Placement::Behind => ConeMode::Behind,
            };
            let (pos, radius) = sample_cone_position(scene.orientation, cone, &cfg.cone, rng);
            let j = jitter(rng);
            scene
                .symbols
                .push(PlacedSymbol::facing(random_glyph(rng), scene.orientation, mode, j, pos, radius));
            scene.intended_placement = Some(placement);
        }
        RftSet::Test2 => {
            scene.orientation = uniform_orientation(rng, 0, 359);
            let side = if flag { Side::Right } else { Side::Left };
            let cone = match side {
                Side::Left => ConeMode::FrontLeft,
                Side::Right => ConeMode::FrontRight,
            };
            let (pos, radius) = sample_cone_position(scene.orientation, cone, &cfg.cone, rng);
            let j = jitter(rng);
            scene.symbols.push(PlacedSymbol::facing(
                random_glyph(rng),
                scene.orientation,
                OrientationMode::Upright,
                j,
                pos,
                radius,
            ));
            scene.intended_side = Some(side);
        }
        RftSet::Test3 => {
            scene.orientation = uniform_orientation(rng, 0, 359);
            let left_glyph = random_glyph(rng);
            let right_glyph = loop {
                let g = random_glyph(rng);
                if g != left_glyph && g != left_glyph.rotation_pair() {
                    break g;
                }
            };
            let mut placed = None;
            for _ in 0..200 {
                let (lp, lr) = sample_cone_position(scene.orientation, ConeMode::FrontLeft, &cfg.cone, rng);
                let (rp, rr) = sample_cone_position(scene.orientation, ConeMode::FrontRight, &cfg.cone, rng);
                let (lj, rj) = (jitter(rng), jitter(rng));
                let l = PlacedSymbol::facing(left_glyph, scene.orientation, OrientationMode::Upright, lj, lp, lr);
                let r = PlacedSymbol::facing(right_glyph, scene.orientation, OrientationMode::Upright, rj, rp, rr);
                if distance(&l, &r) >= cfg.min_symbol_separation {
                    placed = Some((l, r));
                    break;
                }
            }
            let (l, r) = placed.ok_or(RftError::Placement(scene_index))?;
            scene.symbols = if rng.gen_bool(0.5) { vec![l, r] } else { vec![r, l] };
            let side = if flag { Side::Right } else { Side::Left };
            scene.queried_side = Some(side);
            scene.intended_side = Some(side);
            scene.intended_glyph = Some(match side {
                Side::Left => left_glyph,
                Side::Right => right_glyph,
            });
        }
    }
    Ok(scene)
}

/// Generator-side ground truth. Uses the sampling intent recorded on the
/// scene; the oracle recomputes the same answers from geometry.
fn intended_answer(set: RftSet, q: QuestionType, scene: &Scene) -> String {
    let first = scene.symbols.first();
    match (set, q) {
        (RftSet::Control1, QuestionType::Visual) | (RftSet::Test2, QuestionType::Visual) => {
            first.expect("symbol present").glyph.to_string()
        }
        (RftSet::Control1, _) | (RftSet::Test2, _) => {
            scene.intended_side.expect("side recorded").as_str().to_string()
        }
        (RftSet::Control2, q) => {
            let sector = (normalize(scene.orientation.degrees() + 45.0) / 90.0).floor() as usize;
            let wall = Wall::ALL[sector.min(3)];
            match q {
                QuestionType::Visual => scene.walls.color_of(wall).as_str().to_string(),
                _ => wall.as_str().to_string(),
            }
        }
        (RftSet::Test1, QuestionType::Visual) => match scene.intended_placement {
            Some(Placement::Front) => "CAN SEE".to_string(),
            _ => "CANNOT SEE".to_string(),
        },
        (RftSet::Test1, _) => scene.intended_placement.expect("placement recorded").as_str().to_string(),
        (RftSet::Test3, _) => scene.intended_glyph.expect("glyph recorded").to_string(),
    }
}

pub fn question_text(set: RftSet, q: QuestionType, queried_side: Option<Side>) -> String {
    match (set, q) {
        (RftSet::Control1, QuestionType::Visual) => prompts::CONTROL_1_VISUAL.into(),
        (RftSet::Control1, _) => prompts::CONTROL_1_SPATIAL.into(),
        (RftSet::Control2, QuestionType::Visual) => prompts::CONTROL_2_VISUAL.into(),
        (RftSet::Control2, _) => prompts::CONTROL_2_SPATIAL.into(),
        (RftSet::Test1, QuestionType::Visual) => prompts::TEST_1_VISUAL.into(),
        (RftSet::Test1, _) => prompts::TEST_1_SPATIAL.into(),
        (RftSet::Test2, QuestionType::Visual) => prompts::TEST_2_VISUAL.into(),
        (RftSet::Test2, _) => prompts::TEST_2_SPATIAL.into(),
        (RftSet::Test3, _) => {
            let side = queried_side.unwrap_or(Side::Left).as_str().to_lowercase();
            prompts::TEST_3_TEMPLATE.replace("{side}", &side)
        }
    }
}

pub fn context_text(set: RftSet) -> &'static str {
    match set {
        RftSet::Control2 => prompts::CONTEXT_WALLS,
        RftSet::Test3 => prompts::CONTEXT_TWO_SYMBOLS,
        _ => prompts::CONTEXT_ONE_SYMBOL,
    }
}

/// `(system prompt, context, question)` for a trial.
pub fn build_prompts(trial: &RftTrial) -> (String, String, String) {
    (
        prompts::RFT_SYSTEM_PROMPT.to_string(),
        context_text(trial.set).to_string(),
        question_text(trial.set, trial.question_type, trial.queried_side),
    )
}

pub fn trial_id(set: RftSet, seed: u64, index: usize) -> String {
    format!("rft-{}-{}-{:05}", set.as_str(), seed, index)
}

pub fn scene_id(set: RftSet, seed: u64, scene: usize) -> String {
    format!("rft-{}-{}-s{:05}", set.as_str(), seed, scene)
}

/// Generates `n` scenes of `set`. Sets with both a visual and a spatial
/// question yield two trials per scene, so the result holds `n` or `2n`
/// trials in scene order.
pub fn generate_set(set: RftSet, n: usize, seed: u64, cfg: &RftConfig) -> Result<Vec<RftTrial>, RftError> {
    cfg.validate()?;
    if n == 0 {
        return Err(RftError::EmptyRequest);
    }
    let mut balance_rng = rng_for(seed, &format!("{}/balance", set.as_str()), 0);
    let flags = balanced_flags(n, &mut balance_rng);
    let questions = set.question_types();
    let mut trials = Vec::with_capacity(n * questions.len());
    for (scene_index, &flag) in flags.iter().enumerate() {
        let tag = set.as_str();
        let derived = derive_seed(seed, tag, scene_index as u64);
        let mut rng = rng_for(seed, tag, scene_index as u64);
        let scene = sample_scene(set, cfg, flag, &mut rng, scene_index as u64)?;
        let disparity = fold_disparity(scene.orientation);
        let bin = bin_disparity(disparity.degrees()).expect("folded disparity is in range");
        for &q in questions {
            let index = trials.len();
            trials.push(RftTrial {
                trial_id: trial_id(set, seed, index),
                scene_id: scene_id(set, seed, scene_index),
                set,
                figure_orientation: scene.orientation,
                symbols: scene.symbols.clone(),
                wall_colors: scene.walls,
                question_type: q,
                queried_side: scene.queried_side,
                prompts: RftPrompts {
                    context: context_text(set).to_string(),
                    question: question_text(set, q, scene.queried_side),
                },
                ground_truth: intended_answer(set, q, &scene),
                disparity,
                bin,
                corner_flag: facing_wall(scene.orientation).corner_flag,
                fov_half_angle: cfg.cone.fov_half_angle,
                symbol_size: cfg.symbol_size,
                seed: SeedRecord { base: seed, stream: scene_index as u64, derived },
            });
        }
    }
    Ok(trials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{front_or_behind, side_of_figure};

    #[test]
    fn control_1_orientations_constrained() {
        let trials = generate_set(RftSet::Control1, 3000, 5, &RftConfig::default()).unwrap();
        assert_eq!(trials.len(), 6000);
        for t in &trials {
            let o = t.figure_orientation.degrees();
            assert!((70.0..=110.0).contains(&o));
            assert_eq!(t.symbols.len(), 1);
            assert_eq!(t.symbols[0].rendered_up.degrees(), 0.0);
        }
    }

    #[test]
    fn control_2_masks_symbols() {
        for t in generate_set(RftSet::Control2, 200, 1, &RftConfig::default()).unwrap() {
            assert!(t.symbols.is_empty());
            assert!(t.wall_colors.is_bijection());
        }
    }

    #[test]
    fn test_3_two_distinct_symbols() {
        let trials = generate_set(RftSet::Test3, 100, 9, &RftConfig::default()).unwrap();
        assert_eq!(trials.len(), 100);
        for t in &trials {
            assert_eq!(t.symbols.len(), 2);
            assert_ne!(t.symbols[0].glyph, t.symbols[1].glyph);
            assert_eq!(t.question_type, QuestionType::Visuospatial);
            let sides: Vec<Side> = t
                .symbols
                .iter()
                .map(|s| side_of_figure(s.position_angle, t.figure_orientation).unwrap())
                .collect();
            assert!(sides.contains(&Side::Left) && sides.contains(&Side::Right));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_set(RftSet::Test1, 100, 17, &RftConfig::default()).unwrap();
        let b = generate_set(RftSet::Test1, 100, 17, &RftConfig::default()).unwrap();
        assert_eq!(a, b);
        let c = generate_set(RftSet::Test1, 100, 18, &RftConfig::default()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn visual_and_spatial_share_scene() {
        let trials = generate_set(RftSet::Test2, 50, 3, &RftConfig::default()).unwrap();
        for pair in trials.chunks(2) {
            assert_eq!(pair[0].scene_id, pair[1].scene_id);
            assert_eq!(pair[0].symbols, pair[1].symbols);
            assert_eq!(pair[0].question_type, QuestionType::Visual);
            assert_eq!(pair[1].question_type, QuestionType::Spatial);
        }
        assert_eq!(trials[0].trial_id, "rft-test_2-3-00000");
        assert_eq!(trials[3].trial_id, "rft-test_2-3-00003");
    }

    #[test]
    fn placements_balanced_at_3000() {
        let cfg = RftConfig::default();
        let t1 = generate_set(RftSet::Test1, 3000, 21, &cfg).unwrap();
        let front = t1
            .iter()
            .filter(|t| t.question_type == QuestionType::Spatial)
            .filter(|t| front_or_behind(t.symbols[0].position_angle, t.figure_orientation, 30.0).unwrap() == Placement::Front)
            .count();
        assert!((front as f64 / 3000.0 - 0.5).abs() <= 0.03);
        let t2 = generate_set(RftSet::Test2, 3000, 21, &cfg).unwrap();
        let right = t2
            .iter()
            .filter(|t| t.question_type == QuestionType::Spatial && t.ground_truth == "RIGHT")
            .count();
        assert!((right as f64 / 3000.0 - 0.5).abs() <= 0.03);
    }

    #[test]
    fn disparity_matches_orientation() {
        for set in RftSet::ALL {
            for t in generate_set(set, 100, 2, &RftConfig::default()).unwrap() {
                assert_eq!(t.disparity, fold_disparity(t.figure_orientation));
            }
        }
    }

    #[test]
    fn prompts_match_templates() {
        let cfg = RftConfig::default();
        let t1 = generate_set(RftSet::Test1, 1, 0, &cfg).unwrap();
        assert_eq!(
            build_prompts(&t1[0]).2,
            "Can the person see the number or letter? Respond with either: CAN SEE or CANNOT SEE"
        );
        let c2 = generate_set(RftSet::Control2, 1, 0, &cfg).unwrap();
        assert!(build_prompts(&c2[1]).2.ends_with("Respond with a single word: LEFT, RIGHT, TOP or BOTTOM"));
        assert_eq!(
            question_text(RftSet::Test3, QuestionType::Visuospatial, Some(Side::Right)),
            "What number or letter can the person see on their right side? Respond with a single number or letter:"
        );
        assert!(build_prompts(&t1[0]).0.starts_with("You are participating in a visual perspective-taking experiment."));
    }

    #[test]
    fn invalid_config_rejected() {
        let mut cfg = RftConfig::default();
        cfg.cone.lateral_max = 40.0;
        assert!(matches!(generate_set(RftSet::Test2, 3, 0, &cfg), Err(RftError::InvalidConfig(_))));
        assert_eq!(generate_set(RftSet::Test2, 0, 0, &RftConfig::default()), Err(RftError::EmptyRequest));
    }

    #[test]
    fn set_names_round_trip() {
        for s in RftSet::ALL {
            assert_eq!(s.as_str().parse::<RftSet>().unwrap(), s);
        }
        assert!("test_9".parse::<RftSet>().is_err());
    }
}
