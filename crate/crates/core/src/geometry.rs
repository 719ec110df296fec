//! Planar angle utilities for top-down scenes.
//!
//! Convention: 0° points at the top of the image, angles grow clockwise, so
//! 90° points at the image's right edge. All headings and symbol positions
//! are stored in degrees normalized to `[0, 360)`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("disparity {0} outside [0, 180]")]
    DisparityOutOfRange(f64),
    #[error("symbol at offset {0}° is not lateral to the figure")]
    DegenerateOffset(f64),
    #[error("symbol at offset {offset}° lies outside both {half_angle}° cones")]
    OutsideCones { offset: f64, half_angle: f64 },
}

/// Wraps any finite angle into `[0, 360)`.
pub fn normalize(degrees: f64) -> f64 {
    let r = degrees.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// An orientation in degrees, always normalized to `[0, 360)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub fn new(degrees: f64) -> Self {
        Angle(normalize(degrees))
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0.to_radians()
    }

    /// Returns this angle rotated clockwise by `delta` degrees.
    pub fn rotated(self, delta: f64) -> Self {
        Angle::new(self.0 + delta)
    }

    /// Signed representation in `(-180, 180]`.
    pub fn signed(self) -> f64 {
        if self.0 > 180.0 {
            self.0 - 360.0
        } else {
            self.0
        }
    }

    /// Unit direction in image coordinates (x right, y down).
    pub fn unit_vector(self) -> (f64, f64) {
        let r = self.radians();
        (r.sin(), -r.cos())
    }
}

impl From<f64> for Angle {
    fn from(d: f64) -> Self {
        Angle::new(d)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.0)
    }
}

/// Folded angular difference between viewer and figure, in `[0, 180]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Disparity(f64);

impl Disparity {
    pub fn degrees(self) -> f64 {
        self.0
    }
}

pub fn fold_disparity(orientation: Angle) -> Disparity {
    let d = orientation.degrees();
    Disparity(if d <= 180.0 { d } else { 360.0 - d })
}

/// One of the four 45° disparity bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DisparityBin(u8);

impl DisparityBin {
    pub const WIDTH: f64 = 45.0;

    pub fn all() -> [DisparityBin; 4] {
        [DisparityBin(1), DisparityBin(2), DisparityBin(3), DisparityBin(4)]
    }

    pub fn from_index(index: u8) -> Option<Self> {
        (1..=4).contains(&index).then_some(DisparityBin(index))
    }

    /// 1-based bin index.
    pub fn index(self) -> u8 {
        self.0
    }

    pub fn lo(self) -> f64 {
        (self.0 - 1) as f64 * Self::WIDTH
    }

    pub fn hi(self) -> f64 {
        self.0 as f64 * Self::WIDTH
    }

    pub fn midpoint(self) -> f64 {
        self.lo() + Self::WIDTH / 2.0
    }

    pub fn label(self) -> String {
        format!("{}-{}", self.lo(), self.hi())
    }
}

/// Bins are `[0,45)`, `[45,90)`, `[90,135)`, `[135,180]`.
pub fn bin_disparity(d: f64) -> Result<DisparityBin, GeometryError> {
    if !(0.0..=180.0).contains(&d) {
        return Err(GeometryError::DisparityOutOfRange(d));
    }
    let idx = ((d / DisparityBin::WIDTH).floor() as u8).min(3);
    Ok(DisparityBin(idx + 1))
}

/// `target - reference` wrapped into `(-180, 180]`; positive is clockwise.
pub fn signed_offset(target: Angle, reference: Angle) -> f64 {
    let d = normalize(target.degrees() - reference.degrees());
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "LEFT",
            Side::Right => "RIGHT",
        }
    }
}

/// Which side of a figure facing `heading` the symbol lies on.
pub fn side_of_figure(symbol_angle: Angle, heading: Angle) -> Result<Side, GeometryError> {
    let off = signed_offset(symbol_angle, heading);
    if off == 0.0 || off == 180.0 {
        return Err(GeometryError::DegenerateOffset(off));
    }
    Ok(if off > 0.0 { Side::Right } else { Side::Left })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Placement {
    Front,
    Behind,
}

impl Placement {
    pub fn opposite(self) -> Placement {
        match self {
            Placement::Front => Placement::Behind,
            Placement::Behind => Placement::Front,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Placement::Front => "FRONT",
            Placement::Behind => "BEHIND",
        }
    }
}

/// Classifies a symbol against the figure's view cone and its mirror behind.
pub fn front_or_behind(
    symbol_angle: Angle,
    heading: Angle,
    fov_half_angle: f64,
) -> Result<Placement, GeometryError> {
    let off = signed_offset(symbol_angle, heading);
    if off.abs() <= fov_half_angle {
        return Ok(Placement::Front);
    }
    let back = signed_offset(symbol_angle, heading.rotated(180.0));
    if back.abs() <= fov_half_angle {
        return Ok(Placement::Behind);
    }
    Err(GeometryError::OutsideCones {
        offset: off,
        half_angle: fov_half_angle,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Wall {
    Top,
    Right,
    Bottom,
    Left,
}

impl Wall {
    pub const ALL: [Wall; 4] = [Wall::Top, Wall::Right, Wall::Bottom, Wall::Left];

    pub fn opposite(self) -> Wall {
        match self {
            Wall::Top => Wall::Bottom,
            Wall::Right => Wall::Left,
            Wall::Bottom => Wall::Top,
            Wall::Left => Wall::Right,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Wall::Top => "TOP",
            Wall::Right => "RIGHT",
            Wall::Bottom => "BOTTOM",
            Wall::Left => "LEFT",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallSide {
    pub side: Wall,
    pub corner_flag: bool,
}

/// Orientations within this many degrees of a diagonal are corner-ambiguous.
pub const CORNER_MARGIN: f64 = 10.0;

/// Offset from the nearest diagonal in `(-10, 10]`. The half-open window
/// covers exactly 20 integer headings per corner, so the flagged fraction
/// is 80/360 for integer and continuous sampling alike.
pub fn is_corner(heading: Angle) -> bool {
    [45.0, 135.0, 225.0, 315.0].iter().any(|&c| {
        let d = signed_offset(heading, Angle::new(c));
        d > -CORNER_MARGIN && d <= CORNER_MARGIN
    })
}

/// The wall the figure faces: TOP `[-45,45)`, RIGHT `[45,135)`,
/// BOTTOM `[135,225)`, LEFT `[225,315)`.
pub fn facing_wall(heading: Angle) -> WallSide {
    let h = heading.degrees();
    let side = if !(45.0..315.0).contains(&h) {
        Wall::Top
    } else if h < 135.0 {
        Wall::Right
    } else if h < 225.0 {
        Wall::Bottom
    } else {
        Wall::Left
    };
    WallSide {
        side,
        corner_flag: is_corner(heading),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConeMode {
    Front,
    Behind,
    FrontLeft,
    FrontRight,
}

/// Offset and radius ranges for placing symbols around the figure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeConfig {
    pub fov_half_angle: f64,
    pub lateral_min: f64,
    pub lateral_max: f64,
    /// Radii are fractions of the room half-width.
    pub radius_min: f64,
    pub radius_max: f64,
}

impl Default for ConeConfig {
    fn default() -> Self {
        ConeConfig {
            fov_half_angle: 30.0,
            lateral_min: 10.0,
            lateral_max: 28.0,
            radius_min: 0.35,
            radius_max: 0.75,
        }
    }
}

/// Samples a polar position inside the requested cone region.
pub fn sample_cone_position<R: Rng + ?Sized>(
    heading: Angle,
    mode: ConeMode,
    cfg: &ConeConfig,
    rng: &mut R,
) -> (Angle, f64) {
    let half = cfg.fov_half_angle;
    let offset = match mode {
        ConeMode::Front => rng.gen_range(-half..=half),
        ConeMode::Behind => 180.0 + rng.gen_range(-half..=half),
        ConeMode::FrontLeft => -rng.gen_range(cfg.lateral_min..=cfg.lateral_max),
        ConeMode::FrontRight => rng.gen_range(cfg.lateral_min..=cfg.lateral_max),
    };
    let radius = rng.gen_range(cfg.radius_min..=cfg.radius_max);
    (heading.rotated(offset), radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Independent route: signed angle between unit vectors via atan2 of
    /// their cross and dot products (y-down, so positive cross = clockwise).
    fn brute_signed(target: f64, reference: f64) -> f64 {
        let (tx, ty) = Angle::new(target).unit_vector();
        let (rx, ry) = Angle::new(reference).unit_vector();
        let cross = rx * ty - ry * tx;
        let dot = rx * tx + ry * ty;
        cross.atan2(dot).to_degrees()
    }

    #[test]
    fn fold_examples() {
        assert_eq!(fold_disparity(Angle::new(0.0)).degrees(), 0.0);
        assert_eq!(fold_disparity(Angle::new(270.0)).degrees(), 90.0);
        let d = fold_disparity(Angle::new(157.0));
        assert_eq!(d.degrees(), 157.0);
        assert_eq!(bin_disparity(d.degrees()).unwrap().midpoint(), 157.5);
    }

    #[test]
    fn bin_examples_and_edges() {
        let b = bin_disparity(10.0).unwrap();
        assert_eq!((b.index(), b.midpoint()), (1, 22.5));
        assert_eq!(bin_disparity(45.0).unwrap().index(), 2);
        assert_eq!(bin_disparity(180.0).unwrap().index(), 4);
        assert_eq!(bin_disparity(134.999).unwrap().index(), 3);
        assert!(bin_disparity(-0.5).is_err());
        assert!(bin_disparity(180.5).is_err());
        let mids: Vec<f64> = DisparityBin::all().iter().map(|b| b.midpoint()).collect();
        assert_eq!(mids, vec![22.5, 67.5, 112.5, 157.5]);
    }

    #[test]
    fn signed_offset_examples() {
        assert_eq!(signed_offset(Angle::new(90.0), Angle::new(0.0)), 90.0);
        assert_eq!(signed_offset(Angle::new(90.0), Angle::new(180.0)), -90.0);
        assert_eq!(signed_offset(Angle::new(100.0), Angle::new(70.0)), 30.0);
        assert!((brute_signed(100.0, 70.0) - 30.0).abs() < 1e-9);
        assert_eq!(signed_offset(Angle::new(0.0), Angle::new(180.0)), 180.0);
    }

    #[test]
    fn side_examples() {
        assert_eq!(side_of_figure(Angle::new(20.0), Angle::new(0.0)), Ok(Side::Right));
        // facing down the image: the figure's right is the viewer's left
        assert_eq!(side_of_figure(Angle::new(200.0), Angle::new(180.0)), Ok(Side::Right));
        assert_eq!(side_of_figure(Angle::new(160.0), Angle::new(180.0)), Ok(Side::Left));
        assert!(brute_signed(160.0, 180.0) < 0.0);
        assert_eq!(side_of_figure(Angle::new(75.0), Angle::new(90.0)), Ok(Side::Left));
        assert!(brute_signed(75.0, 90.0) < 0.0);
        assert!(side_of_figure(Angle::new(90.0), Angle::new(90.0)).is_err());
        assert!(side_of_figure(Angle::new(270.0), Angle::new(90.0)).is_err());
    }

    #[test]
    fn front_behind_examples() {
        assert_eq!(front_or_behind(Angle::new(15.0), Angle::new(0.0), 30.0), Ok(Placement::Front));
        assert_eq!(front_or_behind(Angle::new(200.0), Angle::new(0.0), 30.0), Ok(Placement::Behind));
        assert_eq!(front_or_behind(Angle::new(95.0), Angle::new(120.0), 30.0), Ok(Placement::Front));
        assert!((brute_signed(95.0, 120.0) + 25.0).abs() < 1e-9);
        assert!(front_or_behind(Angle::new(90.0), Angle::new(0.0), 30.0).is_err());
    }

    #[test]
    fn facing_wall_examples() {
        assert_eq!(facing_wall(Angle::new(0.0)), WallSide { side: Wall::Top, corner_flag: false });
        assert_eq!(facing_wall(Angle::new(90.0)), WallSide { side: Wall::Right, corner_flag: false });
        assert_eq!(facing_wall(Angle::new(40.0)), WallSide { side: Wall::Top, corner_flag: true });
        assert_eq!(facing_wall(Angle::new(45.0)).side, Wall::Right);
        assert_eq!(facing_wall(Angle::new(135.0)).side, Wall::Bottom);
        assert_eq!(facing_wall(Angle::new(225.0)).side, Wall::Left);
        assert_eq!(facing_wall(Angle::new(315.0)).side, Wall::Top);
        assert_eq!(facing_wall(Angle::new(314.0)).side, Wall::Left);
        assert!(facing_wall(Angle::new(325.0)).corner_flag);
        assert!(!facing_wall(Angle::new(326.0)).corner_flag);
        assert!(!facing_wall(Angle::new(305.0)).corner_flag);
        assert!(facing_wall(Angle::new(306.0)).corner_flag);
    }

    #[test]
    fn cone_front_property_10k() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cfg = ConeConfig::default();
        for _ in 0..10_000 {
            let (a, r) = sample_cone_position(Angle::new(0.0), ConeMode::Front, &cfg, &mut rng);
            assert!(a.signed().abs() <= 30.0 + 1e-9, "{a}");
            assert!((0.35..=0.75).contains(&r));
            let (b, _) = sample_cone_position(Angle::new(0.0), ConeMode::Behind, &cfg, &mut rng);
            assert!((150.0..=210.0).contains(&b.degrees()), "{b}");
        }
    }

    #[test]
    fn cone_lateral_modes_have_matching_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = ConeConfig::default();
        for h in (0..360).step_by(7) {
            let heading = Angle::new(h as f64);
            let (l, _) = sample_cone_position(heading, ConeMode::FrontLeft, &cfg, &mut rng);
            let (r, _) = sample_cone_position(heading, ConeMode::FrontRight, &cfg, &mut rng);
            let lo = signed_offset(l, heading);
            let ro = signed_offset(r, heading);
            assert!((-28.0 - 1e-9..=-10.0 + 1e-9).contains(&lo));
            assert!((10.0 - 1e-9..=28.0 + 1e-9).contains(&ro));
        }
    }

    #[test]
    fn cone_sampling_is_deterministic() {
        let cfg = ConeConfig::default();
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            sample_cone_position(Angle::new(33.0), ConeMode::FrontRight, &cfg, &mut rng)
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn corner_fraction_over_integer_orientations() {
        let flagged = (0..360).filter(|&h| is_corner(Angle::new(h as f64))).count();
        // 20 integers per diagonal
        assert_eq!(flagged, 80);
    }

    proptest! {
        #[test]
        fn normalize_in_range(d in -1e6f64..1e6) {
            let n = normalize(d);
            prop_assert!((0.0..360.0).contains(&n));
        }

        #[test]
        fn normalize_periodic(d in -1000.0f64..1000.0, k in -20i32..20) {
            let a = normalize(d);
            let b = normalize(d + 360.0 * k as f64);
            let diff = (a - b).abs();
            prop_assert!(diff < 1e-9 || (360.0 - diff) < 1e-9);
        }

        #[test]
        fn fold_is_symmetric(t in 0u32..360) {
            let t = t as f64;
            prop_assert_eq!(fold_disparity(Angle::new(t)), fold_disparity(Angle::new(360.0 - t)));
        }

        #[test]
        fn every_disparity_has_one_bin(d in 0.0f64..=180.0) {
            let b = bin_disparity(d).unwrap();
            let hits = DisparityBin::all().iter().filter(|c| {
                d >= c.lo() && (d < c.hi() || (c.index() == 4 && d <= 180.0))
            }).count();
            prop_assert_eq!(hits, 1);
            prop_assert!(d >= b.lo() && d <= b.hi());
        }

        #[test]
        fn signed_offset_matches_vector_route(t in 0.0f64..360.0, r in 0.0f64..360.0) {
            let fast = signed_offset(Angle::new(t), Angle::new(r));
            let slow = brute_signed(t, r);
            let diff = (fast - slow).abs();
            prop_assert!(diff < 1e-7 || (diff - 360.0).abs() < 1e-7);
        }

        #[test]
        fn side_flips_under_reflection(h in 0.0f64..360.0, x in 0.5f64..179.5) {
            let heading = Angle::new(h);
            let a = side_of_figure(heading.rotated(x), heading).unwrap();
            let b = side_of_figure(heading.rotated(-x), heading).unwrap();
            prop_assert_ne!(a, b);
        }

        #[test]
        fn front_behind_rotation_invariant(h in 0.0f64..360.0, off in -29.9f64..29.9, back in any::<bool>(), c in 0.0f64..360.0) {
            let heading = Angle::new(h);
            let sym = heading.rotated(off + if back { 180.0 } else { 0.0 });
            let base = front_or_behind(sym, heading, 30.0).unwrap();
            let moved = front_or_behind(sym.rotated(c), heading.rotated(c), 30.0).unwrap();
            prop_assert_eq!(base, moved);
        }
    }
}
