//! Reversible glyphs: ten characters forming five 180°-rotation pairs, with
//! hand-authored stroke outlines so the pairing is exact when rendered.

use crate::geometry::{fold_disparity, Angle};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown glyph {0:?}")]
pub struct UnknownGlyph(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Glyph {
    Six,
    Nine,
    B,
    Q,
    D,
    P,
    M,
    W,
    N,
    U,
}

impl Glyph {
    pub const ALL: [Glyph; 10] = [
        Glyph::Six,
        Glyph::Nine,
        Glyph::B,
        Glyph::Q,
        Glyph::D,
        Glyph::P,
        Glyph::M,
        Glyph::W,
        Glyph::N,
        Glyph::U,
    ];

    pub fn as_char(self) -> char {
        match self {
            Glyph::Six => '6',
            Glyph::Nine => '9',
            Glyph::B => 'b',
            Glyph::Q => 'q',
            Glyph::D => 'd',
            Glyph::P => 'p',
            Glyph::M => 'm',
            Glyph::W => 'w',
            Glyph::N => 'n',
            Glyph::U => 'u',
        }
    }

    pub fn from_char(c: char) -> Result<Glyph, UnknownGlyph> {
        Glyph::ALL
            .into_iter()
            .find(|g| g.as_char() == c)
            .ok_or_else(|| UnknownGlyph(c.to_string()))
    }

    /// The glyph this one reads as after a 180° turn.
    pub fn rotation_pair(self) -> Glyph {
        match self {
            Glyph::Six => Glyph::Nine,
            Glyph::Nine => Glyph::Six,
            Glyph::B => Glyph::Q,
            Glyph::Q => Glyph::B,
            Glyph::D => Glyph::P,
            Glyph::P => Glyph::D,
            Glyph::M => Glyph::W,
            Glyph::W => Glyph::M,
            Glyph::N => Glyph::U,
            Glyph::U => Glyph::N,
        }
    }

    /// Stroke polylines in the unit square (x right, y down, glyph top at y = 0).
    pub fn outline(self) -> Vec<Vec<(f64, f64)>> {
        match self {
            Glyph::Six | Glyph::B | Glyph::D | Glyph::M | Glyph::N => base_outline(self),
            other => rotate_half_turn(&base_outline(other.rotation_pair())),
        }
    }
}

impl fmt::Display for Glyph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for Glyph {
    type Err = UnknownGlyph;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Glyph::from_char(c),
            _ => Err(UnknownGlyph(s.to_string())),
        }
    }
}

impl TryFrom<String> for Glyph {
    type Error = UnknownGlyph;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Glyph> for String {
    fn from(g: Glyph) -> String {
        g.to_string()
    }
}

pub fn rotation_pair(g: Glyph) -> Glyph {
    g.rotation_pair()
}

pub fn glyph_outline(g: Glyph) -> Vec<Vec<(f64, f64)>> {
    g.outline()
}

fn arc(cx: f64, cy: f64, r: f64, from_deg: f64, to_deg: f64, steps: usize) -> Vec<(f64, f64)> {
    // angles measured clockwise from +x in y-down coordinates
    (0..=steps)
        .map(|i| {
            let t = (from_deg + (to_deg - from_deg) * i as f64 / steps as f64).to_radians();
            (cx + r * t.cos(), cy + r * t.sin())
        })
        .collect()
}

fn base_outline(g: Glyph) -> Vec<Vec<(f64, f64)>> {
    match g {
        Glyph::Six => {
            let loop_ = arc(0.5, 0.66, 0.22, 0.0, 360.0, 32);
            let hook = vec![(0.28, 0.66), (0.29, 0.42), (0.36, 0.24), (0.48, 0.12), (0.66, 0.08)];
            vec![loop_, hook]
        }
        Glyph::B => vec![
            vec![(0.3, 0.08), (0.3, 0.9)],
            arc(0.5, 0.68, 0.2, 0.0, 360.0, 32),
        ],
        Glyph::D => vec![
            vec![(0.7, 0.08), (0.7, 0.9)],
            arc(0.5, 0.68, 0.2, 0.0, 360.0, 32),
        ],
        Glyph::M => {
            let mut first = vec![(0.15, 0.9), (0.15, 0.52)];
            first.extend(arc(0.325, 0.52, 0.175, 180.0, 360.0, 12));
            first.push((0.5, 0.9));
            let mut second = arc(0.675, 0.52, 0.175, 180.0, 360.0, 12);
            second.push((0.85, 0.9));
            vec![first, second]
        }
        Glyph::N => {
            let mut stroke = vec![(0.25, 0.9), (0.25, 0.56)];
            stroke.extend(arc(0.5, 0.56, 0.25, 180.0, 360.0, 16));
            stroke.push((0.75, 0.9));
            vec![stroke]
        }
        _ => unreachable!("rotated glyphs derive from their partner"),
    }
}

fn rotate_half_turn(strokes: &[Vec<(f64, f64)>]) -> Vec<Vec<(f64, f64)>> {
    strokes
        .iter()
        .map(|s| s.iter().map(|&(x, y)| (1.0 - x, 1.0 - y)).collect())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum OrientationMode {
    Upright,
    Inverted,
}

/// A glyph on the floor. `glyph` is drawn with its top pointing along
/// `rendered_up`; for upright symbols that is the figure's own reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacedSymbol {
    pub glyph: Glyph,
    pub orientation_mode: OrientationMode,
    pub jitter: f64,
    pub position_angle: Angle,
    pub radius: f64,
    pub rendered_up: Angle,
}

impl PlacedSymbol {
    /// Places `glyph` facing a figure with the given heading.
    pub fn facing(
        glyph: Glyph,
        heading: Angle,
        mode: OrientationMode,
        jitter: f64,
        position_angle: Angle,
        radius: f64,
    ) -> Self {
        let flip = match mode {
            OrientationMode::Upright => 0.0,
            OrientationMode::Inverted => 180.0,
        };
        PlacedSymbol {
            glyph,
            orientation_mode: mode,
            jitter,
            position_angle,
            radius,
            rendered_up: heading.rotated(flip + jitter),
        }
    }

    /// Image-plane position as a fraction of the room half-width, y down.
    pub fn offset_from_center(&self) -> (f64, f64) {
        let (ux, uy) = self.position_angle.unit_vector();
        (ux * self.radius, uy * self.radius)
    }
}

/// What a reader who never rotates would report: the drawn glyph when it is
/// within 90° of upright in the image, otherwise its rotation partner.
pub fn viewer_snap_reading(s: &PlacedSymbol) -> Glyph {
    if fold_disparity(s.rendered_up).degrees() <= 90.0 {
        s.glyph
    } else {
        s.glyph.rotation_pair()
    }
}
