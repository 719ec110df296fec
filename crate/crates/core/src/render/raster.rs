use crate::director::{DirectorTrial, Item, Pattern};
use crate::geometry::{Angle, Wall};
use crate::rft::{RftSet, RftTrial, WallColor};
use crate::symbols::PlacedSymbol;
use thiserror::Error;
use tiny_skia::{
    Color, FillRule, LineCap, LineJoin, Mask, Paint, Path, PathBuilder, Pixmap, Rect, Stroke, Transform,
};

pub const MIN_CANVAS: u32 = 256;

/// Colour used for glyph strokes and nothing else, so tests can classify ink.
pub const INK: [u8; 3] = [24, 32, 140];
const FLOOR: [u8; 3] = [236, 232, 222];
const FIGURE: [u8; 3] = [60, 60, 60];
const ARROW: [u8; 3] = [245, 140, 20];
const CELL: [u8; 3] = [245, 240, 228];
const OCCLUDED: [u8; 3] = [72, 72, 72];
const LINE: [u8; 3] = [40, 40, 40];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RenderError {
    #[error("canvas {width}x{height} is below the {MIN_CANVAS}px minimum")]
    CanvasTooSmall { width: u32, height: u32 },
    #[error("PNG encoding failed: {0}")]
    Encode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Canvas {
    pub width: u32,
    pub height: u32,
}

impl Canvas {
    pub const RFT: Canvas = Canvas { width: 1024, height: 1024 };
    pub const DIRECTOR: Canvas = Canvas { width: 1200, height: 900 };

    fn pixmap(self) -> Result<Pixmap, RenderError> {
        if self.width < MIN_CANVAS || self.height < MIN_CANVAS {
            return Err(RenderError::CanvasTooSmall { width: self.width, height: self.height });
        }
        Ok(Pixmap::new(self.width, self.height).expect("non-zero canvas"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    pub width: u32,
    pub height: u32,
    /// Straight RGBA8, row-major.
    pub rgba: Vec<u8>,
    pub png: Vec<u8>,
}

impl RasterImage {
    fn from_pixmap(p: Pixmap) -> Result<Self, RenderError> {
        let png = p.encode_png().map_err(|e| RenderError::Encode(e.to_string()))?;
        let rgba = p
            .pixels()
            .iter()
            .flat_map(|c| {
                let c = c.demultiply();
                [c.red(), c.green(), c.blue(), c.alpha()]
            })
            .collect();
        Ok(RasterImage { width: p.width(), height: p.height(), rgba, png })
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 4] {
        let i = ((y * self.width + x) * 4) as usize;
        [self.rgba[i], self.rgba[i + 1], self.rgba[i + 2], self.rgba[i + 3]]
    }
}

fn paint(rgb: [u8; 3]) -> Paint<'static> {
    let mut p = Paint::default();
    p.set_color_rgba8(rgb[0], rgb[1], rgb[2], 255);
    p.anti_alias = true;
    p
}

fn polygon(points: &[(f32, f32)]) -> Path {
    let mut pb = PathBuilder::new();
    pb.move_to(points[0].0, points[0].1);
    for &(x, y) in &points[1..] {
        pb.line_to(x, y);
    }
    pb.close();
    pb.finish().expect("polygon has points")
}

fn polyline(points: impl IntoIterator<Item = (f32, f32)>) -> Option<Path> {
    let mut pb = PathBuilder::new();
    for (i, (x, y)) in points.into_iter().enumerate() {
        if i == 0 {
            pb.move_to(x, y);
        } else {
            pb.line_to(x, y);
        }
    }
    pb.finish()
}

fn stroke(width: f32) -> Stroke {
    Stroke { width, line_cap: LineCap::Round, line_join: LineJoin::Round, ..Stroke::default() }
}

fn wall_rgb(c: WallColor) -> [u8; 3] {
    match c {
        WallColor::Red => [210, 40, 40],
        WallColor::Green => [40, 160, 60],
        WallColor::Blue => [40, 90, 215],
        WallColor::Black => [15, 15, 15],
    }
}

/// Image-plane point at `angle` and distance `r` pixels from `(cx, cy)`.
fn polar(cx: f64, cy: f64, angle: Angle, r: f64) -> (f64, f64) {
    let (ux, uy) = angle.unit_vector();
    (cx + r * ux, cy + r * uy)
}

fn draw_glyph(p: &mut Pixmap, s: &PlacedSymbol, cx: f64, cy: f64, room: f64, half: f64) {
    let (ox, oy) = s.offset_from_center();
    // snap to a pixel centre so a half-turn maps the pixel grid onto itself
    let gx = (cx + ox * room).floor() + 0.5;
    let gy = (cy + oy * room).floor() + 0.5;
    let (sin, cos) = s.rendered_up.radians().sin_cos();
    let h = half * room;
    let ink = paint(INK);
    let st = stroke((0.16 * h) as f32);
    for line in s.glyph.outline() {
        let pts = line.iter().map(|&(x, y)| {
            let (u, v) = ((x - 0.5) * 2.0 * h, (y - 0.5) * 2.0 * h);
            ((gx + u * cos - v * sin) as f32, (gy + u * sin + v * cos) as f32)
        });
        if let Some(path) = polyline(pts) {
            p.stroke_path(&path, &ink, &st, Transform::identity(), None);
        }
    }
}

pub fn render_rft_image(trial: &RftTrial, canvas: Canvas) -> Result<RasterImage, RenderError> {
    let mut p = canvas.pixmap()?;
    let (w, h) = (canvas.width as f32, canvas.height as f32);
    p.fill(Color::from_rgba8(FLOOR[0], FLOOR[1], FLOOR[2], 255));

    let band = 0.06 * w.min(h);
    let walls = [
        (Wall::Top, vec![(0.0, 0.0), (w, 0.0), (w - band, band), (band, band)]),
        (Wall::Right, vec![(w, 0.0), (w, h), (w - band, h - band), (w - band, band)]),
        (Wall::Bottom, vec![(w, h), (0.0, h), (band, h - band), (w - band, h - band)]),
        (Wall::Left, vec![(0.0, h), (0.0, 0.0), (band, band), (band, h - band)]),
    ];
    for (wall, pts) in walls {
        let rgb = wall_rgb(trial.wall_colors.color_of(wall));
        p.fill_path(&polygon(&pts), &paint(rgb), FillRule::Winding, Transform::identity(), None);
    }

    let (cx, cy) = (canvas.width as f64 / 2.0, canvas.height as f64 / 2.0);
    let room = cx.min(cy) - band as f64;
    let s = w.min(h) as f64;

    // Control 2 shows no symbols; the generator already leaves the list empty
    if trial.set != RftSet::Control2 {
        for sym in &trial.symbols {
            draw_glyph(&mut p, sym, cx, cy, room, trial.symbol_size);
        }
    }

    let heading = trial.figure_orientation;
    let body = PathBuilder::from_circle(cx as f32, cy as f32, (0.035 * s) as f32).expect("radius > 0");
    p.fill_path(&body, &paint(FIGURE), FillRule::Winding, Transform::identity(), None);
    let shaft_from = polar(cx, cy, heading, 0.02 * s);
    let tip = polar(cx, cy, heading, 0.09 * s);
    let base = polar(cx, cy, heading, 0.065 * s);
    let side = |deg: f64| polar(base.0, base.1, heading.rotated(deg), 0.018 * s);
    let shaft = polyline([(shaft_from.0 as f32, shaft_from.1 as f32), (base.0 as f32, base.1 as f32)]).expect("two points");
    p.stroke_path(&shaft, &paint(ARROW), &stroke((0.012 * s) as f32), Transform::identity(), None);
    let (l, r) = (side(-90.0), side(90.0));
    let head = polygon(&[
        (tip.0 as f32, tip.1 as f32),
        (l.0 as f32, l.1 as f32),
        (r.0 as f32, r.1 as f32),
    ]);
    p.fill_path(&head, &paint(ARROW), FillRule::Winding, Transform::identity(), None);

    RasterImage::from_pixmap(p)
}

fn item_rgb(color: &str) -> [u8; 3] {
    match color {
        "red" => [205, 45, 45],
        "blue" => [45, 95, 210],
        "green" => [50, 160, 70],
        "yellow" => [235, 200, 40],
        "purple" => [135, 60, 175],
        "black" => [20, 20, 20],
        "white" => [252, 252, 252],
        "brown" => [140, 90, 45],
        "orange" => [240, 140, 30],
        "grey" | "gray" => [150, 150, 150],
        _ => [200, 120, 200],
    }
}

/// Icon outline in a unit box centred on the origin (y down).
fn icon_shape(icon: &str) -> Vec<(f32, f32)> {
    match icon {
        "book" => vec![(-0.3, -0.45), (0.3, -0.45), (0.3, 0.45), (-0.3, 0.45)],
        "shirt" => vec![
            (-0.2, -0.45), (0.2, -0.45), (0.48, -0.25), (0.35, -0.05), (0.25, -0.12), (0.25, 0.45),
            (-0.25, 0.45), (-0.25, -0.12), (-0.35, -0.05), (-0.48, -0.25),
        ],
        "star" => (0..10)
            .map(|i| {
                let r = if i % 2 == 0 { 0.5 } else { 0.2 };
                let a = std::f32::consts::PI * i as f32 / 5.0;
                (r * a.sin(), -r * a.cos())
            })
            .collect(),
        "pot" => vec![
            (-0.48, -0.2), (-0.35, -0.2), (-0.35, -0.3), (0.35, -0.3), (0.35, -0.2), (0.48, -0.2), (0.48, -0.1),
            (0.35, -0.1), (0.3, 0.35), (-0.3, 0.35), (-0.35, -0.1), (-0.48, -0.1),
        ],
        "cup" => vec![(-0.3, -0.35), (0.3, -0.35), (0.22, 0.4), (-0.22, 0.4)],
        "speaker" => vec![(-0.45, -0.3), (0.45, -0.3), (0.45, 0.3), (-0.45, 0.3)],
        "knife" => vec![(-0.08, -0.5), (0.1, -0.1), (0.05, 0.0), (0.05, 0.5), (-0.05, 0.5), (-0.05, 0.0)],
        _ => (0..24)
            .map(|i| {
                let a = std::f32::consts::TAU * i as f32 / 24.0;
                (0.42 * a.cos(), 0.42 * a.sin())
            })
            .collect(),
    }
}

fn draw_item(p: &mut Pixmap, item: &Item, icon: &str, cx: f32, cy: f32, cell: f32) {
    let scale = [0.6, 0.8, 1.0][item.size_level.min(2) as usize] * 0.8 * cell;
    let pts: Vec<(f32, f32)> = icon_shape(icon).into_iter().map(|(x, y)| (cx + x * scale, cy + y * scale)).collect();
    let path = polygon(&pts);
    p.fill_path(&path, &paint(item_rgb(&item.color)), FillRule::Winding, Transform::identity(), None);
    if item.pattern == Pattern::Striped {
        let mut mask = Mask::new(p.width(), p.height()).expect("canvas size");
        mask.fill_path(&path, FillRule::Winding, true, Transform::identity());
        let stripe = if item.color == "white" || item.color == "yellow" { [40, 40, 40] } else { [250, 250, 250] };
        let step = scale / 6.0;
        let mut k = -scale;
        while k <= scale {
            if let Some(line) = polyline([(cx + k - scale, cy + scale), (cx + k + scale, cy - scale)]) {
                p.stroke_path(&line, &paint(stripe), &stroke(step * 0.35), Transform::identity(), Some(&mask));
            }
            k += step;
        }
    }
    p.stroke_path(&path, &paint(LINE), &stroke((0.01 * cell).max(1.0)), Transform::identity(), None);
}

/// Stroke shapes for the lattice labels, in a unit box (y down).
fn label_strokes(c: char) -> Vec<Vec<(f32, f32)>> {
    match c {
        'A' => vec![vec![(0.0, 1.0), (0.5, 0.0), (1.0, 1.0)], vec![(0.25, 0.55), (0.75, 0.55)]],
        'B' => vec![vec![
            (0.0, 0.0), (0.65, 0.0), (0.85, 0.12), (0.85, 0.38), (0.65, 0.5), (0.0, 0.5), (0.7, 0.5), (0.95, 0.62),
            (0.95, 0.88), (0.7, 1.0), (0.0, 1.0), (0.0, 0.0),
        ]],
        'C' => vec![vec![(1.0, 0.1), (0.8, 0.0), (0.25, 0.0), (0.0, 0.25), (0.0, 0.75), (0.25, 1.0), (0.8, 1.0), (1.0, 0.9)]],
        'D' => vec![vec![(0.0, 0.0), (0.6, 0.0), (1.0, 0.3), (1.0, 0.7), (0.6, 1.0), (0.0, 1.0), (0.0, 0.0)]],
        '1' => vec![vec![(0.25, 0.2), (0.55, 0.0), (0.55, 1.0)], vec![(0.25, 1.0), (0.85, 1.0)]],
        '2' => vec![vec![(0.05, 0.2), (0.3, 0.0), (0.75, 0.0), (0.95, 0.2), (0.95, 0.4), (0.05, 1.0), (1.0, 1.0)]],
        '3' => vec![vec![
            (0.05, 0.1), (0.25, 0.0), (0.75, 0.0), (0.95, 0.15), (0.95, 0.35), (0.75, 0.5), (0.4, 0.5), (0.75, 0.5),
            (0.95, 0.65), (0.95, 0.85), (0.75, 1.0), (0.25, 1.0), (0.05, 0.9),
        ]],
        '4' => vec![vec![(0.75, 1.0), (0.75, 0.0), (0.0, 0.7), (1.0, 0.7)]],
        _ => Vec::new(),
    }
}

fn draw_label(p: &mut Pixmap, c: char, cx: f32, cy: f32, size: f32) {
    let (w, h) = (0.6 * size, size);
    for line in label_strokes(c) {
        let pts = line.into_iter().map(|(x, y)| (cx - w / 2.0 + x * w, cy - h / 2.0 + y * h));
        if let Some(path) = polyline(pts) {
            p.stroke_path(&path, &paint(LINE), &stroke(size * 0.12), Transform::identity(), None);
        }
    }
}

pub fn render_director_image(trial: &DirectorTrial, canvas: Canvas) -> Result<RasterImage, RenderError> {
    render_director_grid(&trial.grid, canvas)
}

pub fn render_director_grid(grid: &crate::director::Grid, canvas: Canvas) -> Result<RasterImage, RenderError> {
    let mut p = canvas.pixmap()?;
    p.fill(Color::WHITE);
    let (w, h) = (canvas.width as f32, canvas.height as f32);
    let margin = 0.08 * w.min(h);
    let cell = ((w - 2.0 * margin) / 4.0).min((h - 2.0 * margin) / 4.0);
    let x0 = (w - 4.0 * cell) / 2.0 + margin / 2.0;
    let y0 = (h - 4.0 * cell) / 2.0 + margin / 2.0;
    static ICONS: std::sync::OnceLock<crate::director::ItemLibrary> = std::sync::OnceLock::new();
    let library_icons = ICONS.get_or_init(crate::director::ItemLibrary::builtin);

    for (i, letter) in ['A', 'B', 'C', 'D'].into_iter().enumerate() {
        draw_label(&mut p, letter, x0 + (i as f32 + 0.5) * cell, y0 - margin / 2.0, margin * 0.45);
    }
    for (i, digit) in ['1', '2', '3', '4'].into_iter().enumerate() {
        draw_label(&mut p, digit, x0 - margin / 2.0, y0 + (i as f32 + 0.5) * cell, margin * 0.45);
    }
    for at in crate::director::CellRef::all() {
        let c = grid.cell(at);
        let (x, y) = (x0 + at.col as f32 * cell, y0 + at.row as f32 * cell);
        let rect = Rect::from_xywh(x, y, cell, cell).expect("positive cell");
        p.fill_rect(rect, &paint(if c.occluded { OCCLUDED } else { CELL }), Transform::identity(), None);
        p.stroke_path(&PathBuilder::from_rect(rect), &paint(LINE), &stroke(2.0), Transform::identity(), None);
        if let Some(item) = &c.item {
            let icon = item
                .categories
                .first()
                .and_then(|cat| library_icons.category(cat))
                .map_or("ball", |info| info.icon.as_str());
            draw_item(&mut p, item, icon, x + cell / 2.0, y + cell / 2.0, cell);
        }
    }
    RasterImage::from_pixmap(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::director::{generate_condition_grid, DirectorConfig, ItemLibrary};
    use crate::rft::{generate_set, RftConfig};

    fn ink_count(img: &RasterImage) -> usize {
        img.rgba.chunks(4).filter(|px| px[..3] == INK).count()
    }

    #[test]
    fn small_canvas_is_rejected() {
        let t = &generate_set(RftSet::Test2, 1, 1, &RftConfig::default()).unwrap()[0];
        let err = render_rft_image(t, Canvas { width: 255, height: 1024 }).unwrap_err();
        assert!(matches!(err, RenderError::CanvasTooSmall { .. }));
    }

    #[test]
    fn control_2_has_no_glyph_ink() {
        let t = &generate_set(RftSet::Control2, 1, 3, &RftConfig::default()).unwrap()[0];
        assert_eq!(ink_count(&render_rft_image(t, Canvas::RFT).unwrap()), 0);
        let t2 = &generate_set(RftSet::Test2, 1, 3, &RftConfig::default()).unwrap()[0];
        assert!(ink_count(&render_rft_image(t2, Canvas::RFT).unwrap()) > 100);
    }

    #[test]
    fn arrow_points_right_at_90() {
        let mut t = generate_set(RftSet::Control2, 1, 3, &RftConfig::default()).unwrap().remove(0);
        t.figure_orientation = Angle::new(90.0);
        let img = render_rft_image(&t, Canvas::RFT).unwrap();
        let c = 512;
        let off = (0.08 * 1024.0) as u32;
        assert_eq!(img.pixel(c + off, c)[..3], ARROW);
        assert_ne!(img.pixel(c - off, c)[..3], ARROW);
        assert_ne!(img.pixel(c, c - off)[..3], ARROW);
    }

    #[test]
    fn rendering_is_byte_deterministic() {
        let t = &generate_set(RftSet::Test3, 1, 9, &RftConfig::default()).unwrap()[0];
        assert_eq!(render_rft_image(t, Canvas::RFT).unwrap().png, render_rft_image(t, Canvas::RFT).unwrap().png);
        let lib = ItemLibrary::builtin();
        let d = &generate_condition_grid(1, 9, &DirectorConfig::default(), &lib).unwrap()[0];
        let a = render_director_image(d, Canvas::DIRECTOR).unwrap();
        assert_eq!(a.png, render_director_image(d, Canvas::DIRECTOR).unwrap().png);
        assert_eq!((a.width, a.height), (1200, 900));
    }
}
