//! Raw-accuracy aggregation with Wilson intervals, disparity curves,
//! Director error vectors, and CSV/SVG report emission.

use crate::director::CellRef;
use crate::geometry::{bin_disparity, DisparityBin};
use crate::scoring::{chance_level, ScoredResponse};
use crate::trial::{Trial, TrialFormat};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;

pub const Z_95: f64 = 1.96;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("unknown grouping field {0:?}")]
    UnknownField(String),
    #[error("unsupported bin count {0}; use 4, 12 or 24")]
    BadBins(usize),
    #[error("writing report: {0}")]
    Io(#[from] std::io::Error),
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// One scored trial flattened to the fields analysis groups on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub trial_id: String,
    pub subject: String,
    pub task: String,
    pub set: String,
    pub question: String,
    pub format: TrialFormat,
    pub visual: Option<String>,
    pub spatial: Option<String>,
    pub adjective: Option<String>,
    pub adjective_class: Option<String>,
    pub pov: Option<String>,
    /// Figure heading in (−180, 180].
    pub signed_angle: Option<f64>,
    pub disparity: Option<f64>,
    pub corner_flag: bool,
    pub chance: f64,
    pub valid: bool,
    pub correct: bool,
    pub truth_cell: Option<CellRef>,
    pub chosen_cell: Option<CellRef>,
}

impl Observation {
    pub fn new(trial: &Trial, format: TrialFormat, scored: &ScoredResponse) -> Self {
        let mut o = Observation {
            trial_id: scored.trial_id.clone(),
            subject: scored.subject.clone(),
            task: trial.task().to_string(),
            set: String::new(),
            question: String::new(),
            format,
            visual: None,
            spatial: None,
            adjective: None,
            adjective_class: None,
            pov: None,
            signed_angle: None,
            disparity: None,
            corner_flag: false,
            chance: chance_level(trial),
            valid: scored.valid,
            correct: scored.correct,
            truth_cell: None,
            chosen_cell: None,
        };
        match trial {
            Trial::Rft(t) => {
                o.set = t.set.as_str().to_string();
                o.question = t.question_type.as_str().to_string();
                o.signed_angle = Some(t.figure_orientation.signed());
                o.disparity = Some(t.disparity.degrees());
                o.corner_flag = t.corner_flag;
            }
            Trial::Director(t) => {
                let c = &t.condition;
                o.set = match format {
                    TrialFormat::Image => "grid".to_string(),
                    TrialFormat::Ascii => "grid_ascii".to_string(),
                };
                o.question = c.adjective_class.as_str().to_string();
                o.visual = Some(c.visual.as_str().to_string());
                o.spatial = Some(c.spatial.as_str().to_string());
                o.adjective = Some(c.adjective.as_str().to_string());
                o.adjective_class = Some(c.adjective_class.as_str().to_string());
                o.pov = Some(c.pov.as_str().to_string());
                o.truth_cell = Some(t.ground_truth);
                o.chosen_cell = scored.normalized_answer.as_deref().filter(|_| scored.valid).and_then(|a| a.parse().ok());
            }
        }
        o
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupField {
    Subject,
    Task,
    Set,
    Question,
    Format,
    Visual,
    Spatial,
    Adjective,
    AdjectiveClass,
    Pov,
}

impl GroupField {
    pub fn name(self) -> &'static str {
        match self {
            GroupField::Subject => "subject",
            GroupField::Task => "task",
            GroupField::Set => "set",
            GroupField::Question => "question",
            GroupField::Format => "format",
            GroupField::Visual => "visual",
            GroupField::Spatial => "spatial",
            GroupField::Adjective => "adjective",
            GroupField::AdjectiveClass => "adjective_class",
            GroupField::Pov => "pov",
        }
    }

    fn value(self, o: &Observation) -> String {
        let opt = |v: &Option<String>| v.clone().unwrap_or_default();
        match self {
            GroupField::Subject => o.subject.clone(),
            GroupField::Task => o.task.clone(),
            GroupField::Set => o.set.clone(),
            GroupField::Question => o.question.clone(),
            GroupField::Format => o.format.as_str().to_string(),
            GroupField::Visual => opt(&o.visual),
            GroupField::Spatial => opt(&o.spatial),
            GroupField::Adjective => opt(&o.adjective),
            GroupField::AdjectiveClass => opt(&o.adjective_class),
            GroupField::Pov => opt(&o.pov),
        }
    }
}

impl FromStr for GroupField {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let all = [
            GroupField::Subject,
            GroupField::Task,
            GroupField::Set,
            GroupField::Question,
            GroupField::Format,
            GroupField::Visual,
            GroupField::Spatial,
            GroupField::Adjective,
            GroupField::AdjectiveClass,
            GroupField::Pov,
        ];
        all.into_iter().find(|f| f.name() == s).ok_or_else(|| AnalysisError::UnknownField(s.to_string()))
    }
}

pub fn parse_grouping(spec: &str) -> Result<Vec<GroupField>, AnalysisError> {
    spec.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binning {
    None,
    /// Folded disparity in four 45° bins.
    Folded,
    /// Signed heading in `k` equal buckets over (−180, 180].
    Signed(usize),
}

impl Binning {
    pub fn from_count(bins: usize) -> Result<Binning, AnalysisError> {
        match bins {
            4 => Ok(Binning::Folded),
            12 | 24 => Ok(Binning::Signed(bins)),
            other => Err(AnalysisError::BadBins(other)),
        }
    }

    fn count(self) -> usize {
        match self {
            Binning::None => 0,
            Binning::Folded => 4,
            Binning::Signed(k) => k,
        }
    }

    fn edges(self, index: usize) -> (f64, f64) {
        match self {
            Binning::None => (f64::NAN, f64::NAN),
            Binning::Folded => {
                let b = DisparityBin::from_index(index as u8 + 1).expect("index < 4");
                (b.lo(), b.hi())
            }
            Binning::Signed(k) => {
                let w = 360.0 / k as f64;
                (-180.0 + index as f64 * w, -180.0 + (index + 1) as f64 * w)
            }
        }
    }
}

/// Bucket of a signed angle: buckets mirror about 0 so folding merges
/// bucket `half + j` with `half − 1 − j`.
pub fn signed_bucket(angle: f64, k: usize) -> usize {
    let half = k / 2;
    let w = 360.0 / k as f64;
    let j = ((angle.abs() / w).floor() as usize).min(half - 1);
    if angle >= 0.0 {
        half + j
    } else {
        half - 1 - j
    }
}

fn bin_of(o: &Observation, binning: Binning) -> Option<usize> {
    match binning {
        Binning::None => Some(0),
        Binning::Folded => o.disparity.and_then(|d| bin_disparity(d).ok()).map(|b| b.index() as usize - 1),
        Binning::Signed(k) => o.signed_angle.map(|a| signed_bucket(a, k)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyRow {
    pub key: Vec<(String, String)>,
    pub bin: Option<usize>,
    pub bin_lo: Option<f64>,
    pub bin_hi: Option<f64>,
    pub n: u64,
    pub correct: u64,
    pub invalid: u64,
    pub accuracy: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub invalid_rate: Option<f64>,
    pub chance: Option<f64>,
}

impl AccuracyRow {
    fn build(key: Vec<(String, String)>, bin: Option<(usize, f64, f64)>, n: u64, correct: u64, invalid: u64, chance: Option<f64>) -> Self {
        let (ci_lo, ci_hi) = if n > 0 {
            let (lo, hi) = wilson_interval(correct, n, Z_95);
            (Some(lo), Some(hi))
        } else {
            (None, None)
        };
        AccuracyRow {
            key,
            bin: bin.map(|b| b.0),
            bin_lo: bin.map(|b| b.1),
            bin_hi: bin.map(|b| b.2),
            n,
            correct,
            invalid,
            accuracy: (n > 0).then(|| correct as f64 / n as f64),
            ci_lo,
            ci_hi,
            invalid_rate: (n > 0).then(|| invalid as f64 / n as f64),
            chance,
        }
    }

    pub fn key_value(&self, field: &str) -> Option<&str> {
        self.key.iter().find(|(k, _)| k == field).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Filters {
    /// Drop corner-ambiguous trials.
    pub corner_removed: bool,
}

/// One row per non-empty group; with `pad`, binned series also get rows
/// (n = 0) for every empty bin so each series has the full bin count.
pub fn aggregate(
    obs: &[Observation],
    grouping: &[GroupField],
    binning: Binning,
    filters: Filters,
    pad: bool,
) -> Vec<AccuracyRow> {
    type Acc = (u64, u64, u64, f64);
    let mut groups: BTreeMap<Vec<String>, BTreeMap<usize, Acc>> = BTreeMap::new();
    for o in obs {
        if filters.corner_removed && o.corner_flag {
            continue;
        }
        let Some(bin) = bin_of(o, binning) else { continue };
        let key: Vec<String> = grouping.iter().map(|f| f.value(o)).collect();
        let e = groups.entry(key).or_default().entry(bin).or_insert((0, 0, 0, 0.0));
        e.0 += 1;
        e.1 += u64::from(o.correct);
        e.2 += u64::from(!o.valid);
        e.3 += o.chance;
    }
    let mut rows = Vec::new();
    for (key, bins) in groups {
        let named: Vec<(String, String)> = grouping.iter().map(|f| f.name().to_string()).zip(key).collect();
        let series_chance = {
            let (n, c) = bins.values().fold((0u64, 0.0), |(n, c), a| (n + a.0, c + a.3));
            (n > 0).then(|| c / n as f64)
        };
        let indices: Vec<usize> = if pad && binning != Binning::None {
            (0..binning.count()).collect()
        } else {
            bins.keys().copied().collect()
        };
        for i in indices {
            let (n, correct, invalid, _) = bins.get(&i).copied().unwrap_or((0, 0, 0, 0.0));
            let bin = (binning != Binning::None).then(|| {
                let (lo, hi) = binning.edges(i);
                (i, lo, hi)
            });
            rows.push(AccuracyRow::build(named.clone(), bin, n, correct, invalid, series_chance));
        }
    }
    rows
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorVector {
    pub d_col: i8,
    pub d_row: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorHistogram {
    pub adjective: String,
    pub pov: String,
    /// `counts[d_row + 3][d_col + 3]`.
    pub counts: [[u32; 7]; 7],
}

impl ErrorHistogram {
    pub fn total(&self) -> u32 {
        self.counts.iter().flatten().sum()
    }

    pub fn at(&self, d_col: i8, d_row: i8) -> u32 {
        self.counts[(d_row + 3) as usize][(d_col + 3) as usize]
    }
}

/// Offsets of wrong-but-valid Director answers in the participant frame,
/// plus one histogram per (adjective, pov).
pub fn error_vectors(obs: &[Observation]) -> (Vec<(String, ErrorVector)>, Vec<ErrorHistogram>) {
    let mut vectors = Vec::new();
    let mut hists: BTreeMap<(String, String), [[u32; 7]; 7]> = BTreeMap::new();
    for o in obs.iter().filter(|o| o.task == "director" && o.valid && !o.correct) {
        let (Some(t), Some(c)) = (o.truth_cell, o.chosen_cell) else { continue };
        let v = ErrorVector { d_col: c.col as i8 - t.col as i8, d_row: c.row as i8 - t.row as i8 };
        let key = (o.adjective.clone().unwrap_or_default(), o.pov.clone().unwrap_or_default());
        hists.entry(key).or_default()[(v.d_row + 3) as usize][(v.d_col + 3) as usize] += 1;
        vectors.push((o.trial_id.clone(), v));
    }
    let hists = hists.into_iter().map(|((adjective, pov), counts)| ErrorHistogram { adjective, pov, counts }).collect();
    (vectors, hists)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// Columns: grouping fields in order, then bin, bin_lo, bin_hi, n, correct,
/// invalid, accuracy, ci_lo, ci_hi, invalid_rate, chance.
pub fn rows_to_csv(rows: &[AccuracyRow]) -> Result<String, AnalysisError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(first) = rows.first() {
        let mut header: Vec<String> = first.key.iter().map(|(k, _)| k.clone()).collect();
        header.extend(
            ["bin", "bin_lo", "bin_hi", "n", "correct", "invalid", "accuracy", "ci_lo", "ci_hi", "invalid_rate", "chance"]
                .map(String::from),
        );
        w.write_record(&header)?;
    }
    for r in rows {
        let mut rec: Vec<String> = r.key.iter().map(|(_, v)| v.clone()).collect();
        rec.push(r.bin.map(|b| b.to_string()).unwrap_or_default());
        rec.push(fmt_opt(r.bin_lo));
        rec.push(fmt_opt(r.bin_hi));
        rec.push(r.n.to_string());
        rec.push(r.correct.to_string());
        rec.push(r.invalid.to_string());
        rec.extend([r.accuracy, r.ci_lo, r.ci_hi, r.invalid_rate, r.chance].map(fmt_opt));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| AnalysisError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields"))
}

pub fn vectors_to_csv(hists: &[ErrorHistogram]) -> Result<String, AnalysisError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["adjective", "pov", "d_col", "d_row", "count"])?;
    for h in hists {
        for d_row in -3i8..=3 {
            for d_col in -3i8..=3 {
                let c = h.at(d_col, d_row);
                if c > 0 {
                    w.write_record([h.adjective.clone(), h.pov.clone(), d_col.to_string(), d_row.to_string(), c.to_string()])?;
                }
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| AnalysisError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields"))
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

/// Accuracy against bin centre, one polyline per series, dashed chance line.
pub fn curve_svg(rows: &[AccuracyRow], title: &str) -> String {
    let (w, h, m) = (640.0, 400.0, 50.0);
    let mut series: BTreeMap<String, Vec<&AccuracyRow>> = BTreeMap::new();
    for r in rows {
        let label: Vec<&str> = r.key.iter().filter(|(k, _)| k != "subject" && k != "task").map(|(_, v)| v.as_str()).collect();
        series.entry(label.join(" ")).or_default().push(r);
    }
    let (xmin, xmax) = rows
        .iter()
        .filter_map(|r| Some((r.bin_lo?, r.bin_hi?)))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (lo, hi)| (a.min(lo), b.max(hi)));
    let (xmin, xmax) = if xmin.is_finite() { (xmin, xmax) } else { (0.0, 1.0) };
    let px = |x: f64| m + (x - xmin) / (xmax - xmin) * (w - 2.0 * m);
    let py = |y: f64| h - m - y * (h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" font-size="14" text-anchor="middle">{}</text>"#, w / 2.0, xml_escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{m} {m} V{} H{}" fill="none" stroke="black"/>"#,
        h - m,
        w - m
    );
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" font-size="10" text-anchor="end">{tick:.2}</text>"#, m - 4.0, py(tick) + 3.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="10" text-anchor="start">{xmin:.0}</text>"#, m, h - m + 14.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{xmax:.0}</text>"#, w - m, h - m + 14.0);
    for (i, (label, pts)) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        if let Some(chance) = pts.iter().find_map(|r| r.chance) {
            let _ = writeln!(
                s,
                r#"<line class="chance" x1="{m}" y1="{y:.2}" x2="{x2}" y2="{y:.2}" stroke="{colour}" stroke-dasharray="6 4"/>"#,
                y = py(chance),
                x2 = w - m
            );
        }
        let d: Vec<String> = pts
            .iter()
            .filter_map(|r| Some(format!("{:.2},{:.2}", px((r.bin_lo? + r.bin_hi?) / 2.0), py(r.accuracy?))))
            .collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#, d.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" fill="{colour}">{}</text>"#,
            w - m + 4.0,
            m + 14.0 * i as f64,
            xml_escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn heatmap_svg(hists: &[ErrorHistogram]) -> String {
    let cell = 24.0;
    let panel = cell * 7.0 + 40.0;
    let width = panel * hists.len().max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{}" viewBox="0 0 {width} {}">"#, panel + 30.0, panel + 30.0);
    let _ = writeln!(s, r#"<rect width="{width}" height="{}" fill="white"/>"#, panel + 30.0);
    for (i, hist) in hists.iter().enumerate() {
        let x0 = i as f64 * panel + 20.0;
        let max = hist.counts.iter().flatten().copied().max().unwrap_or(0).max(1) as f64;
        let _ = writeln!(s, r#"<text x="{x0}" y="16" font-size="11">{} / {}</text>"#, xml_escape(&hist.adjective), xml_escape(&hist.pov));
        for (r, row) in hist.counts.iter().enumerate() {
            for (c, &n) in row.iter().enumerate() {
                let shade = 255 - (n as f64 / max * 200.0).round() as u8;
                let _ = writeln!(
                    s,
                    r##"<rect x="{:.1}" y="{:.1}" width="{cell}" height="{cell}" fill="rgb({shade},{shade},255)" stroke="#cccccc"><title>{}</title></rect>"##,
                    x0 + c as f64 * cell,
                    30.0 + r as f64 * cell,
                    n
                );
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportOptions {
    pub bins: usize,
    pub filters: Filters,
    pub error_vectors: bool,
}

fn safe_name(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// Writes `{subject}_{task}_{section}.{csv,svg}` files under `dir`.
pub fn emit_report(dir: &Path, obs: &[Observation], opts: ReportOptions) -> Result<Vec<PathBuf>, AnalysisError> {
    let binning = Binning::from_count(opts.bins)?;
    std::fs::create_dir_all(dir)?;
    let mut by_series: BTreeMap<(String, String), Vec<Observation>> = BTreeMap::new();
    for o in obs {
        by_series.entry((o.subject.clone(), o.task.clone())).or_default().push(o.clone());
    }
    let mut written = Vec::new();
    let mut write = |name: String, body: String| -> Result<(), AnalysisError> {
        let p = dir.join(name);
        std::fs::write(&p, body)?;
        written.push(p);
        Ok(())
    };
    for ((subject, task), group) in &by_series {
        let stem = format!("{}_{}", safe_name(subject), safe_name(task));
        if task == "rft" {
            let grouping = [GroupField::Subject, GroupField::Set, GroupField::Question];
            let rows = aggregate(group, &grouping, binning, opts.filters, true);
            let section = if opts.bins == 4 { "bins" } else { "curve" };
            write(format!("{stem}_{section}.csv"), rows_to_csv(&rows)?)?;
            write(format!("{stem}_{section}.svg"), curve_svg(&rows, &format!("{subject} accuracy by rotation")))?;
            let summary = aggregate(group, &grouping, Binning::None, opts.filters, false);
            write(format!("{stem}_summary.csv"), rows_to_csv(&summary)?)?;
        } else {
            let grouping = [GroupField::Subject, GroupField::Format, GroupField::Visual, GroupField::Spatial, GroupField::Pov];
            let rows = aggregate(group, &grouping, Binning::None, opts.filters, false);
            write(format!("{stem}_conditions.csv"), rows_to_csv(&rows)?)?;
            let by_adj = aggregate(group, &[GroupField::Subject, GroupField::Format, GroupField::Adjective], Binning::None, opts.filters, false);
            write(format!("{stem}_adjectives.csv"), rows_to_csv(&by_adj)?)?;
            if opts.error_vectors {
                let (_, hists) = error_vectors(group);
                write(format!("{stem}_error_vectors.csv"), vectors_to_csv(&hists)?)?;
                write(format!("{stem}_error_vectors.svg"), heatmap_svg(&hists))?;
            }
        }
    }
    Ok(written)
}
