//! Constructive grid generation: pick the description and target first, place
//! exactly the competitors the condition needs, then pad with distractors.
//! Every candidate is re-checked by `validate_trial` before it is accepted.

use super::grid::{Cell, CellRef, Grid, GRID_SIZE};
use super::instruction::{synthesize_instruction, Adjective, AdjectiveClass, Description, Instruction, Pov};
use super::library::{Item, ItemLibrary};
use crate::oracle::{answer_director, answer_director_egocentric, extremeness, matching_cells, Frame};
use crate::rft::SeedRecord;
use crate::seed::derive_seed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

const CELLS: usize = GRID_SIZE * GRID_SIZE;
const OCCLUDED_MIN: usize = 3;
const OCCLUDED_MAX: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DirectorError {
    #[error("{name} must lie in (0, 1], got {value}")]
    BadProportion { name: &'static str, value: f64 },
    #[error("constraint {constraint} could not be satisfied after {attempts} attempts")]
    Unsatisfiable { constraint: String, attempts: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum VisualCondition {
    Shared,
    Different,
}

impl VisualCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            VisualCondition::Shared => "SHARED",
            VisualCondition::Different => "DIFFERENT",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpatialCondition {
    #[serde(rename = "SHARED")]
    Shared,
    #[serde(rename = "DIFFERENT")]
    Different,
    #[serde(rename = "N/A")]
    NotApplicable,
}

impl SpatialCondition {
    pub fn for_adjective(adjective: Adjective) -> Self {
        match adjective.class() {
            AdjectiveClass::Horizontal => SpatialCondition::Different,
            AdjectiveClass::Vertical => SpatialCondition::Shared,
            _ => SpatialCondition::NotApplicable,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpatialCondition::Shared => "SHARED",
            SpatialCondition::Different => "DIFFERENT",
            SpatialCondition::NotApplicable => "N/A",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DirectorCondition {
    pub visual: VisualCondition,
    pub spatial: SpatialCondition,
    pub adjective_class: AdjectiveClass,
    pub adjective: Adjective,
    pub pov: Pov,
}

impl DirectorCondition {
    pub fn new(visual: VisualCondition, adjective: Adjective, pov: Pov) -> Self {
        DirectorCondition {
            visual,
            spatial: SpatialCondition::for_adjective(adjective),
            adjective_class: adjective.class(),
            adjective,
            pov,
        }
    }
}

/// visual × adjective × pov, in a fixed order.
pub fn condition_grid() -> Vec<DirectorCondition> {
    let mut out = Vec::new();
    for visual in [VisualCondition::Shared, VisualCondition::Different] {
        for adjective in Adjective::ALL {
            for pov in [Pov::Mine, Pov::Yours] {
                out.push(DirectorCondition::new(visual, adjective, pov));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectorConfig {
    pub fill_proportion: f64,
    pub related_proportion: f64,
    pub max_attempts: u32,
}

impl Default for DirectorConfig {
    fn default() -> Self {
        DirectorConfig { fill_proportion: 0.75, related_proportion: 0.5, max_attempts: 50 }
    }
}

impl DirectorConfig {
    pub fn validate(&self) -> Result<(), DirectorError> {
        for (name, value) in [("fill_proportion", self.fill_proportion), ("related_proportion", self.related_proportion)] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(DirectorError::BadProportion { name, value });
            }
        }
        Ok(())
    }

    fn item_count(&self) -> usize {
        ((self.fill_proportion * CELLS as f64).round() as usize).clamp(1, CELLS)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectorTrial {
    pub trial_id: String,
    pub grid: Grid,
    pub instruction: Instruction,
    pub condition: DirectorCondition,
    pub fill_proportion: f64,
    pub related_proportion: f64,
    pub ground_truth: CellRef,
    pub seed: SeedRecord,
}

struct Counts {
    visible_extras: usize,
    occluded_matches: usize,
    near_misses: usize,
    unrelated: usize,
}

fn plan_counts(cond: &DirectorCondition, cfg: &DirectorConfig) -> Result<(usize, usize, usize), DirectorError> {
    let n_items = cfg.item_count();
    let distractors = n_items - 1;
    let required = usize::from(cond.adjective != Adjective::None) + usize::from(cond.visual == VisualCondition::Different);
    let wanted = cfg.related_proportion * distractors as f64;
    let related = (wanted.round() as usize).max(required);
    if related > distractors {
        return Err(DirectorError::Unsatisfiable { constraint: "(e) fill proportion".into(), attempts: 0 });
    }
    if (related as f64 - wanted).abs() > 1.0 {
        return Err(DirectorError::Unsatisfiable { constraint: "(f) related proportion".into(), attempts: 0 });
    }
    Ok((n_items, related, required))
}

fn choose_description<'a>(lib: &'a ItemLibrary, rng: &mut ChaCha8Rng) -> (Description, Vec<&'a Item>, Vec<&'a Item>, Vec<&'a Item>) {
    let cats: Vec<_> = lib.categories().collect();
    let cat = *cats.choose(rng).expect("library has categories");
    let members: Vec<&Item> = lib.items().iter().filter(|i| i.categories.contains(&cat.id)).collect();
    let anchor = members.choose(rng).expect("category has items");
    let mode: u8 = rng.gen_range(0..4);
    let desc = Description {
        category: cat.id.clone(),
        noun: cat.noun.clone(),
        color: (mode & 1 != 0).then(|| anchor.color.clone()),
        pattern: (mode & 2 != 0).then_some(anchor.pattern),
    };
    let (pool, near): (Vec<&Item>, Vec<&Item>) = members.into_iter().partition(|i| desc.matches(i));
    let unrelated = lib.items().iter().filter(|i| !i.categories.contains(&cat.id)).collect();
    (desc, pool, near, unrelated)
}

fn pick_cells(rng: &mut ChaCha8Rng, from: &mut Vec<CellRef>, n: usize) -> Option<Vec<CellRef>> {
    if from.len() < n {
        return None;
    }
    from.shuffle(rng);
    Some(from.drain(..n).collect())
}

fn pick_item<'a>(rng: &mut ChaCha8Rng, pool: &[&'a Item], size: Option<u8>) -> Option<&'a Item> {
    let options: Vec<&Item> = pool.iter().copied().filter(|i| size.is_none_or(|s| i.size_level == s)).collect();
    options.choose(rng).copied()
}

/// One constructive attempt; `Err` names the constraint that blocked it.
fn attempt(
    cond: &DirectorCondition,
    cfg: &DirectorConfig,
    lib: &ItemLibrary,
    rng: &mut ChaCha8Rng,
) -> Result<(Grid, Instruction, CellRef), &'static str> {
    let (n_items, related, required) = plan_counts(cond, cfg).map_err(|_| "(f) related proportion")?;
    let (desc, pool, near, unrelated) = choose_description(lib, rng);
    let adjective = cond.adjective;
    let frame = Frame::named_by(cond.pov);
    let different = cond.visual == VisualCondition::Different;

    let spill = related - required;
    let mut counts = Counts {
        visible_extras: usize::from(adjective != Adjective::None),
        occluded_matches: usize::from(different),
        near_misses: 0,
        unrelated: n_items - 1 - related,
    };
    if !near.is_empty() {
        counts.near_misses = spill;
    } else if adjective != Adjective::None {
        counts.visible_extras += spill;
    } else if different {
        counts.occluded_matches += spill;
    } else if spill > 0 {
        return Err("(f) related proportion");
    }
    if counts.unrelated > 0 && unrelated.is_empty() {
        return Err("(f) related proportion");
    }

    let mut all: Vec<CellRef> = CellRef::all().collect();
    all.shuffle(rng);
    let n_occluded = rng.gen_range(OCCLUDED_MIN..=OCCLUDED_MAX);
    let occluded: BTreeSet<CellRef> = all[..n_occluded].iter().copied().collect();
    let mut visible: Vec<CellRef> = all[n_occluded..].to_vec();
    let mut hidden: Vec<CellRef> = all[..n_occluded].to_vec();

    let mut grid = Grid::default();
    for &c in &occluded {
        grid.cell_mut(c).occluded = true;
    }
    let place = |grid: &mut Grid, at: CellRef, item: &Item| {
        *grid.cell_mut(at) = Cell::with_item(item.clone(), occluded.contains(&at));
    };

    let target;
    match adjective.class() {
        AdjectiveClass::Size => {
            let rank = |s: u8| extremeness(adjective, frame, CellRef::new(0, 0), s);
            let sizes: BTreeSet<u8> = pool.iter().map(|i| i.size_level).collect();
            let feasible: Vec<u8> = sizes
                .iter()
                .copied()
                .filter(|&t| sizes.iter().any(|&s| rank(s) < rank(t)))
                .filter(|&t| {
                    if different {
                        sizes.iter().any(|&s| rank(s) > rank(t))
                    } else {
                        sizes.iter().all(|&s| rank(s) <= rank(t))
                    }
                })
                .collect();
            let t_size = *feasible.choose(rng).ok_or("(b) size headroom")?;
            target = pick_cells(rng, &mut visible, 1).ok_or("(a) visible target")?[0];
            place(&mut grid, target, pick_item(rng, &pool, Some(t_size)).expect("size in pool"));
            let lower: Vec<u8> = sizes.iter().copied().filter(|&s| rank(s) < rank(t_size)).collect();
            let higher: Vec<u8> = sizes.iter().copied().filter(|&s| rank(s) > rank(t_size)).collect();
            for c in pick_cells(rng, &mut visible, counts.visible_extras).ok_or("(b) room for matches")? {
                let s = *lower.choose(rng).expect("feasible");
                place(&mut grid, c, pick_item(rng, &pool, Some(s)).expect("size in pool"));
            }
            for c in pick_cells(rng, &mut hidden, counts.occluded_matches).ok_or("(d) occluded competitor")? {
                let s = *higher.choose(rng).expect("feasible");
                place(&mut grid, c, pick_item(rng, &pool, Some(s)).expect("size in pool"));
            }
        }
        AdjectiveClass::Vertical | AdjectiveClass::Horizontal => {
            let rank = |c: CellRef| extremeness(adjective, frame, c, 0);
            let candidates: Vec<CellRef> = visible
                .iter()
                .copied()
                .filter(|&t| visible.iter().filter(|&&c| rank(c) < rank(t)).count() >= counts.visible_extras)
                .filter(|&t| !different || hidden.iter().any(|&c| rank(c) > rank(t)))
                .collect();
            target = *candidates.choose(rng).ok_or("(d) occluded competitor")?;
            visible.retain(|&c| c != target);
            place(&mut grid, target, pick_item(rng, &pool, None).expect("pool non-empty"));
            let mut lower: Vec<CellRef> = visible.iter().copied().filter(|&c| rank(c) < rank(target)).collect();
            for c in pick_cells(rng, &mut lower, counts.visible_extras).ok_or("(b) room for matches")? {
                visible.retain(|&v| v != c);
                place(&mut grid, c, pick_item(rng, &pool, None).expect("pool non-empty"));
            }
            if counts.occluded_matches > 0 {
                let mut higher: Vec<CellRef> = hidden.iter().copied().filter(|&c| rank(c) > rank(target)).collect();
                let first = pick_cells(rng, &mut higher, 1).ok_or("(d) occluded competitor")?[0];
                hidden.retain(|&h| h != first);
                place(&mut grid, first, pick_item(rng, &pool, None).expect("pool non-empty"));
                for c in pick_cells(rng, &mut hidden, counts.occluded_matches - 1).ok_or("(d) room for matches")? {
                    place(&mut grid, c, pick_item(rng, &pool, None).expect("pool non-empty"));
                }
            }
        }
        AdjectiveClass::None => {
            target = pick_cells(rng, &mut visible, 1).ok_or("(a) visible target")?[0];
            place(&mut grid, target, pick_item(rng, &pool, None).expect("pool non-empty"));
            for c in pick_cells(rng, &mut hidden, counts.occluded_matches).ok_or("(d) occluded competitor")? {
                place(&mut grid, c, pick_item(rng, &pool, None).expect("pool non-empty"));
            }
        }
    }

    let mut free: Vec<CellRef> = visible.into_iter().chain(hidden).collect();
    for c in pick_cells(rng, &mut free, counts.near_misses).ok_or("(e) fill proportion")? {
        place(&mut grid, c, near.choose(rng).expect("near pool non-empty"));
    }
    for c in pick_cells(rng, &mut free, counts.unrelated).ok_or("(e) fill proportion")? {
        place(&mut grid, c, unrelated.choose(rng).expect("unrelated pool non-empty"));
    }

    let instruction = synthesize_instruction(desc, adjective, cond.pov);
    Ok((grid, instruction, target))
}

pub fn generate_trial(
    condition: DirectorCondition,
    cfg: &DirectorConfig,
    library: &ItemLibrary,
    seed: u64,
) -> Result<DirectorTrial, DirectorError> {
    generate_with_id(condition, cfg, library, format!("director-{seed}"), SeedRecord { base: seed, stream: 0, derived: seed })
}

fn generate_with_id(
    condition: DirectorCondition,
    cfg: &DirectorConfig,
    library: &ItemLibrary,
    trial_id: String,
    seed: SeedRecord,
) -> Result<DirectorTrial, DirectorError> {
    cfg.validate()?;
    plan_counts(&condition, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.derived);
    let mut last = "(a) oracle uniqueness".to_string();
    for _ in 0..cfg.max_attempts {
        let (grid, instruction, ground_truth) = match attempt(&condition, cfg, library, &mut rng) {
            Ok(v) => v,
            Err(reason) => {
                last = reason.to_string();
                continue;
            }
        };
        let trial = DirectorTrial {
            trial_id: trial_id.clone(),
            grid,
            instruction,
            condition,
            fill_proportion: cfg.fill_proportion,
            related_proportion: cfg.related_proportion,
            ground_truth,
            seed,
        };
        let report = validate_trial(&trial, Some(library));
        match report.first_failure() {
            None => return Ok(trial),
            Some(check) => last = check.name.clone(),
        }
    }
    Err(DirectorError::Unsatisfiable { constraint: last, attempts: cfg.max_attempts })
}

/// `n` trials cycling through the 28 cells of the condition grid.
pub fn generate_condition_grid(
    n: usize,
    seed: u64,
    cfg: &DirectorConfig,
    library: &ItemLibrary,
) -> Result<Vec<DirectorTrial>, DirectorError> {
    let conditions = condition_grid();
    (0..n)
        .map(|i| {
            let record = SeedRecord { base: seed, stream: i as u64, derived: derive_seed(seed, "director", i as u64) };
            generate_with_id(conditions[i % conditions.len()], cfg, library, format!("director-grid-{seed}-{i:05}"), record)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub trial_id: String,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn check(&self, prefix: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name.starts_with(prefix))
    }

    fn push(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.to_string(), passed, detail: detail.into() });
    }
}

/// Re-derives every generation constraint from the stored grid. Passing a
/// library additionally checks that each item is one of its entries.
pub fn validate_trial(trial: &DirectorTrial, library: Option<&ItemLibrary>) -> ValidationReport {
    let mut r = ValidationReport { trial_id: trial.trial_id.clone(), checks: Vec::new() };
    let grid = &trial.grid;
    let instr = &trial.instruction;
    let cond = &trial.condition;
    let gt = trial.ground_truth;
    let visible = matching_cells(grid, instr, true);
    let all = matching_cells(grid, instr, false);
    let hidden: Vec<CellRef> = all.iter().copied().filter(|c| grid.cell(*c).occluded).collect();

    let resolved = answer_director(grid, instr);
    let gt_visible = !grid.cell(gt).occluded;
    r.push(
        "a_unique_visible",
        gt_visible && resolved.as_ref().ok() == Some(&gt),
        format!("resolved {resolved:?}, stored {gt}, stored cell occluded: {}", !gt_visible),
    );

    let adj = instr.adjective;
    r.push(
        "b_multiple_matches",
        adj == Adjective::None || visible.len() >= 2,
        format!("{} visible matches", visible.len()),
    );
    r.push(
        "c_single_match",
        adj != Adjective::None || visible.len() == 1,
        format!("{} visible matches", visible.len()),
    );

    let frame = Frame::named_by(instr.pov);
    let rank = |c: CellRef| {
        let size = grid.cell(c).item.as_ref().map_or(0, |i| i.size_level);
        extremeness(adj, frame, c, size)
    };
    let (d_ok, d_detail) = match cond.visual {
        VisualCondition::Shared => (hidden.is_empty(), format!("{} occluded matches", hidden.len())),
        VisualCondition::Different if adj == Adjective::None => {
            (!hidden.is_empty(), format!("{} occluded matches", hidden.len()))
        }
        VisualCondition::Different => {
            let competitor = hidden.iter().any(|&c| rank(c) > rank(gt));
            let ego = answer_director_egocentric(grid, instr);
            let diverges = ego.as_ref().is_ok_and(|c| *c != gt);
            (competitor && diverges, format!("competitor: {competitor}, egocentric {ego:?}"))
        }
    };
    r.push("d_occluded_competitor", d_ok, d_detail);

    let occupied = grid.occupied_count();
    let want_fill = trial.fill_proportion * CELLS as f64;
    r.push(
        "e_fill",
        (occupied as f64 - want_fill).abs() <= 1.0,
        format!("{occupied} items, expected {want_fill:.2}"),
    );

    let distractors = occupied.saturating_sub(1);
    let related = grid
        .occupied()
        .filter(|(c, item)| *c != gt && item.categories.contains(&instr.description.category))
        .count();
    let want_related = trial.related_proportion * distractors as f64;
    r.push(
        "f_related",
        (related as f64 - want_related).abs() <= 1.0,
        format!("{related} related distractors, expected {want_related:.2}"),
    );

    let labels_ok = cond.adjective == adj
        && cond.pov == instr.pov
        && cond.adjective_class == adj.class()
        && cond.spatial == SpatialCondition::for_adjective(adj)
        && instr.surface_text == synthesize_instruction(instr.description.clone(), adj, instr.pov).surface_text;
    r.push("labels", labels_ok, "condition labels and surface text agree with the instruction");

    r.push("description_matches", !all.is_empty(), format!("{} matches in grid", all.len()));

    if let Some(lib) = library {
        let unknown: Vec<String> = grid
            .occupied()
            .filter(|(_, item)| lib.get(&item.item_id) != Some(*item))
            .map(|(c, item)| format!("{c}:{}", item.item_id))
            .collect();
        r.push("library_items", unknown.is_empty(), unknown.join(" "));
    }
    r
}
