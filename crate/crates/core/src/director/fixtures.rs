//! Hand-built grids shared by unit tests, integration tests and the
//! acceptance suite.

use super::grid::{Cell, CellRef, Grid};
use super::instruction::{synthesize_instruction, Adjective, Description, Instruction, Pov};
use super::library::{ItemLibrary, Pattern};

fn put(grid: &mut Grid, lib: &ItemLibrary, at: &str, item_id: &str, occluded: bool) {
    let at: CellRef = at.parse().expect("fixture cell");
    let item = lib.get(item_id).unwrap_or_else(|| panic!("fixture item {item_id}")).clone();
    *grid.cell_mut(at) = Cell::with_item(item, occluded);
}

fn block(grid: &mut Grid, at: &str) {
    grid.cell_mut(at.parse().expect("fixture cell")).occluded = true;
}

pub fn blue_plain_clothing() -> Description {
    Description {
        category: "clothing".into(),
        noun: "item of clothing".into(),
        color: Some("blue".into()),
        pattern: Some(Pattern::Plain),
    }
}

/// Shelf from the worked example: blue plain shirts at C3, D1, D4 and an
/// occluded one at A1; everything else fails the description.
pub fn worked_example_grid(lib: &ItemLibrary) -> Grid {
    let mut g = Grid::default();
    put(&mut g, lib, "A1", "blue_shirt", true);
    put(&mut g, lib, "C3", "blue_shirt_small", false);
    put(&mut g, lib, "D1", "blue_shirt", false);
    put(&mut g, lib, "D4", "blue_shirt_large", false);
    put(&mut g, lib, "B1", "blue_striped_shirt", false);
    put(&mut g, lib, "A3", "red_shirt", false);
    put(&mut g, lib, "B2", "blue_book", true);
    put(&mut g, lib, "C1", "yellow_star_large", false);
    put(&mut g, lib, "B4", "white_cup_small", false);
    put(&mut g, lib, "C2", "red_ball", true);
    put(&mut g, lib, "A4", "green_shirt", false);
    put(&mut g, lib, "D3", "cookie", false);
    block(&mut g, "B3");
    block(&mut g, "D2");
    g
}

pub fn worked_example_instruction() -> Instruction {
    synthesize_instruction(blue_plain_clothing(), Adjective::HRightmost, Pov::Mine)
}

/// Matching items (red books) only in the given columns of one row.
pub fn single_row_grid(lib: &ItemLibrary, row: u8, cols: &[u8]) -> (Grid, Description) {
    let mut g = Grid::default();
    for &col in cols {
        *g.cell_mut(CellRef::new(col, row)) = Cell::with_item(lib.get("red_book").unwrap().clone(), false);
    }
    let other_row = (row + 2) % 4;
    *g.cell_mut(CellRef::new(0, other_row)) = Cell::with_item(lib.get("blue_cup").unwrap().clone(), false);
    let desc = Description { category: "book".into(), noun: "book".into(), color: Some("red".into()), pattern: None };
    (g, desc)
}
