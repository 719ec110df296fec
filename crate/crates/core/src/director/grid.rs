use super::library::Item;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub const GRID_SIZE: usize = 4;
pub const COLUMN_LETTERS: [char; 4] = ['A', 'B', 'C', 'D'];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid cell reference {0:?}")]
pub struct BadCellRef(pub String);

/// A cell in the participant's frame: column A is the participant's left,
/// row 1 is the top shelf. Both indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CellRef {
    pub col: u8,
    pub row: u8,
}

impl CellRef {
    pub fn new(col: u8, row: u8) -> Self {
        assert!((col as usize) < GRID_SIZE && (row as usize) < GRID_SIZE, "cell out of range");
        CellRef { col, row }
    }

    pub fn all() -> impl Iterator<Item = CellRef> {
        (0..GRID_SIZE as u8).flat_map(|row| (0..GRID_SIZE as u8).map(move |col| CellRef { col, row }))
    }

    /// The same cell's column index as counted from the director's left.
    pub fn director_col(self) -> u8 {
        GRID_SIZE as u8 - 1 - self.col
    }
}

impl fmt::Display for CellRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", COLUMN_LETTERS[self.col as usize], self.row + 1)
    }
}

impl FromStr for CellRef {
    type Err = BadCellRef;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = s.as_bytes();
        if bytes.len() != 2 {
            return Err(BadCellRef(s.to_string()));
        }
        let col = match bytes[0].to_ascii_uppercase() {
            c @ b'A'..=b'D' => c - b'A',
            _ => return Err(BadCellRef(s.to_string())),
        };
        let row = match bytes[1] {
            r @ b'1'..=b'4' => r - b'1',
            _ => return Err(BadCellRef(s.to_string())),
        };
        Ok(CellRef { col, row })
    }
}

impl TryFrom<String> for CellRef {
    type Error = BadCellRef;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<CellRef> for String {
    fn from(c: CellRef) -> String {
        c.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Cell {
    /// Opaque backing: hidden from the director, still visible to the participant.
    pub occluded: bool,
    pub item: Option<Item>,
    /// Whether the ASCII rendering lists the item's attributes / size.
    #[serde(default)]
    pub show_attributes: bool,
    #[serde(default)]
    pub show_size: bool,
}

impl Cell {
    pub fn with_item(item: Item, occluded: bool) -> Self {
        Cell { occluded, item: Some(item), show_attributes: true, show_size: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Grid {
    /// Indexed `[row][col]`.
    pub cells: [[Cell; GRID_SIZE]; GRID_SIZE],
}

impl Grid {
    pub fn cell(&self, at: CellRef) -> &Cell {
        &self.cells[at.row as usize][at.col as usize]
    }

    pub fn cell_mut(&mut self, at: CellRef) -> &mut Cell {
        &mut self.cells[at.row as usize][at.col as usize]
    }

    pub fn occupied(&self) -> impl Iterator<Item = (CellRef, &Item)> + '_ {
        CellRef::all().filter_map(move |c| self.cell(c).item.as_ref().map(|i| (c, i)))
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied().count()
    }

    pub fn occluded_count(&self) -> usize {
        CellRef::all().filter(|&c| self.cell(c).occluded).count()
    }
}
