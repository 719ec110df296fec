//! Pipe-and-dash text rendering of a Director grid, and its parser.
//!
//! Layout:
//!
//! ```text
//! ====...====                      border: row width − 5 '=' characters
//! | A1   | B1   | C1   | D1   |    one line per text row of the block
//! | ...                       |
//! -----------------------------    separator between rows, full row width
//! ```
//!
//! Each field is one space, the text left-aligned in `W` columns, and one
//! space, where `W` is the longest text line (at least 18). A cell lists its
//! reference, `[BLOCKED]` when occluded, the item token or `Empty`, an
//! optional `B: attr,attr,...` line wrapped at commas with a three-space
//! continuation indent, and an optional `S: size:k` line. Size lines sit on
//! the last line of the row block.

use crate::director::{Cell, CellRef, Grid, ItemLibrary};
use std::fmt;
use thiserror::Error;

const MIN_WIDTH: usize = 18;
const BLOCKED: &str = "[BLOCKED]";
const EMPTY: &str = "Empty";
const ATTR_PREFIX: &str = "B: ";
const CONT_PREFIX: &str = "   ";
const SIZE_PREFIX: &str = "S: size:";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsciiGrid {
    pub text: String,
}

impl fmt::Display for AsciiGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub struct AsciiError {
    /// 1-based line number in the document.
    pub line: usize,
    pub cell: Option<CellRef>,
    pub message: String,
}

impl fmt::Display for AsciiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.cell {
            Some(c) => write!(f, "line {}, cell {c}: {}", self.line, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

fn wrap_attributes(attrs: &[String], width: usize) -> Vec<String> {
    let mut lines = vec![ATTR_PREFIX.to_string()];
    for (i, a) in attrs.iter().enumerate() {
        let tok = if i + 1 < attrs.len() { format!("{a},") } else { a.clone() };
        let cur = lines.last_mut().expect("non-empty");
        let fresh = cur.len() == ATTR_PREFIX.len() || cur.len() == CONT_PREFIX.len();
        if !fresh && cur.len() + tok.len() > width {
            lines.push(format!("{CONT_PREFIX}{tok}"));
        } else {
            cur.push_str(&tok);
        }
    }
    lines
}

/// Body lines above the size line, and the size line if shown.
fn cell_lines(at: CellRef, cell: &Cell, width: usize) -> (Vec<String>, Option<String>) {
    let mut body = vec![at.to_string()];
    if cell.occluded {
        body.push(BLOCKED.to_string());
    }
    match &cell.item {
        None => {
            body.push(EMPTY.to_string());
            (body, None)
        }
        Some(item) => {
            body.push(item.item_id.clone());
            if cell.show_attributes {
                body.extend(wrap_attributes(&item.attribute_list(), width));
            }
            (body, cell.show_size.then(|| format!("{SIZE_PREFIX}{}", item.size_level)))
        }
    }
}

pub fn render_director_ascii(grid: &Grid) -> AsciiGrid {
    // widest unwrappable text decides the column width
    let mut width = MIN_WIDTH;
    for at in CellRef::all() {
        let c = grid.cell(at);
        if let Some(item) = &c.item {
            width = width.max(item.item_id.len());
            for a in item.attribute_list() {
                width = width.max(ATTR_PREFIX.len() + a.len() + 1);
            }
        }
    }
    let row_len = 1 + 4 * (width + 3);
    let border = "=".repeat(row_len - 5);
    let sep = "-".repeat(row_len);
    let mut out = vec![border.clone()];
    for row in 0..4u8 {
        if row > 0 {
            out.push(sep.clone());
        }
        let blocks: Vec<(Vec<String>, Option<String>)> =
            (0..4u8).map(|col| cell_lines(CellRef::new(col, row), grid.cell(CellRef::new(col, row)), width)).collect();
        let height = blocks.iter().map(|(b, s)| b.len() + usize::from(s.is_some())).max().expect("four cells");
        let columns: Vec<Vec<String>> = blocks
            .into_iter()
            .map(|(mut body, size)| {
                let reserve = usize::from(size.is_some());
                body.resize(height - reserve, String::new());
                body.extend(size);
                body
            })
            .collect();
        for i in 0..height {
            let mut line = String::from("|");
            for col in &columns {
                line.push_str(&format!(" {:<width$} |", col[i]));
            }
            out.push(line);
        }
    }
    out.push(border);
    let mut text = out.join("\n");
    text.push('\n');
    AsciiGrid { text }
}

fn err(line: usize, cell: Option<CellRef>, message: impl Into<String>) -> AsciiError {
    AsciiError { line, cell, message: message.into() }
}

fn split_fields(line: &str, lineno: usize) -> Result<Vec<String>, AsciiError> {
    let t = line.trim_end();
    if !t.starts_with('|') || !t.ends_with('|') || t.len() < 2 {
        return Err(err(lineno, None, format!("expected a table row, found {t:?}")));
    }
    let fields: Vec<String> = t[1..t.len() - 1]
        .split('|')
        .map(|f| f.strip_prefix(' ').unwrap_or(f).trim_end().to_string())
        .collect();
    if fields.len() != 4 {
        return Err(err(lineno, None, format!("expected 4 cells, found {}", fields.len())));
    }
    Ok(fields)
}

fn is_header_row(fields: &[String]) -> bool {
    fields.iter().all(|f| f.parse::<CellRef>().is_ok() && f.len() == 2)
}

fn parse_cell(at: CellRef, lines: &[(usize, String)], lib: &ItemLibrary, block_start: usize) -> Result<Cell, AsciiError> {
    let mut it = lines.iter().filter(|(_, s)| !s.is_empty()).peekable();
    let fail = |n: usize, m: String| Err(err(n, Some(at), m));
    match it.next() {
        Some((_, h)) if h.as_str() == at.to_string() => {}
        Some((n, h)) => return fail(*n, format!("expected header {at}, found {h:?}")),
        None => return fail(block_start, "missing header".into()),
    }
    let mut cell = Cell::default();
    if it.peek().is_some_and(|(_, s)| s == BLOCKED) {
        cell.occluded = true;
        it.next();
    }
    let (tok_line, token) = match it.next() {
        Some((n, s)) => (*n, s.clone()),
        None => return fail(block_start, "missing item token".into()),
    };
    if token == EMPTY {
        if let Some((n, s)) = it.next() {
            return fail(*n, format!("unexpected line {s:?} after Empty"));
        }
        return Ok(cell);
    }
    let item = match lib.get(&token) {
        Some(i) => i.clone(),
        None => return fail(tok_line, format!("unknown item token {token:?}")),
    };
    let mut attrs: Option<String> = None;
    while let Some((n, s)) = it.peek().map(|(n, s)| (*n, s.clone())) {
        if let Some(rest) = s.strip_prefix(ATTR_PREFIX) {
            if attrs.is_some() {
                return fail(n, "repeated attribute line".into());
            }
            attrs = Some(rest.to_string());
        } else if let (Some(rest), Some(a)) = (s.strip_prefix(CONT_PREFIX), attrs.as_mut()) {
            a.push_str(rest);
        } else {
            break;
        }
        it.next();
    }
    if let Some(a) = &attrs {
        if *a != item.attribute_list().join(",") {
            return fail(tok_line, format!("attributes {a:?} do not match item {token}"));
        }
        cell.show_attributes = true;
    }
    if let Some((n, s)) = it.next() {
        let Some(k) = s.strip_prefix(SIZE_PREFIX) else {
            return fail(*n, format!("unexpected line {s:?}"));
        };
        match k.parse::<u8>() {
            Ok(k) if k == item.size_level => cell.show_size = true,
            _ => return fail(*n, format!("bad size tag {s:?} for {token}")),
        }
        if let Some((n, s)) = it.next() {
            return fail(*n, format!("unexpected line {s:?} after size"));
        }
    }
    cell.item = Some(item);
    Ok(cell)
}

pub fn parse_director_ascii(text: &str, library: &ItemLibrary) -> Result<Grid, AsciiError> {
    let lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end())).collect();
    let lines: Vec<(usize, &str)> = {
        // ignore blank lines around the table
        let first = lines.iter().position(|(_, l)| !l.is_empty()).unwrap_or(lines.len());
        let last = lines.iter().rposition(|(_, l)| !l.is_empty()).map_or(first, |i| i + 1);
        lines[first..last].to_vec()
    };
    let is_border = |l: &str| !l.is_empty() && l.chars().all(|c| c == '=');
    let is_sep = |l: &str| !l.is_empty() && l.chars().all(|c| c == '-');
    match lines.first() {
        Some((_, l)) if is_border(l) => {}
        Some((n, l)) => return Err(err(*n, None, format!("expected '=' border, found {l:?}"))),
        None => return Err(err(1, None, "empty document")),
    }
    let (end_no, end) = *lines.last().expect("non-empty");
    if lines.len() < 2 || !is_border(end) {
        return Err(err(end_no, None, "missing closing '=' border"));
    }

    let mut blocks: Vec<Vec<(usize, Vec<String>)>> = vec![Vec::new()];
    for &(n, l) in &lines[1..lines.len() - 1] {
        if is_sep(l) {
            blocks.push(Vec::new());
            continue;
        }
        let fields = split_fields(l, n)?;
        let block = blocks.last_mut().expect("non-empty");
        if !block.is_empty() && is_header_row(&fields) {
            return Err(err(n, None, "missing row separator before this line"));
        }
        block.push((n, fields));
    }
    if blocks.len() != 4 {
        return Err(err(end_no, None, format!("expected 4 rows, found {}", blocks.len())));
    }

    let mut grid = Grid::default();
    for (row, block) in blocks.iter().enumerate() {
        let start = block.first().map_or(end_no, |(n, _)| *n);
        for col in 0..4 {
            let at = CellRef::new(col as u8, row as u8);
            let cell_lines: Vec<(usize, String)> = block.iter().map(|(n, f)| (*n, f[col].clone())).collect();
            *grid.cell_mut(at) = parse_cell(at, &cell_lines, library, start)?;
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = include_str!("../../tests/fixtures/sample_grid.txt");

    #[test]
    fn sample_grid_parses() {
        let lib = ItemLibrary::builtin();
        let g = parse_director_ascii(SAMPLE, &lib).unwrap();
        assert_eq!(g.occluded_count(), 6);
        let a1 = g.cell("A1".parse().unwrap());
        assert!(a1.occluded);
        let item = a1.item.as_ref().unwrap();
        assert_eq!((item.item_id.as_str(), item.size_level), ("cookie", 1));
        assert!(g.cell("D4".parse().unwrap()).item.is_none());
    }

    #[test]
    fn sample_grid_renders_back_verbatim() {
        let lib = ItemLibrary::builtin();
        let g = parse_director_ascii(SAMPLE, &lib).unwrap();
        assert_eq!(render_director_ascii(&g).text, SAMPLE);
    }

    #[test]
    fn attribute_wrapping() {
        let attrs: Vec<String> = ["blue", "stackable", "book"].map(String::from).to_vec();
        assert_eq!(wrap_attributes(&attrs, 18), vec!["B: blue,stackable,", "   book"]);
    }

    #[test]
    fn missing_separator_names_line() {
        let lib = ItemLibrary::builtin();
        let broken: Vec<&str> = SAMPLE.lines().filter(|l| !l.starts_with('-')).collect();
        let e = parse_director_ascii(&broken.join("\n"), &lib).unwrap_err();
        assert!(e.message.contains("separator"), "{e}");
        assert_eq!(broken[e.line - 1].trim_start_matches("| ").get(..2), Some("A2"));
    }

    #[test]
    fn bad_token_and_size_name_the_cell() {
        let lib = ItemLibrary::builtin();
        let e = parse_director_ascii(&SAMPLE.replacen("beatbox", "boombox", 1), &lib).unwrap_err();
        assert_eq!(e.cell, Some("A3".parse().unwrap()));
        let e = parse_director_ascii(&SAMPLE.replacen("S: size:1 ", "S: size:7 ", 1), &lib).unwrap_err();
        assert_eq!(e.cell, Some("A1".parse().unwrap()));
        assert!(e.message.contains("size"));
    }
}
