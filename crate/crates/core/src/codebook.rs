//! Surface layout and codebooks.
//!
//! A [`Grid`] is the `rows x cols` panel plus a controllability mask; cells
//! that are masked out (the controller board, for instance) never carry a
//! state. A [`Codebook`] assigns one [`ElementState`] to every controllable
//! cell, stored in row-major order over the controllable cells only.
//!
//! Text form (`RISCB v1`):
//!
//! ```text
//! RISCB v1 rows=2 cols=3
//! #01
//! 230
//! ```
//!
//! `#` marks a non-controllable cell, a digit is `h_bit + 2 * v_bit`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::element::{ElementState, OFF};
use crate::error::{Error, Result};

#[derive(Debug, PartialEq, Eq)]
struct Layout {
    rows: usize,
    cols: usize,
    mask: Vec<bool>,
    // cell -> element index
    element_of: Vec<Option<usize>>,
    // element -> (row, col)
    position: Vec<(usize, usize)>,
    row_members: Vec<Vec<usize>>,
    col_members: Vec<Vec<usize>>,
}

/// Panel geometry with a controllability mask. Cheap to clone.
#[derive(Clone, PartialEq, Eq)]
pub struct Grid(Arc<Layout>);

impl Grid {
    /// `mask` is row-major, `true` for a controllable cell.
    pub fn new(rows: usize, cols: usize, mask: Vec<bool>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidGrid(format!("{rows}x{cols} has no cells")));
        }
        if mask.len() != rows * cols {
            return Err(Error::InvalidGrid(format!(
                "mask has {} cells, expected {}",
                mask.len(),
                rows * cols
            )));
        }
        let mut element_of = Vec::with_capacity(mask.len());
        let mut position = Vec::new();
        let mut row_members = vec![Vec::new(); rows];
        let mut col_members = vec![Vec::new(); cols];
        for (cell, &on) in mask.iter().enumerate() {
            if on {
                let (r, c) = (cell / cols, cell % cols);
                let e = position.len();
                position.push((r, c));
                row_members[r].push(e);
                col_members[c].push(e);
                element_of.push(Some(e));
            } else {
                element_of.push(None);
            }
        }
        Ok(Self(Arc::new(Layout {
            rows,
            cols,
            mask,
            element_of,
            position,
            row_members,
            col_members,
        })))
    }

    /// Every cell controllable.
    pub fn full(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![true; rows * cols])
    }

    /// All cells controllable except the listed `(row, col)` cells.
    pub fn with_blocked(rows: usize, cols: usize, blocked: &[(usize, usize)]) -> Result<Self> {
        let mut mask = vec![true; rows * cols];
        for &(r, c) in blocked {
            if r >= rows || c >= cols {
                return Err(Error::InvalidGrid(format!(
                    "blocked cell ({r},{c}) outside {rows}x{cols}"
                )));
            }
            mask[r * cols + c] = false;
        }
        Self::new(rows, cols, mask)
    }

    pub fn rows(&self) -> usize {
        self.0.rows
    }

    pub fn cols(&self) -> usize {
        self.0.cols
    }

    pub fn mask(&self) -> &[bool] {
        &self.0.mask
    }

    /// Number of controllable cells, `N`.
    pub fn controllable(&self) -> usize {
        self.0.position.len()
    }

    pub fn element_at(&self, row: usize, col: usize) -> Option<usize> {
        if row >= self.rows() || col >= self.cols() {
            return None;
        }
        self.0.element_of[row * self.cols() + col]
    }

    pub fn position(&self, element: usize) -> (usize, usize) {
        self.0.position[element]
    }

    /// Controllable elements of `row`, ascending.
    pub fn row_members(&self, row: usize) -> &[usize] {
        &self.0.row_members[row]
    }

    pub fn col_members(&self, col: usize) -> &[usize] {
        &self.0.col_members[col]
    }

    /// Rows that hold at least one controllable cell.
    pub fn active_rows(&self) -> usize {
        self.0.row_members.iter().filter(|m| !m.is_empty()).count()
    }

    pub fn active_cols(&self) -> usize {
        self.0.col_members.iter().filter(|m| !m.is_empty()).count()
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("rows", &self.rows())
            .field("cols", &self.cols())
            .field("controllable", &self.controllable())
            .finish()
    }
}

/// A complete state assignment for the controllable cells of a [`Grid`].
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Codebook {
    grid: Grid,
    states: Vec<ElementState>,
}

impl Codebook {
    pub fn all_off(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            states: vec![OFF; grid.controllable()],
        }
    }

    pub fn from_states(grid: &Grid, states: Vec<ElementState>) -> Result<Self> {
        if states.len() != grid.controllable() {
            return Err(Error::DimensionMismatch {
                expected: grid.controllable(),
                actual: states.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            states,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[ElementState] {
        &self.states
    }

    pub fn state(&self, element: usize) -> ElementState {
        self.states[element]
    }

    pub fn set(&mut self, element: usize, state: ElementState) {
        self.states[element] = state;
    }

    /// Sets every listed element to `state`.
    pub fn set_group(&mut self, elements: &[usize], state: ElementState) {
        for &e in elements {
            self.states[e] = state;
        }
    }

    pub fn cell(&self, row: usize, col: usize) -> Option<ElementState> {
        self.grid.element_at(row, col).map(|e| self.states[e])
    }

    /// Inverts both phase bits of every controllable element.
    pub fn flip_all(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            states: self.states.iter().map(|s| s.flipped()).collect(),
        }
    }

    /// 64-bit FNV-1a over the grid shape and state codes.
    pub fn digest(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut hash = OFFSET;
        let mut feed = |byte: u8| {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(PRIME);
        };
        for b in (self.grid.rows() as u32)
            .to_le_bytes()
            .into_iter()
            .chain((self.grid.cols() as u32).to_le_bytes())
        {
            feed(b);
        }
        for (cell, &on) in self.grid.mask().iter().enumerate() {
            let byte = match self.grid.0.element_of[cell] {
                Some(e) if on => b'0' + self.states[e].code(),
                _ => b'#',
            };
            feed(byte);
        }
        hash
    }

    /// Serializes to `RISCB v1` text, each line newline-terminated.
    pub fn to_text(&self) -> String {
        let (rows, cols) = (self.grid.rows(), self.grid.cols());
        let mut out = format!("RISCB v1 rows={rows} cols={cols}\n");
        out.reserve(rows * (cols + 1));
        for r in 0..rows {
            for c in 0..cols {
                out.push(match self.cell(r, c) {
                    Some(s) => (b'0' + s.code()) as char,
                    None => '#',
                });
            }
            out.push('\n');
        }
        out
    }

    /// Strict `RISCB v1` parser. A single trailing newline is optional.
    pub fn from_text(text: &str) -> Result<Self> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        let mut lines = body.split('\n');
        let header = lines.next().unwrap_or("");
        let (rows, cols) = parse_header(header)?;
        let mut mask = Vec::with_capacity(rows * cols);
        let mut states = Vec::new();
        let mut seen = 0;
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            if seen == rows {
                return Err(parse_err(lineno, format!("expected {rows} rows, found more")));
            }
            if line.len() != cols {
                return Err(parse_err(
                    lineno,
                    format!("expected {cols} cells, found {}", line.chars().count()),
                ));
            }
            for ch in line.bytes() {
                match ch {
                    b'#' => mask.push(false),
                    b'0'..=b'3' => {
                        mask.push(true);
                        states.push(ElementState::from_code(ch - b'0').expect("digit in range"));
                    }
                    other => {
                        return Err(parse_err(
                            lineno,
                            format!("unexpected character {:?}", other as char),
                        ))
                    }
                }
            }
            seen += 1;
        }
        if seen != rows {
            return Err(parse_err(seen + 2, format!("expected {rows} rows, found {seen}")));
        }
        let grid = Grid::new(rows, cols, mask)?;
        Codebook::from_states(&grid, states)
    }
}

fn parse_err(line: usize, msg: String) -> Error {
    Error::Parse { line, msg }
}

fn parse_header(header: &str) -> Result<(usize, usize)> {
    let bad = || parse_err(1, format!("malformed header {header:?}"));
    let rest = header.strip_prefix("RISCB v1 rows=").ok_or_else(bad)?;
    let (rows, cols) = rest.split_once(" cols=").ok_or_else(bad)?;
    let num = |s: &str| -> Result<usize> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        s.parse().map_err(|_| bad())
    };
    let (rows, cols) = (num(rows)?, num(cols)?);
    if rows == 0 || cols == 0 {
        return Err(bad());
    }
    Ok((rows, cols))
}

impl fmt::Debug for Codebook {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Display for Codebook {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl From<Codebook> for String {
    fn from(cb: Codebook) -> String {
        cb.to_text()
    }
}

impl TryFrom<String> for Codebook {
    type Error = Error;

    fn try_from(text: String) -> Result<Self> {
        Codebook::from_text(&text)
    }
}
