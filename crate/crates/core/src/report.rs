//! Retained-token grid maps and plain-text tables.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellState {
    Retained,
    Backfilled,
    Removed,
}

impl CellState {
    pub fn grey(self) -> u8 {
        match self {
            CellState::Retained => 240,
            CellState::Backfilled => 128,
            CellState::Removed => 24,
        }
    }
}

/// Row-major `width x height` map of token states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<CellState>,
}

impl GridMap {
    /// `retained` and `backfilled` must be disjoint index sets below `n`.
    pub fn new(width: usize, height: usize, n: usize, retained: &[usize], backfilled: &[usize]) -> Result<Self> {
        if width * height != n || n == 0 {
            return Err(Error::GridMismatch { width, height, n });
        }
        let mut cells = vec![CellState::Removed; n];
        for (set, state) in [(retained, CellState::Retained), (backfilled, CellState::Backfilled)] {
            for &i in set {
                if i >= n {
                    return Err(Error::IndexOutOfRange { index: i, n });
                }
                if cells[i] != CellState::Removed {
                    return Err(Error::DuplicateIndex(i));
                }
                cells[i] = state;
            }
        }
        Ok(Self { width, height, cells })
    }

    pub fn count(&self, state: CellState) -> usize {
        self.cells.iter().filter(|&&c| c == state).count()
    }

    /// Binary greymap (P5), each cell drawn as a `cell_px` square.
    pub fn to_pgm(&self, cell_px: usize) -> Vec<u8> {
        let cell_px = cell_px.max(1);
        let (w, h) = (self.width * cell_px, self.height * cell_px);
        let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
        out.reserve(w * h);
        for row in 0..self.height {
            let line: Vec<u8> = (0..self.width)
                .flat_map(|col| std::iter::repeat_n(self.cells[row * self.width + col].grey(), cell_px))
                .collect();
            for _ in 0..cell_px {
                out.extend_from_slice(&line);
            }
        }
        out
    }

    pub fn to_svg(&self, cell_px: usize) -> String {
        let cell_px = cell_px.max(1);
        let (w, h) = (self.width * cell_px, self.height * cell_px);
        let mut s = String::new();
        let _ =
            writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
        for (i, cell) in self.cells.iter().enumerate() {
            let (x, y) = ((i % self.width) * cell_px, (i / self.width) * cell_px);
            let g = cell.grey();
            let _ = writeln!(
                s,
                r#"<rect x="{x}" y="{y}" width="{cell_px}" height="{cell_px}" fill="rgb({g},{g},{g})" stroke="rgb(64,64,64)" stroke-width="0.5"/>"#
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

/// A table rendered either as aligned text or tab-separated rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_text(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(String::len).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut s = String::new();
        let mut line = |cells: &[String]| {
            let parts: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            s.push_str(parts.join("  ").trim_end());
            s.push('\n');
        };
        line(&self.header);
        for row in &self.rows {
            line(row);
        }
        s
    }

    pub fn to_tsv(&self) -> String {
        let mut s = self.header.join("\t");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join("\t"));
            s.push('\n');
        }
        s
    }
}
