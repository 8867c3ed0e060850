use serde::{Deserialize, Serialize};

use super::geom::Rect;

/// Fill color ids used by the renderer.
pub mod color {
    pub const DESKTOP: u8 = 0;
    pub const WINDOW: u8 = 1;
    pub const TITLE: u8 = 2;
    pub const PANEL: u8 = 3;
    pub const BUTTON: u8 = 4;
    pub const FIELD: u8 = 5;
    pub const MENU: u8 = 6;
    pub const SCROLL_TRACK: u8 = 7;
    pub const SCROLL_THUMB: u8 = 8;
    pub const REF_LINE: u8 = 9;
    pub const CANVAS: u8 = 10;
    /// Canvas paint colors are `PAINT_BASE + 0..=9`.
    pub const PAINT_BASE: u8 = 11;
    pub const MAX: u8 = PAINT_BASE + 9;

    pub fn is_scrollbar(c: u8) -> bool {
        c == SCROLL_TRACK || c == SCROLL_THUMB
    }

    pub fn is_paint(c: u8) -> bool {
        (PAINT_BASE..=MAX).contains(&c)
    }
}

/// One raster cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Fill(u8),
    Glyph(char),
    /// One cell of an icon bitmap.
    Icon(char),
}

impl Cell {
    pub fn is_fill(&self) -> bool {
        matches!(self, Cell::Fill(_))
    }
}

/// A deterministic stand-in for a screenshot: a grid of cells, each
/// `cell_px` screen pixels square.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RasterRepr", into = "RasterRepr")]
pub struct SymbolicRaster {
    pub width: u32,
    pub height: u32,
    pub cell_px: u32,
    cells: Vec<Cell>,
}

impl SymbolicRaster {
    pub fn new(width: u32, height: u32, cell_px: u32, fill: Cell) -> Self {
        Self { width, height, cell_px, cells: vec![fill; (width * height) as usize] }
    }

    pub fn get(&self, x: u32, y: u32) -> Cell {
        self.cells[(y * self.width + x) as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, cell: Cell) {
        if x < self.width && y < self.height {
            self.cells[(y * self.width + x) as usize] = cell;
        }
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn fill_rect(&mut self, r: Rect, cell: Cell) {
        let r = r.intersect(&self.bounds());
        for y in r.y..r.bottom() {
            for x in r.x..r.right() {
                self.set(x, y, cell);
            }
        }
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        crate::hash::canonical_hash(self)
    }

    /// Two-character-per-cell text rows (see [`RasterRepr`]).
    pub fn to_rows(&self) -> Vec<String> {
        RasterRepr::from(self.clone()).rows
    }

    /// A human-readable picture: glyphs as themselves, icons as their
    /// bitmap character, fills as a shade character.
    pub fn to_ascii(&self) -> String {
        let mut out = String::new();
        for y in 0..self.height {
            for x in 0..self.width {
                out.push(match self.get(x, y) {
                    Cell::Glyph(c) | Cell::Icon(c) => c,
                    Cell::Fill(color::DESKTOP) => ' ',
                    Cell::Fill(color::WINDOW) | Cell::Fill(color::PANEL) => '·',
                    Cell::Fill(color::TITLE) => '▀',
                    Cell::Fill(color::BUTTON) => '▒',
                    Cell::Fill(color::FIELD) => '_',
                    Cell::Fill(color::MENU) => '░',
                    Cell::Fill(color::SCROLL_TRACK) => '┆',
                    Cell::Fill(color::SCROLL_THUMB) => '█',
                    Cell::Fill(color::REF_LINE) => '│',
                    Cell::Fill(color::CANVAS) => ':',
                    Cell::Fill(c) => char::from(b'0' + (c - color::PAINT_BASE).min(9)),
                });
            }
            out.push('\n');
        }
        out
    }
}

/// Wire and file form of a raster: each row is a string with two
/// characters per cell. `f` + (`'0'` + color id) is a fill, `g` + char is a
/// glyph, `i` + char is an icon cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RasterRepr {
    pub width: u32,
    pub height: u32,
    pub cell_px: u32,
    pub rows: Vec<String>,
}

impl From<SymbolicRaster> for RasterRepr {
    fn from(r: SymbolicRaster) -> Self {
        let rows = r
            .cells
            .chunks(r.width.max(1) as usize)
            .take(r.height as usize)
            .map(|row| {
                let mut s = String::with_capacity(row.len() * 2);
                for cell in row {
                    match *cell {
                        Cell::Fill(c) => {
                            s.push('f');
                            s.push(char::from(b'0' + c));
                        }
                        Cell::Glyph(c) => {
                            s.push('g');
                            s.push(c);
                        }
                        Cell::Icon(c) => {
                            s.push('i');
                            s.push(c);
                        }
                    }
                }
                s
            })
            .collect();
        RasterRepr { width: r.width, height: r.height, cell_px: r.cell_px, rows }
    }
}

impl TryFrom<RasterRepr> for SymbolicRaster {
    type Error = String;

    fn try_from(repr: RasterRepr) -> Result<Self, Self::Error> {
        if repr.rows.len() != repr.height as usize {
            return Err(format!("expected {} rows, found {}", repr.height, repr.rows.len()));
        }
        if repr.cell_px == 0 {
            return Err("cell_px must be positive".into());
        }
        let mut cells = Vec::with_capacity((repr.width * repr.height) as usize);
        for (y, row) in repr.rows.iter().enumerate() {
            let chars: Vec<char> = row.chars().collect();
            if chars.len() != 2 * repr.width as usize {
                return Err(format!("row {y}: expected {} cells", repr.width));
            }
            for pair in chars.chunks(2) {
                let cell = match pair[0] {
                    'f' => {
                        let c = pair[1] as u32;
                        if !(('0' as u32)..=('0' as u32 + 255)).contains(&c) {
                            return Err(format!("row {y}: bad fill {:?}", pair[1]));
                        }
                        Cell::Fill((c - '0' as u32) as u8)
                    }
                    'g' => Cell::Glyph(pair[1]),
                    'i' => Cell::Icon(pair[1]),
                    other => return Err(format!("row {y}: bad cell tag {other:?}")),
                };
                cells.push(cell);
            }
        }
        Ok(SymbolicRaster { width: repr.width, height: repr.height, cell_px: repr.cell_px, cells })
    }
}
