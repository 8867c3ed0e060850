use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::doc::{Element, Role};
use super::segment::Region;
use crate::sim::{color, Cell, Rect, SymbolicRaster};

const CHECKED: char = '☑';
const UNCHECKED: char = '☐';

/// One stage of the parsing pipeline. Sees the whole raster but must only
/// report elements built from cells the region owns.
pub trait Extractor: Send + Sync {
    fn name(&self) -> &'static str;
    fn extract(&self, raster: &SymbolicRaster, region: &Region<'_>) -> Vec<Element>;
}

/// Per-cell drop mask for text noise, row-major over the full grid, so the
/// same seed drops the same cells regardless of panel layout.
pub fn text_noise_mask(width: u32, height: u32, p: f64, seed: u64) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..width * height).map(|_| rng.gen::<f64>() < p).collect()
}

/// Replaces each masked glyph with a desktop fill.
pub fn apply_text_noise(raster: &SymbolicRaster, p: f64, seed: u64) -> SymbolicRaster {
    if p <= 0.0 {
        return raster.clone();
    }
    let mask = text_noise_mask(raster.width, raster.height, p, seed);
    let mut out = raster.clone();
    for y in 0..raster.height {
        for x in 0..raster.width {
            if mask[(y * raster.width + x) as usize] && matches!(raster.get(x, y), Cell::Glyph(_)) {
                out.set(x, y, Cell::Fill(color::DESKTOP));
            }
        }
    }
    out
}

fn is_text_glyph(c: Cell) -> bool {
    matches!(c, Cell::Glyph(ch) if ch != CHECKED && ch != UNCHECKED)
}

fn px(cells: Rect, cell_px: u32) -> Rect {
    cells.scale(cell_px)
}

/// Maximal horizontal glyph runs, trimmed of spaces.
pub fn extract_text(raster: &SymbolicRaster, region: &Region<'_>) -> Vec<Element> {
    let b = region.bounds(raster.cell_px);
    let mut out = Vec::new();
    for y in b.y..b.bottom() {
        let mut x = b.x;
        while x < b.right() {
            if !(region.owns(x, y) && is_text_glyph(raster.get(x, y))) {
                x += 1;
                continue;
            }
            let start = x;
            let mut s = String::new();
            while x < b.right() && region.owns(x, y) {
                match raster.get(x, y) {
                    Cell::Glyph(ch) if ch != CHECKED && ch != UNCHECKED => s.push(ch),
                    _ => break,
                }
                x += 1;
            }
            let lead = s.chars().take_while(|c| *c == ' ').count() as u32;
            let trimmed = s.trim_matches(' ');
            if !trimmed.is_empty() {
                let len = trimmed.chars().count() as u32;
                out.push(Element::new(Role::Text, trimmed, px(Rect::new(start + lead, y, len, 1), raster.cell_px)));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct TextExtractor {
    pub noise: f64,
    pub seed: u64,
}

impl Extractor for TextExtractor {
    fn name(&self) -> &'static str {
        "text"
    }

    fn extract(&self, raster: &SymbolicRaster, region: &Region<'_>) -> Vec<Element> {
        if self.noise > 0.0 {
            extract_text(&apply_text_noise(raster, self.noise, self.seed), region)
        } else {
            extract_text(raster, region)
        }
    }
}

/// A named icon bitmap. Rows use a space for an empty cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IconTemplate {
    pub icon_name: String,
    pub pattern: Vec<String>,
}

impl IconTemplate {
    /// Templates for every bitmap in an icon table, cropped to their ink.
    pub fn from_table(icons: &BTreeMap<String, Vec<String>>) -> Vec<IconTemplate> {
        icons.iter().map(|(name, rows)| IconTemplate { icon_name: name.clone(), pattern: crop(rows) }).collect()
    }
}

fn crop(rows: &[String]) -> Vec<String> {
    let grid: Vec<Vec<char>> = rows.iter().map(|r| r.chars().collect()).collect();
    let ink = |c: &char| *c != ' ';
    let top = grid.iter().position(|r| r.iter().any(ink));
    let Some(top) = top else { return Vec::new() };
    let bottom = grid.iter().rposition(|r| r.iter().any(ink)).unwrap_or(top);
    let left = grid[top..=bottom].iter().filter_map(|r| r.iter().position(ink)).min().unwrap_or(0);
    let right = grid[top..=bottom].iter().filter_map(|r| r.iter().rposition(ink)).max().unwrap_or(0);
    grid[top..=bottom].iter().map(|r| (left..=right).map(|i| r.get(i).copied().unwrap_or(' ')).collect()).collect()
}

/// 4-connected components over owned cells. `key` returns `None` for cells
/// outside any component; neighbours join only when keys are equal.
fn components<K: PartialEq + Copy>(
    raster: &SymbolicRaster,
    region: &Region<'_>,
    key: impl Fn(u32, u32) -> Option<K>,
) -> Vec<(K, Vec<(u32, u32)>)> {
    let b = region.bounds(raster.cell_px);
    let mut seen = vec![false; (b.w * b.h) as usize];
    let idx = |x: u32, y: u32| ((y - b.y) * b.w + (x - b.x)) as usize;
    let mut out = Vec::new();
    for y in b.y..b.bottom() {
        for x in b.x..b.right() {
            if seen[idx(x, y)] || !region.owns(x, y) {
                continue;
            }
            let Some(k) = key(x, y) else { continue };
            let mut cells = Vec::new();
            let mut stack = vec![(x, y)];
            seen[idx(x, y)] = true;
            while let Some((cx, cy)) = stack.pop() {
                cells.push((cx, cy));
                let mut next = Vec::with_capacity(4);
                if cx > b.x {
                    next.push((cx - 1, cy));
                }
                if cx + 1 < b.right() {
                    next.push((cx + 1, cy));
                }
                if cy > b.y {
                    next.push((cx, cy - 1));
                }
                if cy + 1 < b.bottom() {
                    next.push((cx, cy + 1));
                }
                for (nx, ny) in next {
                    if !seen[idx(nx, ny)] && region.owns(nx, ny) && key(nx, ny) == Some(k) {
                        seen[idx(nx, ny)] = true;
                        stack.push((nx, ny));
                    }
                }
            }
            cells.sort_by_key(|&(x, y)| (y, x));
            out.push((k, cells));
        }
    }
    out
}

fn cell_bbox(cells: &[(u32, u32)]) -> Rect {
    let x0 = cells.iter().map(|c| c.0).min().unwrap_or(0);
    let y0 = cells.iter().map(|c| c.1).min().unwrap_or(0);
    let x1 = cells.iter().map(|c| c.0).max().unwrap_or(0);
    let y1 = cells.iter().map(|c| c.1).max().unwrap_or(0);
    Rect::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1)
}

/// Groups icon cells into components and names each by exact template
/// match. Unmatched components keep an empty name at confidence 0.5.
pub fn match_icons(raster: &SymbolicRaster, region: &Region<'_>, templates: &[IconTemplate]) -> Vec<Element> {
    let comps = components(raster, region, |x, y| matches!(raster.get(x, y), Cell::Icon(_)).then_some(()));
    comps
        .into_iter()
        .map(|((), cells)| {
            let bb = cell_bbox(&cells);
            let mut grid = vec![vec![' '; bb.w as usize]; bb.h as usize];
            for &(x, y) in &cells {
                if let Cell::Icon(ch) = raster.get(x, y) {
                    grid[(y - bb.y) as usize][(x - bb.x) as usize] = ch;
                }
            }
            let pattern: Vec<String> = grid.into_iter().map(|r| r.into_iter().collect()).collect();
            let mut e = Element::new(Role::Icon, "", px(bb, raster.cell_px));
            match templates.iter().find(|t| t.pattern == pattern) {
                Some(t) => e.icon_name = Some(t.icon_name.clone()),
                None => e.confidence = 0.5,
            }
            e
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct IconMatcher {
    pub templates: Vec<IconTemplate>,
}

impl Extractor for IconMatcher {
    fn name(&self) -> &'static str {
        "icons"
    }

    fn extract(&self, raster: &SymbolicRaster, region: &Region<'_>) -> Vec<Element> {
        match_icons(raster, region, &self.templates)
    }
}

/// Cells of a fill-colored control: the fill itself plus glyph runs that
/// have the same fill on both sides of the row.
fn control_mask(raster: &SymbolicRaster, region: &Region<'_>, fill: u8) -> Vec<bool> {
    let (w, h) = (raster.width, raster.height);
    let mut mask = vec![false; (w * h) as usize];
    let b = region.bounds(raster.cell_px);
    for y in b.y..b.bottom() {
        let mut x = b.x;
        while x < b.right() {
            match raster.get(x, y) {
                Cell::Fill(c) if c == fill && region.owns(x, y) => {
                    mask[(y * w + x) as usize] = true;
                    x += 1;
                }
                Cell::Glyph(_) if x > b.x && mask[(y * w + x - 1) as usize] => {
                    let start = x;
                    while x < b.right() && region.owns(x, y) && matches!(raster.get(x, y), Cell::Glyph(_)) {
                        x += 1;
                    }
                    if x < b.right() && region.owns(x, y) && raster.get(x, y) == Cell::Fill(fill) {
                        for gx in start..x {
                            mask[(y * w + gx) as usize] = true;
                        }
                    }
                }
                _ => x += 1,
            }
        }
    }
    mask
}

fn control_elements(raster: &SymbolicRaster, region: &Region<'_>, fill: u8, role: Role) -> Vec<Element> {
    let mask = control_mask(raster, region, fill);
    let w = raster.width;
    components(raster, region, |x, y| mask[(y * w + x) as usize].then_some(()))
        .into_iter()
        .map(|((), cells)| {
            let bb = cell_bbox(&cells);
            let mut lines: Vec<String> = Vec::new();
            for y in bb.y..bb.bottom() {
                let line: String = cells
                    .iter()
                    .filter(|c| c.1 == y)
                    .map(|&(x, y)| match raster.get(x, y) {
                        Cell::Glyph(ch) => ch,
                        _ => ' ',
                    })
                    .collect();
                let line = line.trim().to_string();
                if !line.is_empty() {
                    lines.push(line);
                }
            }
            Element::new(role, lines.join(" "), px(bb, raster.cell_px))
        })
        .collect()
}

/// Scrollbars, reference lines, buttons and menu items, text fields,
/// checkboxes and painted objects.
pub fn detect_widgets(raster: &SymbolicRaster, region: &Region<'_>) -> Vec<Element> {
    let cell_px = raster.cell_px;
    let mut out = Vec::new();

    let bars = components(raster, region, |x, y| match raster.get(x, y) {
        Cell::Fill(c) if color::is_scrollbar(c) => Some(Role::Scrollbar),
        Cell::Fill(color::REF_LINE) => Some(Role::ReferenceLine),
        _ => None,
    });
    for (role, cells) in bars {
        let bb = cell_bbox(&cells);
        if bb.w != 1 && bb.h != 1 {
            continue;
        }
        let mut e = Element::new(role, "", px(bb, cell_px));
        if role == Role::Scrollbar {
            if let Some(&(tx, ty)) = cells.iter().find(|&&(x, y)| raster.get(x, y) == Cell::Fill(color::SCROLL_THUMB)) {
                let pos = if bb.w == 1 { ty - bb.y } else { tx - bb.x };
                e.state = Some(format!("thumb={pos}"));
            }
        }
        out.push(e);
    }

    out.extend(control_elements(raster, region, color::BUTTON, Role::Button));
    out.extend(control_elements(raster, region, color::MENU, Role::Button));
    out.extend(control_elements(raster, region, color::FIELD, Role::Field));

    let b = region.bounds(cell_px);
    for y in b.y..b.bottom() {
        for x in b.x..b.right() {
            let state = match raster.get(x, y) {
                Cell::Glyph(CHECKED) => "checked",
                Cell::Glyph(UNCHECKED) => "unchecked",
                _ => continue,
            };
            if !region.owns(x, y) {
                continue;
            }
            let mut end = x + 1;
            let mut label = String::new();
            if end + 1 < b.right() && raster.get(end, y) == Cell::Glyph(' ') && is_text_glyph(raster.get(end + 1, y)) {
                let mut cx = end + 1;
                while cx < b.right() && region.owns(cx, y) && is_text_glyph(raster.get(cx, y)) {
                    if let Cell::Glyph(ch) = raster.get(cx, y) {
                        label.push(ch);
                    }
                    cx += 1;
                }
                let kept = label.trim_end().chars().count() as u32;
                label = label.trim_end().to_string();
                end = x + 2 + kept;
            }
            out.push(Element::new(Role::Checkbox, label, px(Rect::new(x, y, end - x, 1), cell_px)).with_state(state));
        }
    }

    let paint = components(raster, region, |x, y| match raster.get(x, y) {
        Cell::Fill(c) if color::is_paint(c) => Some(c),
        _ => None,
    });
    for (c, cells) in paint {
        out.push(Element::new(
            Role::Object,
            format!("color {}", c - color::PAINT_BASE),
            px(cell_bbox(&cells), cell_px),
        ));
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct WidgetDetector;

impl Extractor for WidgetDetector {
    fn name(&self) -> &'static str {
        "widgets"
    }

    fn extract(&self, raster: &SymbolicRaster, region: &Region<'_>) -> Vec<Element> {
        detect_widgets(raster, region)
    }
}
