use super::geom::Rect;
use super::raster::{color, Cell, SymbolicRaster};
use super::state::{EnvState, Widget, WidgetKind};

/// Signed cell rectangle; scrolled content can sit above the viewport.
#[derive(Clone, Copy)]
struct CellBox {
    x: i64,
    y: i64,
    w: i64,
    h: i64,
}

impl CellBox {
    fn from_px(r: &Rect, cell: u32, dy: i64) -> Self {
        let c = r.to_cells(cell);
        CellBox { x: c.x as i64, y: c.y as i64 + dy, w: c.w as i64, h: c.h as i64 }
    }

    fn clip(&self, clip: &Rect) -> Rect {
        let x0 = self.x.max(clip.x as i64);
        let y0 = self.y.max(clip.y as i64);
        let x1 = (self.x + self.w).min(clip.right() as i64);
        let y1 = (self.y + self.h).min(clip.bottom() as i64);
        if x1 <= x0 || y1 <= y0 {
            Rect::new(0, 0, 0, 0)
        } else {
            Rect::new(x0 as u32, y0 as u32, (x1 - x0) as u32, (y1 - y0) as u32)
        }
    }
}

fn put(r: &mut SymbolicRaster, clip: &Rect, x: i64, y: i64, cell: Cell) {
    if x >= 0 && y >= 0 && clip.contains(x as u32, y as u32) {
        r.set(x as u32, y as u32, cell);
    }
}

fn put_text(r: &mut SymbolicRaster, clip: &Rect, x: i64, y: i64, text: &str) {
    for (i, ch) in text.chars().enumerate() {
        put(r, clip, x + i as i64, y, Cell::Glyph(ch));
    }
}

/// Column where `text` starts inside `b` under the given alignment.
fn aligned_x(b: &CellBox, text: &str, align: &str) -> i64 {
    let len = text.chars().count() as i64;
    let slack = (b.w - len).max(0);
    match align {
        "center" => b.x + slack / 2,
        "right" => b.x + slack,
        _ => b.x,
    }
}

/// Renders the raster for `state`. A pure function of its input.
pub fn render(state: &EnvState) -> SymbolicRaster {
    let cell = state.cell_px;
    let mut r = SymbolicRaster::new(state.screen.w / cell, state.screen.h / cell, cell, Cell::Fill(color::DESKTOP));
    let screen = r.bounds();
    for win in state.windows.iter().filter(|w| w.visible) {
        let b = CellBox::from_px(&win.bbox, cell, 0);
        let area = b.clip(&screen);
        r.fill_rect(area, Cell::Fill(color::WINDOW));
        r.fill_rect(Rect::new(area.x, area.y, area.w, 1.min(area.h)), Cell::Fill(color::TITLE));
        put_text(&mut r, &area, b.x + 1, b.y, &win.title);
        for child in &win.children {
            draw_widget(&mut r, state, child, &area, 0);
        }
    }
    r
}

fn draw_widget(r: &mut SymbolicRaster, state: &EnvState, w: &Widget, clip: &Rect, dy: i64) {
    if w.hidden() {
        return;
    }
    let cell = state.cell_px;
    let b = CellBox::from_px(&w.bbox, cell, dy);
    let area = b.clip(clip);
    let mid = b.y + b.h / 2;
    let align = w.state.get("align").and_then(|s| s.as_text()).unwrap_or("left");
    match w.kind {
        WidgetKind::Panel => r.fill_rect(area, Cell::Fill(color::PANEL)),
        WidgetKind::Label => put_text(r, &area, aligned_x(&b, &w.text, align), b.y, &w.text),
        WidgetKind::Button => {
            r.fill_rect(area, Cell::Fill(color::BUTTON));
            put_text(r, &area, aligned_x(&b, &w.text, "center"), mid, &w.text);
        }
        WidgetKind::TextField => {
            r.fill_rect(area, Cell::Fill(color::FIELD));
            let inner = CellBox { x: b.x + 1, w: (b.w - 2).max(0), ..b };
            put_text(r, &area, aligned_x(&inner, &w.text, align), mid, &w.text);
        }
        WidgetKind::MenuItem => {
            r.fill_rect(area, Cell::Fill(color::MENU));
            put_text(r, &area, b.x + 1, mid, &w.text);
        }
        WidgetKind::Checkbox => {
            let mark = if w.checked() { '☑' } else { '☐' };
            put(r, &area, b.x, mid, Cell::Glyph(mark));
            if !w.text.is_empty() {
                put(r, &area, b.x + 1, mid, Cell::Glyph(' '));
                put_text(r, &area, b.x + 2, mid, &w.text);
            }
        }
        WidgetKind::Icon => {
            let bitmap = w.icon_id.as_ref().and_then(|id| state.icons.get(id));
            for (row, line) in bitmap.into_iter().flatten().enumerate() {
                for (col, ch) in line.chars().enumerate() {
                    if ch != ' ' {
                        put(r, &area, b.x + col as i64, b.y + row as i64, Cell::Icon(ch));
                    }
                }
            }
        }
        WidgetKind::Canvas => {
            r.fill_rect(area, Cell::Fill(color::CANVAS));
            for (row, line) in w.pixels.iter().enumerate() {
                for (col, ch) in line.chars().enumerate() {
                    if let Some(d) = ch.to_digit(10) {
                        let c = Cell::Fill(color::PAINT_BASE + d as u8);
                        put(r, &area, b.x + col as i64, b.y + row as i64, c);
                    }
                }
            }
            if let Some(col) = w.state.get("playhead").and_then(|s| s.as_int()) {
                for row in 0..b.h {
                    put(r, &area, b.x + col, b.y + row, Cell::Fill(color::REF_LINE));
                }
            }
        }
        WidgetKind::ScrollArea => {
            r.fill_rect(area, Cell::Fill(color::PANEL));
            let offset = w.int_state("scroll_offset");
            let max = w.int_state("max_offset");
            let bar_x = b.x + b.w - 1;
            for row in 0..b.h {
                put(r, &area, bar_x, b.y + row, Cell::Fill(color::SCROLL_TRACK));
            }
            let thumb = if max > 0 { offset * (b.h - 1) / max } else { 0 };
            put(r, &area, bar_x, b.y + thumb, Cell::Fill(color::SCROLL_THUMB));
            let inner = CellBox { w: b.w - 1, ..b }.clip(&area);
            for child in &w.children {
                draw_widget(r, state, child, &inner, dy - offset);
            }
            return;
        }
    }
    for child in &w.children {
        draw_widget(r, state, child, &area, dy);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::state::Window;

    #[test]
    fn blank_state_is_all_desktop() {
        let s = EnvState::blank(64, 32);
        let r = render(&s);
        assert_eq!((r.width, r.height), (8, 4));
        assert!(r.cells().iter().all(|c| *c == Cell::Fill(color::DESKTOP)));
    }

    #[test]
    fn window_title_and_button() {
        let mut s = EnvState::blank(160, 80);
        s.windows.push(
            Window::new("w", "Hi", Rect::new(8, 8, 96, 48)).with_children(vec![Widget::new(
                "b",
                WidgetKind::Button,
                Rect::new(16, 24, 48, 8),
            )
            .with_text("OK")]),
        );
        let r = render(&s);
        assert_eq!(r.get(1, 1), Cell::Fill(color::TITLE));
        assert_eq!(r.get(2, 1), Cell::Glyph('H'));
        assert_eq!(r.get(3, 1), Cell::Glyph('i'));
        // Button spans cells 2..8 on row 3; "OK" is centered at 4..6.
        assert_eq!(r.get(2, 3), Cell::Fill(color::BUTTON));
        assert_eq!(r.get(4, 3), Cell::Glyph('O'));
        assert_eq!(r.get(5, 3), Cell::Glyph('K'));
        assert_eq!(r.get(7, 3), Cell::Fill(color::BUTTON));
        assert_eq!(r.get(1, 2), Cell::Fill(color::WINDOW));
    }

    #[test]
    fn scroll_area_shifts_children_and_draws_bar() {
        let mut s = EnvState::blank(160, 80);
        let area = Widget::new("sa", WidgetKind::ScrollArea, Rect::new(0, 8, 80, 24))
            .with_state("scroll_offset", 1)
            .with_state("max_offset", 2)
            .with_children(vec![
                Widget::new("l0", WidgetKind::Label, Rect::new(0, 8, 40, 8)).with_text("zero"),
                Widget::new("l1", WidgetKind::Label, Rect::new(0, 16, 40, 8)).with_text("one"),
            ]);
        s.windows.push(Window::new("w", "", Rect::new(0, 0, 160, 80)).with_children(vec![area]));
        let r = render(&s);
        // "zero" scrolled out of view, "one" moved up to row 1.
        assert_eq!(r.get(0, 1), Cell::Glyph('o'));
        assert_eq!(r.get(9, 1), Cell::Fill(color::SCROLL_TRACK));
        assert_eq!(r.get(9, 2), Cell::Fill(color::SCROLL_THUMB));
    }
}
