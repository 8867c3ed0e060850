use std::collections::BTreeSet;

use thiserror::Error;

use super::geom::Rect;
use super::state::{EnvState, Mutation, Widget, WidgetKind};
use crate::action::is_known_key;

/// A task-pack or state document that does not satisfy the schema.
/// `path` names the offending field, e.g. `windows[0].children[2].icon_id`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl SchemaError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }

    /// Prefixes the path with an outer field name.
    pub fn within(mut self, outer: &str) -> Self {
        self.path = if self.path.is_empty() { outer.to_string() } else { format!("{outer}.{}", self.path) };
        self
    }
}

struct Checker<'a> {
    s: &'a EnvState,
    widget_ids: BTreeSet<&'a str>,
    window_ids: BTreeSet<&'a str>,
}

fn err<T>(path: &str, msg: impl Into<String>) -> Result<T, SchemaError> {
    Err(SchemaError::new(path, msg))
}

/// Checks the structural invariants of a state: snapped and nested
/// bboxes, unique ids, resolvable references.
pub fn validate_state(s: &EnvState) -> Result<(), SchemaError> {
    let cell = s.cell_px;
    if cell == 0 {
        return err("cell_px", "must be positive");
    }
    if s.screen.w == 0 || s.screen.h == 0 || !s.screen.w.is_multiple_of(cell) || !s.screen.h.is_multiple_of(cell) {
        return err("screen", format!("must be a positive multiple of {cell} px"));
    }
    if s.cursor.x >= s.screen.w || s.cursor.y >= s.screen.h {
        return err("cursor", "outside the screen");
    }
    for (id, rows) in &s.icons {
        let path = format!("icons.{id}");
        let width = rows.first().map(|r| r.chars().count()).unwrap_or(0);
        if width == 0 || rows.iter().any(|r| r.chars().count() != width) {
            return err(&path, "bitmap rows must be non-empty and of equal length");
        }
        if rows.iter().any(|r| r.contains(' ')) {
            return err(&path, "bitmaps must be solid (no blank cells)");
        }
    }

    let mut c = Checker { s, widget_ids: BTreeSet::new(), window_ids: BTreeSet::new() };
    let screen = s.screen_rect();
    for (i, win) in s.windows.iter().enumerate() {
        let path = format!("windows[{i}]");
        if !c.window_ids.insert(&win.id) {
            return err(&format!("{path}.id"), format!("duplicate window id `{}`", win.id));
        }
        if !win.bbox.is_snapped(cell) || win.bbox.is_empty() {
            return err(&format!("{path}.bbox"), format!("must be non-empty and snap to {cell} px cells"));
        }
        if !win.bbox.inside(&screen) {
            return err(&format!("{path}.bbox"), "outside the screen");
        }
        for (j, w) in win.children.iter().enumerate() {
            c.widget(w, &win.bbox, &format!("{path}.children[{j}]"))?;
        }
    }
    for (i, win) in s.windows.iter().enumerate() {
        for (j, w) in win.children.iter().enumerate() {
            c.effects(w, &format!("windows[{i}].children[{j}]"))?;
        }
    }
    for (i, b) in s.bindings.iter().enumerate() {
        let path = format!("bindings[{i}]");
        if b.keys.is_empty() {
            return err(&format!("{path}.keys"), "empty key list");
        }
        if let Some(k) = b.keys.iter().find(|k| !is_known_key(k)) {
            return err(&format!("{path}.keys"), format!("unknown key `{k}`"));
        }
        for (k, m) in b.mutations.iter().enumerate() {
            c.mutation(m, &format!("{path}.do[{k}]"))?;
        }
    }
    if let Some(f) = &s.focus {
        if !c.widget_ids.contains(f.as_str()) {
            return err("focus", format!("no widget `{f}`"));
        }
    }
    Ok(())
}

impl<'a> Checker<'a> {
    fn widget(&mut self, w: &'a Widget, parent: &Rect, path: &str) -> Result<(), SchemaError> {
        let cell = self.s.cell_px;
        if self.window_ids.contains(w.id.as_str()) || !self.widget_ids.insert(&w.id) {
            return err(&format!("{path}.id"), format!("duplicate id `{}`", w.id));
        }
        if !w.bbox.is_snapped(cell) || w.bbox.is_empty() {
            return err(&format!("{path}.bbox"), format!("must be non-empty and snap to {cell} px cells"));
        }
        if !w.bbox.inside(parent) {
            return err(&format!("{path}.bbox"), format!("{} is not inside parent {}", w.bbox, parent));
        }
        if let Some(icon) = &w.icon_id {
            let Some(bitmap) = self.s.icons.get(icon) else {
                return err(&format!("{path}.icon_id"), format!("unknown icon `{icon}`"));
            };
            let (iw, ih) = (bitmap[0].chars().count() as u32, bitmap.len() as u32);
            if w.kind == WidgetKind::Icon && (w.bbox.w != iw * cell || w.bbox.h != ih * cell) {
                return err(&format!("{path}.bbox"), format!("icon `{icon}` is {iw}x{ih} cells"));
            }
        } else if w.kind == WidgetKind::Icon {
            return err(&format!("{path}.icon_id"), "icon widgets need an icon_id");
        }
        if w.kind == WidgetKind::Canvas {
            let (cols, rows) = ((w.bbox.w / cell) as usize, (w.bbox.h / cell) as usize);
            if w.pixels.len() > rows || w.pixels.iter().any(|r| r.chars().count() > cols) {
                return err(&format!("{path}.pixels"), format!("larger than the {cols}x{rows} canvas"));
            }
            if w.pixels.iter().flat_map(|r| r.chars()).any(|ch| ch != '.' && !ch.is_ascii_digit()) {
                return err(&format!("{path}.pixels"), "cells must be `.` or a digit");
            }
        } else if !w.pixels.is_empty() {
            return err(&format!("{path}.pixels"), "only canvases have pixels");
        }
        let mut inner = w.bbox;
        if w.kind == WidgetKind::ScrollArea {
            let max = w.int_state("max_offset");
            let offset = w.int_state("scroll_offset");
            if max < 0 || offset < 0 || offset > max {
                return err(&format!("{path}.state.scroll_offset"), format!("must lie in [0, {max}]"));
            }
            // Content may extend below the viewport by the scroll range,
            // and stays clear of the scrollbar column.
            inner = Rect::new(w.bbox.x, w.bbox.y, w.bbox.w - cell, w.bbox.h + max as u32 * cell);
        }
        for (i, child) in w.children.iter().enumerate() {
            self.widget(child, &inner, &format!("{path}.children[{i}]"))?;
        }
        Ok(())
    }

    fn effects(&self, w: &Widget, path: &str) -> Result<(), SchemaError> {
        for (i, e) in w.effects.iter().enumerate() {
            let epath = format!("{path}.effects[{i}]");
            if let Some(t) = &e.target {
                if !self.widget_ids.contains(t.as_str()) {
                    return err(&format!("{epath}.target"), format!("no widget `{t}`"));
                }
            }
            for (k, m) in e.mutations.iter().enumerate() {
                self.mutation(m, &format!("{epath}.do[{k}]"))?;
            }
        }
        for (i, c) in w.children.iter().enumerate() {
            self.effects(c, &format!("{path}.children[{i}]"))?;
        }
        Ok(())
    }

    fn mutation(&self, m: &Mutation, path: &str) -> Result<(), SchemaError> {
        let widget = |id: &str| {
            if self.widget_ids.contains(id) {
                Ok(())
            } else {
                err(&format!("{path}.widget"), format!("no widget `{id}`"))
            }
        };
        match m {
            Mutation::CopyText { widget: id, .. }
            | Mutation::CopyState { widget: id, .. }
            | Mutation::SetText { widget: id, .. }
            | Mutation::SetState { widget: id, .. }
            | Mutation::RenameFromText { widget: id, .. } => widget(id),
            Mutation::Paint { widget: id, color, .. } => {
                widget(id)?;
                if *color > 9 {
                    return err(&format!("{path}.color"), "paint colors are 0..=9");
                }
                Ok(())
            }
            Mutation::OpenWindow { window } | Mutation::CloseWindow { window } => {
                if self.window_ids.contains(window.as_str()) {
                    Ok(())
                } else {
                    err(&format!("{path}.window"), format!("no window `{window}`"))
                }
            }
            Mutation::SetSetting { .. }
            | Mutation::CreateFolder { .. }
            | Mutation::CreateFile { .. }
            | Mutation::DeleteFile { .. }
            | Mutation::MoveFile { .. }
            | Mutation::RenameFile { .. } => Ok(()),
        }
    }
}
