use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::geom::{Point, Rect};
use super::state::{ClickMemo, EnvState, Mutation, PressOrigin, Scalar, TextAs, Trigger, WidgetKind};
use crate::action::{is_modifier, validate, Action, ActionScript, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExecError {
    #[error("action {action} targets ({x}, {y}), outside the {w}x{h} screen")]
    OutOfBounds { action: usize, x: u32, y: u32, w: u32, h: u32 },
}

/// Where an action was delivered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Pointer moved; nothing else happened.
    Cursor,
    /// Delivered to the widget under the pointer.
    Widget,
    /// Delivered to the focused widget.
    Focus,
    /// Matched a global key binding.
    Binding,
    /// Only pressed-key or mouse-button bookkeeping changed.
    Bookkeeping,
    /// Nothing consumed the action.
    Unhandled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dispatch {
    pub action: usize,
    pub route: Route,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    /// Number of effect mutations applied.
    pub mutations: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecReport {
    pub dispatches: Vec<Dispatch>,
}

/// Applies `script` to a copy of `state`. Out-of-bounds coordinates are
/// refused before anything changes.
pub fn execute(state: &EnvState, script: &ActionScript) -> Result<(EnvState, ExecReport), ExecError> {
    for v in validate(script, state.screen.w, state.screen.h) {
        if let Violation::OutOfBounds { action, x, y } = v {
            return Err(ExecError::OutOfBounds { action, x, y, w: state.screen.w, h: state.screen.h });
        }
    }
    let mut ex = Exec { s: state.clone(), mutations: 0, notes: Vec::new() };
    let mut report = ExecReport::default();
    for (i, action) in script.iter().enumerate() {
        ex.s.tick += 1;
        ex.mutations = 0;
        ex.notes.clear();
        let (route, target) = ex.apply(action);
        report.dispatches.push(Dispatch {
            action: i,
            route,
            target,
            mutations: ex.mutations,
            notes: std::mem::take(&mut ex.notes),
        });
    }
    Ok((ex.s, report))
}

struct Exec {
    s: EnvState,
    mutations: usize,
    notes: Vec<String>,
}

type Outcome = (Route, Option<String>);

impl Exec {
    fn apply(&mut self, action: &Action) -> Outcome {
        match action {
            Action::MoveTo { x, y } => {
                self.s.cursor = Point { x: *x, y: *y };
                (Route::Cursor, None)
            }
            Action::Click { x, y } => {
                self.s.cursor = Point { x: *x, y: *y };
                let path = self.press();
                self.release_click(&path)
            }
            Action::DoubleClick { x, y } => {
                self.s.cursor = Point { x: *x, y: *y };
                let path = self.press();
                self.release_click(&path);
                let path = self.press();
                self.release_click(&path)
            }
            Action::RightClick { x, y } => {
                self.s.cursor = Point { x: *x, y: *y };
                let path = self.press();
                self.s.last_click = None;
                match self.fire(&path, Trigger::RightClick, None) {
                    Some(id) => (Route::Widget, Some(id)),
                    None => (Route::Unhandled, path.last().cloned()),
                }
            }
            Action::DragTo { x, y, .. } => {
                if !self.s.mouse_down {
                    self.mouse_down();
                }
                self.s.cursor = Point { x: *x, y: *y };
                self.mouse_up()
            }
            Action::MouseDown => {
                if self.s.mouse_down {
                    return (Route::Bookkeeping, None);
                }
                self.mouse_down();
                (Route::Bookkeeping, None)
            }
            Action::MouseUp => {
                if !self.s.mouse_down {
                    return (Route::Bookkeeping, None);
                }
                self.mouse_up()
            }
            Action::Scroll { amount } => self.scroll(*amount),
            Action::Write { text } => self.write(text),
            Action::Hotkey { keys } => self.chord(keys),
            Action::Press { key } => self.key(key),
            Action::KeyDown { key } => {
                self.s.pressed_keys.insert(key.clone());
                if is_modifier(key) {
                    (Route::Bookkeeping, None)
                } else {
                    self.key(key)
                }
            }
            Action::KeyUp { key } => {
                self.s.pressed_keys.remove(key);
                (Route::Bookkeeping, None)
            }
        }
    }

    // ---- pointer -------------------------------------------------------

    /// Ids from the window down to the deepest widget under the point.
    fn hit_path(&self, p: Point) -> Vec<String> {
        let cell = self.s.cell_px as i64;
        for win in self.s.windows.iter().rev().filter(|w| w.visible) {
            if !win.bbox.contains(p.x, p.y) {
                continue;
            }
            let mut path = vec![win.id.clone()];
            let mut children = &win.children;
            let mut dy: i64 = 0;
            'descend: loop {
                for c in children.iter().rev() {
                    if c.hidden() {
                        continue;
                    }
                    let top = c.bbox.y as i64 - dy;
                    let inside = p.x >= c.bbox.x
                        && p.x < c.bbox.right()
                        && (p.y as i64) >= top
                        && (p.y as i64) < top + c.bbox.h as i64;
                    if !inside {
                        continue;
                    }
                    path.push(c.id.clone());
                    if c.kind == WidgetKind::ScrollArea {
                        // The right-most column is the scrollbar.
                        if p.x >= c.bbox.right() - self.s.cell_px {
                            break 'descend;
                        }
                        dy += c.int_state("scroll_offset") * cell;
                    }
                    children = &c.children;
                    continue 'descend;
                }
                break;
            }
            return path;
        }
        Vec::new()
    }

    fn deepest_widget<'p>(&self, path: &'p [String]) -> Option<&'p String> {
        if path.len() > 1 {
            path.last()
        } else {
            None
        }
    }

    /// Mouse button goes down at the cursor: closes pop-ups the pointer is
    /// outside of, raises the window, moves focus.
    fn press(&mut self) -> Vec<String> {
        let p = self.s.cursor;
        for w in self.s.windows.iter_mut() {
            if w.popup && w.visible && !w.bbox.contains(p.x, p.y) {
                w.visible = false;
            }
        }
        self.drop_hidden_focus();
        let path = self.hit_path(p);
        if let Some(win_id) = path.first() {
            let idx = self.s.windows.iter().position(|w| &w.id == win_id).expect("hit window exists");
            if idx + 1 != self.s.windows.len() && !self.s.windows[idx].popup {
                let w = self.s.windows.remove(idx);
                // Keep visible pop-ups above regular windows.
                let first_popup =
                    self.s.windows.iter().position(|w| w.popup && w.visible).unwrap_or(self.s.windows.len());
                self.s.windows.insert(first_popup, w);
            }
        }
        let new_focus = self
            .deepest_widget(&path)
            .filter(|id| self.s.widget(id).is_some_and(|w| w.kind == WidgetKind::TextField))
            .cloned();
        self.set_focus(new_focus);
        path
    }

    fn mouse_down(&mut self) {
        let path = self.press();
        self.s.mouse_down = true;
        self.s.press_origin = Some(PressOrigin { at: self.s.cursor, path });
    }

    fn mouse_up(&mut self) -> Outcome {
        self.s.mouse_down = false;
        let origin = self.s.press_origin.take();
        match origin {
            Some(o) if o.at == self.s.cursor => self.release_click(&o.path),
            Some(o) => self.release_drop(&o),
            None => (Route::Bookkeeping, None),
        }
    }

    fn release_click(&mut self, path: &[String]) -> Outcome {
        let Some(id) = self.deepest_widget(path).cloned() else {
            self.s.last_click = None;
            return (Route::Unhandled, None);
        };
        let kind = self.s.widget(&id).map(|w| w.kind);
        match kind {
            Some(WidgetKind::Checkbox) => {
                let w = self.s.widget_mut(&id).expect("hit widget exists");
                let next = !w.checked();
                w.state.insert("checked".into(), Scalar::Bool(next));
                self.fire(path, Trigger::Toggle, None);
            }
            Some(WidgetKind::Canvas) => {
                let p = self.s.cursor;
                self.paint_between(&id, p, p);
            }
            _ => {}
        }
        self.fire(path, Trigger::Click, None);
        if kind == Some(WidgetKind::MenuItem) {
            if let Some(win) = self.s.window_of(&id).map(str::to_string) {
                if let Some(w) = self.s.windows.iter_mut().find(|w| w.id == win && w.popup) {
                    w.visible = false;
                }
                self.drop_hidden_focus();
            }
        }
        let timing = self.s.timing;
        let is_double = self
            .s
            .last_click
            .as_ref()
            .is_some_and(|m| m.widget == id && (self.s.tick - m.tick) * timing.tick_ms <= timing.double_click_ms);
        if is_double {
            self.s.last_click = None;
            self.fire(path, Trigger::DoubleClick, None);
        } else {
            self.s.last_click = Some(ClickMemo { tick: self.s.tick, widget: id.clone() });
        }
        (Route::Widget, Some(id))
    }

    fn release_drop(&mut self, origin: &PressOrigin) -> Outcome {
        self.s.last_click = None;
        let target = self.hit_path(self.s.cursor);
        let Some(src) = self.deepest_widget(&origin.path).cloned() else {
            return (Route::Unhandled, None);
        };
        if self.s.widget(&src).is_some_and(|w| w.kind == WidgetKind::Canvas) && target.last() == Some(&src) {
            self.paint_between(&src, origin.at, self.s.cursor);
        }
        self.fire(&origin.path, Trigger::DragDrop, Some(&target));
        (Route::Widget, Some(src))
    }

    fn paint_between(&mut self, id: &str, a: Point, b: Point) {
        let cell = self.s.cell_px;
        let Some(w) = self.s.widget_mut(id) else { return };
        let brush = w.int_state("brush").clamp(0, 9) as u8;
        let (x0, x1) = (a.x.min(b.x), a.x.max(b.x));
        let (y0, y1) = (a.y.min(b.y), a.y.max(b.y));
        let rect = Rect::new(
            (x0 - w.bbox.x) / cell,
            (y0 - w.bbox.y) / cell,
            (x1 - w.bbox.x) / cell - (x0 - w.bbox.x) / cell + 1,
            (y1 - w.bbox.y) / cell - (y0 - w.bbox.y) / cell + 1,
        );
        let id = id.to_string();
        if let Err(e) = apply_mutation(&mut self.s, &Mutation::Paint { widget: id, rect, color: brush }) {
            self.notes.push(e);
        } else {
            self.mutations += 1;
        }
    }

    fn scroll(&mut self, amount: i64) -> Outcome {
        let path = self.hit_path(self.s.cursor);
        let area = path.iter().rev().find(|id| self.s.widget(id).is_some_and(|w| w.kind == WidgetKind::ScrollArea));
        let Some(id) = area.cloned() else {
            return (Route::Unhandled, None);
        };
        let w = self.s.widget_mut(&id).expect("hit widget exists");
        let max = w.int_state("max_offset").max(0);
        let next = w.int_state("scroll_offset").saturating_sub(amount).clamp(0, max);
        w.state.insert("scroll_offset".into(), Scalar::Int(next));
        (Route::Widget, Some(id))
    }

    // ---- focus and keyboard --------------------------------------------

    fn drop_hidden_focus(&mut self) {
        if let Some(f) = self.s.focus.clone() {
            let visible = self.s.window_of(&f).and_then(|w| self.s.window(w)).is_some_and(|w| w.visible);
            if !visible {
                self.set_focus(None);
            }
        }
    }

    /// Moves focus; the field losing focus commits its text first.
    fn set_focus(&mut self, new: Option<String>) {
        if self.s.focus == new {
            return;
        }
        if let Some(old) = self.s.focus.take() {
            if let Some(w) = self.s.widget_mut(&old) {
                w.state.remove("select_all");
            }
            self.fire(&[old], Trigger::TextCommit, None);
        }
        self.s.focus = new;
    }

    fn focused_field(&self) -> Option<String> {
        let f = self.s.focus.as_ref()?;
        (self.s.widget(f)?.kind == WidgetKind::TextField).then(|| f.clone())
    }

    fn type_char(&mut self, id: &str, c: char) {
        let w = self.s.widget_mut(id).expect("focused widget exists");
        if w.state.remove("select_all").is_some() {
            w.text.clear();
        }
        w.text.push(c);
    }

    fn write(&mut self, text: &str) -> Outcome {
        match self.focused_field() {
            Some(id) => {
                for c in text.chars() {
                    self.type_char(&id, c);
                }
                (Route::Focus, Some(id))
            }
            None => (Route::Unhandled, None),
        }
    }

    /// A key press with no modifier held.
    fn key(&mut self, key: &str) -> Outcome {
        if is_modifier(key) {
            return (Route::Bookkeeping, None);
        }
        let mods: Vec<String> =
            self.s.pressed_keys.iter().filter(|k| is_modifier(k) && k.as_str() != key).cloned().collect();
        if !mods.is_empty() {
            let mut chord = mods;
            chord.push(key.to_string());
            return self.chord(&chord);
        }
        if let Some(id) = self.focused_field() {
            let handled = match key {
                "enter" => {
                    self.fire(std::slice::from_ref(&id), Trigger::TextCommit, None);
                    true
                }
                "tab" | "esc" => {
                    self.set_focus(None);
                    true
                }
                "backspace" => {
                    let w = self.s.widget_mut(&id).expect("focused widget exists");
                    if w.state.remove("select_all").is_some() {
                        w.text.clear();
                    } else {
                        w.text.pop();
                    }
                    true
                }
                "space" => {
                    self.type_char(&id, ' ');
                    true
                }
                k if k.chars().count() == 1 => {
                    self.type_char(&id, k.chars().next().expect("one char"));
                    true
                }
                _ => false,
            };
            if handled {
                return (Route::Focus, Some(id));
            }
        }
        self.binding(&[key.to_string()])
    }

    fn chord(&mut self, keys: &[String]) -> Outcome {
        if let Some(id) = self.focused_field() {
            let mods: Vec<&str> = keys.iter().map(String::as_str).filter(|k| is_modifier(k)).collect();
            let rest: Vec<&str> = keys.iter().map(String::as_str).filter(|k| !is_modifier(k)).collect();
            if mods == ["ctrl"] && rest == ["a"] {
                let w = self.s.widget_mut(&id).expect("focused widget exists");
                w.state.insert("select_all".into(), Scalar::Bool(true));
                return (Route::Focus, Some(id));
            }
            if mods == ["shift"] && rest.len() == 1 && rest[0].chars().count() == 1 {
                let c = rest[0].chars().next().expect("one char").to_ascii_uppercase();
                self.type_char(&id, c);
                return (Route::Focus, Some(id));
            }
        }
        self.binding(keys)
    }

    fn binding(&mut self, keys: &[String]) -> Outcome {
        let found = self.s.bindings.iter().find(|b| b.matches(keys)).map(|b| b.mutations.clone());
        match found {
            Some(muts) => {
                self.apply_all(&muts);
                (Route::Binding, Some(keys.join("+")))
            }
            None => (Route::Unhandled, None),
        }
    }

    // ---- effects --------------------------------------------------------

    /// Fires `trigger` on the deepest widget in `path` that has an effect
    /// for it. Returns that widget's id.
    fn fire(&mut self, path: &[String], trigger: Trigger, drop_target: Option<&[String]>) -> Option<String> {
        for id in path.iter().rev() {
            let Some(w) = self.s.widget(id) else { continue };
            let muts: Vec<Mutation> = w
                .effects
                .iter()
                .filter(|e| e.on == trigger)
                .filter(|e| match (&e.target, drop_target) {
                    (Some(t), Some(hit)) => hit.contains(t),
                    (Some(_), None) => false,
                    (None, _) => true,
                })
                .flat_map(|e| e.mutations.iter().cloned())
                .collect();
            let has_trigger = w.effects.iter().any(|e| e.on == trigger);
            if !muts.is_empty() {
                let id = id.clone();
                self.apply_all(&muts);
                return Some(id);
            }
            if has_trigger {
                // Handled here, but no effect matched this drop target.
                return None;
            }
        }
        None
    }

    fn apply_all(&mut self, muts: &[Mutation]) {
        for m in muts {
            match apply_mutation(&mut self.s, m) {
                Ok(()) => self.mutations += 1,
                Err(e) => self.notes.push(e),
            }
        }
        self.drop_hidden_focus();
    }
}

/// Applies one mutation. Failures (a missing file, say) leave the state
/// unchanged and are reported as notes.
pub fn apply_mutation(s: &mut EnvState, m: &Mutation) -> Result<(), String> {
    let missing = |id: &str| format!("no widget `{id}`");
    match m {
        Mutation::SetSetting { key, value } => {
            s.settings.insert(key.clone(), value.clone());
        }
        Mutation::CopyText { widget, setting, as_ } => {
            let text = s.widget(widget).ok_or_else(|| missing(widget))?.text.trim().to_string();
            let value = match as_ {
                TextAs::Text => Scalar::Text(text),
                TextAs::Int => Scalar::Int(text.parse().map_err(|_| format!("`{text}` is not an integer"))?),
            };
            s.settings.insert(setting.clone(), value);
        }
        Mutation::CopyState { widget, key, setting } => {
            let w = s.widget(widget).ok_or_else(|| missing(widget))?;
            let value = w.state.get(key).cloned().ok_or_else(|| format!("`{widget}` has no state `{key}`"))?;
            s.settings.insert(setting.clone(), value);
        }
        Mutation::OpenWindow { window } => {
            let idx = s.windows.iter().position(|w| &w.id == window).ok_or_else(|| format!("no window `{window}`"))?;
            let mut w = s.windows.remove(idx);
            w.visible = true;
            s.windows.push(w);
        }
        Mutation::CloseWindow { window } => {
            let w = s.windows.iter_mut().find(|w| &w.id == window).ok_or_else(|| format!("no window `{window}`"))?;
            w.visible = false;
        }
        Mutation::SetText { widget, text } => {
            s.widget_mut(widget).ok_or_else(|| missing(widget))?.text = text.clone();
        }
        Mutation::SetState { widget, key, value } => {
            s.widget_mut(widget).ok_or_else(|| missing(widget))?.state.insert(key.clone(), value.clone());
        }
        Mutation::Paint { widget, rect, color } => {
            let cell = s.cell_px;
            let w = s.widget_mut(widget).ok_or_else(|| missing(widget))?;
            let cols = (w.bbox.w / cell) as usize;
            let rows = (w.bbox.h / cell) as usize;
            if w.pixels.len() < rows {
                w.pixels.resize(rows, String::new());
            }
            let digit = char::from(b'0' + (*color).min(9));
            for (y, line) in w.pixels.iter_mut().enumerate().take(rows) {
                let mut chars: Vec<char> = line.chars().collect();
                chars.resize(cols, '.');
                let in_rows = y >= rect.y as usize && y < rect.bottom() as usize;
                for (x, ch) in chars.iter_mut().enumerate() {
                    if in_rows && x >= rect.x as usize && x < rect.right() as usize {
                        *ch = digit;
                    }
                }
                *line = chars.into_iter().collect();
            }
        }
        Mutation::CreateFolder { path } => s.vfs.create_folder(path)?,
        Mutation::CreateFile { path } => s.vfs.create_file(path)?,
        Mutation::DeleteFile { path } => s.vfs.delete_file(path)?,
        Mutation::MoveFile { from, to_folder } => s.vfs.move_file(from, to_folder)?,
        Mutation::RenameFile { from, to } => s.vfs.rename_file(from, to)?,
        Mutation::RenameFromText { from, widget } => {
            let name = s.widget(widget).ok_or_else(|| missing(widget))?.text.trim().to_string();
            s.vfs.rename_entry(from, &name)?
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::parse;
    use crate::sim::state::{Binding, Effect, Widget, Window};

    fn run(s: &EnvState, text: &str) -> (EnvState, ExecReport) {
        execute(s, &parse(text).unwrap()).unwrap()
    }

    fn form() -> EnvState {
        let mut s = EnvState::blank(320, 240);
        s.windows.push(Window::new("w", "Form", Rect::new(0, 0, 320, 240)).with_children(vec![
            Widget::new("mute", WidgetKind::Checkbox, Rect::new(8, 16, 80, 8)).with_text("Mute").with_effect(
                Trigger::Toggle,
                vec![Mutation::CopyState { widget: "mute".into(), key: "checked".into(), setting: "muted".into() }],
            ),
            Widget::new("name", WidgetKind::TextField, Rect::new(8, 32, 120, 8)).with_effect(
                Trigger::TextCommit,
                vec![Mutation::CopyText { widget: "name".into(), setting: "name".into(), as_: TextAs::Text }],
            ),
            Widget::new("ok", WidgetKind::Button, Rect::new(8, 48, 40, 8)).with_text("OK").with_effect(
                Trigger::DoubleClick,
                vec![Mutation::SetSetting { key: "dbl".into(), value: Scalar::Bool(true) }],
            ),
        ]));
        s
    }

    #[test]
    fn checkbox_toggles() {
        let s = form();
        let (s1, report) = run(&s, "click(48, 20)");
        assert!(s1.widget("mute").unwrap().checked());
        assert_eq!(s1.settings["muted"], Scalar::Bool(true));
        assert_eq!(report.dispatches[0].target.as_deref(), Some("mute"));
        let (s2, _) = run(&s1, "moveTo(0, 0); click(48, 20)");
        assert!(!s2.widget("mute").unwrap().checked());
    }

    #[test]
    fn write_appends_to_focused_field() {
        let s = form();
        let (s1, _) = run(&s, "click(20, 36)\nwrite('Hello, world!')");
        assert_eq!(s1.focus.as_deref(), Some("name"));
        assert_eq!(s1.widget("name").unwrap().text, "Hello, world!");
        let (s2, _) = run(&s1, "write('!')");
        assert_eq!(s2.widget("name").unwrap().text, "Hello, world!!");
    }

    #[test]
    fn commit_on_enter_and_focus_loss() {
        let s = form();
        let (s1, _) = run(&s, "click(20, 36); write('ab'); press('enter')");
        assert_eq!(s1.settings["name"], Scalar::Text("ab".into()));
        let (s2, _) = run(&s1, "write('c'); click(300, 200)");
        assert_eq!(s2.settings["name"], Scalar::Text("abc".into()));
        assert_eq!(s2.focus, None);
    }

    #[test]
    fn select_all_replaces() {
        let s = form();
        let (s1, _) = run(&s, "click(20, 36); write('old'); hotkey('ctrl', 'a'); write('new')");
        assert_eq!(s1.widget("name").unwrap().text, "new");
        let (s2, _) = run(
            &s1,
            "hotkey('ctrl', 'a'); press('backspace'); press('x'); keyDown('shift'); press('y'); keyUp('shift')",
        );
        assert_eq!(s2.widget("name").unwrap().text, "xY");
    }

    #[test]
    fn double_click_window() {
        let s = form();
        let (s1, _) = run(&s, "doubleClick(20, 52)");
        assert_eq!(s1.settings.get("dbl"), Some(&Scalar::Bool(true)));
        let (s2, _) = run(&s, "click(20, 52); click(20, 52)");
        assert_eq!(s2.settings.get("dbl"), Some(&Scalar::Bool(true)));
        // Six ticks apart at 100 ms per tick exceeds the 500 ms window.
        let (s3, _) =
            run(&s, "click(20, 52); moveTo(1,1); moveTo(1,1); moveTo(1,1); moveTo(1,1); moveTo(1,1); click(20, 52)");
        assert_eq!(s3.settings.get("dbl"), None);
    }

    #[test]
    fn out_of_bounds_refused() {
        let s = form();
        let err = execute(&s, &parse("click(1, 1); click(320, 0)").unwrap()).unwrap_err();
        assert_eq!(err, ExecError::OutOfBounds { action: 1, x: 320, y: 0, w: 320, h: 240 });
    }

    #[test]
    fn global_binding_and_modifier_chords() {
        let mut s = form();
        s.bindings.push(Binding {
            keys: vec!["ctrl".into(), "s".into()],
            mutations: vec![Mutation::SetSetting { key: "saved".into(), value: Scalar::Bool(true) }],
        });
        let (s1, r) = run(&s, "hotkey('ctrl', 's')");
        assert_eq!(s1.settings["saved"], Scalar::Bool(true));
        assert_eq!(r.dispatches[0].route, Route::Binding);
        let (s2, _) = run(&s, "keyDown('ctrl'); press('s'); keyUp('ctrl')");
        assert_eq!(s2.settings["saved"], Scalar::Bool(true));
        assert!(s2.pressed_keys.is_empty());
    }

    #[test]
    fn drag_and_drop_moves_file() {
        let mut s = EnvState::blank(320, 240);
        s.vfs.create_folder("/Docs").unwrap();
        s.vfs.create_file("/a.txt").unwrap();
        let mut file = Widget::new("file", WidgetKind::Label, Rect::new(8, 16, 40, 8)).with_text("a.txt");
        file.effects.push(Effect {
            on: Trigger::DragDrop,
            target: Some("docs".into()),
            mutations: vec![
                Mutation::MoveFile { from: "/a.txt".into(), to_folder: "/Docs".into() },
                Mutation::SetState { widget: "file".into(), key: "hidden".into(), value: Scalar::Bool(true) },
            ],
        });
        let docs = Widget::new("docs", WidgetKind::Label, Rect::new(8, 64, 40, 8)).with_text("Docs");
        s.windows.push(Window::new("ex", "Explorer", Rect::new(0, 0, 320, 240)).with_children(vec![file, docs]));
        // Dropping somewhere else does nothing.
        let (miss, _) = run(&s, "moveTo(12, 18); dragTo(200, 200)");
        assert!(miss.vfs.has_file("/a.txt"));
        let (s1, _) = run(&s, "moveTo(12, 18); dragTo(12, 66, duration=1)");
        assert!(s1.vfs.has_file("/Docs/a.txt"));
        assert!(s1.widget("file").unwrap().hidden());
        let (s2, _) = run(&s, "moveTo(12, 18); mouseDown(); moveTo(12, 66); mouseUp()");
        assert_eq!(s1.vfs, s2.vfs);
    }

    #[test]
    fn popup_menu_flow() {
        let mut s = form();
        let mut menu = Window::new("menu", "Menu", Rect::new(160, 16, 80, 24));
        menu.popup = true;
        menu.visible = false;
        menu.children.push(
            Widget::new("opt", WidgetKind::MenuItem, Rect::new(160, 24, 80, 8)).with_text("Pick").with_effect(
                Trigger::Click,
                vec![Mutation::SetSetting { key: "picked".into(), value: Scalar::Int(1) }],
            ),
        );
        s.windows.push(menu);
        s.windows[0].children.push(
            Widget::new("open", WidgetKind::Button, Rect::new(8, 64, 40, 8))
                .with_effect(Trigger::RightClick, vec![Mutation::OpenWindow { window: "menu".into() }]),
        );
        let (s1, _) = run(&s, "rightClick(12, 66)");
        assert!(s1.window("menu").unwrap().visible);
        let (s2, _) = run(&s1, "click(170, 26)");
        assert_eq!(s2.settings["picked"], Scalar::Int(1));
        assert!(!s2.window("menu").unwrap().visible);
        // Clicking outside a pop-up dismisses it.
        let (s3, _) = run(&s1, "click(300, 200)");
        assert!(!s3.window("menu").unwrap().visible);
    }

    #[test]
    fn scroll_clamps() {
        let mut s = EnvState::blank(320, 240);
        s.windows.push(Window::new("w", "", Rect::new(0, 0, 320, 240)).with_children(vec![
            Widget::new("sa", WidgetKind::ScrollArea, Rect::new(0, 8, 80, 24)).with_state("max_offset", 5),
        ]));
        let (s1, _) = run(&s, "moveTo(10, 10); scroll(-2)");
        assert_eq!(s1.widget("sa").unwrap().int_state("scroll_offset"), 2);
        let (s2, _) = run(&s1, "scroll(-200)");
        assert_eq!(s2.widget("sa").unwrap().int_state("scroll_offset"), 5);
        let (s3, _) = run(&s2, "scroll(200)");
        assert_eq!(s3.widget("sa").unwrap().int_state("scroll_offset"), 0);
    }

    #[test]
    fn canvas_painting() {
        let mut s = EnvState::blank(320, 240);
        s.windows.push(Window::new("w", "Paint", Rect::new(0, 0, 320, 240)).with_children(vec![
            Widget::new("cv", WidgetKind::Canvas, Rect::new(0, 8, 64, 32)).with_state("brush", 3),
        ]));
        let (s1, _) = run(&s, "moveTo(0, 8); dragTo(17, 25)");
        let px = &s1.widget("cv").unwrap().pixels;
        assert_eq!(px, &vec!["333.....".to_string(), "333.....".into(), "333.....".into(), "........".into()]);
        let (s2, _) = run(&s, "click(63, 39)");
        assert_eq!(s2.widget("cv").unwrap().pixels[3], ".......3");
    }

    #[test]
    fn rename_from_text() {
        let mut s = EnvState::blank(320, 240);
        s.vfs.create_folder("Desktop/New folder").unwrap();
        s.vfs.create_file("Desktop/a.txt").unwrap();
        s.windows.push(Window::new("w", "", Rect::new(0, 0, 320, 240)).with_children(vec![
            Widget::new("n", WidgetKind::TextField, Rect::new(0, 8, 80, 8)).with_text(" Reports "),
        ]));
        let m = Mutation::RenameFromText { from: "Desktop/New folder".into(), widget: "n".into() };
        apply_mutation(&mut s, &m).unwrap();
        assert!(s.vfs.folder("Desktop/Reports").is_some());
        assert!(s.vfs.folder("Desktop/New folder").is_none());
        let clash = Mutation::RenameFromText { from: "Desktop/a.txt".into(), widget: "n".into() };
        assert!(apply_mutation(&mut s, &clash).is_err());
        assert!(s.vfs.has_file("Desktop/a.txt"));
    }
}
