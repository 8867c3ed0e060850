use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::geom::{Point, Rect};

/// Value held in settings and widget state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Bool(bool),
    Int(i64),
    Text(String),
}

impl Scalar {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Scalar::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Scalar::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Scalar::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Bool(b) => write!(f, "{b}"),
            Scalar::Int(i) => write!(f, "{i}"),
            Scalar::Text(s) => write!(f, "{s:?}"),
        }
    }
}

impl From<bool> for Scalar {
    fn from(b: bool) -> Self {
        Scalar::Bool(b)
    }
}

impl From<i64> for Scalar {
    fn from(i: i64) -> Self {
        Scalar::Int(i)
    }
}

impl From<&str> for Scalar {
    fn from(s: &str) -> Self {
        Scalar::Text(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidgetKind {
    /// Named container; reported in observation metadata.
    Panel,
    Button,
    TextField,
    Checkbox,
    MenuItem,
    ScrollArea,
    Icon,
    Label,
    Canvas,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    Click,
    DoubleClick,
    RightClick,
    Toggle,
    TextCommit,
    DragDrop,
}

/// How `copy_text` converts a field's text into a setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextAs {
    #[default]
    Text,
    Int,
}

/// A declarative change to [`EnvState`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Mutation {
    SetSetting {
        key: String,
        value: Scalar,
    },
    /// `settings[setting] = widget.text`, converted per `as`.
    CopyText {
        widget: String,
        setting: String,
        #[serde(default, rename = "as")]
        as_: TextAs,
    },
    /// `settings[setting] = widget.state[key]`.
    CopyState {
        widget: String,
        key: String,
        setting: String,
    },
    OpenWindow {
        window: String,
    },
    CloseWindow {
        window: String,
    },
    SetText {
        widget: String,
        text: String,
    },
    SetState {
        widget: String,
        key: String,
        value: Scalar,
    },
    /// Paints a rect of canvas cells (canvas-relative) with color 0..=9.
    Paint {
        widget: String,
        rect: Rect,
        color: u8,
    },
    CreateFolder {
        path: String,
    },
    CreateFile {
        path: String,
    },
    DeleteFile {
        path: String,
    },
    MoveFile {
        from: String,
        to_folder: String,
    },
    RenameFile {
        from: String,
        to: String,
    },
    /// Renames the file or folder at `from` to the trimmed text of
    /// `widget`, keeping it in the same parent folder.
    RenameFromText {
        from: String,
        widget: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Effect {
    pub on: Trigger,
    /// For `drag_drop`: the widget the drop must land on (or inside).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(rename = "do")]
    pub mutations: Vec<Mutation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Widget {
    pub id: String,
    pub kind: WidgetKind,
    pub bbox: Rect,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub icon_id: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub state: BTreeMap<String, Scalar>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub effects: Vec<Effect>,
    /// Canvas content, one string per cell row: `.` is background,
    /// `0`..=`9` are paint colors.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pixels: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<Widget>,
}

impl Widget {
    pub fn new(id: &str, kind: WidgetKind, bbox: Rect) -> Self {
        Self {
            id: id.to_string(),
            kind,
            bbox,
            text: String::new(),
            icon_id: None,
            state: BTreeMap::new(),
            effects: Vec::new(),
            pixels: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn with_text(mut self, text: &str) -> Self {
        self.text = text.to_string();
        self
    }

    pub fn with_icon(mut self, icon_id: &str) -> Self {
        self.icon_id = Some(icon_id.to_string());
        self
    }

    pub fn with_state(mut self, key: &str, value: impl Into<Scalar>) -> Self {
        self.state.insert(key.to_string(), value.into());
        self
    }

    pub fn with_effect(mut self, on: Trigger, mutations: Vec<Mutation>) -> Self {
        self.effects.push(Effect { on, target: None, mutations });
        self
    }

    pub fn with_children(mut self, children: Vec<Widget>) -> Self {
        self.children = children;
        self
    }

    pub fn hidden(&self) -> bool {
        self.state.get("hidden").and_then(Scalar::as_bool).unwrap_or(false)
    }

    pub fn checked(&self) -> bool {
        self.state.get("checked").and_then(Scalar::as_bool).unwrap_or(false)
    }

    pub fn int_state(&self, key: &str) -> i64 {
        self.state.get(key).and_then(Scalar::as_int).unwrap_or(0)
    }

    /// Depth-first walk over this widget and its descendants.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Widget)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }

    pub(crate) fn find_mut(&mut self, id: &str) -> Option<&mut Widget> {
        if self.id == id {
            return Some(self);
        }
        self.children.iter_mut().find_map(|c| c.find_mut(id))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub id: String,
    pub title: String,
    pub bbox: Rect,
    #[serde(default)]
    pub popup: bool,
    #[serde(default = "default_true")]
    pub visible: bool,
    #[serde(default)]
    pub children: Vec<Widget>,
}

fn default_true() -> bool {
    true
}

impl Window {
    pub fn new(id: &str, title: &str, bbox: Rect) -> Self {
        Self { id: id.to_string(), title: title.to_string(), bbox, popup: false, visible: true, children: Vec::new() }
    }

    pub fn with_children(mut self, children: Vec<Widget>) -> Self {
        self.children = children;
        self
    }

    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Widget)) {
        for c in &self.children {
            c.walk(f);
        }
    }
}

/// A folder in the virtual file system.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Folder {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub folders: BTreeMap<String, Folder>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub files: BTreeSet<String>,
}

fn split_path(path: &str) -> Vec<&str> {
    path.split('/').filter(|s| !s.is_empty()).collect()
}

impl Folder {
    pub fn folder(&self, path: &str) -> Option<&Folder> {
        split_path(path).into_iter().try_fold(self, |f, part| f.folders.get(part))
    }

    fn folder_mut(&mut self, parts: &[&str]) -> Option<&mut Folder> {
        parts.iter().try_fold(self, |f, part| f.folders.get_mut(*part))
    }

    pub fn has_file(&self, path: &str) -> bool {
        let parts = split_path(path);
        match parts.split_last() {
            Some((name, dir)) => self.folder(&dir.join("/")).is_some_and(|f| f.files.contains(*name)),
            None => false,
        }
    }

    pub fn create_folder(&mut self, path: &str) -> Result<(), String> {
        let mut cur = self;
        for part in split_path(path) {
            if cur.files.contains(part) {
                return Err(format!("`{part}` is a file"));
            }
            cur = cur.folders.entry(part.to_string()).or_default();
        }
        Ok(())
    }

    pub fn create_file(&mut self, path: &str) -> Result<(), String> {
        let parts = split_path(path);
        let (name, dir) = parts.split_last().ok_or("empty path")?;
        let folder = self.folder_mut(dir).ok_or_else(|| format!("no folder for `{path}`"))?;
        if folder.folders.contains_key(*name) {
            return Err(format!("`{path}` is a folder"));
        }
        folder.files.insert(name.to_string());
        Ok(())
    }

    pub fn delete_file(&mut self, path: &str) -> Result<(), String> {
        let parts = split_path(path);
        let (name, dir) = parts.split_last().ok_or("empty path")?;
        let folder = self.folder_mut(dir).ok_or_else(|| format!("no folder for `{path}`"))?;
        if folder.files.remove(*name) {
            Ok(())
        } else {
            Err(format!("no file `{path}`"))
        }
    }

    pub fn move_file(&mut self, from: &str, to_folder: &str) -> Result<(), String> {
        let name = split_path(from).last().map(|s| s.to_string()).ok_or("empty path")?;
        if self.folder(to_folder).is_none() {
            return Err(format!("no folder `{to_folder}`"));
        }
        let dest = format!("{}/{}", to_folder.trim_end_matches('/'), name);
        if self.has_file(&dest) {
            return Err(format!("`{dest}` already exists"));
        }
        self.delete_file(from)?;
        self.create_file(&dest)
    }

    /// Renames a file or folder in place.
    pub fn rename_entry(&mut self, from: &str, new_name: &str) -> Result<(), String> {
        if new_name.is_empty() || new_name.contains('/') {
            return Err(format!("`{new_name}` is not a valid name"));
        }
        let parts = split_path(from);
        let (name, dir) = parts.split_last().ok_or("empty path")?;
        let parent = self.folder_mut(dir).ok_or_else(|| format!("no folder for `{from}`"))?;
        if *name == new_name {
            return Ok(());
        }
        if parent.files.contains(new_name) || parent.folders.contains_key(new_name) {
            return Err(format!("`{new_name}` already exists"));
        }
        if parent.files.remove(*name) {
            parent.files.insert(new_name.to_string());
        } else if let Some(f) = parent.folders.remove(*name) {
            parent.folders.insert(new_name.to_string(), f);
        } else {
            return Err(format!("nothing at `{from}`"));
        }
        Ok(())
    }

    pub fn rename_file(&mut self, from: &str, to: &str) -> Result<(), String> {
        if !self.has_file(from) {
            return Err(format!("no file `{from}`"));
        }
        if self.has_file(to) {
            return Err(format!("`{to}` already exists"));
        }
        let parts = split_path(to);
        let dir = parts.split_last().map(|(_, d)| d.join("/")).unwrap_or_default();
        if self.folder(&dir).is_none() {
            return Err(format!("no folder for `{to}`"));
        }
        self.delete_file(from)?;
        self.create_file(to)
    }
}

/// A global keyboard shortcut. Matched when no focused widget consumes
/// the key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Binding {
    pub keys: Vec<String>,
    #[serde(rename = "do")]
    pub mutations: Vec<Mutation>,
}

impl Binding {
    pub fn matches(&self, keys: &[String]) -> bool {
        let mut a: Vec<&str> = self.keys.iter().map(String::as_str).collect();
        let mut b: Vec<&str> = keys.iter().map(String::as_str).collect();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Size {
    pub w: u32,
    pub h: u32,
}

/// Timing knobs. Each action advances logical time by one tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Timing {
    pub tick_ms: u64,
    pub double_click_ms: u64,
}

impl Default for Timing {
    fn default() -> Self {
        Self { tick_ms: 100, double_click_ms: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClickMemo {
    pub tick: u64,
    pub widget: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PressOrigin {
    pub at: Point,
    /// Hit path, outermost first; empty when nothing was hit.
    pub path: Vec<String>,
}

pub const DEFAULT_CELL_PX: u32 = 8;

fn default_cell_px() -> u32 {
    DEFAULT_CELL_PX
}

fn default_screen() -> Size {
    Size { w: 1920, h: 1080 }
}

/// The whole simulated desktop. A plain value: transitions produce new
/// states and equal states render identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvState {
    #[serde(default = "default_screen")]
    pub screen: Size,
    #[serde(default = "default_cell_px")]
    pub cell_px: u32,
    /// Z-ordered, last is topmost.
    #[serde(default)]
    pub windows: Vec<Window>,
    #[serde(default)]
    pub settings: BTreeMap<String, Scalar>,
    #[serde(default)]
    pub vfs: Folder,
    #[serde(default)]
    pub bindings: Vec<Binding>,
    /// Icon bitmaps by id, one string per cell row.
    #[serde(default)]
    pub icons: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub timing: Timing,
    #[serde(default)]
    pub cursor: Point,
    #[serde(default)]
    pub focus: Option<String>,
    #[serde(default)]
    pub pressed_keys: BTreeSet<String>,
    #[serde(default)]
    pub mouse_down: bool,
    #[serde(default)]
    pub tick: u64,
    #[serde(default)]
    pub last_click: Option<ClickMemo>,
    #[serde(default)]
    pub press_origin: Option<PressOrigin>,
}

impl Default for EnvState {
    fn default() -> Self {
        Self::blank(1920, 1080)
    }
}

impl EnvState {
    pub fn blank(w: u32, h: u32) -> Self {
        Self {
            screen: Size { w, h },
            cell_px: DEFAULT_CELL_PX,
            windows: Vec::new(),
            settings: BTreeMap::new(),
            vfs: Folder::default(),
            bindings: Vec::new(),
            icons: BTreeMap::new(),
            timing: Timing::default(),
            cursor: Point::default(),
            focus: None,
            pressed_keys: BTreeSet::new(),
            mouse_down: false,
            tick: 0,
            last_click: None,
            press_origin: None,
        }
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        crate::hash::canonical_hash(self)
    }

    pub fn screen_rect(&self) -> Rect {
        Rect::new(0, 0, self.screen.w, self.screen.h)
    }

    pub fn window(&self, id: &str) -> Option<&Window> {
        self.windows.iter().find(|w| w.id == id)
    }

    pub fn widget(&self, id: &str) -> Option<&Widget> {
        let mut found = None;
        for w in &self.windows {
            w.walk(&mut |x| {
                if found.is_none() && x.id == id {
                    found = Some(x);
                }
            });
        }
        found
    }

    pub fn widget_mut(&mut self, id: &str) -> Option<&mut Widget> {
        self.windows.iter_mut().find_map(|w| w.children.iter_mut().find_map(|c| c.find_mut(id)))
    }

    /// Id of the window holding widget `id`.
    pub fn window_of(&self, id: &str) -> Option<&str> {
        self.windows.iter().find_map(|w| {
            let mut hit = false;
            w.walk(&mut |x| hit |= x.id == id);
            hit.then_some(w.id.as_str())
        })
    }
}
