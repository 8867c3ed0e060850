//! The action language the Actor speaks.
//!
//! One action is written as `name(arguments)`, following PyAutoGUI's call
//! names: `click(200, 220)`, `write('Hello, world!')`, `hotkey('ctrl', 'c')`,
//! `dragTo(100, 200, duration=2)` and so on. A script is a sequence of such
//! calls separated by newlines or semicolons.
//!
//! Grammar (whitespace other than newlines is insignificant between tokens):
//!
//! ```text
//! script  = { sep } [ call { sep { sep } call } ] { sep } ;
//! sep     = "\n" | ";" ;
//! call    = name "(" [ arg { "," arg } ] ")" ;
//! arg     = literal | "duration" "=" number ;
//! literal = int | number | string ;
//! int     = [ "-" ] digit { digit } ;
//! number  = int [ "." digit { digit } ] ;
//! string  = "'" { char | "\" escape } "'" ;
//! escape  = "\" | "'" | "n" | "t" | "r" | "0" | "u{" hex { hex } "}" ;
//! ```
//!
//! A script wrapped in a markdown code fence is unwrapped before parsing.

mod parse;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use parse::{parse, ParseError};
pub use validate::{validate, Violation};

/// Key names accepted by `press`, `keyDown`, `keyUp` and `hotkey`.
pub const NAMED_KEYS: &[&str] = &[
    "enter",
    "shift",
    "ctrl",
    "alt",
    "tab",
    "esc",
    "space",
    "backspace",
    "delete",
    "home",
    "end",
    "pageup",
    "pagedown",
    "up",
    "down",
    "left",
    "right",
    "f1",
    "f2",
    "f3",
    "f4",
    "f5",
    "f6",
    "f7",
    "f8",
    "f9",
    "f10",
    "f11",
    "f12",
];

/// Modifier keys; holding one turns a following `press` into a chord.
pub const MODIFIER_KEYS: &[&str] = &["shift", "ctrl", "alt"];

/// Whether `key` is in the published key table: single lowercase letters,
/// single digits, or one of [`NAMED_KEYS`].
pub fn is_known_key(key: &str) -> bool {
    let mut chars = key.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => c.is_ascii_lowercase() || c.is_ascii_digit(),
        _ => NAMED_KEYS.contains(&key),
    }
}

pub fn is_modifier(key: &str) -> bool {
    MODIFIER_KEYS.contains(&key)
}

/// One raw mouse or keyboard operation. Coordinates are screen pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Action {
    MoveTo { x: u32, y: u32 },
    Click { x: u32, y: u32 },
    DoubleClick { x: u32, y: u32 },
    RightClick { x: u32, y: u32 },
    Write { text: String },
    Hotkey { keys: Vec<String> },
    Scroll { amount: i64 },
    DragTo { x: u32, y: u32, duration: f64 },
    MouseDown,
    MouseUp,
    Press { key: String },
    KeyDown { key: String },
    KeyUp { key: String },
}

impl Action {
    /// The call name used in scripts.
    pub fn name(&self) -> &'static str {
        match self {
            Action::MoveTo { .. } => "moveTo",
            Action::Click { .. } => "click",
            Action::DoubleClick { .. } => "doubleClick",
            Action::RightClick { .. } => "rightClick",
            Action::Write { .. } => "write",
            Action::Hotkey { .. } => "hotkey",
            Action::Scroll { .. } => "scroll",
            Action::DragTo { .. } => "dragTo",
            Action::MouseDown => "mouseDown",
            Action::MouseUp => "mouseUp",
            Action::Press { .. } => "press",
            Action::KeyDown { .. } => "keyDown",
            Action::KeyUp { .. } => "keyUp",
        }
    }

    /// Target point for actions that carry one.
    pub fn point(&self) -> Option<(u32, u32)> {
        match *self {
            Action::MoveTo { x, y }
            | Action::Click { x, y }
            | Action::DoubleClick { x, y }
            | Action::RightClick { x, y }
            | Action::DragTo { x, y, .. } => Some((x, y)),
            _ => None,
        }
    }

    /// Keys named by the action, in argument order.
    pub fn keys(&self) -> Vec<&str> {
        match self {
            Action::Hotkey { keys } => keys.iter().map(String::as_str).collect(),
            Action::Press { key } | Action::KeyDown { key } | Action::KeyUp { key } => {
                vec![key.as_str()]
            }
            _ => Vec::new(),
        }
    }

    /// Whether the action is expected to change what is on screen.
    /// Only a bare pointer move is not.
    pub fn changes_screen(&self) -> bool {
        !matches!(self, Action::MoveTo { .. })
    }
}

fn write_quoted(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("'")?;
    for c in s.chars() {
        match c {
            '\\' => f.write_str("\\\\")?,
            '\'' => f.write_str("\\'")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            '\r' => f.write_str("\\r")?,
            '\0' => f.write_str("\\0")?,
            c if c.is_control() => write!(f, "\\u{{{:x}}}", c as u32)?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("'")
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name())?;
        match self {
            Action::MoveTo { x, y }
            | Action::Click { x, y }
            | Action::DoubleClick { x, y }
            | Action::RightClick { x, y } => write!(f, "{x}, {y}")?,
            Action::Write { text } => write_quoted(f, text)?,
            Action::Hotkey { keys } => {
                for (i, k) in keys.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write_quoted(f, k)?;
                }
            }
            Action::Scroll { amount } => write!(f, "{amount}")?,
            Action::DragTo { x, y, duration } => write!(f, "{x}, {y}, duration={duration}")?,
            Action::MouseDown | Action::MouseUp => {}
            Action::Press { key } | Action::KeyDown { key } | Action::KeyUp { key } => write_quoted(f, key)?,
        }
        f.write_str(")")
    }
}

/// An ordered sequence of actions. May be empty.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionScript {
    pub actions: Vec<Action>,
}

impl ActionScript {
    pub fn new(actions: Vec<Action>) -> Self {
        Self { actions }
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Action> {
        self.actions.iter()
    }

    /// Same as the free [`render`].
    pub fn render(&self) -> String {
        render(self)
    }
}

impl From<Vec<Action>> for ActionScript {
    fn from(actions: Vec<Action>) -> Self {
        Self { actions }
    }
}

impl<'a> IntoIterator for &'a ActionScript {
    type Item = &'a Action;
    type IntoIter = std::slice::Iter<'a, Action>;

    fn into_iter(self) -> Self::IntoIter {
        self.actions.iter()
    }
}

/// Canonical text form: one action per line, no trailing newline.
pub fn render(script: &ActionScript) -> String {
    script.actions.iter().map(Action::to_string).collect::<Vec<_>>().join("\n")
}

impl fmt::Display for ActionScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

impl std::str::FromStr for ActionScript {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
