use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::Rect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Text,
    Icon,
    Button,
    Field,
    Checkbox,
    Scrollbar,
    ReferenceLine,
    Object,
}

impl Role {
    pub const ALL: [Role; 8] = [
        Role::Text,
        Role::Icon,
        Role::Button,
        Role::Field,
        Role::Checkbox,
        Role::Scrollbar,
        Role::ReferenceLine,
        Role::Object,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Text => "text",
            Role::Icon => "icon",
            Role::Button => "button",
            Role::Field => "field",
            Role::Checkbox => "checkbox",
            Role::Scrollbar => "scrollbar",
            Role::ReferenceLine => "reference_line",
            Role::Object => "object",
        }
    }

    fn from_str(s: &str) -> Option<Role> {
        Role::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One recognized UI element. `bbox` is in screen pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub role: Role,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub icon_name: Option<String>,
    /// Widget state where the extractor can read one: `checked`,
    /// `unchecked`, `thumb=3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    pub bbox: Rect,
    pub confidence: f64,
}

impl Element {
    pub fn new(role: Role, text: impl Into<String>, bbox: Rect) -> Self {
        Self { role, text: text.into(), icon_name: None, state: None, bbox, confidence: 1.0 }
    }

    pub fn with_state(mut self, state: impl Into<String>) -> Self {
        self.state = Some(state.into());
        self
    }

    /// Total order used for canonical documents: reading order first.
    pub fn sort_key(&self) -> impl Ord + '_ {
        (
            self.bbox.y,
            self.bbox.x,
            self.role,
            self.bbox.h,
            self.bbox.w,
            &self.text,
            &self.icon_name,
            &self.state,
            ordered(self.confidence),
        )
    }
}

fn ordered(v: f64) -> u64 {
    // Monotone map of non-negative floats to integers.
    v.to_bits()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub name: String,
    pub bbox: Rect,
    pub elements: Vec<Element>,
    /// Non-fill cells owned by this panel that no element covers.
    #[serde(default)]
    pub unclaimed: usize,
}

impl Panel {
    pub fn new(name: &str, bbox: Rect) -> Self {
        Self { name: name.to_string(), bbox, elements: Vec::new(), unclaimed: 0 }
    }
}

/// A screen as structured text: panels in paint order, each with its
/// elements in reading order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct UiDocument {
    pub panels: Vec<Panel>,
}

impl UiDocument {
    /// Sorts elements within each panel into canonical order. Panel order
    /// is meaningful and left alone.
    pub fn canonicalize(&mut self) {
        for p in &mut self.panels {
            p.elements.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        }
    }

    pub fn panel(&self, name: &str) -> Option<&Panel> {
        self.panels.iter().find(|p| p.name == name)
    }

    /// Every element with its panel name.
    pub fn elements(&self) -> impl Iterator<Item = (&str, &Element)> {
        self.panels.iter().flat_map(|p| p.elements.iter().map(move |e| (p.name.as_str(), e)))
    }

    /// First element whose text or icon name equals `label`.
    pub fn find(&self, label: &str) -> Option<&Element> {
        self.elements().map(|(_, e)| e).find(|e| e.text == label || e.icon_name.as_deref() == Some(label))
    }
}

/// Single-quoted form used in serialized documents.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\'' => out.push_str("\\'"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('\'');
    out
}

/// Text form used in prompts. One header line per panel, then one
/// indented line per element:
///
/// ```text
/// panel 'Settings' @ (0,0,320,240)
///   button 'OK' @ (8,16,40,8)
///   checkbox 'Mute' @ (8,32,80,8) [checked]
///   icon '' @ (8,48,16,16) conf=0.5
/// ```
///
/// Icons print their template name in the quoted slot. `unclaimed=N`
/// follows the header when non-zero; `conf=` appears only below 1.0.
pub fn serialize(doc: &UiDocument) -> String {
    let mut out = String::new();
    for p in &doc.panels {
        let _ = write!(out, "panel {} @ {}", quote(&p.name), p.bbox);
        if p.unclaimed > 0 {
            let _ = write!(out, " unclaimed={}", p.unclaimed);
        }
        out.push('\n');
        for e in &p.elements {
            let label = if e.role == Role::Icon { e.icon_name.as_deref().unwrap_or("") } else { &e.text };
            let _ = write!(out, "  {} {} @ {}", e.role, quote(label), e.bbox);
            if let Some(s) = &e.state {
                let _ = write!(out, " [{s}]");
            }
            if e.confidence < 1.0 {
                let _ = write!(out, " conf={}", e.confidence);
            }
            out.push('\n');
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct DocParseError {
    pub line: usize,
    pub message: String,
}

struct Cursor<'a> {
    s: &'a str,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, DocParseError> {
        Err(DocParseError { line: self.line, message: msg.into() })
    }

    fn word(&mut self) -> Result<&'a str, DocParseError> {
        let end = self.s.find(' ').unwrap_or(self.s.len());
        let (w, rest) = self.s.split_at(end);
        self.s = rest.strip_prefix(' ').unwrap_or(rest);
        if w.is_empty() {
            return self.err("unexpected end of line");
        }
        Ok(w)
    }

    fn lit(&mut self, expect: &str) -> Result<(), DocParseError> {
        match self.s.strip_prefix(expect) {
            Some(rest) => {
                self.s = rest;
                Ok(())
            }
            None => self.err(format!("expected `{expect}`")),
        }
    }

    fn quoted(&mut self) -> Result<String, DocParseError> {
        self.lit("'")?;
        let mut out = String::new();
        let mut chars = self.s.char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '\'' => {
                    self.s = &self.s[i + 1..];
                    return Ok(out);
                }
                '\\' => match chars.next() {
                    Some((_, '\\')) => out.push('\\'),
                    Some((_, '\'')) => out.push('\''),
                    Some((_, 'n')) => out.push('\n'),
                    _ => return self.err("bad escape"),
                },
                c => out.push(c),
            }
        }
        self.err("unterminated string")
    }

    fn rect(&mut self) -> Result<Rect, DocParseError> {
        self.lit("(")?;
        let end = self.s.find(')').ok_or(DocParseError { line: self.line, message: "expected `)`".into() })?;
        let nums: Result<Vec<u32>, _> = self.s[..end].split(',').map(str::parse).collect();
        self.s = &self.s[end + 1..];
        match nums.as_deref() {
            Ok([x, y, w, h]) => Ok(Rect::new(*x, *y, *w, *h)),
            _ => self.err("expected four integers"),
        }
    }
}

/// Inverse of [`serialize`].
pub fn deserialize(text: &str) -> Result<UiDocument, DocParseError> {
    let mut doc = UiDocument::default();
    for (i, raw) in text.lines().enumerate() {
        let mut c = Cursor { s: raw, line: i + 1 };
        if let Some(rest) = raw.strip_prefix("  ") {
            c.s = rest;
            let role_word = c.word()?;
            let role = Role::from_str(role_word)
                .ok_or(DocParseError { line: i + 1, message: format!("unknown role `{role_word}`") })?;
            let label = c.quoted()?;
            c.lit(" @ ")?;
            let bbox = c.rect()?;
            let mut e = Element::new(role, "", bbox);
            if role == Role::Icon {
                e.icon_name = (!label.is_empty()).then_some(label);
            } else {
                e.text = label;
            }
            if let Some(rest) = c.s.strip_prefix(" [") {
                let end = rest.find(']').ok_or(DocParseError { line: i + 1, message: "unterminated state".into() })?;
                e.state = Some(rest[..end].to_string());
                c.s = &rest[end + 1..];
            }
            if let Some(rest) = c.s.strip_prefix(" conf=") {
                e.confidence =
                    rest.parse().map_err(|_| DocParseError { line: i + 1, message: "bad confidence".into() })?;
                c.s = "";
            }
            if !c.s.is_empty() {
                return c.err(format!("trailing text `{}`", c.s));
            }
            match doc.panels.last_mut() {
                Some(p) => p.elements.push(e),
                None => return c.err("element before any panel"),
            }
        } else {
            c.lit("panel ")?;
            let name = c.quoted()?;
            c.lit(" @ ")?;
            let bbox = c.rect()?;
            let mut p = Panel::new(&name, bbox);
            if let Some(rest) = c.s.strip_prefix(" unclaimed=") {
                p.unclaimed = rest.parse().map_err(|_| DocParseError { line: i + 1, message: "bad count".into() })?;
                c.s = "";
            }
            if !c.s.is_empty() {
                return c.err(format!("trailing text `{}`", c.s));
            }
            doc.panels.push(p);
        }
    }
    Ok(doc)
}
