use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::gui::{Element, Panel, Role, UiDocument};
use crate::sim::Rect;

/// Identifies an element within its panel. `occurrence` counts earlier
/// elements with the same role and bbox in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ElementKey {
    pub role: Role,
    pub bbox: Rect,
    pub occurrence: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementEntry {
    pub panel: String,
    pub key: ElementKey,
    pub element: Element,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Text,
    IconName,
    State,
    Confidence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldChange {
    pub panel: String,
    pub key: ElementKey,
    pub field: Field,
    pub old: Value,
    pub new: Value,
}

/// Panel-level change: bounds or the unclaimed count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelChange {
    pub name: String,
    pub bbox: Rect,
    pub unclaimed: usize,
}

/// Structural difference between two documents.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DocDiff {
    pub added: Vec<ElementEntry>,
    pub removed: Vec<ElementEntry>,
    pub changed: Vec<FieldChange>,
    /// Panels present only in the new document, without their elements
    /// (those are listed in `added`).
    pub panels_added: Vec<PanelChange>,
    pub panels_removed: Vec<String>,
    pub panels_changed: Vec<PanelChange>,
    /// New panel order, present only when it differs.
    pub order: Option<Vec<String>>,
}

impl DocDiff {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty()
            && self.removed.is_empty()
            && self.changed.is_empty()
            && self.panels_added.is_empty()
            && self.panels_removed.is_empty()
            && self.panels_changed.is_empty()
            && self.order.is_none()
    }

    /// One line per change, for prompts.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for p in &self.panels_removed {
            let _ = writeln!(out, "- panel {}", crate::gui::quote_label(p));
        }
        for p in &self.panels_added {
            let _ = writeln!(out, "+ panel {} @ {}", crate::gui::quote_label(&p.name), p.bbox);
        }
        for e in &self.removed {
            let _ = writeln!(out, "- in {}: {}", crate::gui::quote_label(&e.panel), describe(&e.element));
        }
        for e in &self.added {
            let _ = writeln!(out, "+ in {}: {}", crate::gui::quote_label(&e.panel), describe(&e.element));
        }
        for c in &self.changed {
            let _ = writeln!(
                out,
                "~ in {}: {} @ {} {:?}: {} -> {}",
                crate::gui::quote_label(&c.panel),
                c.key.role,
                c.key.bbox,
                c.field,
                c.old,
                c.new
            );
        }
        out
    }
}

fn describe(e: &Element) -> String {
    let label = if e.role == Role::Icon { e.icon_name.as_deref().unwrap_or("") } else { &e.text };
    match &e.state {
        Some(s) => format!("{} {} @ {} [{s}]", e.role, crate::gui::quote_label(label), e.bbox),
        None => format!("{} {} @ {}", e.role, crate::gui::quote_label(label), e.bbox),
    }
}

/// Key of every element, by index.
fn keyed(elements: &[Element]) -> BTreeMap<ElementKey, usize> {
    let mut seen: BTreeMap<(Role, Rect), usize> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for (i, e) in elements.iter().enumerate() {
        let n = seen.entry((e.role, e.bbox)).or_insert(0);
        out.insert(ElementKey { role: e.role, bbox: e.bbox, occurrence: *n }, i);
        *n += 1;
    }
    out
}

fn field_values(e: &Element) -> [(Field, Value); 4] {
    [
        (Field::Text, Value::from(e.text.clone())),
        (Field::IconName, e.icon_name.clone().map_or(Value::Null, Value::from)),
        (Field::State, e.state.clone().map_or(Value::Null, Value::from)),
        (Field::Confidence, Value::from(e.confidence)),
    ]
}

fn set_field(e: &mut Element, field: Field, v: &Value) {
    match field {
        Field::Text => e.text = v.as_str().unwrap_or_default().to_string(),
        Field::IconName => e.icon_name = v.as_str().map(str::to_string),
        Field::State => e.state = v.as_str().map(str::to_string),
        Field::Confidence => e.confidence = v.as_f64().unwrap_or(1.0),
    }
}

/// Keyed diff of two documents, both taken in canonical element order.
/// Entries come out sorted by panel (new document order, then removed
/// panels) and key.
pub fn diff(old: &UiDocument, new: &UiDocument) -> DocDiff {
    let mut old = old.clone();
    let mut new = new.clone();
    old.canonicalize();
    new.canonicalize();
    let mut d = DocDiff::default();
    let empty = Panel::new("", Rect::default());

    for p in &old.panels {
        if new.panel(&p.name).is_none() {
            d.panels_removed.push(p.name.clone());
        }
    }
    let mut names: Vec<&str> = new.panels.iter().map(|p| p.name.as_str()).collect();
    names.extend(d.panels_removed.iter().map(String::as_str));
    for np in &new.panels {
        let info = PanelChange { name: np.name.clone(), bbox: np.bbox, unclaimed: np.unclaimed };
        match old.panel(&np.name) {
            None => d.panels_added.push(info),
            Some(op) if op.bbox != np.bbox || op.unclaimed != np.unclaimed => d.panels_changed.push(info),
            Some(_) => {}
        }
    }
    for name in names {
        let op = old.panel(name).unwrap_or(&empty);
        let np = new.panel(name).unwrap_or(&empty);
        let ok = keyed(&op.elements);
        let nk = keyed(&np.elements);
        for (k, &oi) in &ok {
            let e = &op.elements[oi];
            match nk.get(k) {
                None => d.removed.push(ElementEntry { panel: name.to_string(), key: k.clone(), element: e.clone() }),
                Some(&ni) => {
                    for ((field, ov), (_, nv)) in field_values(e).into_iter().zip(field_values(&np.elements[ni])) {
                        if ov != nv {
                            d.changed.push(FieldChange {
                                panel: name.to_string(),
                                key: k.clone(),
                                field,
                                old: ov,
                                new: nv,
                            });
                        }
                    }
                }
            }
        }
        for (k, &ni) in &nk {
            if !ok.contains_key(k) {
                let element = np.elements[ni].clone();
                d.added.push(ElementEntry { panel: name.to_string(), key: k.clone(), element });
            }
        }
    }
    let old_order: Vec<&str> = old.panels.iter().map(|p| p.name.as_str()).filter(|n| new.panel(n).is_some()).collect();
    let new_order: Vec<&str> = new.panels.iter().map(|p| p.name.as_str()).collect();
    if old_order != new_order || !d.panels_added.is_empty() {
        d.order = Some(new_order.into_iter().map(str::to_string).collect());
    }
    d
}

/// Applies `d` to `old`. For any documents `a` and `b`,
/// `patch(a, &diff(a, b))` equals `b` in canonical order.
pub fn patch(old: &UiDocument, d: &DocDiff) -> UiDocument {
    let mut doc = old.clone();
    doc.canonicalize();
    doc.panels.retain(|p| !d.panels_removed.contains(&p.name));
    for pc in &d.panels_added {
        let mut p = Panel::new(&pc.name, pc.bbox);
        p.unclaimed = pc.unclaimed;
        doc.panels.push(p);
    }
    for pc in &d.panels_changed {
        if let Some(p) = doc.panels.iter_mut().find(|p| p.name == pc.name) {
            p.bbox = pc.bbox;
            p.unclaimed = pc.unclaimed;
        }
    }
    if let Some(order) = &d.order {
        doc.panels.sort_by_key(|p| order.iter().position(|n| *n == p.name).unwrap_or(usize::MAX));
    }
    for p in &mut doc.panels {
        let index = keyed(&p.elements);
        for c in d.changed.iter().filter(|c| c.panel == p.name) {
            if let Some(&i) = index.get(&c.key) {
                set_field(&mut p.elements[i], c.field, &c.new);
            }
        }
        let mut drop = vec![false; p.elements.len()];
        for r in d.removed.iter().filter(|r| r.panel == p.name) {
            if let Some(&i) = index.get(&r.key) {
                drop[i] = true;
            }
        }
        let mut i = 0;
        p.elements.retain(|_| {
            i += 1;
            !drop[i - 1]
        });
        p.elements.extend(d.added.iter().filter(|a| a.panel == p.name).map(|a| a.element.clone()));
    }
    doc.canonicalize();
    doc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gui::serialize;

    fn doc() -> UiDocument {
        let mut p = Panel::new("Settings", Rect::new(0, 0, 160, 80));
        p.elements = vec![
            Element::new(Role::Checkbox, "Mute", Rect::new(8, 16, 48, 8)).with_state("unchecked"),
            Element::new(Role::Button, "OK", Rect::new(8, 32, 24, 8)),
        ];
        let mut d = UiDocument { panels: vec![p, Panel::new("Desktop", Rect::new(0, 0, 320, 160))] };
        d.canonicalize();
        d
    }

    #[test]
    fn identity_is_empty() {
        assert!(diff(&doc(), &doc()).is_empty());
    }

    #[test]
    fn toggle_is_one_state_change() {
        let old = doc();
        let mut new = doc();
        new.panels[0].elements[0].state = Some("checked".into());
        let d = diff(&old, &new);
        assert_eq!(d.changed.len(), 1);
        assert!(d.added.is_empty() && d.removed.is_empty());
        assert_eq!(d.changed[0].field, Field::State);
        assert_eq!(d.changed[0].new, Value::from("checked"));
        assert_eq!(patch(&old, &d), new);
        assert!(d.render().contains("\"unchecked\" -> \"checked\""));
    }

    #[test]
    fn panel_open_and_close() {
        let old = doc();
        let mut new = doc();
        let mut popup = Panel::new("Menu", Rect::new(8, 8, 64, 32));
        popup.elements.push(Element::new(Role::Button, "Open", Rect::new(8, 8, 64, 8)));
        new.panels.insert(1, popup);
        let d = diff(&old, &new);
        assert_eq!(d.panels_added.len(), 1);
        assert_eq!(d.added.len(), 1);
        assert_eq!(patch(&old, &d), new);
        let back = diff(&new, &old);
        assert_eq!(back.panels_removed, vec!["Menu".to_string()]);
        assert_eq!(serialize(&patch(&new, &back)), serialize(&old));
    }

    #[test]
    fn duplicate_keys_pair_by_occurrence() {
        let mut old = doc();
        old.panels[0].elements.push(Element::new(Role::Text, "a", Rect::new(0, 0, 8, 8)));
        old.panels[0].elements.push(Element::new(Role::Text, "b", Rect::new(0, 0, 8, 8)));
        old.canonicalize();
        let mut new = doc();
        new.panels[0].elements.push(Element::new(Role::Text, "b", Rect::new(0, 0, 8, 8)));
        new.canonicalize();
        assert_eq!(patch(&old, &diff(&old, &new)), new);
    }
}
