use serde::{Deserialize, Serialize};

use super::geom::Rect;
use super::raster::SymbolicRaster;
use super::render::render;
use super::state::{EnvState, Widget, WidgetKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PanelKind {
    Window,
    Popup,
    Panel,
}

/// Coarse layout metadata: window, pop-up and panel names with their
/// bounds. Leaf widgets are deliberately absent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelMeta {
    pub name: String,
    pub kind: PanelKind,
    pub bbox: Rect,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<PanelMeta>,
}

impl PanelMeta {
    /// Pre-order flattening: each node precedes its children.
    pub fn flatten(&self) -> Vec<&PanelMeta> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.flatten());
        }
        out
    }
}

/// What the agent sees at one step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    /// Visible windows bottom to top.
    pub metadata: Vec<PanelMeta>,
    pub raster: SymbolicRaster,
}

impl Observation {
    /// All metadata nodes in paint order (later nodes are on top).
    pub fn panels(&self) -> Vec<&PanelMeta> {
        self.metadata.iter().flat_map(PanelMeta::flatten).collect()
    }

    pub fn find_panel(&self, name: &str) -> Option<&PanelMeta> {
        self.panels().into_iter().find(|p| p.name == name)
    }
}

fn collect_panels(w: &Widget, out: &mut Vec<PanelMeta>) {
    if w.hidden() {
        return;
    }
    if w.kind == WidgetKind::Panel {
        let mut node = PanelMeta { name: w.text.clone(), kind: PanelKind::Panel, bbox: w.bbox, children: Vec::new() };
        for c in &w.children {
            collect_panels(c, &mut node.children);
        }
        out.push(node);
    } else if w.kind != WidgetKind::ScrollArea {
        for c in &w.children {
            collect_panels(c, out);
        }
    }
}

pub fn observe(state: &EnvState) -> Observation {
    let screen = state.screen_rect();
    let metadata = state
        .windows
        .iter()
        .filter(|w| w.visible)
        .map(|w| {
            let mut children = Vec::new();
            for c in &w.children {
                collect_panels(c, &mut children);
            }
            PanelMeta {
                name: w.title.clone(),
                kind: if w.popup { PanelKind::Popup } else { PanelKind::Window },
                bbox: w.bbox.intersect(&screen),
                children,
            }
        })
        .collect();
    Observation { metadata, raster: render(state) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::raster::{color, Cell};
    use crate::sim::state::Window;

    #[test]
    fn blank_state_has_no_metadata() {
        let obs = observe(&EnvState::blank(64, 64));
        assert!(obs.metadata.is_empty());
        assert!(obs.raster.cells().iter().all(|c| *c == Cell::Fill(color::DESKTOP)));
    }

    #[test]
    fn metadata_excludes_leaf_widgets() {
        let mut s = EnvState::blank(320, 240);
        s.windows.push(
            Window::new("set", "Settings", Rect::new(0, 0, 320, 240)).with_children(vec![Widget::new(
                "b",
                WidgetKind::Button,
                Rect::new(8, 8, 40, 8),
            )
            .with_text("OK")]),
        );
        let obs = observe(&s);
        assert_eq!(obs.metadata.len(), 1);
        assert_eq!(obs.metadata[0].name, "Settings");
        assert!(obs.metadata[0].children.is_empty());
    }

    #[test]
    fn nested_panels_are_reported() {
        let mut s = EnvState::blank(320, 240);
        let inner = Widget::new("p2", WidgetKind::Panel, Rect::new(8, 16, 64, 32)).with_text("Layers");
        s.windows.push(
            Window::new("w", "Editor", Rect::new(0, 0, 320, 240)).with_children(vec![Widget::new(
                "p1",
                WidgetKind::Panel,
                Rect::new(0, 8, 160, 120),
            )
            .with_text("Timeline")
            .with_children(vec![inner])]),
        );
        let obs = observe(&s);
        let names: Vec<_> = obs.panels().iter().map(|p| p.name.clone()).collect();
        assert_eq!(names, ["Editor", "Timeline", "Layers"]);
    }
}
