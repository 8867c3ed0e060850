use super::doc::Panel;
use crate::sim::{Observation, Rect};

/// Name of the synthetic panel owning cells outside every metadata panel.
pub const DESKTOP_PANEL: &str = "Desktop";

/// Panels plus, for every raster cell, the index of the panel owning it.
#[derive(Debug, Clone)]
pub struct Segmentation {
    pub panels: Vec<Panel>,
    owner: Vec<usize>,
    width: u32,
    height: u32,
}

impl Segmentation {
    pub fn owner(&self, x: u32, y: u32) -> usize {
        self.owner[(y * self.width + x) as usize]
    }

    pub fn region(&self, index: usize) -> Region<'_> {
        let cells = self.panels[index].bbox;
        Region { seg: self, index, cell_bounds: cells }
    }
}

/// The cells owned by one panel.
#[derive(Debug, Clone, Copy)]
pub struct Region<'a> {
    seg: &'a Segmentation,
    pub index: usize,
    /// Panel bbox in pixels.
    pub cell_bounds: Rect,
}

impl Region<'_> {
    pub fn owns(&self, x: u32, y: u32) -> bool {
        x < self.seg.width && y < self.seg.height && self.seg.owner(x, y) == self.index
    }

    /// Panel bbox in cells, clipped to the raster.
    pub fn bounds(&self, cell_px: u32) -> Rect {
        self.cell_bounds.to_cells(cell_px).intersect(&Rect::new(0, 0, self.seg.width, self.seg.height))
    }

    /// Owned cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let (w, h) = (self.seg.width, self.seg.height);
        (0..h).flat_map(move |y| (0..w).map(move |x| (x, y))).filter(move |&(x, y)| self.owns(x, y))
    }
}

/// One panel per metadata node, in paint order, plus a trailing `Desktop`
/// panel. A cell belongs to the topmost node containing it.
pub fn segment_panels(obs: &Observation) -> Segmentation {
    let r = &obs.raster;
    let cell = r.cell_px;
    let screen_px = Rect::new(0, 0, r.width * cell, r.height * cell);
    let nodes = obs.panels();
    let mut panels: Vec<Panel> = Vec::with_capacity(nodes.len() + 1);
    for node in &nodes {
        let mut name = node.name.clone();
        let mut n = 2;
        while panels.iter().any(|p| p.name == name) || name == DESKTOP_PANEL {
            name = format!("{} ({n})", node.name);
            n += 1;
        }
        panels.push(Panel::new(&name, node.bbox.intersect(&screen_px)));
    }
    let desktop = panels.len();
    panels.push(Panel::new(DESKTOP_PANEL, screen_px));

    let mut owner = vec![desktop; (r.width * r.height) as usize];
    for (i, p) in panels.iter().enumerate().take(desktop) {
        let b = p.bbox.to_cells(cell);
        for y in b.y..b.bottom().min(r.height) {
            for x in b.x..b.right().min(r.width) {
                owner[(y * r.width + x) as usize] = i;
            }
        }
    }
    Segmentation { panels, owner, width: r.width, height: r.height }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{Cell, PanelKind, PanelMeta, SymbolicRaster};

    fn meta(name: &str, bbox: Rect) -> PanelMeta {
        PanelMeta { name: name.into(), kind: PanelKind::Window, bbox, children: vec![] }
    }

    fn obs(metadata: Vec<PanelMeta>) -> Observation {
        Observation { metadata, raster: SymbolicRaster::new(10, 6, 8, Cell::Fill(0)) }
    }

    #[test]
    fn empty_metadata_is_one_desktop() {
        let seg = segment_panels(&obs(vec![]));
        assert_eq!(seg.panels.len(), 1);
        assert_eq!(seg.panels[0].name, DESKTOP_PANEL);
        assert_eq!(seg.panels[0].bbox, Rect::new(0, 0, 80, 48));
        assert_eq!(seg.region(0).cells().count(), 60);
    }

    #[test]
    fn panels_then_desktop() {
        let seg = segment_panels(&obs(vec![meta("A", Rect::new(0, 0, 32, 16)), meta("B", Rect::new(40, 0, 16, 16))]));
        let names: Vec<_> = seg.panels.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, ["A", "B", "Desktop"]);
    }

    #[test]
    fn topmost_wins_and_union_covers() {
        let seg = segment_panels(&obs(vec![meta("A", Rect::new(0, 0, 48, 32)), meta("B", Rect::new(16, 16, 48, 32))]));
        assert_eq!(seg.owner(3, 3), 1);
        assert_eq!(seg.owner(0, 0), 0);
        assert_eq!(seg.owner(9, 5), 2);
        let total: usize = (0..seg.panels.len()).map(|i| seg.region(i).cells().count()).sum();
        assert_eq!(total, 60);
    }

    #[test]
    fn duplicate_names_are_disambiguated() {
        let seg = segment_panels(&obs(vec![meta("A", Rect::new(0, 0, 8, 8)), meta("A", Rect::new(8, 0, 8, 8))]));
        assert_eq!(seg.panels[1].name, "A (2)");
    }
}
