//! Screen parsing: observation in, panel-by-panel [`UiDocument`] out.
//!
//! The pipeline runs in a fixed order. Metadata segments the screen into
//! panels, then each panel goes through text extraction, icon matching and
//! widget detection. Each stage is an [`Extractor`]; swapping one out
//! (say, for a real OCR backend) does not change the document contract.

mod doc;
mod extract;
mod segment;

use serde::{Deserialize, Serialize};

pub use doc::{deserialize, quote as quote_label, serialize, DocParseError, Element, Panel, Role, UiDocument};
pub use extract::{
    apply_text_noise, detect_widgets, extract_text, match_icons, text_noise_mask, Extractor, IconMatcher, IconTemplate,
    TextExtractor, WidgetDetector,
};
pub use segment::{segment_panels, Region, Segmentation, DESKTOP_PANEL};

use crate::sim::{Cell, Observation, SymbolicRaster};

/// Which extractors run, plus optional text-recognition noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParseConfig {
    /// Use metadata for panel segmentation. When off, the whole screen is
    /// one `Desktop` panel.
    pub panels: bool,
    pub text: bool,
    pub icons: bool,
    /// Scrollbars, reference lines, buttons, fields, checkboxes, objects.
    pub widgets: bool,
    /// Probability of dropping each glyph before text extraction.
    pub text_noise: f64,
    pub seed: u64,
}

impl Default for ParseConfig {
    fn default() -> Self {
        Self { panels: true, text: true, icons: true, widgets: true, text_noise: 0.0, seed: 0 }
    }
}

/// The extractor chain in invocation order.
pub struct Pipeline {
    pub extractors: Vec<Box<dyn Extractor>>,
}

impl Pipeline {
    pub fn from_config(config: &ParseConfig, templates: &[IconTemplate]) -> Self {
        let mut extractors: Vec<Box<dyn Extractor>> = Vec::new();
        if config.text {
            extractors.push(Box::new(TextExtractor { noise: config.text_noise, seed: config.seed }));
        }
        if config.icons {
            extractors.push(Box::new(IconMatcher { templates: templates.to_vec() }));
        }
        if config.widgets {
            extractors.push(Box::new(WidgetDetector));
        }
        Self { extractors }
    }

    pub fn run(&self, obs: &Observation, use_panels: bool) -> UiDocument {
        let seg = if use_panels {
            segment_panels(obs)
        } else {
            segment_panels(&Observation { metadata: Vec::new(), raster: obs.raster.clone() })
        };
        let mut panels = Vec::with_capacity(seg.panels.len());
        for (i, panel) in seg.panels.iter().enumerate() {
            let region = seg.region(i);
            let mut elements = Vec::new();
            for ex in &self.extractors {
                elements.extend(ex.extract(&obs.raster, &region));
            }
            let mut p = panel.clone();
            p.unclaimed = unclaimed(&obs.raster, &region, &elements);
            p.elements = elements;
            panels.push(p);
        }
        let mut doc = UiDocument { panels };
        doc.canonicalize();
        doc
    }
}

/// Owned ink cells (icons and non-space glyphs) not covered by any element.
fn unclaimed(raster: &SymbolicRaster, region: &Region<'_>, elements: &[Element]) -> usize {
    let cell = raster.cell_px;
    let boxes: Vec<_> = elements.iter().map(|e| e.bbox.to_cells(cell)).collect();
    region
        .cells()
        .filter(|&(x, y)| !matches!(raster.get(x, y), Cell::Fill(_) | Cell::Glyph(' ')))
        .filter(|&(x, y)| !boxes.iter().any(|b| b.contains(x, y)))
        .count()
}

/// Parses an observation with the built-in extractors.
pub fn parse_gui(obs: &Observation, templates: &[IconTemplate], config: &ParseConfig) -> UiDocument {
    Pipeline::from_config(config, templates).run(obs, config.panels)
}
