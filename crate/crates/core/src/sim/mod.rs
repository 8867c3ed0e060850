//! The simulated desktop.
//!
//! [`EnvState`] is a plain value holding windows (z-ordered widget trees),
//! a settings store, a virtual file system and input bookkeeping.
//! [`execute`] is a pure transition function over it, and [`observe`]
//! produces the agent's view: panel-level metadata plus a
//! [`SymbolicRaster`] standing in for a screenshot.
//!
//! Rendering rules: every bbox snaps to `cell_px` (8 by default). Window
//! title bars take the first cell row. Glyph cells carry text; icon cells
//! carry one character of an icon bitmap; everything else is a fill color
//! from [`color`].

mod exec;
mod geom;
mod observe;
mod raster;
mod render;
mod schema;
mod state;

pub use exec::{apply_mutation, execute, Dispatch, ExecError, ExecReport, Route};
pub use geom::{Point, Rect};
pub use observe::{observe, Observation, PanelKind, PanelMeta};
pub use raster::{color, Cell, RasterRepr, SymbolicRaster};
pub use render::render;
pub use schema::{validate_state, SchemaError};
pub use state::{
    Binding, ClickMemo, Effect, EnvState, Folder, Mutation, PressOrigin, Scalar, Size, TextAs, Timing, Trigger, Widget,
    WidgetKind, Window, DEFAULT_CELL_PX,
};
