//! Seeded generators shared by the acceptance and property tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use ace_core::action::{Action, ActionScript, NAMED_KEYS};
use ace_core::bridge::WireMessage;
use ace_core::eval::TaskPack;
use ace_core::gui::{Element, Panel, Role, UiDocument};
use ace_core::planner::{Milestone, PlanTree};
use ace_core::sim::{
    Cell, Dispatch, EnvState, ExecReport, Observation, PanelKind, PanelMeta, Rect, Route, Size, SymbolicRaster,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pack_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("packs/bundled")
}

pub fn bundled() -> TaskPack {
    TaskPack::load(pack_dir()).expect("bundled pack loads")
}

const TEXT_CHARS: &[char] =
    &['a', 'Z', '0', ' ', '\'', '\\', '"', ',', ';', '(', ')', '\n', '\t', 'é', '→', '\u{1}', '=', '#'];

pub fn text(r: &mut impl Rng, max: usize) -> String {
    let n = r.gen_range(0..=max);
    (0..n).map(|_| *TEXT_CHARS.choose(r).unwrap()).collect()
}

fn any_key(r: &mut impl Rng) -> String {
    match r.gen_range(0..4) {
        0 => NAMED_KEYS.choose(r).unwrap().to_string(),
        1 => char::from(r.gen_range(b'a'..=b'z')).to_string(),
        2 => char::from(r.gen_range(b'0'..=b'9')).to_string(),
        _ => text(r, 6),
    }
}

fn known_key(r: &mut impl Rng) -> String {
    if r.gen_bool(0.5) {
        NAMED_KEYS.choose(r).unwrap().to_string()
    } else {
        char::from(r.gen_range(b'a'..=b'z')).to_string()
    }
}

fn duration(r: &mut impl Rng) -> f64 {
    match r.gen_range(0..3) {
        0 => f64::from(r.gen_range(0..20u32)),
        1 => f64::from(r.gen_range(0..100_000u32)) / 100.0,
        _ => r.gen_range(0.0..1000.0),
    }
}

/// Any action the grammar can express.
pub fn action(r: &mut impl Rng) -> Action {
    let (x, y) = (r.gen(), r.gen());
    match r.gen_range(0..13) {
        0 => Action::MoveTo { x, y },
        1 => Action::Click { x, y },
        2 => Action::DoubleClick { x, y },
        3 => Action::RightClick { x, y },
        4 => Action::Write { text: text(r, 12) },
        5 => Action::Hotkey { keys: (0..r.gen_range(2..5)).map(|_| any_key(r)).collect() },
        6 => Action::Scroll { amount: r.gen_range(-100_000..100_000) },
        7 => Action::DragTo { x, y, duration: duration(r) },
        8 => Action::MouseDown,
        9 => Action::MouseUp,
        10 => Action::Press { key: any_key(r) },
        11 => Action::KeyDown { key: any_key(r) },
        _ => Action::KeyUp { key: any_key(r) },
    }
}

pub fn script(r: &mut impl Rng, max: usize) -> ActionScript {
    ActionScript::new((0..r.gen_range(0..=max)).map(|_| action(r)).collect())
}

fn widget_points(state: &EnvState) -> Vec<(u32, u32)> {
    let mut pts = Vec::new();
    for w in &state.windows {
        pts.push((w.bbox.x, w.bbox.y));
        w.walk(&mut |c| pts.push(c.bbox.center()));
    }
    pts
}

/// An in-bounds script for `state`, biased toward widget centres.
pub fn desktop_script(r: &mut impl Rng, state: &EnvState, max: usize) -> ActionScript {
    let targets = widget_points(state);
    let Size { w, h } = state.screen;
    let point = |r: &mut ChaCha8Rng| match targets.choose(r) {
        Some(&p) if r.gen_bool(0.7) => p,
        _ => (r.gen_range(0..w), r.gen_range(0..h)),
    };
    let mut local = ChaCha8Rng::seed_from_u64(r.gen());
    let r = &mut local;
    let n = r.gen_range(1..=max);
    let actions = (0..n)
        .map(|_| {
            let (x, y) = point(r);
            match r.gen_range(0..12) {
                0 => Action::MoveTo { x, y },
                1 | 2 => Action::Click { x, y },
                3 => Action::DoubleClick { x, y },
                4 => Action::RightClick { x, y },
                5 => Action::Write { text: text(r, 5) },
                6 => Action::Hotkey { keys: vec!["ctrl".into(), known_key(r)] },
                7 => Action::Scroll { amount: r.gen_range(-3..=3) },
                8 => Action::DragTo { x, y, duration: 0.5 },
                9 => Action::Press { key: known_key(r) },
                10 => [Action::MouseDown, Action::MouseUp].choose(r).unwrap().clone(),
                _ => Action::KeyDown { key: known_key(r) },
            }
        })
        .collect();
    ActionScript::new(actions)
}

fn label(r: &mut impl Rng) -> String {
    const WORDS: &[&str] = &["Open", "menu", "Save", "file", "the", "Display", "scale", "click", "OK", "150%"];
    (0..r.gen_range(1..4)).map(|_| *WORDS.choose(r).unwrap()).collect::<Vec<_>>().join(" ")
}

pub fn plan_tree(r: &mut impl Rng) -> PlanTree {
    let milestones = (0..r.gen_range(1..6))
        .map(|_| Milestone { text: label(r), subtasks: (0..r.gen_range(0..6)).map(|_| label(r)).collect() })
        .collect();
    PlanTree::new(milestones).expect("generated tree is well formed")
}

fn small_rect(r: &mut impl Rng) -> Rect {
    Rect::new(r.gen_range(0..4) * 8, r.gen_range(0..4) * 8, r.gen_range(1..4) * 8, 8)
}

fn element(r: &mut impl Rng) -> Element {
    let mut e = Element::new(*Role::ALL.choose(r).unwrap(), label(r), small_rect(r));
    if r.gen_bool(0.3) {
        e.icon_name = Some(["folder", "file", "gear"].choose(r).unwrap().to_string());
    }
    if r.gen_bool(0.3) {
        e.state = Some(["checked", "unchecked", "thumb=2"].choose(r).unwrap().to_string());
    }
    e.confidence = f64::from(r.gen_range(1..=4u32)) / 4.0;
    e
}

const PANEL_NAMES: &[&str] = &["Desktop", "Settings", "Files", "Menu", "Editor", "Dialog"];

pub fn document(r: &mut impl Rng) -> UiDocument {
    let mut names = PANEL_NAMES.to_vec();
    names.shuffle(r);
    names.truncate(r.gen_range(0..=4));
    let panels = names
        .into_iter()
        .map(|n| {
            let mut p = Panel::new(n, small_rect(r));
            p.elements = (0..r.gen_range(0..8)).map(|_| element(r)).collect();
            p.unclaimed = r.gen_range(0..3);
            p
        })
        .collect();
    let mut doc = UiDocument { panels };
    doc.canonicalize();
    doc
}

/// A document derived from `doc` by a handful of random edits.
pub fn edited(r: &mut impl Rng, doc: &UiDocument) -> UiDocument {
    let mut d = doc.clone();
    for _ in 0..r.gen_range(0..6) {
        match r.gen_range(0..7) {
            0 => {
                if let Some(p) = d.panels.choose_mut(r) {
                    p.elements.push(element(r));
                }
            }
            1 => {
                if let Some(p) = d.panels.choose_mut(r) {
                    if !p.elements.is_empty() {
                        let i = r.gen_range(0..p.elements.len());
                        p.elements.remove(i);
                    }
                }
            }
            2 => {
                if let Some(e) = d.panels.choose_mut(r).and_then(|p| p.elements.choose_mut(r)) {
                    match r.gen_range(0..4) {
                        0 => e.text = label(r),
                        1 => e.state = None,
                        2 => e.icon_name = Some("gear".into()),
                        _ => e.confidence = 0.5,
                    }
                }
            }
            3 => {
                if !d.panels.is_empty() {
                    let i = r.gen_range(0..d.panels.len());
                    d.panels.remove(i);
                }
            }
            4 => {
                let free: Vec<&str> = PANEL_NAMES.iter().copied().filter(|n| d.panel(n).is_none()).collect();
                if let Some(n) = free.choose(r) {
                    let mut p = Panel::new(n, small_rect(r));
                    p.elements = (0..r.gen_range(0..4)).map(|_| element(r)).collect();
                    let at = r.gen_range(0..=d.panels.len());
                    d.panels.insert(at, p);
                }
            }
            5 => d.panels.shuffle(r),
            _ => {
                if let Some(p) = d.panels.choose_mut(r) {
                    p.bbox = small_rect(r);
                    p.unclaimed = r.gen_range(0..3);
                }
            }
        }
    }
    d.canonicalize();
    d
}

fn cell(r: &mut impl Rng) -> Cell {
    match r.gen_range(0..3) {
        0 => Cell::Fill(r.gen_range(0..6)),
        1 => Cell::Glyph(*['a', 'B', ' ', '·', '▀'].choose(r).unwrap()),
        _ => Cell::Icon(*['▞', '█', '◆'].choose(r).unwrap()),
    }
}

/// A raster of `w`×`h` cells at 8px per cell.
pub fn raster(r: &mut impl Rng, w: u32, h: u32) -> SymbolicRaster {
    let mut out = SymbolicRaster::new(w, h, 8, Cell::Fill(0));
    for y in 0..h {
        for x in 0..w {
            out.set(x, y, cell(r));
        }
    }
    out
}

/// A copy of `base` with each cell redrawn with probability `p`.
pub fn perturbed(r: &mut impl Rng, base: &SymbolicRaster, p: f64) -> SymbolicRaster {
    let mut out = base.clone();
    for y in 0..base.height {
        for x in 0..base.width {
            if r.gen_bool(p) {
                out.set(x, y, cell(r));
            }
        }
    }
    out
}

/// A cell-aligned pixel region, sometimes hanging off the raster.
pub fn region(r: &mut impl Rng, w: u32, h: u32) -> Option<Rect> {
    if r.gen_bool(0.2) {
        return None;
    }
    let x = r.gen_range(0..=w);
    let y = r.gen_range(0..=h);
    Some(Rect::new(x * 8, y * 8, r.gen_range(0..=w + 2) * 8, r.gen_range(0..=h + 2) * 8))
}

fn meta(r: &mut impl Rng, depth: u32) -> PanelMeta {
    PanelMeta {
        name: label(r),
        kind: *[PanelKind::Window, PanelKind::Popup, PanelKind::Panel].choose(r).unwrap(),
        bbox: small_rect(r),
        children: if depth == 0 { Vec::new() } else { (0..r.gen_range(0..3)).map(|_| meta(r, depth - 1)).collect() },
    }
}

/// Any wire message. `states` supplies snapshot payloads.
pub fn wire_message(r: &mut impl Rng, states: &[EnvState]) -> WireMessage {
    let hash = hex_string(r);
    match r.gen_range(0..10) {
        0 => WireMessage::Hello { proto_version: text(r, 3), screen: Size { w: r.gen(), h: r.gen() } },
        1 => WireMessage::Reset { task_id: text(r, 20) },
        2 => WireMessage::Observe {},
        3 => {
            let obs =
                Observation { metadata: (0..r.gen_range(0..3)).map(|_| meta(r, 2)).collect(), raster: raster(r, 6, 4) };
            WireMessage::ObservationMsg { metadata: obs.metadata, raster: obs.raster, state_hash: hash }
        }
        4 => WireMessage::Execute { script_text: script(r, 5).render() },
        5 => {
            let dispatches = (0..r.gen_range(0..4))
                .map(|i| Dispatch {
                    action: i,
                    route: *[
                        Route::Cursor,
                        Route::Widget,
                        Route::Focus,
                        Route::Binding,
                        Route::Bookkeeping,
                        Route::Unhandled,
                    ]
                    .choose(r)
                    .unwrap(),
                    target: r.gen_bool(0.5).then(|| label(r)),
                    mutations: r.gen_range(0..3),
                    notes: (0..r.gen_range(0..2)).map(|_| text(r, 8)).collect(),
                })
                .collect();
            WireMessage::ExecResultMsg { report: ExecReport { dispatches }, state_hash: hash }
        }
        6 => WireMessage::Snapshot {},
        7 => WireMessage::StateMsg { state: Box::new(states.choose(r).unwrap().clone()) },
        8 => WireMessage::Error { code: label(r), detail: text(r, 30) },
        _ => WireMessage::Shutdown {},
    }
}

fn hex_string(r: &mut impl Rng) -> String {
    let bytes: [u8; 32] = r.gen();
    hex::encode(bytes)
}
