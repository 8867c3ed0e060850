use serde::{Deserialize, Serialize};

use super::task::{Assertion, GoalChecker, TaskSpec};
use crate::sim::{observe, render, EnvState, Rect, SymbolicRaster};

/// Fraction of cells that agree within `region` (screen pixels, snapped to
/// cells). `None` means the whole raster. An empty region counts as full
/// agreement.
pub fn similarity(a: &SymbolicRaster, b: &SymbolicRaster, region: Option<Rect>) -> Result<f64, String> {
    if (a.width, a.height, a.cell_px) != (b.width, b.height, b.cell_px) {
        return Err(format!(
            "raster sizes differ: {}x{}@{} vs {}x{}@{}",
            a.width, a.height, a.cell_px, b.width, b.height, b.cell_px
        ));
    }
    let cells = match region {
        None => a.bounds(),
        Some(r) => r.to_cells(a.cell_px).intersect(&a.bounds()),
    };
    let total = u64::from(cells.w) * u64::from(cells.h);
    if total == 0 {
        return Ok(1.0);
    }
    let mut same = 0u64;
    for y in cells.y..cells.bottom() {
        for x in cells.x..cells.right() {
            same += u64::from(a.get(x, y) == b.get(x, y));
        }
    }
    Ok(same as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalVerdict {
    pub met: bool,
    pub detail: String,
}

impl GoalVerdict {
    fn new(met: bool, detail: impl Into<String>) -> Self {
        Self { met, detail: detail.into() }
    }
}

fn golden(g: &super::task::GoldenRaster) -> Result<&SymbolicRaster, GoalVerdict> {
    g.raster.as_ref().ok_or_else(|| GoalVerdict::new(false, format!("golden raster `{}` not loaded", g.path)))
}

fn assertion_holds(s: &EnvState, a: &Assertion) -> (bool, String) {
    match a {
        Assertion::SettingEq { key, value } => match s.settings.get(key) {
            Some(v) if v == value => (true, format!("{key} = {v:?}")),
            Some(v) => (false, format!("{key} is {v:?}, expected {value:?}")),
            None => (false, format!("{key} is unset, expected {value:?}")),
        },
        Assertion::FileExists { path } => (s.vfs.has_file(path), format!("file {path} exists")),
        Assertion::FileAbsent { path } => (!s.vfs.has_file(path), format!("file {path} absent")),
        Assertion::FolderExists { path } => (s.vfs.folder(path).is_some(), format!("folder {path} exists")),
        Assertion::FolderAbsent { path } => (s.vfs.folder(path).is_none(), format!("folder {path} absent")),
    }
}

/// Judges the final state against the task's goal.
pub fn check_goal(final_state: &EnvState, spec: &TaskSpec) -> GoalVerdict {
    match &spec.goal {
        GoalChecker::PixelSim { golden_raster, region } => {
            let gold = match golden(golden_raster) {
                Ok(g) => g,
                Err(v) => return v,
            };
            match similarity(&render(final_state), gold, *region) {
                Ok(sim) => GoalVerdict::new(
                    sim >= spec.threshold,
                    format!("similarity {sim:.4} against threshold {:.4}", spec.threshold),
                ),
                Err(e) => GoalVerdict::new(false, e),
            }
        }
        GoalChecker::RegionEq { golden_raster, use_metadata_region, panel } => {
            let gold = match golden(golden_raster) {
                Ok(g) => g,
                Err(v) => return v,
            };
            let obs = observe(final_state);
            let region = match (use_metadata_region, panel) {
                (true, Some(name)) => match obs.find_panel(name) {
                    Some(p) => Some(p.bbox),
                    None => return GoalVerdict::new(false, format!("panel `{name}` is not on screen")),
                },
                _ => None,
            };
            match similarity(&obs.raster, gold, region) {
                Ok(sim) => {
                    let within = panel.as_deref().filter(|_| *use_metadata_region).unwrap_or("screen");
                    GoalVerdict::new(sim == 1.0, format!("{within}: {:.2}% of cells equal", sim * 100.0))
                }
                Err(e) => GoalVerdict::new(false, e),
            }
        }
        GoalChecker::Predicate { assertions } => {
            let failed: Vec<String> = assertions
                .iter()
                .map(|a| assertion_holds(final_state, a))
                .filter(|(ok, _)| !ok)
                .map(|(_, d)| d)
                .collect();
            if failed.is_empty() {
                GoalVerdict::new(true, format!("{} assertion(s) hold", assertions.len()))
            } else {
                GoalVerdict::new(false, format!("failed: {}", failed.join("; ")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::task::{Category, GoldenRaster, GoldenScript, GoldenStep};
    use crate::sim::{Cell, Scalar};

    fn raster() -> SymbolicRaster {
        SymbolicRaster::new(10, 10, 8, Cell::Fill(0))
    }

    fn spec(state: EnvState, goal: GoalChecker) -> TaskSpec {
        TaskSpec {
            id: "t".into(),
            category: Category::Widget,
            query: "q".into(),
            transcript: "v".into(),
            initial_state: state,
            goal,
            threshold: 0.95,
            step_cap: None,
            golden: GoldenScript {
                raw_plan: "1. a".into(),
                plan: "1. a".into(),
                steps: vec![GoldenStep { subtask: "a".into(), actions: "moveTo(0, 0)".into() }],
            },
        }
    }

    #[test]
    fn five_differing_cells_of_a_hundred() {
        let a = raster();
        let mut b = raster();
        for i in 0..5 {
            b.set(i, i, Cell::Glyph('x'));
        }
        assert_eq!(similarity(&a, &a, None).unwrap(), 1.0);
        assert_eq!(similarity(&a, &b, None).unwrap(), 0.95);
        assert_eq!(similarity(&a, &b, Some(Rect::new(40, 40, 40, 40))).unwrap(), 1.0);
        assert!(similarity(&a, &SymbolicRaster::new(9, 10, 8, Cell::Fill(0)), None).is_err());
    }

    #[test]
    fn golden_state_meets_every_checker_kind() {
        let s = EnvState::blank(80, 80);
        let gold = GoldenRaster::inline(render(&s));
        let kinds = [
            GoalChecker::PixelSim { golden_raster: gold.clone(), region: None },
            GoalChecker::RegionEq { golden_raster: gold, use_metadata_region: false, panel: None },
            GoalChecker::Predicate { assertions: vec![] },
        ];
        for g in kinds {
            assert!(check_goal(&s, &spec(s.clone(), g)).met);
        }
    }

    #[test]
    fn volume_predicate() {
        let mut s = EnvState::blank(80, 80);
        s.settings.insert("volume".into(), Scalar::Int(30));
        let goal = GoalChecker::Predicate {
            assertions: vec![Assertion::SettingEq { key: "volume".into(), value: Scalar::Int(30) }],
        };
        let t = spec(s.clone(), goal);
        assert!(check_goal(&s, &t).met);
        s.settings.insert("volume".into(), Scalar::Int(31));
        assert!(!check_goal(&s, &t).met);
    }

    #[test]
    fn threshold_one_rejects_a_single_difference() {
        let s = EnvState::blank(80, 80);
        let mut gold = render(&s);
        gold.set(0, 0, Cell::Glyph('x'));
        let mut t = spec(s.clone(), GoalChecker::PixelSim { golden_raster: GoldenRaster::inline(gold), region: None });
        assert!(check_goal(&s, &t).met);
        t.threshold = 1.0;
        assert!(!check_goal(&s, &t).met);
    }
}
