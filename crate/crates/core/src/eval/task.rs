use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::{parse, ActionScript};
use crate::env::EnvFactory;
use crate::planner::{parse_outline, PlanTree};
use crate::sim::{validate_state, EnvState, RasterRepr, Rect, Scalar, Size, SymbolicRaster};

pub const DEFAULT_THRESHOLD: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Design,
    Office,
    Widget,
    SysSet,
    FileMani,
}

impl Category {
    pub const ALL: [Category; 5] =
        [Category::Design, Category::Office, Category::Widget, Category::SysSet, Category::FileMani];

    /// Column heading in reports.
    pub fn label(&self) -> &'static str {
        match self {
            Category::Design => "Design",
            Category::Office => "Office",
            Category::Widget => "Widget",
            Category::SysSet => "Sys. Set.",
            Category::FileMani => "File Mani.",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A golden raster referenced by path inside a pack. The raster itself is
/// filled in when the pack loads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub struct GoldenRaster {
    pub path: String,
    pub raster: Option<SymbolicRaster>,
}

impl GoldenRaster {
    pub fn inline(raster: SymbolicRaster) -> Self {
        Self { path: String::new(), raster: Some(raster) }
    }
}

impl From<String> for GoldenRaster {
    fn from(path: String) -> Self {
        Self { path, raster: None }
    }
}

impl From<GoldenRaster> for String {
    fn from(g: GoldenRaster) -> Self {
        g.path
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Assertion {
    SettingEq { key: String, value: Scalar },
    FileExists { path: String },
    FileAbsent { path: String },
    FolderExists { path: String },
    FolderAbsent { path: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GoalChecker {
    /// Fraction of equal cells against a golden raster, optionally within
    /// a pixel region.
    PixelSim {
        golden_raster: GoldenRaster,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        region: Option<Rect>,
    },
    /// Exact equality within the bounds of a named panel in the final
    /// observation's metadata, or the whole screen.
    RegionEq {
        golden_raster: GoldenRaster,
        #[serde(default = "yes")]
        use_metadata_region: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        panel: Option<String>,
    },
    Predicate {
        assertions: Vec<Assertion>,
    },
}

fn yes() -> bool {
    true
}

impl GoalChecker {
    pub fn golden(&self) -> Option<&GoldenRaster> {
        match self {
            GoalChecker::PixelSim { golden_raster, .. } | GoalChecker::RegionEq { golden_raster, .. } => {
                Some(golden_raster)
            }
            GoalChecker::Predicate { .. } => None,
        }
    }

    fn golden_mut(&mut self) -> Option<&mut GoldenRaster> {
        match self {
            GoalChecker::PixelSim { golden_raster, .. } | GoalChecker::RegionEq { golden_raster, .. } => {
                Some(golden_raster)
            }
            GoalChecker::Predicate { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenStep {
    pub subtask: String,
    pub actions: String,
}

/// The reference solution a task ships with. Scripted fixtures are
/// generated from it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenScript {
    pub raw_plan: String,
    pub plan: String,
    pub steps: Vec<GoldenStep>,
}

impl GoldenScript {
    pub fn plan_tree(&self) -> Result<PlanTree, String> {
        parse_outline(&self.plan).map_err(|e| e.to_string())
    }

    pub fn scripts(&self) -> Result<Vec<ActionScript>, String> {
        self.steps.iter().map(|s| parse(&s.actions).map_err(|e| format!("{}: {e}", s.subtask))).collect()
    }

    /// Every golden action in order, as one script.
    pub fn concatenated(&self) -> Result<ActionScript, String> {
        let mut all = ActionScript::default();
        for s in self.scripts()? {
            all.actions.extend(s.actions);
        }
        Ok(all)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub id: String,
    pub category: Category,
    pub query: String,
    pub transcript: String,
    pub initial_state: EnvState,
    pub goal: GoalChecker,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_cap: Option<usize>,
    pub golden: GoldenScript,
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

#[derive(Debug, Error)]
pub enum PackError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: at `{at}`: {message}")]
    Schema { path: PathBuf, at: String, message: String },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

impl TaskSpec {
    /// Checks everything that can be checked without running the task.
    pub fn validate(&self) -> Result<(), String> {
        if self.id.trim().is_empty() {
            return Err("empty id".into());
        }
        if self.query.trim().is_empty() || self.query.contains('\n') {
            return Err("query must be one non-empty line".into());
        }
        if self.transcript.trim().is_empty() {
            return Err("empty transcript".into());
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(format!("threshold {} is outside [0, 1]", self.threshold));
        }
        validate_state(&self.initial_state).map_err(|e| format!("initial_state: {e}"))?;
        parse_outline(&self.golden.raw_plan).map_err(|e| format!("golden.raw_plan: {e}"))?;
        let plan = self.golden.plan_tree().map_err(|e| format!("golden.plan: {e}"))?;
        self.golden.scripts()?;
        let leaves: Vec<&str> = plan.leaves().into_iter().map(|(_, s)| s).collect();
        let steps: Vec<&str> = self.golden.steps.iter().map(|s| s.subtask.as_str()).collect();
        if leaves != steps {
            return Err("golden steps must follow the golden plan's subtasks one to one".into());
        }
        if steps.iter().collect::<BTreeSet<_>>().len() != steps.len() {
            return Err("golden subtasks must be unique".into());
        }
        if let Some(g) = self.goal.golden() {
            if let Some(r) = &g.raster {
                let s = &self.initial_state;
                if r.width * r.cell_px != s.screen.w || r.height * r.cell_px != s.screen.h {
                    return Err(format!("golden raster `{}` does not match the screen size", g.path));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct PackManifest {
    name: String,
    #[serde(default)]
    icons: BTreeMap<String, Vec<String>>,
}

/// A directory of tasks:
///
/// ```text
/// pack.json            {"name": ..., "icons": {...}}
/// tasks/<cat>/<x>.json one TaskSpec each
/// goldens/<x>.json     golden rasters referenced by tasks
/// ```
///
/// Pack-level icons are merged into every task's initial state.
#[derive(Debug, Clone, Default)]
pub struct TaskPack {
    pub name: String,
    pub root: PathBuf,
    pub tasks: Vec<TaskSpec>,
}

fn read(path: &Path) -> Result<String, PackError> {
    std::fs::read_to_string(path).map_err(|source| PackError::Io { path: path.to_path_buf(), source })
}

fn from_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, PackError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| PackError::Schema {
        path: path.to_path_buf(),
        at: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

fn json_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), PackError> {
    let io = |source| PackError::Io { path: dir.to_path_buf(), source };
    let mut entries: Vec<PathBuf> =
        std::fs::read_dir(dir).map_err(io)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>().map_err(io)?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            json_files(&p, out)?;
        } else if p.extension().is_some_and(|e| e == "json") {
            out.push(p);
        }
    }
    Ok(())
}

pub fn load_golden_raster(path: &Path) -> Result<SymbolicRaster, PackError> {
    let repr: RasterRepr = from_json(path, &read(path)?)?;
    SymbolicRaster::try_from(repr).map_err(|message| PackError::Invalid { path: path.to_path_buf(), message })
}

impl TaskPack {
    pub fn new(name: &str, tasks: Vec<TaskSpec>) -> Self {
        Self { name: name.to_string(), root: PathBuf::new(), tasks }
    }

    pub fn load(root: impl AsRef<Path>) -> Result<Self, PackError> {
        let root = root.as_ref();
        let manifest_path = root.join("pack.json");
        let manifest: PackManifest = from_json(&manifest_path, &read(&manifest_path)?)?;
        let mut files = Vec::new();
        let tasks_dir = root.join("tasks");
        if tasks_dir.is_dir() {
            json_files(&tasks_dir, &mut files)?;
        }
        let mut tasks = Vec::with_capacity(files.len());
        let mut ids = BTreeSet::new();
        for path in files {
            let mut spec: TaskSpec = from_json(&path, &read(&path)?)?;
            for (k, v) in &manifest.icons {
                spec.initial_state.icons.entry(k.clone()).or_insert_with(|| v.clone());
            }
            if let Some(g) = spec.goal.golden_mut() {
                g.raster = Some(load_golden_raster(&root.join(&g.path))?);
            }
            let invalid = |message| PackError::Invalid { path: path.clone(), message };
            spec.validate().map_err(invalid)?;
            if !ids.insert(spec.id.clone()) {
                return Err(invalid(format!("duplicate task id `{}`", spec.id)));
            }
            tasks.push(spec);
        }
        Ok(Self { name: manifest.name, root: root.to_path_buf(), tasks })
    }

    pub fn task(&self, id: &str) -> Option<&TaskSpec> {
        self.tasks.iter().find(|t| t.id == id)
    }

    /// An environment factory over the pack's initial states.
    pub fn factory(&self) -> PackFactory {
        PackFactory {
            states: self.tasks.iter().map(|t| (t.id.clone(), t.initial_state.clone())).collect(),
            screen: self.tasks.first().map_or(Size { w: 0, h: 0 }, |t| t.initial_state.screen),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PackFactory {
    states: BTreeMap<String, EnvState>,
    screen: Size,
}

impl EnvFactory for PackFactory {
    fn create(&self, task_id: &str) -> Option<EnvState> {
        self.states.get(task_id).cloned()
    }

    fn screen(&self) -> Size {
        self.screen
    }
}
