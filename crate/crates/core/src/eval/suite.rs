use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::fixtures::{fixture_backend, Fixture};
use super::runner::{run_episode, RunConfig};
use super::task::{Category, TaskPack, TaskSpec};
use super::trace::{EpisodeTrace, Outcome, PlanRecord, TraceHeader};
use crate::bridge::RemoteEnv;
use crate::env::{EnvError, Environment, LocalEnv};
use crate::llm::{Backend, BackendError, HttpBackend, HttpConfig, RuleSet, ScriptedBackend};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub successes: usize,
    pub total: usize,
}

impl Counts {
    /// Success rate in percent; zero when empty.
    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.successes as f64 / self.total as f64
        }
    }

    fn add(&mut self, success: bool) {
        self.total += 1;
        self.successes += usize::from(success);
    }
}

/// Success rates of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub configuration: String,
    pub categories: BTreeMap<Category, Counts>,
    pub overall: Counts,
}

impl MetricsReport {
    pub fn new(configuration: &str) -> Self {
        Self {
            configuration: configuration.to_string(),
            categories: Category::ALL.iter().map(|c| (*c, Counts::default())).collect(),
            overall: Counts::default(),
        }
    }

    pub fn record(&mut self, category: Category, success: bool) {
        self.categories.entry(category).or_default().add(success);
        self.overall.add(success);
    }

    pub fn from_traces<'a>(configuration: &str, traces: impl IntoIterator<Item = &'a EpisodeTrace>) -> Self {
        let mut r = Self::new(configuration);
        for t in traces {
            r.record(t.header.category, t.outcome.success);
        }
        r
    }

    pub fn failures(&self) -> usize {
        self.overall.total - self.overall.successes
    }
}

const FIRST_COLUMN: &str = "Configuration";

/// Plain-text table: one row per report, a column per category and an
/// overall column, rates in percent with one decimal.
pub fn render_table(reports: &[MetricsReport]) -> String {
    let mut header = vec![FIRST_COLUMN.to_string()];
    header.extend(Category::ALL.iter().map(|c| c.label().to_string()));
    header.push("Overall".into());
    let mut rows = vec![header];
    for r in reports {
        let mut row = vec![r.configuration.clone()];
        for c in Category::ALL {
            let counts = r.categories.get(&c).copied().unwrap_or_default();
            row.push(if counts.total == 0 { "-".into() } else { format!("{:.1}", counts.rate()) });
        }
        row.push(format!("{:.1}", r.overall.rate()));
        rows.push(row);
    }
    let widths: Vec<usize> =
        (0..rows[0].len()).map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (n, row) in rows.iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", cells.join(" | ").trim_end());
        if n == 0 {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            let _ = writeln!(out, "{}", rule.join("-+-"));
        }
    }
    out
}

/// Where each task's model comes from.
#[derive(Debug, Clone)]
pub enum BackendSource {
    Fixture(Fixture),
    Rules(RuleSet),
    Http(HttpConfig),
}

impl BackendSource {
    pub fn make(&self, spec: &TaskSpec) -> Result<Box<dyn Backend>, BackendError> {
        Ok(match self {
            BackendSource::Fixture(f) => Box::new(fixture_backend(spec, *f)?),
            BackendSource::Rules(r) => Box::new(ScriptedBackend::new(r.clone())?),
            BackendSource::Http(c) => Box::new(HttpBackend::new(c.clone())),
        })
    }
}

/// Where each task's environment runs.
#[derive(Debug, Clone, Default)]
pub enum EnvSource {
    #[default]
    Local,
    /// A bridge server at this address; one connection per task.
    Remote(String),
}

impl EnvSource {
    pub fn make(&self, pack: &TaskPack) -> Result<Box<dyn Environment>, EnvError> {
        Ok(match self {
            EnvSource::Local => Box::new(LocalEnv::new(Arc::new(pack.factory()))),
            EnvSource::Remote(addr) => Box::new(RemoteEnv::connect(addr.as_str())?),
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteConfig {
    pub run: RunConfig,
    pub env: EnvSource,
    /// Worker threads; zero or one runs tasks in order on the caller's
    /// thread.
    pub jobs: usize,
}

#[derive(Debug, Clone)]
pub struct SuiteRun {
    pub report: MetricsReport,
    /// In pack order.
    pub traces: Vec<EpisodeTrace>,
}

fn failed_trace(spec: &TaskSpec, config: &RunConfig, backend: &str, reason: &str, detail: String) -> EpisodeTrace {
    EpisodeTrace {
        header: TraceHeader {
            task_id: spec.id.clone(),
            category: spec.category,
            configuration: config.ablation.name().into(),
            backend: backend.into(),
            seed: config.seed,
            started_at_unix_ms: 0,
            initial_state_hash: String::new(),
        },
        plan: PlanRecord { plan: None, calls: Vec::new(), error: None },
        steps: Vec::new(),
        outcome: Outcome { success: false, reason: reason.into(), detail, steps: 0, final_state_hash: None },
    }
}

/// Runs one task with its own backend and environment. Never panics and
/// never fails: problems become a failed trace.
pub fn run_task(pack: &TaskPack, spec: &TaskSpec, backends: &BackendSource, config: &SuiteConfig) -> EpisodeTrace {
    let backend = match backends.make(spec) {
        Ok(b) => b,
        Err(e) => return failed_trace(spec, &config.run, "unavailable", "backend_error", e.to_string()),
    };
    let mut env = match config.env.make(pack) {
        Ok(e) => e,
        Err(e) => return failed_trace(spec, &config.run, backend.name(), "env_error", e.to_string()),
    };
    let run = catch_unwind(AssertUnwindSafe(|| run_episode(spec, backend.as_ref(), env.as_mut(), &config.run)));
    run.unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| p.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panic".into());
        failed_trace(spec, &config.run, backend.name(), "panic", msg)
    })
}

/// Runs every task in the pack under one configuration.
pub fn run_suite(pack: &TaskPack, backends: &BackendSource, config: &SuiteConfig) -> SuiteRun {
    let n = pack.tasks.len();
    let traces: Vec<EpisodeTrace> = if config.jobs <= 1 {
        pack.tasks.iter().map(|t| run_task(pack, t, backends, config)).collect()
    } else {
        let slots: Mutex<Vec<Option<EpisodeTrace>>> = Mutex::new(vec![None; n]);
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..config.jobs.min(n) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= n {
                        break;
                    }
                    let t = run_task(pack, &pack.tasks[i], backends, config);
                    slots.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(t);
                });
            }
        });
        slots.into_inner().unwrap_or_else(|e| e.into_inner()).into_iter().flatten().collect()
    };
    let report = MetricsReport::from_traces(config.run.ablation.name(), &traces);
    SuiteRun { report, traces }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_pack_has_zero_counts() {
        let run = run_suite(&TaskPack::default(), &BackendSource::Fixture(Fixture::Golden), &SuiteConfig::default());
        assert_eq!(run.report.overall, Counts::default());
        assert!(run.report.categories.values().all(|c| c.total == 0));
        let table = render_table(&[run.report]);
        let head: Vec<&str> = table.lines().next().unwrap().split('|').map(str::trim).collect();
        assert_eq!(head, ["Configuration", "Design", "Office", "Widget", "Sys. Set.", "File Mani.", "Overall"]);
    }

    #[test]
    fn rates() {
        let mut r = MetricsReport::new("full");
        r.record(Category::Design, true);
        r.record(Category::Design, false);
        r.record(Category::Office, true);
        assert_eq!(r.categories[&Category::Design].rate(), 50.0);
        assert_eq!(r.overall, Counts { successes: 2, total: 3 });
        assert!(render_table(&[r]).contains("66.7"));
    }
}
