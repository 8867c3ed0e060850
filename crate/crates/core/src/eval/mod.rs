//! Task packs, goal checking, the episode loop and success-rate reports.
//!
//! A task is judged only by the state it ends in. Design tasks compare the
//! final raster with a golden one and pass above a similarity threshold
//! (0.95 unless the task sets its own). Widget and office tasks need exact
//! equality inside one on-screen panel. System-setting and file tasks
//! check assertions over the settings store and the file tree.

mod fixtures;
mod goal;
mod replay;
mod runner;
mod suite;
mod task;
mod trace;

pub use fixtures::{fixture_backend, fixture_rules, Fixture};
pub use goal::{check_goal, similarity, GoalVerdict};
pub use replay::{replay, HashMismatch, ReplayReport};
pub use runner::{run_episode, Ablation, RunConfig};
pub use suite::{
    render_table, run_suite, run_task, BackendSource, Counts, EnvSource, MetricsReport, SuiteConfig, SuiteRun,
};
pub use task::{
    load_golden_raster, Assertion, Category, GoalChecker, GoldenRaster, GoldenScript, GoldenStep, PackError,
    PackFactory, TaskPack, TaskSpec, DEFAULT_THRESHOLD,
};
pub use trace::{EpisodeTrace, Outcome, PlanRecord, StepRecord, TraceError, TraceHeader, TraceLine, TracedCall};
