//! Runs one bundled task end to end with a scripted backend and prints the
//! trace as JSON lines.
//!
//!     cargo run --example golden_episode -- filemani/archive_report lesioned

use std::sync::Arc;

use ace_core::cli::BUNDLED_PACK;
use ace_core::env::LocalEnv;
use ace_core::eval::{fixture_backend, run_episode, Fixture, RunConfig, TaskPack};

fn main() {
    let mut args = std::env::args().skip(1);
    let id = args.next().unwrap_or_else(|| "widget/volume_set".into());
    let fixture = match args.next().as_deref() {
        Some("lesioned") => Fixture::Lesioned,
        _ => Fixture::Golden,
    };
    let pack = TaskPack::load(BUNDLED_PACK).expect("bundled pack loads");
    let spec = pack.task(&id).unwrap_or_else(|| panic!("no task {id}"));
    let backend = fixture_backend(spec, fixture).expect("fixture compiles");
    let mut env = LocalEnv::new(Arc::new(pack.factory()));
    let trace = run_episode(spec, &backend, &mut env, &RunConfig::default());
    print!("{}", trace.to_jsonl());
    let o = &trace.outcome;
    eprintln!("{id}: success={} reason={} steps={}", o.success, o.reason, o.steps);
}
