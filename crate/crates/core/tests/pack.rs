use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ace_core::eval::{
    check_goal, render_table, run_suite, Ablation, BackendSource, Category, Fixture, RunConfig, SuiteConfig, TaskPack,
    TaskSpec,
};
use ace_core::sim::{execute, render, RasterRepr};

fn pack_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("packs/bundled")
}

/// Task files as written, with pack icons merged but goldens unresolved.
fn raw_specs() -> Vec<(PathBuf, TaskSpec)> {
    let root = pack_dir();
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(root.join("pack.json")).unwrap()).unwrap();
    let icons: BTreeMap<String, Vec<String>> = serde_json::from_value(manifest["icons"].clone()).unwrap();
    let mut out = Vec::new();
    let mut dirs = vec![root.join("tasks")];
    while let Some(d) = dirs.pop() {
        for e in std::fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                dirs.push(p);
            } else {
                let mut spec: TaskSpec = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
                for (k, v) in &icons {
                    spec.initial_state.icons.entry(k.clone()).or_insert_with(|| v.clone());
                }
                out.push((p, spec));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn golden_final(spec: &TaskSpec) -> ace_core::sim::EnvState {
    let script = spec.golden.concatenated().unwrap();
    execute(&spec.initial_state, &script).unwrap().0
}

/// Set `ACE_REGEN_GOLDENS=1` to rewrite the golden rasters from each
/// task's golden script. Otherwise checks they are up to date.
#[test]
fn golden_rasters_match_golden_scripts() {
    let regen = std::env::var("ACE_REGEN_GOLDENS").is_ok_and(|v| v == "1");
    for (path, spec) in raw_specs() {
        let Some(g) = spec.goal.golden() else { continue };
        let expected = RasterRepr::from(render(&golden_final(&spec)));
        let file = pack_dir().join(&g.path);
        if regen {
            let text = serde_json::to_string_pretty(&expected).unwrap();
            std::fs::write(&file, text + "\n").unwrap();
        } else {
            let on_disk = ace_core::eval::load_golden_raster(&file).unwrap();
            assert_eq!(RasterRepr::from(on_disk).rows, expected.rows, "{} is stale ({})", g.path, path.display());
        }
    }
}

#[test]
fn pack_shape() {
    let pack = TaskPack::load(pack_dir()).unwrap();
    assert!(pack.tasks.len() >= 10);
    for c in Category::ALL {
        assert!(pack.tasks.iter().filter(|t| t.category == c).count() >= 2, "{c}");
    }
}

#[test]
fn golden_scripts_reach_goals_and_initial_states_do_not() {
    let pack = TaskPack::load(pack_dir()).unwrap();
    for spec in &pack.tasks {
        assert!(check_goal(&golden_final(spec), spec).met, "{}", spec.id);
        let v = check_goal(&spec.initial_state, spec);
        assert!(!v.met, "{} is solved before any action: {}", spec.id, v.detail);
    }
}

#[test]
fn fixtures_per_configuration() {
    let pack = TaskPack::load(pack_dir()).unwrap();
    let mut rows = Vec::new();
    for (fixture, ablation) in [
        (Fixture::Golden, Ablation::Full),
        (Fixture::Lesioned, Ablation::Full),
        (Fixture::Lesioned, Ablation::NoCritic),
        (Fixture::Lesioned, Ablation::NoPlanner),
        (Fixture::Lesioned, Ablation::NoTranscript),
    ] {
        let config = SuiteConfig { run: RunConfig { ablation, ..RunConfig::default() }, ..SuiteConfig::default() };
        let run = run_suite(&pack, &BackendSource::Fixture(fixture), &config);
        for t in &run.traces {
            let expect = matches!(ablation, Ablation::Full);
            assert_eq!(
                t.outcome.success,
                expect,
                "{} {} {}: {} {}",
                fixture.name(),
                ablation,
                t.header.task_id,
                t.outcome.reason,
                t.outcome.detail
            );
        }
        rows.push(run.report);
    }
    println!("{}", render_table(&rows));
}
