//! Runs the bundled pack under every configuration with the lesioned
//! fixture and prints the success-rate table.

use ace_core::cli::BUNDLED_PACK;
use ace_core::eval::{render_table, run_suite, Ablation, BackendSource, Fixture, RunConfig, SuiteConfig, TaskPack};

fn main() {
    let pack = TaskPack::load(BUNDLED_PACK).expect("bundled pack loads");
    let backend = BackendSource::Fixture(Fixture::Lesioned);
    let reports: Vec<_> = Ablation::ALL
        .iter()
        .map(|&ablation| {
            let config =
                SuiteConfig { run: RunConfig { ablation, ..RunConfig::default() }, jobs: 4, ..SuiteConfig::default() };
            run_suite(&pack, &backend, &config).report
        })
        .collect();
    print!("{}", render_table(&reports));
}
