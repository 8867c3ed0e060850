//! Observes a bundled task's initial screen and prints the parsed UI
//! document, optionally with text-recognition noise.
//!
//!     cargo run --example parse_gui -- office/sheet_total 0.1

use ace_core::cli::BUNDLED_PACK;
use ace_core::eval::TaskPack;
use ace_core::gui::{parse_gui, serialize, IconTemplate, ParseConfig};
use ace_core::sim::observe;

fn main() {
    let mut args = std::env::args().skip(1);
    let id = args.next().unwrap_or_else(|| "widget/volume_set".into());
    let noise: f64 = args.next().map_or(0.0, |s| s.parse().expect("noise is a number"));
    let pack = TaskPack::load(BUNDLED_PACK).expect("bundled pack loads");
    let spec = pack.task(&id).unwrap_or_else(|| panic!("no task {id}"));
    let obs = observe(&spec.initial_state);
    println!("{}", obs.raster.to_ascii());
    let templates = IconTemplate::from_table(&spec.initial_state.icons);
    let config = ParseConfig { text_noise: noise, ..ParseConfig::default() };
    print!("{}", serialize(&parse_gui(&obs, &templates, &config)));
}
