//! Parses the screen before and after a golden step, prints the diff the
//! critic sees and the prompt it would send.

use ace_core::cli::BUNDLED_PACK;
use ace_core::critic::{assess_prompt, diff, patch, AssessInput};
use ace_core::eval::TaskPack;
use ace_core::gui::{parse_gui, IconTemplate, ParseConfig};
use ace_core::sim::{execute, observe};

fn main() {
    let pack = TaskPack::load(BUNDLED_PACK).expect("bundled pack loads");
    let spec = pack.task("sysset/dark_mode").expect("task exists");
    let step = &spec.golden.steps[0];
    let script = spec.golden.scripts().unwrap().remove(0);
    let (after_state, _) = execute(&spec.initial_state, &script).unwrap();

    let templates = IconTemplate::from_table(&spec.initial_state.icons);
    let config = ParseConfig::default();
    let before = parse_gui(&observe(&spec.initial_state), &templates, &config);
    let after = parse_gui(&observe(&after_state), &templates, &config);

    let d = diff(&before, &after);
    print!("{}", d.render());
    assert_eq!(patch(&before, &d), after);

    let input = AssessInput { before: &before, after: &after, action: &script, subtask: &step.subtask, milestone: "" };
    println!("---\n{}", assess_prompt(&input).unwrap());
}
