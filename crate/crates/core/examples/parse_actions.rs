//! Parses an action script, validates it and prints the canonical form.
//!
//!     cargo run --example parse_actions -- "moveTo(10,20); keyDown('ctrl'); press('c'); keyUp('ctrl')"

use ace_core::action::{parse, validate};

fn main() {
    let text =
        std::env::args().nth(1).unwrap_or_else(|| "click(200,220)\nwrite('hello')\nhotkey('ctrl','s')".to_string());
    let script = match parse(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("parse error: {e}");
            std::process::exit(1);
        }
    };
    for (i, action) in script.iter().enumerate() {
        println!("{i}: {:<12} point={:?} keys={:?}", action.name(), action.point(), action.keys());
    }
    println!("canonical:\n{}", script.render());
    for v in validate(&script, 640, 480) {
        println!("warning: {v:?}");
    }
}
