//! Builds a small desktop by hand, clicks a checkbox and prints the screen
//! before and after.

use ace_core::action::parse;
use ace_core::sim::{execute, render, EnvState, Rect, Widget, WidgetKind, Window};

fn main() {
    let mut state = EnvState::blank(320, 96);
    state.windows.push(Window::new("prefs", "Preferences", Rect::new(8, 8, 304, 80)).with_children(vec![
        Widget::new("mute", WidgetKind::Checkbox, Rect::new(16, 32, 96, 8)).with_text("Mute"),
        Widget::new("name", WidgetKind::TextField, Rect::new(16, 48, 160, 8)),
    ]));
    println!("before ({}):\n{}", state.hash(), render(&state).to_ascii());

    let script = parse("click(16, 32)\nclick(24, 48)\nwrite('desk')\npress('enter')").unwrap();
    let (after, report) = execute(&state, &script).expect("script runs");
    for d in &report.dispatches {
        println!("action {} -> {:?} {:?}", d.action, d.route, d.target);
    }
    println!("after ({}):\n{}", after.hash(), render(&after).to_ascii());
}
