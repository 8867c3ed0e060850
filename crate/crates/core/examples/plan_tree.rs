//! Parses an outline into a plan tree and walks its leaves.

use ace_core::planner::{next_leaf, parent, parse_outline, PlanCursor};

const OUTLINE: &str = "\
1. Open the display settings
  a. Click the Display button
2. Change the scale
  a. Open the scale menu
  b. Choose 150%
";

fn main() {
    let tree = parse_outline(OUTLINE).expect("outline parses");
    print!("{}", tree.render());
    let mut cursor = PlanCursor::default();
    while !cursor.done {
        println!("[{}] {}", parent(&tree, cursor).unwrap(), tree.subtask(cursor).unwrap());
        cursor = next_leaf(&tree, cursor).unwrap();
    }
    println!("{} leaves", tree.leaf_count());
}
