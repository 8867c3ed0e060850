use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{is_known_key, Action, ActionScript};

/// A problem found by [`validate`]. Violations are data, not errors: the
/// caller decides which ones are fatal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    OutOfBounds {
        action: usize,
        x: u32,
        y: u32,
    },
    UnknownKey {
        action: usize,
        key: String,
    },
    /// A `keyDown` without a later `keyUp` (or the reverse).
    UnbalancedKey {
        key: String,
    },
    /// A `mouseDown` without a later `mouseUp` (or the reverse).
    UnbalancedMouse,
}

/// Checks a script against a `screen_w` x `screen_h` pixel screen.
/// Valid coordinates satisfy `x < screen_w` and `y < screen_h`.
pub fn validate(script: &ActionScript, screen_w: u32, screen_h: u32) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut held: BTreeMap<&str, i64> = BTreeMap::new();
    let mut mouse = 0i64;
    let mut stray_mouse_up = false;
    let mut stray_key_up: Vec<&str> = Vec::new();

    for (i, action) in script.iter().enumerate() {
        if let Some((x, y)) = action.point() {
            if x >= screen_w || y >= screen_h {
                out.push(Violation::OutOfBounds { action: i, x, y });
            }
        }
        for key in action.keys() {
            if !is_known_key(key) {
                out.push(Violation::UnknownKey { action: i, key: key.to_string() });
            }
        }
        match action {
            Action::KeyDown { key } => *held.entry(key).or_default() += 1,
            Action::KeyUp { key } => {
                let n = held.entry(key).or_default();
                if *n == 0 {
                    stray_key_up.push(key);
                } else {
                    *n -= 1;
                }
            }
            Action::MouseDown => mouse += 1,
            Action::MouseUp => {
                if mouse == 0 {
                    stray_mouse_up = true;
                } else {
                    mouse -= 1;
                }
            }
            _ => {}
        }
    }

    let mut unbalanced: Vec<&str> = held.iter().filter(|(_, n)| **n > 0).map(|(k, _)| *k).collect();
    unbalanced.extend(stray_key_up);
    unbalanced.sort_unstable();
    unbalanced.dedup();
    out.extend(unbalanced.into_iter().map(|k| Violation::UnbalancedKey { key: k.to_string() }));
    if mouse > 0 || stray_mouse_up {
        out.push(Violation::UnbalancedMouse);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::parse;

    fn check(text: &str, w: u32, h: u32) -> Vec<Violation> {
        validate(&parse(text).unwrap(), w, h)
    }

    #[test]
    fn out_of_bounds() {
        assert_eq!(check("click(5000, 10)", 1920, 1080), vec![Violation::OutOfBounds { action: 0, x: 5000, y: 10 }]);
        assert_eq!(check("moveTo(0, 0)", 1, 1), vec![]);
        assert_eq!(check("moveTo(1, 0)", 1, 1), vec![Violation::OutOfBounds { action: 0, x: 1, y: 0 }]);
        assert_eq!(check("dragTo(1919, 1079)", 1920, 1080), vec![]);
    }

    #[test]
    fn lone_key_down_is_flagged() {
        assert_eq!(check("keyDown('shift')", 10, 10), vec![Violation::UnbalancedKey { key: "shift".into() }]);
        assert_eq!(check("keyDown('shift'); press('a'); keyUp('shift')", 10, 10), vec![]);
        assert_eq!(check("keyUp('alt')", 10, 10), vec![Violation::UnbalancedKey { key: "alt".into() }]);
    }

    #[test]
    fn mouse_balance() {
        assert_eq!(check("mouseDown(); mouseUp()", 10, 10), vec![]);
        assert_eq!(check("mouseDown()", 10, 10), vec![Violation::UnbalancedMouse]);
        assert_eq!(check("mouseUp(); mouseDown()", 10, 10), vec![Violation::UnbalancedMouse]);
    }

    #[test]
    fn unknown_keys() {
        assert_eq!(
            check("hotkey('ctrl', 'Banana')", 10, 10),
            vec![Violation::UnknownKey { action: 0, key: "Banana".into() }]
        );
    }
}
