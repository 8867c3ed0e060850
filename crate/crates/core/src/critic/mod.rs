//! Judging the last action.
//!
//! The critic compares the parsed screen before and after an action and
//! asks the model two questions: did the action do what it was meant to
//! ([`Critique::success`]), and is the current subtask now complete
//! ([`Critique::finished`])? The reply is one line:
//!
//! ```text
//! success=<true|false>; finished=<true|false>; <success note|->; <finish note|->
//! ```
//!
//! A note may be `-` only when its flag is true.

mod diff;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use diff::{diff, patch, DocDiff, ElementEntry, ElementKey, Field, FieldChange, PanelChange};

use crate::action::ActionScript;
use crate::gui::{serialize, UiDocument};
use crate::llm::{Backend, BackendError};
use crate::prompts::{self, PromptError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Critique {
    pub success: bool,
    pub success_note: String,
    pub finished: bool,
    pub finish_note: String,
}

impl Critique {
    /// Used before any action has run.
    pub fn first_step() -> Self {
        Self { success: true, success_note: String::new(), finished: false, finish_note: "no action taken yet".into() }
    }

    /// Stand-in when the critic is switched off and completion is decided
    /// by a step count.
    pub fn assumed(finished: bool) -> Self {
        let finish_note = if finished { String::new() } else { "critic disabled".into() };
        Self { success: true, success_note: String::new(), finished, finish_note }
    }

    /// The reply-grammar form.
    pub fn render(&self) -> String {
        let note = |n: &str| if n.is_empty() { "-".to_string() } else { n.to_string() };
        format!(
            "success={}; finished={}; {}; {}",
            self.success,
            self.finished,
            note(&self.success_note),
            note(&self.finish_note)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad critique reply: {0}")]
pub struct CritiqueFormatError(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CriticError {
    #[error("critique rejected after a retry: {0}")]
    Format(#[from] CritiqueFormatError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

fn flag(field: &str, name: &str) -> Result<bool, CritiqueFormatError> {
    match field.strip_prefix(name).and_then(|r| r.strip_prefix('=')) {
        Some("true") => Ok(true),
        Some("false") => Ok(false),
        _ => Err(CritiqueFormatError(format!("expected `{name}=true` or `{name}=false`, found {field:?}"))),
    }
}

fn note(field: &str, set: bool, name: &str) -> Result<String, CritiqueFormatError> {
    match (field, set) {
        ("-", true) => Ok(String::new()),
        ("" | "-", false) => Err(CritiqueFormatError(format!("{name} is false, so its note must explain why"))),
        ("", true) => Err(CritiqueFormatError(format!("{name} note is empty; write - instead"))),
        (text, _) => Ok(text.to_string()),
    }
}

/// Parses the four-field reply. Surrounding whitespace and a code fence
/// are tolerated; anything else is rejected.
pub fn parse_critique(reply: &str) -> Result<Critique, CritiqueFormatError> {
    let mut text = reply.trim();
    if let Some(rest) = text.strip_prefix("```") {
        let body = rest.split_once('\n').map(|(_, b)| b).unwrap_or("");
        text = body.trim_end().strip_suffix("```").unwrap_or(body).trim();
    }
    if text.contains('\n') {
        return Err(CritiqueFormatError("expected a single line".into()));
    }
    let fields: Vec<&str> = text.splitn(4, ';').map(str::trim).collect();
    let [s, f, sn, fnote] = fields[..] else {
        return Err(CritiqueFormatError(format!("expected four fields, found {}", fields.len())));
    };
    let success = flag(s, "success")?;
    let finished = flag(f, "finished")?;
    Ok(Critique {
        success,
        success_note: note(sn, success, "success")?,
        finished,
        finish_note: note(fnote, finished, "finished")?,
    })
}

/// Everything the critic looks at for one step.
#[derive(Debug, Clone, Copy)]
pub struct AssessInput<'a> {
    pub before: &'a UiDocument,
    pub after: &'a UiDocument,
    pub action: &'a ActionScript,
    pub subtask: &'a str,
    pub milestone: &'a str,
}

pub const NO_CHANGE_NOTE: &str = "Note: the parsed screen is identical before and after this action, although \
the action should have changed it. Unless the subtask needs no visible change, treat the action as failed.";

/// Builds the critic prompt. An empty diff after an action that should
/// change the screen adds [`NO_CHANGE_NOTE`].
pub fn assess_prompt(input: &AssessInput<'_>) -> Result<String, PromptError> {
    let d = diff(input.before, input.after);
    let changes = if d.is_empty() { "(no changes)\n".to_string() } else { d.render() };
    let expects_change = input.action.iter().any(|a| a.changes_screen());
    let note = if d.is_empty() && expects_change { NO_CHANGE_NOTE } else { "" };
    let action = input.action.render();
    let action = if action.is_empty() { "(none)".to_string() } else { action };
    prompts::render(
        prompts::CRITIC_ASSESS,
        &[
            ("milestone", input.milestone),
            ("subtask", input.subtask),
            ("action", &action),
            ("diff", changes.trim_end()),
            ("note", note),
            ("screen", serialize(input.after).trim_end()),
        ],
    )
}

/// Asks the model for a critique, reprompting once on a malformed reply.
pub fn assess(input: &AssessInput<'_>, llm: &dyn Backend) -> Result<Critique, CriticError> {
    let prompt = assess_prompt(input)?;
    let reply = llm.complete(&prompt)?;
    match parse_critique(&reply) {
        Ok(c) => Ok(c),
        Err(first) => {
            let retry = prompts::format_retry(&prompt, &first.to_string(), &reply);
            Ok(parse_critique(&llm.complete(&retry)?)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::parse;
    use crate::gui::{Element, Panel, Role};
    use crate::llm::{RuleSet, ScriptRule, ScriptedBackend};
    use crate::sim::Rect;

    fn doc(state: &str) -> UiDocument {
        let mut p = Panel::new("Settings", Rect::new(0, 0, 160, 80));
        p.elements.push(Element::new(Role::Checkbox, "Mute", Rect::new(8, 16, 48, 8)).with_state(state));
        UiDocument { panels: vec![p] }
    }

    fn backend(rules: Vec<ScriptRule>) -> ScriptedBackend {
        ScriptedBackend::new(RuleSet::new("critic", rules)).unwrap()
    }

    #[test]
    fn parses_grammar() {
        let c = parse_critique("success=true; finished=true; -; -").unwrap();
        assert_eq!(c, Critique::assumed(true));
        let c = parse_critique("success=false; finished=false; nothing happened; mute still off; really").unwrap();
        assert_eq!(c.success_note, "nothing happened");
        assert_eq!(c.finish_note, "mute still off; really");
        assert_eq!(parse_critique(&c.render()).unwrap(), c);
        for bad in [
            "",
            "success=true",
            "success=yes; finished=true; -; -",
            "success=false; finished=true; -; -",
            "finished=true; success=true; -; -",
            "success=true; finished=true; ; -",
            "success=true; finished=true; -; -\nmore",
        ] {
            assert!(parse_critique(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn scripted_reply_is_returned() {
        let before = doc("unchecked");
        let after = doc("checked");
        let action = parse("click(8, 16)").unwrap();
        let input = AssessInput { before: &before, after: &after, action: &action, subtask: "mute", milestone: "m" };
        let b = backend(vec![ScriptRule::contains(prompts::CRITIC_ASSESS, "success=true; finished=true; -; -")]);
        assert_eq!(assess(&input, &b).unwrap(), Critique::assumed(true));
        assert!(!assess_prompt(&input).unwrap().contains(NO_CHANGE_NOTE));
    }

    #[test]
    fn empty_diff_after_click_is_flagged() {
        let d = doc("unchecked");
        let action = parse("click(8, 16)").unwrap();
        let input = AssessInput { before: &d, after: &d, action: &action, subtask: "mute", milestone: "m" };
        let b = backend(vec![
            ScriptRule::contains(NO_CHANGE_NOTE, "success=false; finished=false; the click had no effect; mute is off"),
            ScriptRule::contains(prompts::CRITIC_ASSESS, "success=true; finished=true; -; -"),
        ]);
        let c = assess(&input, &b).unwrap();
        assert!(!c.success);
        assert!(!c.success_note.is_empty());
        let hover = parse("moveTo(8, 16)").unwrap();
        let input = AssessInput { action: &hover, ..input };
        assert!(!assess_prompt(&input).unwrap().contains(NO_CHANGE_NOTE));
    }

    #[test]
    fn malformed_twice_is_format_error() {
        let d = doc("unchecked");
        let action = ActionScript::default();
        let input = AssessInput { before: &d, after: &d, action: &action, subtask: "s", milestone: "m" };
        let b = backend(vec![ScriptRule::contains("", "looks good to me")]);
        assert!(matches!(assess(&input, &b), Err(CriticError::Format(_))));
    }
}
