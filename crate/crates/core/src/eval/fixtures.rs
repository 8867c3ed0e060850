//! Scripted backends generated from a task's golden script.
//!
//! The golden fixture answers every planner, critic and actor prompt the
//! way a perfect model would. The lesioned fixture makes one deliberate
//! mistake per task (the first click becomes a bare `moveTo`) and only
//! recovers when the critic reports the failure, so the critic's value
//! shows up in success rates. Its ablated configurations act on a single
//! coarse subtask and stop after the first golden step.

use regex::escape;

use super::task::TaskSpec;
use crate::action::{Action, ActionScript};
use crate::llm::{BackendError, RuleSet, ScriptRule, ScriptedBackend};
use crate::prompts;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    Golden,
    Lesioned,
}

impl Fixture {
    pub fn name(&self) -> &'static str {
        match self {
            Fixture::Golden => "golden",
            Fixture::Lesioned => "lesioned",
        }
    }
}

const FINISHED: &str = "success=true; finished=true; -; -";
const NOT_FINISHED: &str =
    "success=false; finished=false; the screen does not show the expected result; the subtask still needs doing";

fn head(template: &str) -> String {
    format!("(?s)^template: {}\n", escape(template))
}

fn critic_rule(subtask: &str, actions: &ActionScript, reply: &str) -> ScriptRule {
    let pattern = format!(
        "{}.*\nCurrent subtask: {}\nLast action:\n{}\nScreen changes",
        head(prompts::CRITIC_ASSESS),
        escape(subtask),
        escape(&actions.render())
    );
    ScriptRule::regex(pattern, reply)
}

fn actor_rule(subtask: &str, reply: &ActionScript) -> ScriptRule {
    let pattern = format!("{}.*\nCurrent subtask: {}\nPrevious action:\n", head(prompts::ACTOR_NEXT), escape(subtask));
    ScriptRule::regex(pattern, reply.render())
}

fn actor_after_failure(subtask: &str, reply: &ActionScript) -> ScriptRule {
    let pattern = format!(
        "{}.*\nCurrent subtask: {}\nPrevious action:\n.*\nCritique: success=false",
        head(prompts::ACTOR_NEXT),
        escape(subtask)
    );
    ScriptRule::regex(pattern, reply.render())
}

fn planner_rules(spec: &TaskSpec, query_plan: &str) -> Vec<ScriptRule> {
    vec![
        ScriptRule::regex(head(prompts::PLAN_EXTRACT), spec.golden.raw_plan.clone()),
        ScriptRule::regex(head(prompts::PLAN_REFINE), spec.golden.plan.clone()),
        ScriptRule::regex(head(prompts::PLAN_QUERY), query_plan),
    ]
}

/// Index of the first golden step with a click, and the click's target.
fn lesion_point(scripts: &[ActionScript]) -> Option<(usize, u32, u32)> {
    scripts.iter().enumerate().find_map(|(i, s)| {
        s.iter().find_map(|a| match *a {
            Action::Click { x, y } | Action::DoubleClick { x, y } | Action::RightClick { x, y } => Some((i, x, y)),
            _ => None,
        })
    })
}

pub fn fixture_rules(spec: &TaskSpec, fixture: Fixture) -> Result<RuleSet, String> {
    let scripts = spec.golden.scripts()?;
    let steps: Vec<(&str, &ActionScript)> =
        spec.golden.steps.iter().map(|s| s.subtask.as_str()).zip(scripts.iter()).collect();
    let transcript = spec.transcript.trim();
    let query = spec.query.trim();
    let mut rules;
    match fixture {
        Fixture::Golden => {
            let everything = spec.golden.concatenated()?;
            rules = planner_rules(spec, &spec.golden.plan);
            rules.extend(steps.iter().map(|(s, a)| critic_rule(s, a, FINISHED)));
            rules.push(critic_rule(transcript, &everything, FINISHED));
            rules.push(ScriptRule::regex(head(prompts::CRITIC_ASSESS), NOT_FINISHED));
            rules.extend(steps.iter().map(|(s, a)| actor_rule(s, a)));
            rules.push(actor_rule(transcript, &everything));
        }
        Fixture::Lesioned => {
            let first = scripts.first().ok_or("golden script has no steps")?;
            rules = planner_rules(spec, &format!("1. {query}\n a. {query}"));
            rules.extend(steps.iter().map(|(s, a)| critic_rule(s, a, FINISHED)));
            for coarse in [transcript, query] {
                rules.push(critic_rule(coarse, first, FINISHED));
            }
            rules.push(ScriptRule::regex(head(prompts::CRITIC_ASSESS), NOT_FINISHED));
            let lesion = lesion_point(&scripts);
            for (i, (s, a)) in steps.iter().enumerate() {
                match lesion {
                    Some((at, x, y)) if at == i => {
                        rules.push(actor_after_failure(s, a));
                        rules.push(actor_rule(s, &ActionScript::new(vec![Action::MoveTo { x, y }])));
                    }
                    _ => rules.push(actor_rule(s, a)),
                }
            }
            for coarse in [transcript, query] {
                rules.push(actor_rule(coarse, first));
            }
        }
    }
    Ok(RuleSet::new(fixture.name(), rules))
}

pub fn fixture_backend(spec: &TaskSpec, fixture: Fixture) -> Result<ScriptedBackend, BackendError> {
    let rules = fixture_rules(spec, fixture).map_err(BackendError::Config)?;
    ScriptedBackend::new(rules)
}
