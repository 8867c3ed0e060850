use std::fmt;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::goal::check_goal;
use super::task::TaskSpec;
use super::trace::{EpisodeTrace, Outcome, PlanRecord, StepRecord, TraceHeader, TracedCall};
use crate::action::ActionScript;
use crate::actor::{advance_subtask, next_action, push_history, ActorConfig, AgentStep, HistoryEntry};
use crate::critic::{assess, AssessInput, Critique};
use crate::env::Environment;
use crate::gui::{parse_gui, IconTemplate, ParseConfig, UiDocument};
use crate::llm::{Backend, Recorder};
use crate::planner::{extract_raw_plan, parent, plan_from_query, refine_plan, PlanCursor, PlanTree};

/// Which reasoning component is switched off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    #[default]
    Full,
    /// The whole transcript goes to the actor as a single subtask.
    NoPlanner,
    /// Subtasks end after a fixed number of steps; no critic calls.
    NoCritic,
    /// The plan comes from the query alone.
    NoTranscript,
}

impl Ablation {
    pub const ALL: [Ablation; 4] = [Ablation::Full, Ablation::NoPlanner, Ablation::NoCritic, Ablation::NoTranscript];

    pub fn name(&self) -> &'static str {
        match self {
            Ablation::Full => "full",
            Ablation::NoPlanner => "no_planner",
            Ablation::NoCritic => "no_critic",
            Ablation::NoTranscript => "no_transcript",
        }
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Ablation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ablation::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown ablation `{s}` (expected full, no_planner, no_critic or no_transcript)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub actor: ActorConfig,
    pub parse: ParseConfig,
    pub ablation: Ablation,
    pub seed: u64,
    /// Steps per subtask when the critic is ablated.
    pub fixed_subtask_steps: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            actor: ActorConfig::default(),
            parse: ParseConfig::default(),
            ablation: Ablation::Full,
            seed: 0,
            fixed_subtask_steps: 1,
        }
    }
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

struct Episode<'a> {
    llm: Recorder<&'a dyn Backend>,
    header: TraceHeader,
    plan: PlanRecord,
    steps: Vec<StepRecord>,
}

impl Episode<'_> {
    fn calls(&self) -> Vec<TracedCall> {
        self.llm.drain().into_iter().map(TracedCall::from).collect()
    }

    fn end(
        self,
        success: bool,
        reason: &str,
        detail: impl fmt::Display,
        final_state_hash: Option<String>,
    ) -> EpisodeTrace {
        let steps = self.steps.iter().filter(|s| s.action.is_some()).count();
        EpisodeTrace {
            header: self.header,
            plan: self.plan,
            steps: self.steps,
            outcome: Outcome { success, reason: reason.into(), detail: detail.to_string(), steps, final_state_hash },
        }
    }

    fn fail_step(mut self, mut rec: StepRecord, reason: &str, detail: impl fmt::Display) -> EpisodeTrace {
        rec.calls = self.calls();
        rec.error = Some(detail.to_string());
        self.steps.push(rec);
        self.end(false, reason, detail, None)
    }
}

fn build_plan(spec: &TaskSpec, ablation: Ablation, llm: &dyn Backend) -> Result<PlanTree, crate::planner::PlanError> {
    match ablation {
        Ablation::Full | Ablation::NoCritic => {
            let raw = extract_raw_plan(&spec.transcript, llm)?;
            refine_plan(&raw, &spec.query, llm)
        }
        Ablation::NoTranscript => plan_from_query(&spec.query, llm),
        Ablation::NoPlanner => Ok(PlanTree::single(spec.query.trim(), spec.transcript.trim())),
    }
}

/// Runs one task to completion and returns its trace. Errors from any
/// module end the episode as a failure and are recorded, never raised.
pub fn run_episode(
    spec: &TaskSpec,
    backend: &dyn Backend,
    env: &mut dyn Environment,
    config: &RunConfig,
) -> EpisodeTrace {
    let header = TraceHeader {
        task_id: spec.id.clone(),
        category: spec.category,
        configuration: config.ablation.name().to_string(),
        backend: backend.name().to_string(),
        seed: config.seed,
        started_at_unix_ms: now_ms(),
        initial_state_hash: String::new(),
    };
    let mut ep = Episode {
        llm: Recorder::new(backend),
        header,
        plan: PlanRecord { plan: None, calls: Vec::new(), error: None },
        steps: Vec::new(),
    };
    if let Err(e) = env.reset(&spec.id) {
        return ep.end(false, "env_error", e, None);
    }

    let plan = build_plan(spec, config.ablation, &ep.llm);
    ep.plan.calls = ep.calls();
    let plan = match plan {
        Ok(p) => p,
        Err(e) => {
            ep.plan.error = Some(e.to_string());
            return ep.end(false, "plan_error", e, None);
        }
    };
    ep.plan.plan = Some(plan.clone());

    let templates = IconTemplate::from_table(&spec.initial_state.icons);
    let parse_cfg = ParseConfig { seed: config.seed, ..config.parse.clone() };
    let step_cap = spec.step_cap.unwrap_or(config.actor.episode_step_cap);
    let mut cursor = PlanCursor::default();
    let mut prev_action = ActionScript::default();
    let mut prev_doc: Option<UiDocument> = None;
    let mut history = Vec::new();
    let mut subtask_steps = 0usize;
    let mut actions_taken = 0usize;

    loop {
        let observed = match env.observe() {
            Ok(o) => o,
            Err(e) => return ep.end(false, "env_error", e, None),
        };
        if ep.steps.is_empty() {
            ep.header.initial_state_hash = observed.state_hash.clone();
        }
        let raster = &observed.observation.raster;
        let screen = (raster.width * raster.cell_px, raster.height * raster.cell_px);
        let doc = parse_gui(&observed.observation, &templates, &parse_cfg);
        let mut rec = StepRecord {
            index: ep.steps.len(),
            plan: plan.clone(),
            cursor,
            milestone: None,
            subtask: None,
            raster_hash: raster.hash(),
            critique: None,
            calls: Vec::new(),
            action: None,
            state_hash: None,
            error: None,
        };

        // Cursor is still on the subtask the previous action served.
        let critique = match &prev_doc {
            None => Critique::first_step(),
            Some(_) if config.ablation == Ablation::NoCritic => {
                Critique::assumed(subtask_steps >= config.fixed_subtask_steps)
            }
            Some(before) => {
                let input = AssessInput {
                    before,
                    after: &doc,
                    action: &prev_action,
                    subtask: plan.subtask(cursor).unwrap_or_default(),
                    milestone: parent(&plan, cursor).unwrap_or_default(),
                };
                match assess(&input, &ep.llm) {
                    Ok(c) => c,
                    Err(e) => return ep.fail_step(rec, "critic_error", e),
                }
            }
        };
        if prev_doc.is_some() {
            let subtask = plan.subtask(cursor).unwrap_or_default().to_string();
            let entry = HistoryEntry { subtask, action: prev_action.clone(), critique: critique.clone() };
            push_history(&mut history, entry, config.actor.history_window);
        }
        let next = match advance_subtask(cursor, &critique, &plan) {
            Ok(c) => c,
            Err(e) => return ep.fail_step(rec, "plan_error", e),
        };
        if next != cursor {
            subtask_steps = 0;
        }
        cursor = next;
        rec.cursor = cursor;
        rec.critique = Some(critique.clone());
        if cursor.done {
            rec.calls = ep.calls();
            ep.steps.push(rec);
            break;
        }

        let subtask = plan.subtask(cursor).unwrap_or_default().to_string();
        let milestone = parent(&plan, cursor).unwrap_or_default().to_string();
        rec.subtask = Some(subtask.clone());
        rec.milestone = Some(milestone.clone());
        if actions_taken >= step_cap {
            return ep.fail_step(rec, "cap", format!("episode step cap of {step_cap} reached"));
        }
        if subtask_steps >= config.actor.subtask_step_cap {
            let cap = config.actor.subtask_step_cap;
            return ep.fail_step(rec, "cap", format!("subtask step cap of {cap} reached on `{subtask}`"));
        }

        let step = AgentStep {
            prev_action: prev_action.clone(),
            obs_doc: doc.clone(),
            subtask,
            milestone,
            critique,
            history: history.clone(),
            screen,
        };
        let action = match next_action(&step, &ep.llm) {
            Ok(a) => a,
            Err(e) => return ep.fail_step(rec, "actor_error", e),
        };
        rec.action = Some(action.render());
        match env.execute(&action) {
            Ok(x) => rec.state_hash = Some(x.state_hash),
            Err(e) => return ep.fail_step(rec, "env_error", e),
        }
        rec.calls = ep.calls();
        ep.steps.push(rec);
        prev_action = action;
        prev_doc = Some(doc);
        actions_taken += 1;
        subtask_steps += 1;
    }

    match env.snapshot() {
        Ok(state) => {
            let verdict = check_goal(&state, spec);
            let reason = if verdict.met { "goal" } else { "goal_unmet" };
            ep.end(verdict.met, reason, verdict.detail, Some(state.hash()))
        }
        Err(e) => ep.end(false, "env_error", e, None),
    }
}
