use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::task::Category;
use crate::critic::Critique;
use crate::llm::CallRecord;
use crate::planner::{PlanCursor, PlanTree};
use crate::prompts::template_id;

/// One model call as stored in a trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TracedCall {
    /// Template id of the prompt, when it has one.
    pub prompt_id: Option<String>,
    pub prompt: String,
    pub reply: String,
    pub ok: bool,
}

impl From<CallRecord> for TracedCall {
    fn from(c: CallRecord) -> Self {
        Self { prompt_id: template_id(&c.prompt).map(str::to_string), prompt: c.prompt, reply: c.reply, ok: c.ok }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub task_id: String,
    pub category: Category,
    pub configuration: String,
    pub backend: String,
    pub seed: u64,
    /// The only wall-clock value in a trace.
    pub started_at_unix_ms: u64,
    pub initial_state_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub plan: Option<PlanTree>,
    pub calls: Vec<TracedCall>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub index: usize,
    pub plan: PlanTree,
    /// Cursor after this step's critique was applied.
    pub cursor: PlanCursor,
    pub milestone: Option<String>,
    pub subtask: Option<String>,
    /// Hash of the raster the agent saw at the start of the step.
    pub raster_hash: String,
    pub critique: Option<Critique>,
    pub calls: Vec<TracedCall>,
    /// Rendered action script, absent when no action was taken.
    pub action: Option<String>,
    /// State hash after the action ran.
    pub state_hash: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub success: bool,
    /// One of `goal`, `goal_unmet`, `cap`, `plan_error`, `critic_error`,
    /// `actor_error`, `env_error`.
    pub reason: String,
    pub detail: String,
    pub steps: usize,
    pub final_state_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum TraceLine {
    Header(TraceHeader),
    Plan(PlanRecord),
    Step(StepRecord),
    Outcome(Outcome),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub header: TraceHeader,
    pub plan: PlanRecord,
    pub steps: Vec<StepRecord>,
    pub outcome: Outcome,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("trace is missing its {0} record")]
    Missing(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl EpisodeTrace {
    /// Sets the timestamp to zero so traces compare bytewise.
    pub fn scrub(&mut self) {
        self.header.started_at_unix_ms = 0;
    }

    pub fn scrubbed(&self) -> Self {
        let mut t = self.clone();
        t.scrub();
        t
    }

    pub fn lines(&self) -> Vec<TraceLine> {
        let mut out = vec![TraceLine::Header(self.header.clone()), TraceLine::Plan(self.plan.clone())];
        out.extend(self.steps.iter().cloned().map(TraceLine::Step));
        out.push(TraceLine::Outcome(self.outcome.clone()));
        out
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for l in self.lines() {
            out.push_str(&serde_json::to_string(&l).expect("trace records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(self.to_jsonl().as_bytes())
    }

    pub fn read(r: impl BufRead) -> Result<Self, TraceError> {
        let (mut header, mut plan, mut outcome) = (None, None, None);
        let mut steps = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: TraceLine =
                serde_json::from_str(&line).map_err(|e| TraceError::Parse { line: i + 1, message: e.to_string() })?;
            match rec {
                TraceLine::Header(h) => header = Some(h),
                TraceLine::Plan(p) => plan = Some(p),
                TraceLine::Step(s) => steps.push(s),
                TraceLine::Outcome(o) => outcome = Some(o),
            }
        }
        Ok(Self {
            header: header.ok_or(TraceError::Missing("header"))?,
            plan: plan.ok_or(TraceError::Missing("plan"))?,
            steps,
            outcome: outcome.ok_or(TraceError::Missing("outcome"))?,
        })
    }

    pub fn from_jsonl(text: &str) -> Result<Self, TraceError> {
        Self::read(text.as_bytes())
    }
}
