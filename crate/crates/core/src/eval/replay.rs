use serde::{Deserialize, Serialize};

use super::trace::EpisodeTrace;
use crate::action::parse;
use crate::env::{EnvError, Environment};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashMismatch {
    pub step: usize,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub task_id: String,
    pub actions_replayed: usize,
    pub initial_matches: bool,
    pub mismatches: Vec<HashMismatch>,
}

impl ReplayReport {
    pub fn is_faithful(&self) -> bool {
        self.initial_matches && self.mismatches.is_empty()
    }
}

/// Re-executes a trace's actions from the task's initial state and compares
/// every recorded state hash. No model is involved.
pub fn replay(trace: &EpisodeTrace, env: &mut dyn Environment) -> Result<ReplayReport, EnvError> {
    env.reset(&trace.header.task_id)?;
    let initial = env.observe()?.state_hash;
    let mut report = ReplayReport {
        task_id: trace.header.task_id.clone(),
        actions_replayed: 0,
        initial_matches: trace.header.initial_state_hash.is_empty() || initial == trace.header.initial_state_hash,
        mismatches: Vec::new(),
    };
    for step in &trace.steps {
        let (Some(text), Some(expected)) = (&step.action, &step.state_hash) else { continue };
        let script = parse(text).map_err(|e| EnvError::Script(e.to_string()))?;
        let actual = env.execute(&script)?.state_hash;
        report.actions_replayed += 1;
        if &actual != expected {
            report.mismatches.push(HashMismatch { step: step.index, expected: expected.clone(), actual });
        }
    }
    Ok(report)
}
