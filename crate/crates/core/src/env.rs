//! The interface the episode runner drives, with an in-process
//! implementation. [`crate::bridge::RemoteEnv`] implements the same trait
//! over TCP.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::ActionScript;
use crate::sim::{execute, observe, EnvState, ExecError, ExecReport, Observation, Size};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("environment has not been reset")]
    NotReset,
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error("script does not parse: {0}")]
    Script(String),
    #[error("transport: {0}")]
    Transport(String),
    #[error("remote error {code}: {detail}")]
    Remote { code: String, detail: String },
}

/// An observation together with the hash of the state it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observed {
    pub observation: Observation,
    pub state_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Executed {
    pub report: ExecReport,
    pub state_hash: String,
}

pub trait Environment: Send {
    /// Starts task `task_id` from its initial state.
    fn reset(&mut self, task_id: &str) -> Result<(), EnvError>;
    fn observe(&mut self) -> Result<Observed, EnvError>;
    fn execute(&mut self, script: &ActionScript) -> Result<Executed, EnvError>;
    /// The full current state, for goal checking.
    fn snapshot(&mut self) -> Result<EnvState, EnvError>;
    fn screen(&self) -> Size;
}

/// Maps task ids to initial states.
pub trait EnvFactory: Send + Sync {
    fn create(&self, task_id: &str) -> Option<EnvState>;
    fn screen(&self) -> Size;
}

/// A fixed table of initial states.
#[derive(Debug, Clone)]
pub struct StateTable {
    pub states: BTreeMap<String, EnvState>,
    pub screen: Size,
}

impl StateTable {
    pub fn single(task_id: &str, state: EnvState) -> Self {
        let screen = state.screen;
        Self { states: BTreeMap::from([(task_id.to_string(), state)]), screen }
    }
}

impl EnvFactory for StateTable {
    fn create(&self, task_id: &str) -> Option<EnvState> {
        self.states.get(task_id).cloned()
    }

    fn screen(&self) -> Size {
        self.screen
    }
}

/// Runs the simulator in-process.
pub struct LocalEnv {
    factory: Arc<dyn EnvFactory>,
    state: Option<EnvState>,
}

impl LocalEnv {
    pub fn new(factory: Arc<dyn EnvFactory>) -> Self {
        Self { factory, state: None }
    }

    /// An environment for one task, already reset.
    pub fn with_state(task_id: &str, state: EnvState) -> Self {
        Self { factory: Arc::new(StateTable::single(task_id, state.clone())), state: Some(state) }
    }

    pub fn state(&self) -> Option<&EnvState> {
        self.state.as_ref()
    }

    fn current(&self) -> Result<&EnvState, EnvError> {
        self.state.as_ref().ok_or(EnvError::NotReset)
    }
}

impl Environment for LocalEnv {
    fn reset(&mut self, task_id: &str) -> Result<(), EnvError> {
        self.state = Some(self.factory.create(task_id).ok_or_else(|| EnvError::UnknownTask(task_id.to_string()))?);
        Ok(())
    }

    fn observe(&mut self) -> Result<Observed, EnvError> {
        let s = self.current()?;
        Ok(Observed { observation: observe(s), state_hash: s.hash() })
    }

    fn execute(&mut self, script: &ActionScript) -> Result<Executed, EnvError> {
        let (next, report) = execute(self.current()?, script)?;
        let state_hash = next.hash();
        self.state = Some(next);
        Ok(Executed { report, state_hash })
    }

    fn snapshot(&mut self) -> Result<EnvState, EnvError> {
        self.current().cloned()
    }

    fn screen(&self) -> Size {
        self.state.as_ref().map_or_else(|| self.factory.screen(), |s| s.screen)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::parse;

    #[test]
    fn reset_observe_execute() {
        let mut env = LocalEnv::new(Arc::new(StateTable::single("t", EnvState::blank(64, 32))));
        assert_eq!(env.observe(), Err(EnvError::NotReset));
        assert!(matches!(env.reset("other"), Err(EnvError::UnknownTask(_))));
        env.reset("t").unwrap();
        let before = env.observe().unwrap();
        let out = env.execute(&parse("moveTo(3, 4)").unwrap()).unwrap();
        assert_ne!(out.state_hash, before.state_hash);
        assert_eq!(env.snapshot().unwrap().hash(), out.state_hash);
        assert!(matches!(env.execute(&parse("click(64, 0)").unwrap()), Err(EnvError::Exec(_))));
        env.reset("t").unwrap();
        assert_eq!(env.observe().unwrap(), before);
    }
}
