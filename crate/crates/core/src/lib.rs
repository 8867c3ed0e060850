//! An actor-critic agent for desktop GUI automation, run against a
//! deterministic simulated desktop.
//!
//! The pieces, in the order an episode uses them:
//!
//! - [`planner`] turns a tutorial transcript and a user query into a
//!   two-level plan (milestones and their subtasks) and walks its leaves.
//! - [`sim`] is the desktop: widget trees, settings, a small file system,
//!   and a symbolic screen raster. It executes [`action`] scripts.
//! - [`gui`] parses an observation into a panel-by-panel [`gui::UiDocument`].
//! - [`critic`] diffs documents before and after an action and asks a
//!   language model whether the action worked and the subtask is done.
//! - [`actor`] advances the plan cursor and asks for the next action script.
//! - [`llm`] is the model interface, with a rule-table backend for tests and
//!   an OpenAI-compatible HTTP backend.
//! - [`bridge`] runs the environment behind a framed TCP protocol.
//! - [`eval`] holds task packs, goal checkers, the episode runner and suite
//!   metrics.
//!
//! See `examples/` for one runnable program per capability.

pub mod action;
pub mod actor;
pub mod bridge;
pub mod cli;
pub mod critic;
pub mod env;
pub mod eval;
pub mod gui;
pub mod llm;
pub mod planner;
pub mod prompts;
pub mod sim;

mod hash;

pub use action::{Action, ActionScript};
pub use hash::sha256_hex;
