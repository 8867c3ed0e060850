//! Versioned prompt templates.
//!
//! Templates live in `templates/` and are compiled into the crate. The
//! first line of each is `template: <id>`, which stays in the rendered
//! prompt so traces and scripted rules can tell prompts apart. Placeholders
//! are `{{name}}`.

use thiserror::Error;

pub const PLAN_EXTRACT: &str = "plan.extract/v1";
pub const PLAN_REFINE: &str = "plan.refine/v1";
pub const PLAN_QUERY: &str = "plan.query/v1";
pub const CRITIC_ASSESS: &str = "critic.assess/v1";
pub const ACTOR_NEXT: &str = "actor.next/v1";
pub const ACTOR_REPAIR: &str = "actor.repair/v1";
pub const RETRY_FORMAT: &str = "retry.format/v1";

const SOURCES: &[&str] = &[
    include_str!("../templates/plan_extract_v1.txt"),
    include_str!("../templates/plan_refine_v1.txt"),
    include_str!("../templates/plan_query_v1.txt"),
    include_str!("../templates/critic_assess_v1.txt"),
    include_str!("../templates/actor_next_v1.txt"),
    include_str!("../templates/actor_repair_v1.txt"),
    include_str!("../templates/retry_format_v1.txt"),
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("unknown template `{0}`")]
    UnknownTemplate(String),
    #[error("template `{template}` has no value for `{var}`")]
    MissingVar { template: String, var: String },
}

#[derive(Debug, Clone, Copy)]
pub struct Template {
    pub id: &'static str,
    body: &'static str,
}

impl Template {
    pub fn get(id: &str) -> Result<Template, PromptError> {
        all().into_iter().find(|t| t.id == id).ok_or_else(|| PromptError::UnknownTemplate(id.to_string()))
    }

    pub fn body(&self) -> &'static str {
        self.body
    }

    /// Substitutes every placeholder. Values are inserted verbatim and are
    /// not themselves scanned for placeholders.
    pub fn render(&self, vars: &[(&str, &str)]) -> Result<String, PromptError> {
        let mut out = String::with_capacity(self.body.len());
        let mut rest = self.body;
        while let Some(start) = rest.find("{{") {
            out.push_str(&rest[..start]);
            let after = &rest[start + 2..];
            let Some(end) = after.find("}}") else {
                out.push_str(&rest[start..]);
                rest = "";
                break;
            };
            let name = &after[..end];
            let value = vars
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| *v)
                .ok_or_else(|| PromptError::MissingVar { template: self.id.to_string(), var: name.to_string() })?;
            out.push_str(value);
            rest = &after[end + 2..];
        }
        out.push_str(rest);
        Ok(out)
    }
}

/// Every bundled template.
pub fn all() -> Vec<Template> {
    SOURCES
        .iter()
        .map(|body| {
            let id = body.lines().next().and_then(|l| l.strip_prefix("template: ")).unwrap_or("");
            Template { id, body }
        })
        .collect()
}

/// Renders template `id`.
pub fn render(id: &str, vars: &[(&str, &str)]) -> Result<String, PromptError> {
    Template::get(id)?.render(vars)
}

/// Id of the template a prompt was rendered from, read off its first line.
pub fn template_id(prompt: &str) -> Option<&str> {
    prompt.lines().next()?.strip_prefix("template: ")
}

/// The reprompt sent after a reply that broke the required format.
pub(crate) fn format_retry(prompt: &str, error: &str, reply: &str) -> String {
    render(RETRY_FORMAT, &[("prompt", prompt), ("error", error), ("reply", reply)])
        .expect("retry template variables are fixed")
}
