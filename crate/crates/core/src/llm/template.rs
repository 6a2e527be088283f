use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::LlmError;

pub type Bindings = BTreeMap<String, String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    InitialGeneration,
    KeywordExtraction,
    OperatorExtraction,
    SvaRechecking,
    DerivationGeneration,
}

impl TemplateId {
    pub const ALL: [TemplateId; 5] = [
        TemplateId::InitialGeneration,
        TemplateId::KeywordExtraction,
        TemplateId::OperatorExtraction,
        TemplateId::SvaRechecking,
        TemplateId::DerivationGeneration,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateId::InitialGeneration => "initial_generation",
            TemplateId::KeywordExtraction => "keyword_extraction",
            TemplateId::OperatorExtraction => "operator_extraction",
            TemplateId::SvaRechecking => "sva_rechecking",
            TemplateId::DerivationGeneration => "derivation_generation",
        }
    }

    fn source(self) -> &'static str {
        match self {
            TemplateId::InitialGeneration => include_str!("../../templates/initial_generation.txt"),
            TemplateId::KeywordExtraction => include_str!("../../templates/keyword_extraction.txt"),
            TemplateId::OperatorExtraction => include_str!("../../templates/operator_extraction.txt"),
            TemplateId::SvaRechecking => include_str!("../../templates/sva_rechecking.txt"),
            TemplateId::DerivationGeneration => {
                include_str!("../../templates/derivation_generation.txt")
            }
        }
    }

    pub fn template(self) -> PromptTemplate {
        PromptTemplate::parse(self, self.source())
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TemplateId {
    type Err = LlmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TemplateId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| LlmError::UnknownTemplate(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub id: TemplateId,
    pub system: String,
    pub user: String,
    /// Placeholder names in first-occurrence order.
    pub required_vars: Vec<String>,
}

/// A rendered prompt ready to send.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub system: String,
    pub user: String,
}

impl PromptTemplate {
    /// Splits a template file into its `[system]` and `[user]` sections.
    fn parse(id: TemplateId, source: &str) -> PromptTemplate {
        let mut system = String::new();
        let mut user = String::new();
        let mut current: Option<&mut String> = None;
        for line in source.lines() {
            match line.trim() {
                "[system]" => current = Some(&mut system),
                "[user]" => current = Some(&mut user),
                _ => {
                    if let Some(buf) = current.as_deref_mut() {
                        buf.push_str(line);
                        buf.push('\n');
                    }
                }
            }
        }
        let system = system.trim().to_string();
        let user = user.trim().to_string();
        let mut required_vars = Vec::new();
        for text in [&system, &user] {
            for (name, _) in placeholders(text) {
                if !required_vars.iter().any(|v| v == name) {
                    required_vars.push(name.to_string());
                }
            }
        }
        PromptTemplate {
            id,
            system,
            user,
            required_vars,
        }
    }

    pub fn render(&self, bindings: &Bindings) -> Result<Prompt, LlmError> {
        let missing: Vec<String> = self
            .required_vars
            .iter()
            .filter(|v| !bindings.contains_key(*v))
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(LlmError::MissingVariable {
                template: self.id,
                names: missing,
            });
        }
        Ok(Prompt {
            system: substitute(&self.system, bindings),
            user: substitute(&self.user, bindings),
        })
    }
}

/// `(name, byte range of the whole "{{name}}")` for each placeholder.
fn placeholders(text: &str) -> Vec<(&str, std::ops::Range<usize>)> {
    let mut out = Vec::new();
    let mut from = 0;
    while let Some(open) = text[from..].find("{{").map(|i| i + from) {
        let Some(close) = text[open + 2..].find("}}").map(|i| i + open + 2) else {
            break;
        };
        let name = &text[open + 2..close];
        if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            out.push((name, open..close + 2));
            from = close + 2;
        } else {
            from = open + 2;
        }
    }
    out
}

/// Single pass: substituted values are never rescanned for placeholders.
fn substitute(text: &str, bindings: &Bindings) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    for (name, range) in placeholders(text) {
        out.push_str(&text[last..range.start]);
        out.push_str(&bindings[name]);
        last = range.end;
    }
    out.push_str(&text[last..]);
    out
}

pub fn render_prompt(id: TemplateId, bindings: &Bindings) -> Result<Prompt, LlmError> {
    id.template().render(bindings)
}

/// Builds bindings from `(name, value)` pairs.
pub fn bindings<'a>(pairs: impl IntoIterator<Item = (&'a str, String)>) -> Bindings {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_template_has_both_sections() {
        for id in TemplateId::ALL {
            let t = id.template();
            assert!(!t.system.is_empty(), "{id}");
            assert!(!t.user.is_empty(), "{id}");
            assert_eq!(id.as_str().parse::<TemplateId>().unwrap(), id);
        }
    }

    #[test]
    fn required_vars() {
        assert_eq!(
            TemplateId::InitialGeneration.template().required_vars,
            vec!["spec", "design_context", "retrieved_context"]
        );
        assert_eq!(TemplateId::KeywordExtraction.template().required_vars, vec!["spec"]);
        assert_eq!(
            TemplateId::SvaRechecking.template().required_vars,
            vec!["operator_explanations", "syntax_feedback", "spec", "candidate"]
        );
    }

    #[test]
    fn values_are_not_rescanned() {
        let b = bindings([("spec", "{{spec}} and |-> ##1".to_string())]);
        let p = render_prompt(TemplateId::KeywordExtraction, &b).unwrap();
        assert!(p.user.contains("{{spec}} and |-> ##1"));
    }
}
