//! Scripted model behaviour behind the bundled mock fixtures.

use std::collections::BTreeMap;

use serde::Deserialize;
use svagen::llm::{ChatRequest, ScriptedProvider, TemplateId};
use svagen::sva::parse_assertion;

use super::fixtures::fixtures_dir;

#[derive(Debug, Clone, Deserialize)]
pub struct Initial {
    pub plain: String,
    pub retrieved: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct KeywordRule {
    pub phrase: String,
    pub operator: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Script {
    pub initial: BTreeMap<String, Initial>,
    pub revise: BTreeMap<String, String>,
    pub keywords: Vec<KeywordRule>,
}

pub fn load_script() -> Script {
    let text = std::fs::read_to_string(fixtures_dir().join("mock_script.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub fn fenced(sva: &str) -> String {
    format!("```systemverilog\n{sva}\n```\n")
}

impl Script {
    pub fn answer(&self, req: &ChatRequest) -> Option<String> {
        let b = &req.bindings;
        match req.template_id {
            TemplateId::InitialGeneration => {
                let entry = self.initial.get(b.get("spec")?)?;
                let sva = if b.get("retrieved_context")? == "(none)" {
                    &entry.plain
                } else {
                    &entry.retrieved
                };
                Some(format!("Here is the assertion:\n{}", fenced(sva)))
            }
            TemplateId::KeywordExtraction => {
                let spec = b.get("spec")?.to_lowercase();
                let found: Vec<&str> = self
                    .keywords
                    .iter()
                    .map(|k| k.phrase.as_str())
                    .filter(|p| spec.contains(p))
                    .collect();
                Some(serde_json::to_string(&found).unwrap())
            }
            TemplateId::OperatorExtraction => {
                let mut map = serde_json::Map::new();
                for line in b.get("keywords")?.lines() {
                    let kw = line.trim().trim_start_matches("- ").trim();
                    if let Some(rule) = self.keywords.iter().find(|k| k.phrase == kw) {
                        map.insert(kw.to_string(), rule.operator.clone().into());
                    }
                }
                Some(serde_json::Value::Object(map).to_string())
            }
            TemplateId::SvaRechecking => {
                let candidate = b.get("candidate")?;
                if let Some(next) = self.revise.get(candidate) {
                    Some(format!("VERDICT: REVISED\n{}", fenced(next)))
                } else if parse_assertion(candidate).is_ok() {
                    Some(format!("VERDICT: CORRECT\n{}", fenced(candidate)))
                } else {
                    Some(format!("VERDICT: REVISED\n{}", fenced(candidate)))
                }
            }
            TemplateId::DerivationGeneration => None,
        }
    }

    pub fn provider(self) -> ScriptedProvider {
        ScriptedProvider::new(move |req| self.answer(req))
    }
}
