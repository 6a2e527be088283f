use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Generation modes, from the plain model baseline up to the full flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "LLM")]
    Llm,
    #[serde(rename = "StaticRAG")]
    StaticRag,
    #[serde(rename = "DynamicRAG")]
    DynamicRag,
    #[serde(rename = "HR-P0")]
    HrP0,
    #[serde(rename = "HR-P1")]
    HrP1,
    #[serde(rename = "HR")]
    Hr,
    #[serde(rename = "SOR")]
    Sor,
    #[serde(rename = "RAGSVAG")]
    Ragsvag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetrievalPlan {
    None,
    /// Whole-spec semantic search over the static-window store.
    StaticGlobal,
    /// Whole-spec semantic search over the code-centric store.
    Global,
    OperatorGuided,
    Hybrid,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown mode `{0}` (expected one of LLM, StaticRAG, DynamicRAG, HR-P0, HR-P1, HR, SOR, RAGSVAG)")]
pub struct UnknownMode(pub String);

impl Mode {
    pub const ALL: [Mode; 8] = [
        Mode::Llm,
        Mode::StaticRag,
        Mode::DynamicRag,
        Mode::HrP0,
        Mode::HrP1,
        Mode::Hr,
        Mode::Sor,
        Mode::Ragsvag,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Llm => "LLM",
            Mode::StaticRag => "StaticRAG",
            Mode::DynamicRag => "DynamicRAG",
            Mode::HrP0 => "HR-P0",
            Mode::HrP1 => "HR-P1",
            Mode::Hr => "HR",
            Mode::Sor => "SOR",
            Mode::Ragsvag => "RAGSVAG",
        }
    }

    pub fn retrieval(self) -> RetrievalPlan {
        match self {
            Mode::Llm | Mode::Sor => RetrievalPlan::None,
            Mode::StaticRag => RetrievalPlan::StaticGlobal,
            Mode::DynamicRag | Mode::HrP0 => RetrievalPlan::Global,
            Mode::HrP1 => RetrievalPlan::OperatorGuided,
            Mode::Hr | Mode::Ragsvag => RetrievalPlan::Hybrid,
        }
    }

    pub fn rechecks(self) -> bool {
        matches!(self, Mode::Sor | Mode::Ragsvag)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = UnknownMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = |x: &str| x.to_ascii_lowercase().replace(['-', '_'], "");
        let want = norm(s.trim());
        Mode::ALL
            .into_iter()
            .find(|m| norm(m.as_str()) == want)
            .ok_or_else(|| UnknownMode(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in Mode::ALL {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.as_str()));
        }
        assert_eq!("hr_p1".parse::<Mode>().unwrap(), Mode::HrP1);
        assert!("rag".parse::<Mode>().is_err());
    }
}
