//! The branching interview script: node graph, loader, validation,
//! navigation and answer interpretation.
//!
//! A questionnaire is immutable once loaded and can be shared by any number
//! of concurrent sessions.

mod answer;
mod navigate;
mod validate;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::LanguageTag;

pub use answer::{parse_answer, ParseResult};
pub use navigate::{next_node, progress, realized_path, ContractViolation};
pub use validate::{validate, ValidationReport, Violation, ViolationKind};

/// The only document version this loader understands.
pub const FORMAT_VERSION: &str = "v1";

/// Sentinel used in documents for "no further node".
pub const END_MARKER: &str = "END";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// Where the interview goes next: another node or the end of the script.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Next {
    Node(NodeId),
    End,
}

impl Next {
    pub fn node(&self) -> Option<&NodeId> {
        match self {
            Next::Node(id) => Some(id),
            Next::End => None,
        }
    }
}

impl From<&str> for Next {
    fn from(s: &str) -> Self {
        if s == END_MARKER {
            Next::End
        } else {
            Next::Node(NodeId::new(s))
        }
    }
}

impl fmt::Display for Next {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Next::Node(id) => id.fmt(f),
            Next::End => f.write_str(END_MARKER),
        }
    }
}

impl Serialize for Next {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Next {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Next::from(s.as_str()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuestionKind {
    YesNo,
    Nps,
    Likert { point_count: u8 },
    OpenEnded,
    Statement,
}

impl QuestionKind {
    /// Inclusive integer range accepted by rating-style kinds.
    pub fn rating_range(&self) -> Option<(u8, u8)> {
        match *self {
            QuestionKind::Nps => Some((0, 10)),
            QuestionKind::Likert { point_count } => Some((1, point_count)),
            _ => None,
        }
    }

    pub fn is_closed_ended(&self) -> bool {
        matches!(self, QuestionKind::YesNo | QuestionKind::Nps | QuestionKind::Likert { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            QuestionKind::YesNo => "yes_no",
            QuestionKind::Nps => "nps",
            QuestionKind::Likert { .. } => "likert",
            QuestionKind::OpenEnded => "open_ended",
            QuestionKind::Statement => "statement",
        }
    }
}

/// Condition on the answer that selects a branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AnswerPredicate {
    EqualsYes,
    EqualsNo,
    RatingInRange { lo: u8, hi: u8 },
    Always,
}

impl AnswerPredicate {
    pub fn matches(&self, answer: &AnswerValue) -> bool {
        match (self, answer) {
            (AnswerPredicate::Always, _) => true,
            (AnswerPredicate::EqualsYes, AnswerValue::YesNo(v)) => *v,
            (AnswerPredicate::EqualsNo, AnswerValue::YesNo(v)) => !*v,
            (
                AnswerPredicate::RatingInRange { lo, hi },
                AnswerValue::Rating(v) | AnswerValue::LikertIndex(v),
            ) => lo <= v && v <= hi,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub predicate: AnswerPredicate,
    pub target: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionNode {
    pub id: NodeId,
    #[serde(flatten)]
    pub kind: QuestionKind,
    /// Prompt text; may carry `{client_name}` / `{service_name}` slots.
    pub prompt: String,
    #[serde(default)]
    pub branches: Vec<Branch>,
    pub default_next: Next,
    #[serde(default = "default_counts")]
    pub counts_toward_progress: bool,
}

fn default_counts() -> bool {
    true
}

/// A typed answer to one node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum AnswerValue {
    YesNo(bool),
    Rating(u8),
    LikertIndex(u8),
    FreeText(String),
}

impl AnswerValue {
    /// Whether this answer can be recorded for a node of `kind`. Free text
    /// is accepted everywhere: closed-ended nodes receive it as the verbatim
    /// fallback once clarification attempts run out.
    pub fn compatible_with(&self, kind: &QuestionKind) -> bool {
        match (self, kind) {
            (AnswerValue::FreeText(_), _) => true,
            (AnswerValue::YesNo(_), QuestionKind::YesNo) => true,
            (AnswerValue::Rating(v), QuestionKind::Nps) => *v <= 10,
            (AnswerValue::LikertIndex(v), QuestionKind::Likert { point_count }) => {
                (1..=*point_count).contains(v)
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Questionnaire {
    pub version: String,
    pub id: String,
    pub language: LanguageTag,
    pub title: String,
    pub client_name: String,
    pub service_name: String,
    pub expected_duration_min: u32,
    pub entry_node: NodeId,
    pub nodes: Vec<QuestionNode>,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read questionnaire: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed questionnaire: {0}")]
    Format(String),
    #[error("unsupported questionnaire version {0:?} (expected \"v1\")")]
    UnsupportedVersion(String),
}

impl Questionnaire {
    pub fn node(&self, id: &NodeId) -> Option<&QuestionNode> {
        self.nodes.iter().find(|n| &n.id == id)
    }

    /// Parses a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self, LoadError> {
        let q: Questionnaire = toml::from_str(text).map_err(|e| LoadError::Format(e.to_string()))?;
        q.check_version()
    }

    /// Parses a JSON document.
    pub fn from_json_str(text: &str) -> Result<Self, LoadError> {
        let q: Questionnaire =
            serde_json::from_str(text).map_err(|e| LoadError::Format(e.to_string()))?;
        q.check_version()
    }

    /// Loads a `.json` or `.toml` file, choosing the parser by extension.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, LoadError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_str(&text),
            _ => Self::from_toml_str(&text),
        }
    }

    fn check_version(self) -> Result<Self, LoadError> {
        if self.version != FORMAT_VERSION {
            return Err(LoadError::UnsupportedVersion(self.version));
        }
        Ok(self)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("questionnaire serializes")
    }

    /// Ids of the open-ended nodes, used by the transcript analytics.
    pub fn open_ended_ids(&self) -> std::collections::BTreeSet<NodeId> {
        self.nodes
            .iter()
            .filter(|n| n.kind == QuestionKind::OpenEnded)
            .map(|n| n.id.clone())
            .collect()
    }

    /// Substitutes the questionnaire-level slots into `template`.
    pub fn render(&self, template: &str) -> String {
        template
            .replace("{client_name}", &self.client_name)
            .replace("{service_name}", &self.service_name)
            .replace("{duration}", &self.expected_duration_min.to_string())
    }

    /// The bundled 19-question Spanish customer-feedback script.
    pub fn fixture_es() -> Self {
        Self::from_toml_str(include_str!("../../fixtures/feedback_es.toml"))
            .expect("bundled fixture parses")
    }

    /// English rendering of the bundled script.
    pub fn fixture_en() -> Self {
        Self::from_toml_str(include_str!("../../fixtures/feedback_en.toml"))
            .expect("bundled fixture parses")
    }
}
