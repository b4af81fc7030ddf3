use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Tlm,
    Mt,
    Xss,
    Mlm,
    Sentiment,
    Emotion,
    Topic,
}

impl TaskKind {
    pub const ALL: [TaskKind; 7] = [
        TaskKind::Tlm,
        TaskKind::Mt,
        TaskKind::Xss,
        TaskKind::Mlm,
        TaskKind::Sentiment,
        TaskKind::Emotion,
        TaskKind::Topic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Tlm => "tlm",
            TaskKind::Mt => "mt",
            TaskKind::Xss => "xss",
            TaskKind::Mlm => "mlm",
            TaskKind::Sentiment => "sentiment",
            TaskKind::Emotion => "emotion",
            TaskKind::Topic => "topic",
        }
    }

    /// Evaluation kinds end with a `[LABELS_CHOICE]` slot.
    pub fn is_evaluation(self) -> bool {
        matches!(self, TaskKind::Sentiment | TaskKind::Emotion | TaskKind::Topic)
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TaskKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown task kind {s:?}")))
    }
}

/// Placeholders recognized inside template bodies.
pub const PLACEHOLDERS: [&str; 13] = [
    "INPUT",
    "OPTIONS",
    "LABELS_CHOICE",
    "SOURCE_TEXT",
    "TARGET_TEXT",
    "SOURCE_LANG",
    "TARGET_LANG",
    "INPUT_TEXT",
    "INPUT_LANG",
    "CONTEXT",
    "CONTEXT_LANG",
    "LABEL_TEXT",
    "LABEL",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub task_kind: TaskKind,
    pub index: usize,
    pub body: String,
}

impl PromptTemplate {
    /// Distinct placeholder names in order of first appearance.
    pub fn placeholders(&self) -> Vec<&'static str> {
        let mut out: Vec<&'static str> = Vec::new();
        for seg in super::segments(&self.body) {
            if let super::Segment::Slot(name) = seg {
                if !out.contains(&name) {
                    out.push(name);
                }
            }
        }
        out
    }
}

const MANIFEST: &str = include_str!("../../data/templates.json");

/// The built-in template manifest, in `(task_kind, index)` order.
pub fn manifest() -> &'static [PromptTemplate] {
    static TEMPLATES: OnceLock<Vec<PromptTemplate>> = OnceLock::new();
    TEMPLATES.get_or_init(|| {
        let mut t: Vec<PromptTemplate> = serde_json::from_str(MANIFEST).expect("template manifest is valid JSON");
        t.sort_by_key(|t| (t.task_kind, t.index));
        t
    })
}

pub fn templates_for(kind: TaskKind) -> impl Iterator<Item = &'static PromptTemplate> {
    manifest().iter().filter(move |t| t.task_kind == kind)
}

pub fn template_count(kind: TaskKind) -> usize {
    templates_for(kind).count()
}

pub fn template(kind: TaskKind, index: usize) -> Result<&'static PromptTemplate> {
    templates_for(kind)
        .find(|t| t.index == index)
        .ok_or_else(|| Error::TemplateOutOfRange {
            kind: kind.to_string(),
            index,
        })
}
