use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ScoringClient;
use crate::corpus::read_to_string;
use crate::error::{Error, Result};

/// One scoring rule. Rules are tried in order; the first that applies wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum MockRule {
    /// Applies when every given predicate holds.
    Match {
        #[serde(default)]
        prompt_contains: Option<String>,
        #[serde(default)]
        continuation: Option<String>,
        score: f64,
    },
    /// Rewards the label(s) mentioned most often in the prompt as whole
    /// words. With in-context exemplars this is the exemplar majority label.
    /// Applies only when the continuation is one of `labels`.
    ExemplarMajority { labels: Vec<String>, hit: f64, miss: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MockSpec {
    pub rules: Vec<MockRule>,
    /// Score for inputs no rule matches.
    pub floor: f64,
    /// Generation output; `{prompt}` is replaced with the prompt.
    pub generate: String,
}

impl Default for MockSpec {
    fn default() -> Self {
        MockSpec {
            rules: Vec::new(),
            floor: -100.0,
            generate: "{prompt}".into(),
        }
    }
}

/// Deterministic rule-table scorer for offline runs.
#[derive(Debug, Clone, Default)]
pub struct MockScorer {
    spec: MockSpec,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Non-overlapping occurrences of `needle` bounded by non-word characters.
pub(crate) fn count_whole_word(haystack: &str, needle: &str) -> usize {
    if needle.is_empty() {
        return 0;
    }
    let mut count = 0;
    let mut start = 0;
    while let Some(pos) = haystack[start..].find(needle) {
        let begin = start + pos;
        let end = begin + needle.len();
        let before_ok = haystack[..begin].chars().next_back().is_none_or(|c| !is_word_char(c));
        let after_ok = haystack[end..].chars().next().is_none_or(|c| !is_word_char(c));
        if before_ok && after_ok {
            count += 1;
            start = end;
        } else {
            start = begin + needle.chars().next().map_or(1, char::len_utf8);
        }
    }
    count
}

impl MockScorer {
    pub fn new(spec: MockSpec) -> Self {
        MockScorer { spec }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: MockSpec = serde_json::from_str(text).map_err(|e| Error::Parse {
            location: "mock rules".into(),
            message: e.to_string(),
        })?;
        Ok(MockScorer::new(spec))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&read_to_string(path.as_ref())?)
    }

    pub fn spec(&self) -> &MockSpec {
        &self.spec
    }
}

impl ScoringClient for MockScorer {
    fn score(&self, prompt: &str, continuation: &str) -> Result<f64> {
        for rule in &self.spec.rules {
            match rule {
                MockRule::Match {
                    prompt_contains,
                    continuation: cont,
                    score,
                } => {
                    let prompt_ok = prompt_contains.as_deref().is_none_or(|s| prompt.contains(s));
                    let cont_ok = cont.as_deref().is_none_or(|c| c == continuation);
                    if prompt_ok && cont_ok {
                        return Ok(*score);
                    }
                }
                MockRule::ExemplarMajority { labels, hit, miss } => {
                    if !labels.iter().any(|l| l == continuation) {
                        continue;
                    }
                    let counts: Vec<usize> = labels.iter().map(|l| count_whole_word(prompt, l)).collect();
                    let best = counts.iter().copied().max().unwrap_or(0);
                    let mine = count_whole_word(prompt, continuation);
                    return Ok(if mine == best { *hit } else { *miss });
                }
            }
        }
        Ok(self.spec.floor)
    }

    fn generate(&self, prompt: &str) -> Result<String> {
        Ok(self.spec.generate.replace("{prompt}", prompt))
    }
}
