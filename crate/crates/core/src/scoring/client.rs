use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::corpus::{read_to_string, LanguageTag};
use crate::error::{Error, Result};
use crate::rng::sha256_hex;

/// Language-model access: continuation log-probabilities and generation.
pub trait ScoringClient: Send + Sync {
    /// Log-probability of `continuation` given `prompt`.
    fn score(&self, prompt: &str, continuation: &str) -> Result<f64>;

    fn generate(&self, prompt: &str) -> Result<String>;
}

pub trait MtClient: Send + Sync {
    fn translate(&self, text: &str, src: &LanguageTag, tgt: &LanguageTag) -> Result<String>;
}

/// Returns its input unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityMt;

impl MtClient for IdentityMt {
    fn translate(&self, text: &str, _src: &LanguageTag, _tgt: &LanguageTag) -> Result<String> {
        Ok(text.to_owned())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreFixture {
    pub prompt_sha256: String,
    pub continuation: String,
    pub logprob: f64,
}

/// Replays recorded log-probabilities keyed by `(sha256(prompt), continuation)`.
#[derive(Debug, Clone, Default)]
pub struct FixtureScorer {
    table: HashMap<(String, String), f64>,
}

impl FixtureScorer {
    pub fn from_jsonl_str(name: &str, text: &str) -> Result<Self> {
        let mut table = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: ScoreFixture = serde_json::from_str(line).map_err(|e| Error::Parse {
                location: format!("{name}:{}", i + 1),
                message: e.to_string(),
            })?;
            table.insert((rec.prompt_sha256, rec.continuation), rec.logprob);
        }
        Ok(FixtureScorer { table })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_jsonl_str(&path.display().to_string(), &read_to_string(path)?)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl ScoringClient for FixtureScorer {
    fn score(&self, prompt: &str, continuation: &str) -> Result<f64> {
        let sha = sha256_hex(prompt);
        self.table
            .get(&(sha.clone(), continuation.to_owned()))
            .copied()
            .ok_or_else(|| Error::Client(format!("no fixture for prompt {sha} / {continuation:?}")))
    }

    fn generate(&self, _prompt: &str) -> Result<String> {
        Err(Error::Client("fixture scorer does not support generation".into()))
    }
}

/// Wraps a scorer and records every call so it can be replayed later with
/// [`FixtureScorer`].
pub struct RecordingScorer<'a> {
    inner: &'a dyn ScoringClient,
    calls: Mutex<BTreeMap<(String, String), f64>>,
}

impl<'a> RecordingScorer<'a> {
    pub fn new(inner: &'a dyn ScoringClient) -> Self {
        RecordingScorer {
            inner,
            calls: Mutex::new(BTreeMap::new()),
        }
    }

    /// Writes the recorded calls as fixture JSONL, sorted by key.
    pub fn write_fixture<W: Write>(&self, out: &mut W) -> Result<()> {
        let calls = self.calls.lock().expect("recorder lock poisoned");
        for ((sha, cont), logprob) in calls.iter() {
            let rec = ScoreFixture {
                prompt_sha256: sha.clone(),
                continuation: cont.clone(),
                logprob: *logprob,
            };
            writeln!(out, "{}", serde_json::to_string(&rec)?).map_err(|e| Error::io("<fixture>", e))?;
        }
        Ok(())
    }
}

impl ScoringClient for RecordingScorer<'_> {
    fn score(&self, prompt: &str, continuation: &str) -> Result<f64> {
        let logprob = self.inner.score(prompt, continuation)?;
        self.calls
            .lock()
            .expect("recorder lock poisoned")
            .insert((sha256_hex(prompt), continuation.to_owned()), logprob);
        Ok(logprob)
    }

    fn generate(&self, prompt: &str) -> Result<String> {
        self.inner.generate(prompt)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MtFixture {
    text: String,
    src: LanguageTag,
    tgt: LanguageTag,
    translation: String,
}

/// Translations replayed from JSONL records `{"text","src","tgt","translation"}`.
#[derive(Debug, Clone, Default)]
pub struct FixtureMt {
    table: HashMap<(String, LanguageTag, LanguageTag), String>,
}

impl FixtureMt {
    pub fn from_jsonl_str(name: &str, text: &str) -> Result<Self> {
        let mut table = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: MtFixture = serde_json::from_str(line).map_err(|e| Error::Parse {
                location: format!("{name}:{}", i + 1),
                message: e.to_string(),
            })?;
            table.insert((rec.text, rec.src, rec.tgt), rec.translation);
        }
        Ok(FixtureMt { table })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_jsonl_str(&path.display().to_string(), &read_to_string(path)?)
    }
}

impl MtClient for FixtureMt {
    fn translate(&self, text: &str, src: &LanguageTag, tgt: &LanguageTag) -> Result<String> {
        self.table
            .get(&(text.to_owned(), src.clone(), tgt.clone()))
            .cloned()
            .ok_or_else(|| Error::Client(format!("no translation fixture for {text:?} ({src}->{tgt})")))
    }
}
