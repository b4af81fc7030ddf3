//! Declarative run configuration for `evaluate` and `retrieve`.
//!
//! Relative paths are resolved against the directory holding the config
//! file. HTTP endpoints come from the config or, when set, from the
//! `XALIGN_*_URL` environment variables, which take precedence.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use xalign_core::corpus::{LabelRegistry, LanguageNames, LanguageTag};
use xalign_core::prompting::TaskKind;
use xalign_core::retrieval::{RetrievalStrategy, StrategyKind, DEFAULT_K};
use xalign_core::rng::sha256_hex;
use xalign_core::scoring::{
    AlignmentMode, FixtureMt, FixtureScorer, HttpEmbeddings, HttpMt, HttpScorer, IdentityMt, LabelLanguageMode,
    MockScorer, MockSpec, MtClient, ScoringClient, TaskConfig, EMBED_URL_ENV, MT_URL_ENV, SCORER_URL_ENV,
};
use xalign_core::similarity::{EmbeddingProvider, FileEmbeddings, SimilarityConfig};
use xalign_core::Error;

fn default_templates() -> Vec<usize> {
    vec![0, 1, 2]
}

fn default_inflight() -> usize {
    8
}

fn default_k() -> usize {
    DEFAULT_K
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: String,
    /// Defaults to `task` when that names an evaluation template set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_kind: Option<TaskKind>,
    #[serde(default = "default_templates")]
    pub templates: Vec<usize>,
    pub source_lang: LanguageTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_inflight")]
    pub max_inflight: usize,
    #[serde(default)]
    pub length_norm: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub data: DataPaths,
    #[serde(default)]
    pub retrieval: RetrievalSection,
    #[serde(default)]
    pub alignment: AlignmentSection,
    #[serde(default)]
    pub clients: ClientsSection,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub language_names: BTreeMap<String, String>,
    #[serde(skip)]
    base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPaths {
    pub queries: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_src: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_para: Option<PathBuf>,
    /// Label-set JSON; the built-in table when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_sets: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    #[default]
    ZeroShot,
    Random,
    Semantic,
    Translation,
    TranslateTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrievalSection {
    #[serde(default)]
    pub strategy: StrategyName,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub similarity: SimilarityConfig,
}

impl Default for RetrievalSection {
    fn default() -> Self {
        RetrievalSection {
            strategy: StrategyName::ZeroShot,
            k: DEFAULT_K,
            similarity: SimilarityConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlignmentSection {
    #[serde(default)]
    pub mode: AlignmentMode,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub label_language: LabelLanguageMode,
    #[serde(default)]
    pub similarity: SimilarityConfig,
}

impl Default for AlignmentSection {
    fn default() -> Self {
        AlignmentSection {
            mode: AlignmentMode::None,
            k: DEFAULT_K,
            label_language: LabelLanguageMode::SourceOnly,
            similarity: SimilarityConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScorerSpec {
    /// Rule-table scorer; no rules means every score is the floor.
    Mock {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rules: Option<PathBuf>,
    },
    Fixture {
        path: PathBuf,
    },
    Http {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        url: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MtSpec {
    Identity,
    Fixture {
        path: PathBuf,
    },
    Http {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        url: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EmbeddingSpec {
    File {
        path: PathBuf,
    },
    Http {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        url: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClientsSection {
    pub scorer: ScorerSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mt: Option<MtSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embeddings: Option<EmbeddingSpec>,
}

impl Default for ClientsSection {
    fn default() -> Self {
        ClientsSection {
            scorer: ScorerSpec::Http { url: None },
            mt: None,
            embeddings: None,
        }
    }
}

fn config_err(message: impl Into<String>) -> Error {
    Error::Config(message.into())
}

fn endpoint(configured: &Option<String>, env: &str, what: &str) -> Result<String, Error> {
    std::env::var(env)
        .ok()
        .filter(|v| !v.is_empty())
        .or_else(|| configured.clone())
        .ok_or_else(|| config_err(format!("{what} endpoint missing: set its url or {env}")))
}

impl RunConfig {
    pub fn from_toml_str(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, Error> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_owned).unwrap_or_default();
        Self::from_toml_str(&text, base)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    pub fn template_kind(&self) -> Result<TaskKind, Error> {
        let kind = match self.template_kind {
            Some(k) => k,
            None => self.task.parse().map_err(|_| {
                config_err(format!(
                    "task {:?} has no template set of its own; set template_kind",
                    self.task
                ))
            })?,
        };
        if !kind.is_evaluation() {
            return Err(config_err(format!("{kind} templates cannot be used for evaluation")));
        }
        Ok(kind)
    }

    fn referenced_paths(&self) -> Vec<(&'static str, &Path)> {
        let mut out = vec![("data.queries", self.data.queries.as_path())];
        let opt = [
            ("data.d_src", self.data.d_src.as_deref()),
            ("data.d_para", self.data.d_para.as_deref()),
            ("data.label_sets", self.data.label_sets.as_deref()),
        ];
        out.extend(opt.into_iter().filter_map(|(k, p)| p.map(|p| (k, p))));
        match &self.clients.scorer {
            ScorerSpec::Mock { rules: Some(p) } => out.push(("clients.scorer.rules", p)),
            ScorerSpec::Fixture { path } => out.push(("clients.scorer.path", path)),
            _ => {}
        }
        if let Some(MtSpec::Fixture { path }) = &self.clients.mt {
            out.push(("clients.mt.path", path));
        }
        if let Some(EmbeddingSpec::File { path }) = &self.clients.embeddings {
            out.push(("clients.embeddings.path", path));
        }
        out
    }

    /// Checks everything that can be checked without touching a client.
    pub fn validate(&self) -> Result<(), Error> {
        for (key, p) in self.referenced_paths() {
            if !self.resolve(p).is_file() {
                return Err(config_err(format!("{key}: file not found: {}", p.display())));
            }
        }
        self.template_kind()?;
        if self.templates.is_empty() {
            return Err(config_err("templates must not be empty"));
        }
        if self.max_inflight == 0 {
            return Err(config_err("max_inflight must be ≥ 1"));
        }
        let strategy = self.retrieval.strategy;
        if strategy == StrategyName::Random && self.seed.is_none() {
            return Err(config_err("seed is required for random retrieval"));
        }
        if strategy != StrategyName::ZeroShot && self.data.d_src.is_none() {
            return Err(config_err("data.d_src is required for in-context retrieval"));
        }
        if strategy == StrategyName::Translation && self.data.d_para.is_none() {
            return Err(config_err("data.d_para is required for translation retrieval"));
        }
        if strategy == StrategyName::TranslateTest && self.clients.mt.is_none() {
            return Err(config_err("clients.mt is required for translate_test retrieval"));
        }
        if self.alignment.mode == AlignmentMode::Query && self.data.d_para.is_none() {
            return Err(config_err("data.d_para is required for query alignment"));
        }
        let needs_embeddings = (strategy != StrategyName::ZeroShot
            && strategy != StrategyName::Random
            && self.retrieval.similarity.needs_embeddings())
            || (self.alignment.mode == AlignmentMode::Query && self.alignment.similarity.needs_embeddings());
        if needs_embeddings && self.clients.embeddings.is_none() {
            return Err(config_err(
                "clients.embeddings is required by the configured similarity",
            ));
        }
        Ok(())
    }

    /// sha256 of the canonical JSON form of the configuration, without the
    /// output path.
    pub fn config_hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        let value = serde_json::to_value(&canonical).expect("config serializes");
        sha256_hex(value.to_string())
    }

    pub fn strategy(&self) -> Option<RetrievalStrategy> {
        let kind = match self.retrieval.strategy {
            StrategyName::ZeroShot => return None,
            StrategyName::Random => StrategyKind::Random {
                seed: self.seed.unwrap_or_default(),
            },
            StrategyName::Semantic => StrategyKind::Semantic,
            StrategyName::Translation => StrategyKind::Translation,
            StrategyName::TranslateTest => StrategyKind::TranslateTest,
        };
        Some(
            RetrievalStrategy::new(kind)
                .with_k(self.retrieval.k)
                .with_similarity(self.retrieval.similarity),
        )
    }

    pub fn task_config(&self) -> Result<TaskConfig, Error> {
        let mut tc = TaskConfig::new(self.task.clone(), self.template_kind()?, self.source_lang.clone());
        tc.templates = self.templates.clone();
        tc.strategy = self.strategy();
        tc.alignment = self.alignment.mode;
        tc.alignment_k = self.alignment.k;
        tc.alignment_similarity = self.alignment.similarity;
        tc.label_language = self.alignment.label_language;
        tc.length_norm = self.length_norm;
        tc.max_inflight = self.max_inflight;
        Ok(tc)
    }

    pub fn label_registry(&self) -> Result<LabelRegistry, Error> {
        match &self.data.label_sets {
            Some(p) => LabelRegistry::load(self.resolve(p)),
            None => Ok(LabelRegistry::builtin()),
        }
    }

    pub fn language_names(&self) -> Result<LanguageNames, Error> {
        let mut names = LanguageNames::default();
        for (tag, name) in &self.language_names {
            names = names.with_override(&tag.parse()?, name.clone());
        }
        Ok(names)
    }

    pub fn scorer(&self) -> Result<Box<dyn ScoringClient>, Error> {
        Ok(match &self.clients.scorer {
            ScorerSpec::Mock { rules: None } => Box::new(MockScorer::new(MockSpec::default())),
            ScorerSpec::Mock { rules: Some(p) } => Box::new(MockScorer::load(self.resolve(p))?),
            ScorerSpec::Fixture { path } => Box::new(FixtureScorer::load(self.resolve(path))?),
            ScorerSpec::Http { url } => Box::new(HttpScorer::new(&endpoint(url, SCORER_URL_ENV, "scorer")?)),
        })
    }

    pub fn mt(&self) -> Result<Option<Box<dyn MtClient>>, Error> {
        Ok(match &self.clients.mt {
            None => None,
            Some(MtSpec::Identity) => Some(Box::new(IdentityMt)),
            Some(MtSpec::Fixture { path }) => Some(Box::new(FixtureMt::load(self.resolve(path))?)),
            Some(MtSpec::Http { url }) => Some(Box::new(HttpMt::new(&endpoint(url, MT_URL_ENV, "MT")?))),
        })
    }

    pub fn embeddings(&self) -> Result<Option<Arc<dyn EmbeddingProvider>>, Error> {
        Ok(match &self.clients.embeddings {
            None => None,
            Some(EmbeddingSpec::File { path }) => Some(Arc::new(FileEmbeddings::load(self.resolve(path))?)),
            Some(EmbeddingSpec::Http { url }) => Some(Arc::new(HttpEmbeddings::new(&endpoint(
                url,
                EMBED_URL_ENV,
                "embedding",
            )?))),
        })
    }
}
