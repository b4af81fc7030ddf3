//! Text similarity and exact top-k retrieval.
//!
//! Four scoring methods share one interface: bag-of-words cosine, TF-IDF
//! cosine, embedding cosine, and an ensemble that min-max normalizes each
//! constituent method over the candidate set and takes their weighted mean.
//! Rankings break score ties by ascending candidate id.

mod embeddings;
mod tfidf;
mod tokenize;
mod vector;

use std::cmp::Ordering;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use embeddings::{EmbedItem, EmbeddingProvider, FileEmbeddings};
pub use tfidf::TfidfIndex;
pub use tokenize::tokenize;
pub use vector::{DenseVector, SparseVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bow,
    Tfidf,
    Embedding,
    Ensemble,
}

impl Method {
    pub const CONSTITUENTS: [Method; 3] = [Method::Bow, Method::Tfidf, Method::Embedding];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleWeights {
    pub bow: f64,
    pub tfidf: f64,
    pub embedding: f64,
}

impl Default for EnsembleWeights {
    fn default() -> Self {
        EnsembleWeights {
            bow: 1.0,
            tfidf: 1.0,
            embedding: 1.0,
        }
    }
}

impl EnsembleWeights {
    pub fn weight(&self, method: Method) -> f64 {
        match method {
            Method::Bow => self.bow,
            Method::Tfidf => self.tfidf,
            Method::Embedding => self.embedding,
            Method::Ensemble => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimilarityConfig {
    pub method: Method,
    pub ensemble_weights: EnsembleWeights,
    /// Use 0/1 term indicators instead of raw counts for bag-of-words.
    pub bow_binary: bool,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig {
            method: Method::Ensemble,
            ensemble_weights: EnsembleWeights::default(),
            bow_binary: false,
        }
    }
}

impl SimilarityConfig {
    pub fn single(method: Method) -> Self {
        SimilarityConfig {
            method,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let w = &self.ensemble_weights;
        let ws = [w.bow, w.tfidf, w.embedding];
        if ws.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::invalid("ensemble weights must be finite and non-negative"));
        }
        if self.method == Method::Ensemble && ws.iter().sum::<f64>() <= 0.0 {
            return Err(Error::invalid("ensemble weights must sum to a positive value"));
        }
        Ok(())
    }

    /// Whether scoring needs dense vectors.
    pub fn needs_embeddings(&self) -> bool {
        match self.method {
            Method::Embedding => true,
            Method::Ensemble => self.ensemble_weights.embedding > 0.0,
            _ => false,
        }
    }
}

/// A retrievable text. `key` addresses the embedding provider.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub key: String,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        let id = id.into();
        Document {
            key: id.clone(),
            id,
            text: text.into(),
        }
    }

    pub fn with_key(mut self, key: impl Into<String>) -> Self {
        self.key = key.into();
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Query<'a> {
    pub text: &'a str,
    pub key: &'a str,
}

impl<'a> Query<'a> {
    pub fn new(text: &'a str, key: &'a str) -> Self {
        Query { text, key }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub candidate_id: String,
    /// Min-max normalized score over the candidate set, in `[0, 1]`.
    pub score: f64,
    /// Score used for ranking: the method's raw similarity, or the ensemble mean.
    pub raw_score: f64,
    pub rank: usize,
    /// Position of the candidate in its pool.
    #[serde(skip)]
    pub index: usize,
}

/// Maps the minimum to 0 and the maximum to 1. A constant input maps to all zeros.
pub fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let Some(min) = values.iter().copied().reduce(f64::min) else {
        return Vec::new();
    };
    let max = values.iter().copied().fold(min, f64::max);
    let range = max - min;
    if range <= 0.0 {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - min) / range).collect()
}

/// Candidate ordering: higher score first, then ascending id.
pub fn rank_order(a: (f64, &str), b: (f64, &str)) -> Ordering {
    b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1))
}

/// Immutable retrieval pool over a fixed candidate set. Candidate embeddings
/// are fetched from the provider once, on first use.
pub struct CandidatePool {
    docs: Vec<Document>,
    index: Option<TfidfIndex>,
    provider: Option<Arc<dyn EmbeddingProvider>>,
    embeddings: OnceLock<Vec<DenseVector>>,
}

impl std::fmt::Debug for CandidatePool {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CandidatePool")
            .field("docs", &self.docs.len())
            .field("has_provider", &self.provider.is_some())
            .finish()
    }
}

impl CandidatePool {
    pub fn new(docs: Vec<Document>, provider: Option<Arc<dyn EmbeddingProvider>>) -> Self {
        let corpus: Vec<(&str, &str)> = docs.iter().map(|d| (d.id.as_str(), d.text.as_str())).collect();
        let index = TfidfIndex::build(&corpus).ok();
        CandidatePool {
            docs,
            index,
            provider,
            embeddings: OnceLock::new(),
        }
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn tfidf(&self) -> Option<&TfidfIndex> {
        self.index.as_ref()
    }

    fn provider(&self) -> Result<&dyn EmbeddingProvider> {
        self.provider
            .as_deref()
            .ok_or_else(|| Error::Config("embedding provider required for this similarity method".into()))
    }

    fn candidate_embeddings(&self) -> Result<&[DenseVector]> {
        if let Some(v) = self.embeddings.get() {
            return Ok(v);
        }
        let items: Vec<EmbedItem<'_>> = self
            .docs
            .iter()
            .map(|d| EmbedItem {
                key: &d.key,
                text: &d.text,
            })
            .collect();
        let vectors = self.provider()?.embed(&items)?;
        if vectors.len() != self.docs.len() {
            return Err(Error::Client(format!(
                "embedding provider returned {} vectors for {} items",
                vectors.len(),
                self.docs.len()
            )));
        }
        Ok(self.embeddings.get_or_init(|| vectors))
    }

    /// Raw scores of one constituent method for every candidate, in pool order.
    pub fn method_scores(&self, query: Query<'_>, method: Method, config: &SimilarityConfig) -> Result<Vec<f64>> {
        let Some(index) = &self.index else {
            return Ok(Vec::new());
        };
        match method {
            Method::Tfidf => {
                let q = index.transform(query.text);
                Ok((0..self.len()).map(|i| q.cosine(index.vector(i))).collect())
            }
            Method::Bow => {
                let binarize = |v: &SparseVector| {
                    if config.bow_binary {
                        SparseVector::from_entries(v.entries().iter().map(|&(t, _)| (t, 1.0)).collect())
                            .expect("indicator weights are valid")
                    } else {
                        v.clone()
                    }
                };
                let q = binarize(&index.count_vector(query.text));
                Ok((0..self.len()).map(|i| q.cosine(&binarize(index.counts(i)))).collect())
            }
            Method::Embedding => {
                let cands = self.candidate_embeddings()?;
                let q = self
                    .provider()?
                    .embed(&[EmbedItem {
                        key: query.key,
                        text: query.text,
                    }])?
                    .pop()
                    .ok_or_else(|| Error::MissingEmbedding(query.key.to_owned()))?;
                cands.iter().map(|c| q.cosine(c)).collect()
            }
            Method::Ensemble => Err(Error::invalid("ensemble is not a constituent method")),
        }
    }

    /// Ranking scores for every candidate, in pool order.
    pub fn scores(&self, query: Query<'_>, config: &SimilarityConfig) -> Result<Vec<f64>> {
        config.validate()?;
        if config.method != Method::Ensemble {
            return self.method_scores(query, config.method, config);
        }
        let weights = &config.ensemble_weights;
        let total: f64 = Method::CONSTITUENTS.iter().map(|&m| weights.weight(m)).sum();
        let mut combined = vec![0.0; self.len()];
        for method in Method::CONSTITUENTS {
            let w = weights.weight(method);
            if w == 0.0 {
                continue;
            }
            let normalized = min_max_normalize(&self.method_scores(query, method, config)?);
            for (acc, v) in combined.iter_mut().zip(normalized) {
                *acc += w * v;
            }
        }
        Ok(combined.into_iter().map(|v| v / total).collect())
    }

    /// Score of a single candidate. Needs the full candidate set because the
    /// ensemble normalizes over it.
    pub fn score(&self, query: Query<'_>, candidate_id: &str, config: &SimilarityConfig) -> Result<f64> {
        let pos = self
            .docs
            .iter()
            .position(|d| d.id == candidate_id)
            .ok_or_else(|| Error::invalid(format!("unknown candidate {candidate_id}")))?;
        Ok(self.scores(query, config)?[pos])
    }

    /// The `k` best candidates, best first; fewer when the pool is smaller.
    pub fn top_k(&self, query: Query<'_>, k: usize, config: &SimilarityConfig) -> Result<Vec<RankedCandidate>> {
        if k == 0 {
            return Err(Error::invalid("k must be ≥ 1"));
        }
        let raw = self.scores(query, config)?;
        let normalized = if config.method == Method::Ensemble {
            raw.clone()
        } else {
            min_max_normalize(&raw)
        };
        let cmp = |&a: &usize, &b: &usize| rank_order((raw[a], &self.docs[a].id), (raw[b], &self.docs[b].id));
        let mut order: Vec<usize> = (0..raw.len()).collect();
        if k < order.len() {
            order.select_nth_unstable_by(k - 1, cmp);
            order.truncate(k);
        }
        order.sort_unstable_by(cmp);
        Ok(order
            .into_iter()
            .enumerate()
            .map(|(r, i)| RankedCandidate {
                candidate_id: self.docs[i].id.clone(),
                score: normalized[i],
                raw_score: raw[i],
                rank: r + 1,
                index: i,
            })
            .collect())
    }
}

/// One-shot top-k over an ad hoc candidate list.
pub fn top_k(
    query: Query<'_>,
    candidates: Vec<Document>,
    k: usize,
    config: &SimilarityConfig,
    provider: Option<Arc<dyn EmbeddingProvider>>,
) -> Result<Vec<RankedCandidate>> {
    CandidatePool::new(candidates, provider).top_k(query, k, config)
}
