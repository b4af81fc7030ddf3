//! Exemplar retrieval for cross-lingual in-context learning.
//!
//! Four strategies pick the k source-language exemplars shown before a
//! target-language query:
//!
//! * `random`: seeded uniform sample without replacement;
//! * `semantic`: rank exemplars directly against the query text;
//! * `translation`: find the parallel pair whose target side is closest to
//!   the query, then rank exemplars against that pair's source side;
//! * `translate_test`: machine-translate the query, then rank exemplars
//!   against the translation.
//!
//! A separate retriever selects the parallel pairs used for query alignment.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::{LabeledExample, LanguageTag, ParallelPair};
use crate::error::{Error, Result};
use crate::rng;
use crate::scoring::MtClient;
use crate::similarity::{CandidatePool, Document, EmbeddingProvider, Query, RankedCandidate, SimilarityConfig};

pub const DEFAULT_K: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategyKind {
    Random { seed: u64 },
    Semantic,
    Translation,
    TranslateTest,
}

impl StrategyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::Random { .. } => "random",
            StrategyKind::Semantic => "semantic",
            StrategyKind::Translation => "translation",
            StrategyKind::TranslateTest => "translate_test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetrievalStrategy {
    pub kind: StrategyKind,
    pub similarity: SimilarityConfig,
    pub k: usize,
}

impl RetrievalStrategy {
    pub fn new(kind: StrategyKind) -> Self {
        RetrievalStrategy {
            kind,
            similarity: SimilarityConfig::default(),
            k: DEFAULT_K,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_similarity(mut self, similarity: SimilarityConfig) -> Self {
        self.similarity = similarity;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k must be ≥ 1"));
        }
        self.similarity.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub strategy: String,
    pub score: f64,
}

/// Exemplars best-first, with the score that selected each one.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExemplarSet {
    pub exemplars: Vec<LabeledExample>,
    pub provenance: Vec<Provenance>,
}

impl ExemplarSet {
    pub fn len(&self) -> usize {
        self.exemplars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exemplars.is_empty()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.exemplars.iter().map(|e| e.id.as_str()).collect()
    }
}

/// Parallel pairs chosen for query alignment, best-first.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AlignmentPairs {
    pub pairs: Vec<ParallelPair>,
    pub scores: Vec<f64>,
}

/// Retrieval state over one exemplar dataset. Exemplars without a label are
/// dropped on construction.
pub struct ExemplarRetriever {
    exemplars: Vec<LabeledExample>,
    pool: CandidatePool,
    provider: Option<Arc<dyn EmbeddingProvider>>,
}

impl ExemplarRetriever {
    pub fn new(d_src: &[LabeledExample], provider: Option<Arc<dyn EmbeddingProvider>>) -> Result<Self> {
        let exemplars: Vec<LabeledExample> = d_src.iter().filter(|e| !e.label.is_empty()).cloned().collect();
        if exemplars.is_empty() {
            return Err(Error::invalid("exemplar dataset has no labeled examples"));
        }
        let docs = exemplars.iter().map(|e| Document::new(&e.id, &e.text)).collect();
        Ok(ExemplarRetriever {
            pool: CandidatePool::new(docs, provider.clone()),
            exemplars,
            provider,
        })
    }

    pub fn exemplars(&self) -> &[LabeledExample] {
        &self.exemplars
    }

    /// Language of the exemplars (taken from the first one).
    pub fn language(&self) -> &LanguageTag {
        &self.exemplars[0].lang
    }

    fn exemplar_set(&self, ranked: Vec<RankedCandidate>, strategy: &str) -> ExemplarSet {
        let mut set = ExemplarSet::default();
        for r in ranked {
            set.exemplars.push(self.exemplars[r.index].clone());
            set.provenance.push(Provenance {
                strategy: strategy.to_owned(),
                score: r.raw_score,
            });
        }
        set
    }

    /// Seeded uniform sample. The stream for each query is seeded with
    /// `derive_seed(seed, [query.id])`, then the first k slots of a partial
    /// Fisher-Yates shuffle are taken.
    pub fn random(&self, query: &LabeledExample, strategy: &RetrievalStrategy) -> Result<ExemplarSet> {
        strategy.validate()?;
        let StrategyKind::Random { seed } = strategy.kind else {
            return Err(Error::invalid("random retrieval requires a seed"));
        };
        let mut rng = rng::seeded(rng::derive_seed(seed, &[&query.id]));
        let picks = rng::sample_indices(&mut rng, self.exemplars.len(), strategy.k);
        Ok(ExemplarSet {
            exemplars: picks.iter().map(|&i| self.exemplars[i].clone()).collect(),
            provenance: picks
                .iter()
                .map(|_| Provenance {
                    strategy: "random".into(),
                    score: 0.0,
                })
                .collect(),
        })
    }

    /// Ranks exemplars directly against the (target-language) query.
    pub fn semantic(&self, query: &LabeledExample, strategy: &RetrievalStrategy) -> Result<ExemplarSet> {
        strategy.validate()?;
        let ranked = self
            .pool
            .top_k(Query::new(&query.text, &query.id), strategy.k, &strategy.similarity)?;
        Ok(self.exemplar_set(ranked, "semantic"))
    }

    /// Two-stage retrieval through the single closest parallel pair.
    pub fn translation(
        &self,
        query: &LabeledExample,
        d_para: &[ParallelPair],
        strategy: &RetrievalStrategy,
    ) -> Result<ExemplarSet> {
        strategy.validate()?;
        let src_lang = self.language().clone();
        let pairs: Vec<ParallelPair> = d_para
            .iter()
            .filter(|p| p.tgt_lang == query.lang && p.src_lang == src_lang)
            .cloned()
            .collect();
        let bridge = AlignmentRetriever::new(pairs, &query.lang, self.provider.clone())?;
        let best = bridge.retrieve(query, 1, &strategy.similarity)?;
        let pair = &best.pairs[0];
        let ranked = self.pool.top_k(
            Query::new(&pair.src_text, &pair.src_key()),
            strategy.k,
            &strategy.similarity,
        )?;
        Ok(self.exemplar_set(ranked, "translation"))
    }

    /// Translates the query into the exemplar language and ranks against the
    /// translation, which is returned alongside the exemplars.
    pub fn translate_test(
        &self,
        query: &LabeledExample,
        mt: &dyn MtClient,
        strategy: &RetrievalStrategy,
    ) -> Result<(ExemplarSet, String)> {
        strategy.validate()?;
        let translated = mt.translate(&query.text, &query.lang, self.language())?;
        let key = format!("{}#mt", query.id);
        let ranked = self
            .pool
            .top_k(Query::new(&translated, &key), strategy.k, &strategy.similarity)?;
        Ok((self.exemplar_set(ranked, "translate_test"), translated))
    }

    /// Dispatches on the strategy kind. Translation needs `d_para`,
    /// translate-test needs `mt`; the translated query is returned when used.
    pub fn retrieve(
        &self,
        query: &LabeledExample,
        strategy: &RetrievalStrategy,
        d_para: Option<&[ParallelPair]>,
        mt: Option<&dyn MtClient>,
    ) -> Result<(ExemplarSet, Option<String>)> {
        match strategy.kind {
            StrategyKind::Random { .. } => Ok((self.random(query, strategy)?, None)),
            StrategyKind::Semantic => Ok((self.semantic(query, strategy)?, None)),
            StrategyKind::Translation => {
                let d_para =
                    d_para.ok_or_else(|| Error::Config("translation retrieval needs a parallel corpus".into()))?;
                Ok((self.translation(query, d_para, strategy)?, None))
            }
            StrategyKind::TranslateTest => {
                let mt = mt.ok_or_else(|| Error::Config("translate-test retrieval needs an MT client".into()))?;
                let (set, text) = self.translate_test(query, mt, strategy)?;
                Ok((set, Some(text)))
            }
        }
    }
}

/// Ranks parallel pairs by monolingual similarity between the query and
/// each pair's target side.
pub struct AlignmentRetriever {
    pairs: Vec<ParallelPair>,
    pool: CandidatePool,
}

impl AlignmentRetriever {
    /// Keeps the pairs whose target language is `lang`.
    pub fn new(
        pairs: Vec<ParallelPair>,
        lang: &LanguageTag,
        provider: Option<Arc<dyn EmbeddingProvider>>,
    ) -> Result<Self> {
        let pairs: Vec<ParallelPair> = pairs.into_iter().filter(|p| &p.tgt_lang == lang).collect();
        if pairs.is_empty() {
            return Err(Error::invalid(format!("no parallel pairs with target language {lang}")));
        }
        let docs = pairs
            .iter()
            .map(|p| Document::new(&p.id, &p.tgt_text).with_key(p.tgt_key()))
            .collect();
        Ok(AlignmentRetriever {
            pool: CandidatePool::new(docs, provider),
            pairs,
        })
    }

    pub fn retrieve(&self, query: &LabeledExample, k: usize, config: &SimilarityConfig) -> Result<AlignmentPairs> {
        let ranked = self.pool.top_k(Query::new(&query.text, &query.id), k, config)?;
        Ok(AlignmentPairs {
            scores: ranked.iter().map(|r| r.score).collect(),
            pairs: ranked.into_iter().map(|r| self.pairs[r.index].clone()).collect(),
        })
    }
}

pub fn retrieve_random(
    query: &LabeledExample,
    d_src: &[LabeledExample],
    strategy: &RetrievalStrategy,
) -> Result<ExemplarSet> {
    ExemplarRetriever::new(d_src, None)?.random(query, strategy)
}

pub fn retrieve_semantic(
    query: &LabeledExample,
    d_src: &[LabeledExample],
    strategy: &RetrievalStrategy,
    provider: Option<Arc<dyn EmbeddingProvider>>,
) -> Result<ExemplarSet> {
    ExemplarRetriever::new(d_src, provider)?.semantic(query, strategy)
}

pub fn retrieve_translation(
    query: &LabeledExample,
    d_src: &[LabeledExample],
    d_para: &[ParallelPair],
    strategy: &RetrievalStrategy,
    provider: Option<Arc<dyn EmbeddingProvider>>,
) -> Result<ExemplarSet> {
    ExemplarRetriever::new(d_src, provider)?.translation(query, d_para, strategy)
}

pub fn retrieve_translate_test(
    query: &LabeledExample,
    d_src: &[LabeledExample],
    mt: &dyn MtClient,
    strategy: &RetrievalStrategy,
    provider: Option<Arc<dyn EmbeddingProvider>>,
) -> Result<(ExemplarSet, String)> {
    ExemplarRetriever::new(d_src, provider)?.translate_test(query, mt, strategy)
}

pub fn retrieve_alignment_pairs(
    query: &LabeledExample,
    d_para: &[ParallelPair],
    k: usize,
    config: &SimilarityConfig,
    provider: Option<Arc<dyn EmbeddingProvider>>,
) -> Result<AlignmentPairs> {
    if k == 0 {
        return Err(Error::invalid("k must be ≥ 1"));
    }
    AlignmentRetriever::new(d_para.to_vec(), &query.lang, provider)?.retrieve(query, k, config)
}
