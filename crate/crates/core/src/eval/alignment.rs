use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{LanguageTag, Lexicon};
use crate::error::{Error, Result};
use crate::similarity::{DenseVector, EmbedItem, EmbeddingProvider};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentQualityReport {
    pub lang_pair: String,
    pub k: usize,
    pub accuracy_at_k: f64,
    /// Source words evaluated.
    pub n_words: usize,
    pub hits: usize,
    /// Source words skipped for lack of a vector (their own or every gold
    /// translation's).
    pub n_missing: usize,
    /// Target-side words in the ranking pool.
    pub n_candidates: usize,
}

pub fn lexicon_key(lang: &LanguageTag, word: &str) -> String {
    format!("{lang}:{word}")
}

/// Vectors for `words`, `None` where the provider has none. Tries one
/// batched call first and falls back to per-word calls.
fn fetch(provider: &dyn EmbeddingProvider, lang: &LanguageTag, words: &[&str]) -> Result<Vec<Option<DenseVector>>> {
    let keys: Vec<String> = words.iter().map(|w| lexicon_key(lang, w)).collect();
    let items: Vec<EmbedItem<'_>> = keys
        .iter()
        .zip(words)
        .map(|(key, text)| EmbedItem { key, text })
        .collect();
    match provider.embed(&items) {
        Ok(v) => Ok(v.into_iter().map(Some).collect()),
        Err(Error::MissingEmbedding(_)) => items
            .iter()
            .map(|it| match provider.embed(std::slice::from_ref(it)) {
                Ok(mut v) => Ok(v.pop()),
                Err(Error::MissingEmbedding(_)) => Ok(None),
                Err(e) => Err(e),
            })
            .collect(),
        Err(e) => Err(e),
    }
}

/// Word-level cross-lingual retrieval accuracy@k.
///
/// Each distinct source word ranks every distinct target-side lexicon word
/// by cosine similarity (ties by ascending word). It scores a hit when any
/// of its gold translations lands in the top `k`.
pub fn word_retrieval_accuracy(
    lexicon: &Lexicon,
    provider: &dyn EmbeddingProvider,
    k: usize,
) -> Result<AlignmentQualityReport> {
    if lexicon.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if k == 0 {
        return Err(Error::invalid("k must be ≥ 1"));
    }
    let mut gold: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for e in &lexicon.entries {
        gold.entry(&e.src_word).or_default().insert(&e.tgt_word);
    }
    let targets: Vec<&str> = lexicon
        .entries
        .iter()
        .map(|e| e.tgt_word.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let sources: Vec<&str> = gold.keys().copied().collect();

    let tgt_vecs = fetch(provider, &lexicon.tgt_lang, &targets)?;
    let pool: Vec<(&str, DenseVector)> = targets
        .iter()
        .zip(tgt_vecs)
        .filter_map(|(w, v)| v.map(|v| (*w, v)))
        .collect();
    let pooled: BTreeSet<&str> = pool.iter().map(|(w, _)| *w).collect();
    let src_vecs = fetch(provider, &lexicon.src_lang, &sources)?;

    let mut hits = 0;
    let mut n_words = 0;
    let mut n_missing = 0;
    for (word, vec) in sources.iter().zip(src_vecs) {
        let golds = &gold[word];
        let Some(vec) = vec.filter(|_| golds.iter().any(|g| pooled.contains(g))) else {
            n_missing += 1;
            continue;
        };
        n_words += 1;
        let mut ranked: Vec<(f64, &str)> = pool
            .iter()
            .map(|(w, v)| Ok((vec.cosine(v)?, *w)))
            .collect::<Result<_>>()?;
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        if ranked.iter().take(k).any(|(_, w)| golds.contains(w)) {
            hits += 1;
        }
    }
    if n_words == 0 {
        return Err(Error::invalid("no lexicon word has vectors on both sides"));
    }
    Ok(AlignmentQualityReport {
        lang_pair: format!("{}-{}", lexicon.src_lang, lexicon.tgt_lang),
        k,
        accuracy_at_k: hits as f64 / n_words as f64,
        n_words,
        hits,
        n_missing,
        n_candidates: pool.len(),
    })
}
