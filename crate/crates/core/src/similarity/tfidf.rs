use std::collections::{BTreeMap, BTreeSet};

use super::tokenize::tokenize;
use super::vector::SparseVector;
use crate::error::{Error, Result};

/// TF-IDF index with raw-count tf, smoothed idf `ln((1+N)/(1+df)) + 1` and
/// l2-normalized document vectors.
///
/// Term ids follow lexicographic term order, so vector entries are laid out
/// in the same order as a dense vocabulary-sorted representation.
#[derive(Debug, Clone)]
pub struct TfidfIndex {
    vocab: BTreeMap<String, u32>,
    idf: Vec<f64>,
    ids: Vec<String>,
    counts: Vec<SparseVector>,
    vectors: Vec<SparseVector>,
}

fn term_counts(tokens: &[String], vocab: &BTreeMap<String, u32>) -> Vec<(u32, f64)> {
    let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
    for tok in tokens {
        if let Some(&id) = vocab.get(tok) {
            *counts.entry(id).or_insert(0.0) += 1.0;
        }
    }
    counts.into_iter().collect()
}

impl TfidfIndex {
    pub fn build<I, S>(corpus: &[(I, S)]) -> Result<Self>
    where
        I: AsRef<str>,
        S: AsRef<str>,
    {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let tokenized: Vec<Vec<String>> = corpus.iter().map(|(_, t)| tokenize(t.as_ref())).collect();
        let terms: BTreeSet<&String> = tokenized.iter().flatten().collect();
        let vocab: BTreeMap<String, u32> = terms
            .into_iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();

        let mut df = vec![0usize; vocab.len()];
        let counts: Vec<SparseVector> = tokenized
            .iter()
            .map(|toks| {
                let entries = term_counts(toks, &vocab);
                for &(t, _) in &entries {
                    df[t as usize] += 1;
                }
                SparseVector::from_entries(entries)
            })
            .collect::<Result<_>>()?;

        let n = corpus.len() as f64;
        let idf: Vec<f64> = df.iter().map(|&d| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0).collect();

        let mut index = TfidfIndex {
            vocab,
            idf,
            ids: corpus.iter().map(|(id, _)| id.as_ref().to_owned()).collect(),
            counts,
            vectors: Vec::new(),
        };
        index.vectors = index.counts.iter().map(|c| index.weigh(c)).collect::<Result<_>>()?;
        Ok(index)
    }

    fn weigh(&self, counts: &SparseVector) -> Result<SparseVector> {
        let weighted = counts
            .entries()
            .iter()
            .map(|&(t, tf)| (t, tf * self.idf[t as usize]))
            .collect();
        Ok(SparseVector::from_entries(weighted)?.l2_normalized())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = (&str, u32)> {
        self.vocab.iter().map(|(t, &i)| (t.as_str(), i))
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.vocab.get(term).map(|&i| self.idf[i as usize])
    }

    /// L2-normalized TF-IDF vector of document `i`.
    pub fn vector(&self, i: usize) -> &SparseVector {
        &self.vectors[i]
    }

    /// Raw term-count vector of document `i`.
    pub fn counts(&self, i: usize) -> &SparseVector {
        &self.counts[i]
    }

    /// True when the document has no in-vocabulary tokens (zero vector).
    pub fn is_degenerate(&self, i: usize) -> bool {
        self.vectors[i].is_zero()
    }

    /// Term counts of unseen text; out-of-vocabulary terms are dropped.
    pub fn count_vector(&self, text: &str) -> SparseVector {
        SparseVector::from_entries(term_counts(&tokenize(text), &self.vocab)).expect("counts are positive and unique")
    }

    /// TF-IDF vector of unseen text under this index's idf.
    pub fn transform(&self, text: &str) -> SparseVector {
        self.weigh(&self.count_vector(text)).expect("weights are positive")
    }
}
