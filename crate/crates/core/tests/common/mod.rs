//! Independent reference implementations used as test oracles, plus random
//! fixture builders. Nothing here calls the code under test except to build
//! inputs.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, OnceLock};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use unicode_normalization::UnicodeNormalization;
use xalign_core::similarity::{DenseVector, Document, FileEmbeddings, Method, SimilarityConfig};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Lowercase, NFC, split on runs of punctuation or whitespace.
pub fn oracle_tokenize(text: &str) -> Vec<String> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"[\p{P}\s]+").unwrap());
    let lowered: String = text.nfc().collect::<String>().to_lowercase().nfc().collect();
    re.split(&lowered)
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

fn dense_counts(tokens: &[String], vocab: &[String]) -> Vec<f64> {
    let pos: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let mut v = vec![0.0; vocab.len()];
    for t in tokens {
        if let Some(&i) = pos.get(t.as_str()) {
            v[i] += 1.0;
        }
    }
    v
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let d = norm(a) * norm(b);
    if d == 0.0 {
        0.0
    } else {
        dot(a, b) / d
    }
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = norm(&v);
    if n == 0.0 {
        v
    } else {
        v.into_iter().map(|x| x / n).collect()
    }
}

/// Dense, vocabulary-sorted TF-IDF with `idf = ln((1+N)/(1+df)) + 1`.
pub struct OracleTfidf {
    vocab: Vec<String>,
    idf: Vec<f64>,
    counts: Vec<Vec<f64>>,
}

impl OracleTfidf {
    pub fn new(texts: &[&str]) -> Self {
        let tokens: Vec<Vec<String>> = texts.iter().map(|t| oracle_tokenize(t)).collect();
        let vocab: Vec<String> = tokens
            .iter()
            .flatten()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let counts: Vec<Vec<f64>> = tokens.iter().map(|t| dense_counts(t, &vocab)).collect();
        let n = texts.len() as f64;
        let idf = (0..vocab.len())
            .map(|j| {
                let df = counts.iter().filter(|c| c[j] > 0.0).count() as f64;
                ((1.0 + n) / (1.0 + df)).ln() + 1.0
            })
            .collect();
        OracleTfidf { vocab, idf, counts }
    }

    fn weigh(&self, counts: &[f64]) -> Vec<f64> {
        unit(counts.iter().zip(&self.idf).map(|(c, i)| c * i).collect())
    }

    pub fn tfidf_scores(&self, query: &str) -> Vec<f64> {
        let q = self.weigh(&dense_counts(&oracle_tokenize(query), &self.vocab));
        self.counts.iter().map(|c| cosine(&q, &self.weigh(c))).collect()
    }

    pub fn bow_scores(&self, query: &str, binary: bool) -> Vec<f64> {
        let bin = |v: &[f64]| -> Vec<f64> {
            if binary {
                v.iter().map(|&x| if x > 0.0 { 1.0 } else { 0.0 }).collect()
            } else {
                v.to_vec()
            }
        };
        let q = bin(&dense_counts(&oracle_tokenize(query), &self.vocab));
        self.counts.iter().map(|c| cosine(&q, &bin(c))).collect()
    }
}

pub fn embedding_cosine(a: &[f64], b: &[f64]) -> f64 {
    let (mut d, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        d += x * y;
        na += x * x;
        nb += y * y;
    }
    let denom = na.sqrt() * nb.sqrt();
    if denom == 0.0 {
        0.0
    } else {
        (d / denom).clamp(-1.0, 1.0)
    }
}

pub fn min_max(v: &[f64]) -> Vec<f64> {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 0.0 {
        return vec![0.0; v.len()];
    }
    v.iter().map(|x| (x - lo) / (hi - lo)).collect()
}

/// A retrieval problem with explicit vectors for every document and the query.
pub struct Problem {
    pub docs: Vec<(String, String)>,
    pub doc_vecs: Vec<Vec<f64>>,
    pub query: String,
    pub query_vec: Vec<f64>,
}

impl Problem {
    pub fn documents(&self) -> Vec<Document> {
        self.docs
            .iter()
            .map(|(id, t)| Document::new(id.as_str(), t.as_str()))
            .collect()
    }

    pub fn provider(&self) -> Arc<FileEmbeddings> {
        let mut e = FileEmbeddings::default();
        for ((id, _), v) in self.docs.iter().zip(&self.doc_vecs) {
            e.insert(id.as_str(), DenseVector::new(v.clone()).unwrap()).unwrap();
        }
        e.insert("query", DenseVector::new(self.query_vec.clone()).unwrap())
            .unwrap();
        Arc::new(e)
    }

    /// Brute force: score everything, full sort, ties by ascending id.
    pub fn oracle_ranking(&self, cfg: &SimilarityConfig) -> Vec<String> {
        let texts: Vec<&str> = self.docs.iter().map(|(_, t)| t.as_str()).collect();
        let idx = OracleTfidf::new(&texts);
        let single = |m: Method| -> Vec<f64> {
            match m {
                Method::Bow => idx.bow_scores(&self.query, cfg.bow_binary),
                Method::Tfidf => idx.tfidf_scores(&self.query),
                Method::Embedding => self
                    .doc_vecs
                    .iter()
                    .map(|v| embedding_cosine(&self.query_vec, v))
                    .collect(),
                Method::Ensemble => unreachable!(),
            }
        };
        let scores = match cfg.method {
            Method::Ensemble => {
                let w = &cfg.ensemble_weights;
                let parts = [
                    (Method::Bow, w.bow),
                    (Method::Tfidf, w.tfidf),
                    (Method::Embedding, w.embedding),
                ];
                let total: f64 = parts.iter().map(|p| p.1).sum();
                let mut acc = vec![0.0; self.docs.len()];
                for (m, wt) in parts {
                    if wt == 0.0 {
                        continue;
                    }
                    for (a, v) in acc.iter_mut().zip(min_max(&single(m))) {
                        *a += wt * v;
                    }
                }
                acc.into_iter().map(|v| v / total).collect()
            }
            m => single(m),
        };
        let mut order: Vec<usize> = (0..self.docs.len()).collect();
        order.sort_by(|&a, &b| {
            scores[b]
                .partial_cmp(&scores[a])
                .unwrap()
                .then_with(|| self.docs[a].0.cmp(&self.docs[b].0))
        });
        order.into_iter().map(|i| self.docs[i].0.clone()).collect()
    }
}

const WORDS: [&str; 24] = [
    "rumah", "makan", "air", "jalan", "besar", "kecil", "pasar", "laut", "gunung", "kota", "desa", "hujan", "panas",
    "dingin", "baru", "lama", "café", "naïve", "Über", "straße", "ikan", "nasi", "kopi", "teh",
];
const PUNCT: [&str; 5] = [",", ".", "!", "?", " -"];

fn sentence(rng: &mut ChaCha8Rng, max_len: usize) -> String {
    let n = rng.gen_range(0..=max_len);
    let mut s = String::new();
    for i in 0..n {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(WORDS.choose(rng).unwrap());
        if rng.gen_bool(0.15) {
            s.push_str(PUNCT.choose(rng).unwrap());
        }
    }
    if s.is_empty() {
        s.push_str("...");
    }
    s
}

fn random_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// `n` documents with shuffled ids, some duplicated texts and vectors so
/// exact ties occur, and a random query.
pub fn random_problem(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Problem {
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    let mut docs: Vec<(String, String)> = Vec::with_capacity(n);
    let mut doc_vecs: Vec<Vec<f64>> = Vec::with_capacity(n);
    for id in ids {
        let (text, v) = if !docs.is_empty() && rng.gen_bool(0.1) {
            let j = rng.gen_range(0..docs.len());
            (docs[j].1.clone(), doc_vecs[j].clone())
        } else {
            (sentence(rng, 8), random_vec(rng, dim))
        };
        docs.push((format!("doc{id:05}"), text));
        doc_vecs.push(v);
    }
    Problem {
        docs,
        doc_vecs,
        query: sentence(rng, 6),
        query_vec: random_vec(rng, dim),
    }
}

/// Accuracy, weighted F1, macro F1 by direct per-class counting.
pub fn reference_metrics(gold: &[String], pred: &[String]) -> (f64, f64, f64) {
    let n = gold.len() as f64;
    let classes: BTreeSet<&String> = gold.iter().collect();
    let correct = gold.iter().zip(pred).filter(|(g, p)| g == p).count() as f64;
    let mut weighted = 0.0;
    let mut macro_sum = 0.0;
    for c in &classes {
        let tp = gold.iter().zip(pred).filter(|(g, p)| g == c && p == c).count() as f64;
        let fp = gold.iter().zip(pred).filter(|(g, p)| g != c && p == c).count() as f64;
        let fn_ = gold.iter().zip(pred).filter(|(g, p)| g == c && p != c).count() as f64;
        let f1 = if tp == 0.0 {
            0.0
        } else {
            2.0 * tp / (2.0 * tp + fp + fn_)
        };
        let support = tp + fn_;
        weighted += support / n * f1;
        macro_sum += f1;
    }
    (correct / n, weighted, macro_sum / classes.len() as f64)
}

/// Random gold/prediction lists over at most `max_classes` labels.
pub fn random_predictions(rng: &mut ChaCha8Rng, max_n: usize, max_classes: usize) -> (Vec<String>, Vec<String>) {
    let n = rng.gen_range(1..=max_n);
    let k = rng.gen_range(1..=max_classes);
    let label = |rng: &mut ChaCha8Rng| format!("c{}", rng.gen_range(0..k));
    let gold: Vec<String> = (0..n).map(|_| label(rng)).collect();
    let pred: Vec<String> = gold
        .iter()
        .map(|g| if rng.gen_bool(0.5) { g.clone() } else { label(rng) })
        .collect();
    (gold, pred)
}

/// Exact ranking for word retrieval: cosine descending, ties by word.
pub fn oracle_word_hits(
    src: &BTreeMap<String, Vec<f64>>,
    tgt: &BTreeMap<String, Vec<f64>>,
    gold: &BTreeMap<String, BTreeSet<String>>,
    k: usize,
) -> usize {
    let mut hits = 0;
    for (word, v) in src {
        let mut ranked: Vec<(f64, &String)> = tgt.iter().map(|(w, u)| (embedding_cosine(v, u), w)).collect();
        ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then_with(|| a.1.cmp(b.1)));
        if ranked.iter().take(k).any(|(_, w)| gold[word].contains(*w)) {
            hits += 1;
        }
    }
    hits
}
