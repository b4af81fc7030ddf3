//! Synthetic inputs shared by the benchmarks under `benches/`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xalign_core::corpus::{LanguageTag, ParallelPair};
use xalign_core::similarity::{DenseVector, Document, FileEmbeddings};

fn vocabulary(size: usize) -> Vec<String> {
    (0..size).map(|i| format!("w{i}")).collect()
}

fn sentence<R: Rng>(rng: &mut R, vocab: &[String], len: usize) -> String {
    (0..len)
        .map(|_| vocab.choose(rng).expect("non-empty vocabulary").as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

/// `n` documents of 8 to 24 words over a 2000-word vocabulary, with a
/// `dim`-dimensional vector per document plus one for the key `query`.
pub fn documents(n: usize, dim: usize, seed: u64) -> (Vec<Document>, FileEmbeddings, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = vocabulary(2000);
    let mut emb = FileEmbeddings::default();
    let vector = |rng: &mut ChaCha8Rng| DenseVector::new((0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let docs = (0..n)
        .map(|i| {
            let id = format!("d{i:06}");
            emb.insert(id.clone(), vector(&mut rng)).unwrap();
            let len = rng.gen_range(8..=24);
            Document::new(id, sentence(&mut rng, &vocab, len))
        })
        .collect();
    emb.insert("query", vector(&mut rng)).unwrap();
    let query = sentence(&mut rng, &vocab, 12);
    (docs, emb, query)
}

/// `n` English-Indonesian pairs of 6 to 20 words.
pub fn parallel(n: usize, seed: u64) -> Vec<ParallelPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = vocabulary(5000);
    (0..n)
        .map(|i| {
            let (a, b) = (rng.gen_range(6..=20), rng.gen_range(6..=20));
            ParallelPair {
                id: format!("p{i:06}"),
                src_lang: LanguageTag::new("eng").unwrap(),
                tgt_lang: LanguageTag::new("ind").unwrap(),
                src_text: sentence(&mut rng, &vocab, a),
                tgt_text: sentence(&mut rng, &vocab, b),
            }
        })
        .collect()
}
