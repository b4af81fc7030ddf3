use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;

use super::vector::DenseVector;
use crate::corpus::read_to_string;
use crate::error::{Error, Result};

/// One text to embed. `key` is an example id, `<pair_id>#src`/`#tgt` for
/// parallel sides, or `<lang>:<word>` for lexicon words.
#[derive(Debug, Clone, Copy)]
pub struct EmbedItem<'a> {
    pub key: &'a str,
    pub text: &'a str,
}

/// Source of dense sentence or word vectors. Implementations must return
/// one vector per item, in item order.
pub trait EmbeddingProvider: Send + Sync {
    fn embed(&self, items: &[EmbedItem<'_>]) -> Result<Vec<DenseVector>>;
}

/// Vectors precomputed into a JSONL file of `{"key": str, "vector": [f64]}`.
#[derive(Debug, Clone, Default)]
pub struct FileEmbeddings {
    vectors: HashMap<String, DenseVector>,
    dim: Option<usize>,
}

#[derive(Deserialize)]
struct Record {
    key: String,
    vector: DenseVector,
}

impl FileEmbeddings {
    pub fn from_jsonl_str(name: &str, text: &str) -> Result<Self> {
        let mut out = FileEmbeddings::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: Record = serde_json::from_str(line).map_err(|e| Error::Parse {
                location: format!("{name}:{}", i + 1),
                message: e.to_string(),
            })?;
            out.insert(rec.key, rec.vector)?;
        }
        Ok(out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let name = path.display().to_string();
        Self::from_jsonl_str(&name, &read_to_string(path)?)
    }

    pub fn insert(&mut self, key: impl Into<String>, vector: DenseVector) -> Result<()> {
        match self.dim {
            Some(d) if d != vector.dim() => return Err(Error::DimensionMismatch(d, vector.dim())),
            _ => self.dim = Some(vector.dim()),
        }
        self.vectors.insert(key.into(), vector);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&DenseVector> {
        self.vectors.get(key)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.vectors.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

impl EmbeddingProvider for FileEmbeddings {
    fn embed(&self, items: &[EmbedItem<'_>]) -> Result<Vec<DenseVector>> {
        items
            .iter()
            .map(|it| {
                self.vectors
                    .get(it.key)
                    .cloned()
                    .ok_or_else(|| Error::MissingEmbedding(it.key.to_owned()))
            })
            .collect()
    }
}
