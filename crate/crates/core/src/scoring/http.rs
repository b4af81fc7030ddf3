//! JSON-over-HTTP clients for remote scorer, translation and embedding
//! services. Translation and embedding responses are memoized per client.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{MtClient, ScoringClient};
use crate::corpus::LanguageTag;
use crate::error::{Error, Result};
use crate::similarity::{DenseVector, EmbedItem, EmbeddingProvider};

pub const SCORER_URL_ENV: &str = "XALIGN_SCORER_URL";
pub const MT_URL_ENV: &str = "XALIGN_MT_URL";
pub const EMBED_URL_ENV: &str = "XALIGN_EMBED_URL";

const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone)]
struct Endpoint {
    base: String,
    agent: ureq::Agent,
}

impl Endpoint {
    fn new(base: &str, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        Endpoint {
            base: base.trim_end_matches('/').to_owned(),
            agent,
        }
    }

    fn post<B: Serialize, R: DeserializeOwned>(&self, path: &str, body: &B) -> Result<R> {
        let url = format!("{}{}", self.base, path);
        let response = self
            .agent
            .post(&url)
            .send_json(body)
            .map_err(|e| Error::Client(format!("POST {url}: {e}")))?;
        response
            .into_body()
            .read_json()
            .map_err(|e| Error::Client(format!("POST {url}: invalid response: {e}")))
    }
}

#[derive(Serialize)]
struct ScoreRequest<'a> {
    prompt: &'a str,
    continuation: &'a str,
}

#[derive(Deserialize)]
struct ScoreResponse {
    logprob: f64,
}

#[derive(Serialize)]
struct GenerateRequest<'a> {
    prompt: &'a str,
}

#[derive(Deserialize)]
struct TextResponse {
    text: String,
}

/// `POST /score` and `POST /generate`.
#[derive(Debug, Clone)]
pub struct HttpScorer {
    endpoint: Endpoint,
}

impl HttpScorer {
    pub fn new(base_url: &str) -> Self {
        Self::with_timeout(base_url, DEFAULT_TIMEOUT)
    }

    pub fn with_timeout(base_url: &str, timeout: Duration) -> Self {
        HttpScorer {
            endpoint: Endpoint::new(base_url, timeout),
        }
    }
}

impl ScoringClient for HttpScorer {
    fn score(&self, prompt: &str, continuation: &str) -> Result<f64> {
        let resp: ScoreResponse = self.endpoint.post("/score", &ScoreRequest { prompt, continuation })?;
        Ok(resp.logprob)
    }

    fn generate(&self, prompt: &str) -> Result<String> {
        let resp: TextResponse = self.endpoint.post("/generate", &GenerateRequest { prompt })?;
        Ok(resp.text)
    }
}

#[derive(Serialize)]
struct TranslateRequest<'a> {
    text: &'a str,
    src: &'a str,
    tgt: &'a str,
}

/// `POST /translate`.
#[derive(Debug)]
pub struct HttpMt {
    endpoint: Endpoint,
    memo: Mutex<HashMap<(String, String, String), String>>,
}

impl HttpMt {
    pub fn new(base_url: &str) -> Self {
        Self::with_timeout(base_url, DEFAULT_TIMEOUT)
    }

    pub fn with_timeout(base_url: &str, timeout: Duration) -> Self {
        HttpMt {
            endpoint: Endpoint::new(base_url, timeout),
            memo: Mutex::new(HashMap::new()),
        }
    }
}

impl MtClient for HttpMt {
    fn translate(&self, text: &str, src: &LanguageTag, tgt: &LanguageTag) -> Result<String> {
        let key = (text.to_owned(), src.to_string(), tgt.to_string());
        if let Some(hit) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(hit.clone());
        }
        let resp: TextResponse = self.endpoint.post(
            "/translate",
            &TranslateRequest {
                text,
                src: src.as_str(),
                tgt: tgt.as_str(),
            },
        )?;
        self.memo.lock().expect("memo lock").insert(key, resp.text.clone());
        Ok(resp.text)
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: Vec<&'a str>,
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

/// `POST /embed`, batched over the texts not yet memoized.
#[derive(Debug)]
pub struct HttpEmbeddings {
    endpoint: Endpoint,
    memo: Mutex<HashMap<String, DenseVector>>,
}

impl HttpEmbeddings {
    pub fn new(base_url: &str) -> Self {
        Self::with_timeout(base_url, DEFAULT_TIMEOUT)
    }

    pub fn with_timeout(base_url: &str, timeout: Duration) -> Self {
        HttpEmbeddings {
            endpoint: Endpoint::new(base_url, timeout),
            memo: Mutex::new(HashMap::new()),
        }
    }
}

impl EmbeddingProvider for HttpEmbeddings {
    fn embed(&self, items: &[EmbedItem<'_>]) -> Result<Vec<DenseVector>> {
        let missing: Vec<&str> = {
            let memo = self.memo.lock().expect("memo lock");
            let mut seen = std::collections::HashSet::new();
            items
                .iter()
                .map(|it| it.text)
                .filter(|t| !memo.contains_key(*t) && seen.insert(*t))
                .collect()
        };
        if !missing.is_empty() {
            let resp: EmbedResponse = self.endpoint.post("/embed", &EmbedRequest { texts: missing.clone() })?;
            if resp.vectors.len() != missing.len() {
                return Err(Error::Client(format!(
                    "embed returned {} vectors for {} texts",
                    resp.vectors.len(),
                    missing.len()
                )));
            }
            let mut memo = self.memo.lock().expect("memo lock");
            for (text, values) in missing.into_iter().zip(resp.vectors) {
                memo.insert(text.to_owned(), DenseVector::new(values)?);
            }
        }
        let memo = self.memo.lock().expect("memo lock");
        Ok(items.iter().map(|it| memo[it.text].clone()).collect())
    }
}
