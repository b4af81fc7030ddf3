use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ScoringClient;
use crate::error::{Error, Result};
use crate::prompting::AssembledPrompt;
use crate::rng::sha256_hex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub query_id: String,
    pub chosen_label: String,
    pub per_label_scores: BTreeMap<String, f64>,
    /// sha256 of the prompt prefix shared by all candidates.
    pub prompt_hash: String,
}

/// Highest score wins; equal scores go to the lexicographically smallest label.
pub fn argmax_label(scores: &BTreeMap<String, f64>) -> Option<&str> {
    // BTreeMap iterates labels in ascending order, so keeping the first
    // strict maximum implements the tie rule.
    let mut best: Option<(&str, f64)> = None;
    for (label, &s) in scores {
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((label, s)),
        }
    }
    best.map(|(l, _)| l)
}

/// Picks the candidate label with the highest continuation log-probability.
///
/// All candidates must share one prompt prefix; only the trailing label
/// differs. Under that condition the prefix's own probability is a constant
/// factor, so comparing continuation scores selects the same label as
/// comparing joint prompt probabilities.
pub fn select_label(
    query_id: &str,
    candidates: &[AssembledPrompt],
    client: &dyn ScoringClient,
    length_norm: bool,
) -> Result<Prediction> {
    let first = candidates
        .first()
        .ok_or_else(|| Error::invalid("no candidate labels"))?;
    let prefix = first.prefix();
    let mut per_label_scores = BTreeMap::new();
    for cand in candidates {
        if !cand.full_text.ends_with(&cand.continuation) || cand.prefix() != prefix {
            return Err(Error::invariant(
                query_id,
                "candidate prompts do not share a common prefix",
            ));
        }
        let mut score = client.score(prefix, &cand.continuation)?;
        if !score.is_finite() {
            return Err(Error::Client(format!(
                "non-finite score for {query_id} / {:?}",
                cand.continuation
            )));
        }
        if length_norm {
            score /= cand.continuation.chars().count().max(1) as f64;
        }
        if per_label_scores.insert(cand.continuation.clone(), score).is_some() {
            return Err(Error::invariant(
                query_id,
                format!("duplicate candidate label {:?}", cand.continuation),
            ));
        }
    }
    let chosen_label = argmax_label(&per_label_scores)
        .expect("at least one candidate")
        .to_owned();
    Ok(Prediction {
        query_id: query_id.to_owned(),
        chosen_label,
        per_label_scores,
        prompt_hash: sha256_hex(prefix),
    })
}
