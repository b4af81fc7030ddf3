//! Instruction-data generation for cross-lingual alignment.
//!
//! Four objectives are built from a parallel corpus: denoising a perturbed
//! sentence given its translation as context (TLM), translation (MT),
//! cross-lingual semantic similarity with balanced yes/no samples (XSS), and
//! monolingual denoising (MLM). Every sample keeps its template index and
//! placeholder values in `meta`, so the prompt can be re-rendered from the
//! record alone. [`replay`] interleaves the generated data with replayed
//! samples from an earlier training set.

mod replay;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{LanguageNames, LanguageTag, ParallelPair};
use crate::error::{Error, Result};
use crate::prompting::{render, template, RenderContext, TaskKind};
use crate::rng::{derive_seed, sample_indices, seeded};

pub use replay::{interleave_replay, BatchRef, BatchSource, ReplayMode, ReplayPlan};

pub const DEFAULT_MASK_RATIO: f64 = 0.15;
pub const DEFAULT_MASK_TOKEN: &str = "<mask>";
pub const XSS_POSITIVE: &str = "Yes";
pub const XSS_NEGATIVE: &str = "No";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationConfig {
    pub mask_ratio: f64,
    pub mask_token: String,
    pub seed: u64,
}

impl PerturbationConfig {
    pub fn new(seed: u64) -> Self {
        PerturbationConfig {
            mask_ratio: DEFAULT_MASK_RATIO,
            mask_token: DEFAULT_MASK_TOKEN.to_owned(),
            seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        PerturbationConfig { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mask_ratio > 0.0 && self.mask_ratio < 1.0) {
            return Err(Error::invalid(format!(
                "mask_ratio must be in (0, 1), got {}",
                self.mask_ratio
            )));
        }
        Ok(())
    }

    /// `ceil(mask_ratio * n)`, capped so at least one token survives.
    pub fn mask_count(&self, n: usize) -> usize {
        let raw = self.mask_ratio * n as f64;
        // 0.15 * 20 is not exactly 3.0 in binary; snap near-integers first.
        let m = if (raw - raw.round()).abs() < 1e-9 {
            raw.round()
        } else {
            raw.ceil()
        };
        (m as usize).min(n.saturating_sub(1))
    }
}

/// Replaces a seeded uniform choice of positions with the mask token.
pub fn perturb<S: AsRef<str>>(tokens: &[S], config: &PerturbationConfig) -> Result<Vec<String>> {
    if tokens.is_empty() {
        return Err(Error::invalid("cannot perturb an empty token list"));
    }
    config.validate()?;
    let mut out: Vec<String> = tokens.iter().map(|t| t.as_ref().to_owned()).collect();
    let m = config.mask_count(out.len());
    for i in sample_indices(&mut seeded(config.seed), out.len(), m) {
        out[i] = config.mask_token.clone();
    }
    Ok(out)
}

fn perturb_text(text: &str, config: &PerturbationConfig) -> Result<String> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    Ok(perturb(&tokens, config)?.join(" "))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Tlm,
    Mt,
    Xss,
    Mlm,
}

impl Objective {
    pub const ALL: [Objective; 4] = [Objective::Tlm, Objective::Mt, Objective::Xss, Objective::Mlm];

    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Tlm => "tlm",
            Objective::Mt => "mt",
            Objective::Xss => "xss",
            Objective::Mlm => "mlm",
        }
    }

    pub fn task_kind(self) -> TaskKind {
        match self {
            Objective::Tlm => TaskKind::Tlm,
            Objective::Mt => TaskKind::Mt,
            Objective::Xss => TaskKind::Xss,
            Objective::Mlm => TaskKind::Mlm,
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Objective::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown objective {s:?} (expected tlm, mt, xss or mlm)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Source side to target side of the pair.
    Fwd,
    Rev,
}

impl Direction {
    fn as_str(self) -> &'static str {
        match self {
            Direction::Fwd => "fwd",
            Direction::Rev => "rev",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub template: usize,
    pub pair_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xss_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distractor_id: Option<String>,
    /// Seed used for the perturbation, when there was one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Placeholder values the prompt was rendered with.
    pub fill: RenderContext,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructSample {
    pub id: String,
    pub objective: Objective,
    pub prompt: String,
    pub target: String,
    pub src_lang: LanguageTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tgt_lang: Option<LanguageTag>,
    pub meta: SampleMeta,
}

impl InstructSample {
    /// Renders the prompt again from the template manifest and `meta`.
    pub fn rerender(&self) -> Result<String> {
        render(
            template(self.objective.task_kind(), self.meta.template)?,
            &self.meta.fill,
        )
    }
}

fn oriented(pair: &ParallelPair, direction: Direction) -> (&str, &LanguageTag, &str, &LanguageTag) {
    match direction {
        Direction::Fwd => (&pair.src_text, &pair.src_lang, &pair.tgt_text, &pair.tgt_lang),
        Direction::Rev => (&pair.tgt_text, &pair.tgt_lang, &pair.src_text, &pair.src_lang),
    }
}

/// Denoise `Y` given `X`. With `Fwd`, `X` is the source side.
pub fn make_tlm(
    pair: &ParallelPair,
    template_idx: usize,
    direction: Direction,
    config: &PerturbationConfig,
    names: &LanguageNames,
) -> Result<InstructSample> {
    let tpl = template(TaskKind::Tlm, template_idx)?;
    let (x, x_lang, y, y_lang) = oriented(pair, direction);
    let fill = RenderContext::new()
        .with("INPUT_TEXT", perturb_text(y, config)?)
        .with("INPUT_LANG", names.name(y_lang)?)
        .with("CONTEXT", x)
        .with("CONTEXT_LANG", names.name(x_lang)?)
        .with("LABEL_TEXT", "");
    Ok(InstructSample {
        id: format!("{}:tlm:{}", pair.id, direction.as_str()),
        objective: Objective::Tlm,
        prompt: render(tpl, &fill)?,
        target: y.to_owned(),
        src_lang: x_lang.clone(),
        tgt_lang: Some(y_lang.clone()),
        meta: SampleMeta {
            template: template_idx,
            pair_id: pair.id.clone(),
            direction: Some(direction),
            xss_label: None,
            distractor_id: None,
            seed: Some(config.seed),
            fill,
        },
    })
}

pub fn make_mt(
    pair: &ParallelPair,
    template_idx: usize,
    direction: Direction,
    names: &LanguageNames,
) -> Result<InstructSample> {
    let tpl = template(TaskKind::Mt, template_idx)?;
    let (x, x_lang, y, y_lang) = oriented(pair, direction);
    let fill = RenderContext::new()
        .with("SOURCE_TEXT", x)
        .with("SOURCE_LANG", names.name(x_lang)?)
        .with("TARGET_LANG", names.name(y_lang)?)
        .with("TARGET_TEXT", "");
    Ok(InstructSample {
        id: format!("{}:mt:{}", pair.id, direction.as_str()),
        objective: Objective::Mt,
        prompt: render(tpl, &fill)?,
        target: y.to_owned(),
        src_lang: x_lang.clone(),
        tgt_lang: Some(y_lang.clone()),
        meta: SampleMeta {
            template: template_idx,
            pair_id: pair.id.clone(),
            direction: Some(direction),
            xss_label: None,
            distractor_id: None,
            seed: None,
            fill,
        },
    })
}

fn xss_sample(
    pair: &ParallelPair,
    tgt_text: &str,
    template_idx: usize,
    label: &str,
    distractor: Option<&ParallelPair>,
    names: &LanguageNames,
) -> Result<InstructSample> {
    let tpl = template(TaskKind::Xss, template_idx)?;
    let fill = RenderContext::new()
        .with("SOURCE_TEXT", pair.src_text.as_str())
        .with("SOURCE_LANG", names.name(&pair.src_lang)?)
        .with("TARGET_TEXT", tgt_text)
        .with("TARGET_LANG", names.name(&pair.tgt_lang)?)
        .with("LABEL", "");
    let polarity = if distractor.is_some() { "neg" } else { "pos" };
    Ok(InstructSample {
        id: format!("{}:xss:{polarity}", pair.id),
        objective: Objective::Xss,
        prompt: render(tpl, &fill)?,
        target: label.to_owned(),
        src_lang: pair.src_lang.clone(),
        tgt_lang: Some(pair.tgt_lang.clone()),
        meta: SampleMeta {
            template: template_idx,
            pair_id: pair.id.clone(),
            direction: None,
            xss_label: Some(label.to_owned()),
            distractor_id: distractor.map(|d| d.id.clone()),
            seed: None,
            fill,
        },
    })
}

/// A matching sample and a mismatched one whose target sentence comes from
/// another pair with different target text, chosen uniformly with `seed`.
pub fn make_xss(
    pair: &ParallelPair,
    corpus: &[ParallelPair],
    template_idx: usize,
    seed: u64,
    names: &LanguageNames,
) -> Result<(InstructSample, InstructSample)> {
    let pool: Vec<&ParallelPair> = corpus
        .iter()
        .filter(|p| p.id != pair.id && p.tgt_text != pair.tgt_text)
        .collect();
    if pool.is_empty() {
        return Err(Error::invariant(
            &pair.id,
            "no negative available: every other pair has the same target text",
        ));
    }
    let distractor = pool[seeded(seed).gen_range(0..pool.len())];
    let positive = xss_sample(pair, &pair.tgt_text, template_idx, XSS_POSITIVE, None, names)?;
    let negative = xss_sample(
        pair,
        &distractor.tgt_text,
        template_idx,
        XSS_NEGATIVE,
        Some(distractor),
        names,
    )?;
    Ok((positive, negative))
}

/// Denoise a perturbed sentence in a single language. `id_stem` prefixes
/// the sample id.
pub fn make_mlm(
    id_stem: &str,
    pair_id: &str,
    text: &str,
    lang: &LanguageTag,
    template_idx: usize,
    config: &PerturbationConfig,
    names: &LanguageNames,
) -> Result<InstructSample> {
    let tpl = template(TaskKind::Mlm, template_idx)?;
    let fill = RenderContext::new()
        .with("SOURCE_TEXT", perturb_text(text, config)?)
        .with("SOURCE_LANG", names.name(lang)?)
        .with("TARGET_TEXT", "");
    Ok(InstructSample {
        id: id_stem.to_owned(),
        objective: Objective::Mlm,
        prompt: render(tpl, &fill)?,
        target: text.to_owned(),
        src_lang: lang.clone(),
        tgt_lang: None,
        meta: SampleMeta {
            template: template_idx,
            pair_id: pair_id.to_owned(),
            direction: None,
            xss_label: None,
            distractor_id: None,
            seed: Some(config.seed),
            fill,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateChoice {
    /// Slot `s` of pair `i` uses template `(2i + s) mod 6`.
    #[default]
    Cycle,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateOptions {
    pub objectives: Vec<Objective>,
    pub templates: TemplateChoice,
    pub seed: u64,
    pub mask_ratio: f64,
    pub mask_token: String,
    /// TLM samples per direction, each with its own perturbation.
    pub tlm_repeats: usize,
}

impl GenerateOptions {
    pub fn new(objectives: Vec<Objective>, seed: u64) -> Self {
        GenerateOptions {
            objectives,
            templates: TemplateChoice::Cycle,
            seed,
            mask_ratio: DEFAULT_MASK_RATIO,
            mask_token: DEFAULT_MASK_TOKEN.to_owned(),
            tlm_repeats: 1,
        }
    }

    fn perturbation(&self, seed: u64) -> PerturbationConfig {
        PerturbationConfig {
            mask_ratio: self.mask_ratio,
            mask_token: self.mask_token.clone(),
            seed,
        }
    }
}

fn template_for(choice: TemplateChoice, kind: TaskKind, slot: usize) -> usize {
    match choice {
        TemplateChoice::Cycle => slot % crate::prompting::template_count(kind),
        TemplateChoice::Fixed(i) => i,
    }
}

/// Objective, repeat and direction slot: the order of samples within a pair.
type SampleKey = (Objective, usize, usize);

fn pair_samples(
    i: usize,
    pair: &ParallelPair,
    corpus: &[ParallelPair],
    opts: &GenerateOptions,
    names: &LanguageNames,
) -> Result<Vec<(SampleKey, InstructSample)>> {
    let mut out = Vec::new();
    let mut objectives = opts.objectives.clone();
    objectives.sort_unstable();
    objectives.dedup();
    for obj in objectives {
        let kind = obj.task_kind();
        match obj {
            Objective::Tlm => {
                for r in 0..opts.tlm_repeats {
                    for dir in [Direction::Fwd, Direction::Rev] {
                        let mut id = format!("{}:tlm:{}", pair.id, dir.as_str());
                        if r > 0 {
                            id.push_str(&format!(":{r}"));
                        }
                        let seed = derive_seed(opts.seed, &[&id]);
                        let slot = 2 * (i * opts.tlm_repeats + r) + dir.slot();
                        let mut s = make_tlm(
                            pair,
                            template_for(opts.templates, kind, slot),
                            dir,
                            &opts.perturbation(seed),
                            names,
                        )?;
                        s.id = id;
                        out.push(((obj, r, dir.slot()), s));
                    }
                }
            }
            Objective::Mt => {
                for dir in [Direction::Fwd, Direction::Rev] {
                    let t = template_for(opts.templates, kind, 2 * i + dir.slot());
                    out.push(((obj, 0, dir.slot()), make_mt(pair, t, dir, names)?));
                }
            }
            Objective::Xss => {
                let seed = derive_seed(opts.seed, &[&pair.id, "xss"]);
                let t = template_for(opts.templates, kind, i);
                let (pos, neg) = make_xss(pair, corpus, t, seed, names)?;
                out.push(((obj, 0, 0), pos));
                out.push(((obj, 0, 1), neg));
            }
            Objective::Mlm => {
                let sides = [
                    (&pair.src_text, &pair.src_lang, "src"),
                    (&pair.tgt_text, &pair.tgt_lang, "tgt"),
                ];
                for (side, (text, lang, tag)) in sides.into_iter().enumerate() {
                    let id = format!("{}:mlm:{tag}", pair.id);
                    let seed = derive_seed(opts.seed, &[&id]);
                    let t = template_for(opts.templates, kind, 2 * i + side);
                    let s = make_mlm(&id, &pair.id, text, lang, t, &opts.perturbation(seed), names)?;
                    out.push(((obj, 0, side), s));
                }
            }
        }
    }
    Ok(out)
}

/// All samples for the selected objectives, ordered by pair id, then
/// objective (tlm, mt, xss, mlm), then repeat and direction.
pub fn generate_dataset(
    corpus: &[ParallelPair],
    opts: &GenerateOptions,
    names: &LanguageNames,
) -> Result<Vec<InstructSample>> {
    if opts.objectives.is_empty() {
        return Err(Error::invalid("at least one objective is required"));
    }
    if opts.tlm_repeats == 0 {
        return Err(Error::invalid("tlm_repeats must be ≥ 1"));
    }
    opts.perturbation(opts.seed).validate()?;
    if let TemplateChoice::Fixed(idx) = opts.templates {
        for obj in &opts.objectives {
            template(obj.task_kind(), idx)?;
        }
    }
    let per_pair: Vec<_> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, pair)| pair_samples(i, pair, corpus, opts, names).map(|s| (pair.id.as_str(), s)))
        .collect::<Result<_>>()?;
    let mut keyed: Vec<((&str, SampleKey), InstructSample)> = per_pair
        .into_iter()
        .flat_map(|(pid, samples)| samples.into_iter().map(move |(k, s)| ((pid, k), s)))
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(keyed.into_iter().map(|(_, s)| s).collect())
}

/// Sample counts per objective, in objective order.
pub fn count_by_objective(samples: &[InstructSample]) -> BTreeMap<Objective, usize> {
    let mut counts = BTreeMap::new();
    for s in samples {
        *counts.entry(s.objective).or_insert(0) += 1;
    }
    counts
}
