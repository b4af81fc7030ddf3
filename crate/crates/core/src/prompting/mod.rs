//! Template rendering and prompt assembly.
//!
//! A prompt is the concatenation of up to three blocks: in-context
//! exemplars, an alignment text, and the query rendered with a candidate
//! label in its final `[LABELS_CHOICE]` slot. Non-empty blocks are joined
//! by a blank line. Because the candidate label is always the last thing in
//! the prompt, every candidate of one query shares the same prefix.

mod templates;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{LabelRegistry, LabelSet, LanguageNames, LanguageTag};
use crate::error::{Error, Result};
use crate::retrieval::{AlignmentPairs, ExemplarSet};

pub use templates::{manifest, template, template_count, templates_for, PromptTemplate, TaskKind, PLACEHOLDERS};

/// Separator between non-empty prompt blocks.
pub const BLOCK_JOINER: &str = "\n\n";

pub(crate) enum Segment<'a> {
    Text(&'a str),
    Slot(&'static str),
}

/// Splits a template body into literal text and known placeholders.
pub(crate) fn segments(body: &str) -> Vec<Segment<'_>> {
    let mut out = Vec::new();
    let mut rest = body;
    while let Some(open) = rest.find('[') {
        let after = &rest[open + 1..];
        let slot = after.find(']').and_then(|close| {
            let name = &after[..close];
            PLACEHOLDERS.iter().find(|p| **p == name).map(|p| (*p, close))
        });
        match slot {
            Some((name, close)) => {
                if open > 0 {
                    out.push(Segment::Text(&rest[..open]));
                }
                out.push(Segment::Slot(name));
                rest = &after[close + 1..];
            }
            None => {
                out.push(Segment::Text(&rest[..=open]));
                rest = after;
            }
        }
    }
    if !rest.is_empty() {
        out.push(Segment::Text(rest));
    }
    out
}

/// Placeholder values for [`render`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RenderContext(BTreeMap<String, String>);

impl RenderContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: impl Into<String>) -> Self {
        self.insert(name, value);
        self
    }

    pub fn insert(&mut self, name: &str, value: impl Into<String>) {
        self.0.insert(name.to_owned(), value.into());
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.0.get(name).map(String::as_str)
    }
}

/// Substitutes every placeholder in one pass; values are inserted verbatim
/// and never re-scanned.
pub fn render(template: &PromptTemplate, context: &RenderContext) -> Result<String> {
    render_body(&template.body, context)
}

pub fn render_body(body: &str, context: &RenderContext) -> Result<String> {
    let mut out = String::with_capacity(body.len() + 64);
    for seg in segments(body) {
        match seg {
            Segment::Text(t) => out.push_str(t),
            Segment::Slot(name) => out.push_str(
                context
                    .get(name)
                    .ok_or_else(|| Error::MissingPlaceholder(name.to_owned()))?,
            ),
        }
    }
    Ok(out)
}

/// "a or b" for two options, "a, b, or c" for three or more.
pub fn format_options<S: AsRef<str>>(labels: &[S]) -> String {
    match labels {
        [] => String::new(),
        [only] => only.as_ref().to_owned(),
        [a, b] => format!("{} or {}", a.as_ref(), b.as_ref()),
        [init @ .., last] => {
            let head: Vec<&str> = init.iter().map(AsRef::as_ref).collect();
            format!("{}, or {}", head.join(", "), last.as_ref())
        }
    }
}

/// "x1 means y1, x2 means y2, and x3 means y3". A single item has no
/// conjunction; two items read "x1 means y1, and x2 means y2".
pub fn format_means_list<A: AsRef<str>, B: AsRef<str>>(items: &[(A, B)]) -> String {
    let parts: Vec<String> = items
        .iter()
        .map(|(a, b)| format!("{} means {}", a.as_ref(), b.as_ref()))
        .collect();
    match parts.as_slice() {
        [] => String::new(),
        [only] => only.clone(),
        [init @ .., last] => format!("{}, and {}", init.join(", "), last),
    }
}

/// How exemplar gold labels are written into the ICL block.
#[derive(Debug, Clone, Copy)]
pub enum LabelRender<'a> {
    /// Use the exemplar's label string unchanged.
    AsIs,
    /// Translate by class index from one language's label set to another's.
    Mapped { from: &'a LabelSet, to: &'a LabelSet },
}

impl LabelRender<'_> {
    fn apply(&self, label: &str) -> Result<String> {
        match self {
            LabelRender::AsIs => Ok(label.to_owned()),
            LabelRender::Mapped { from, to } => from.index_of(label).map(|i| to.labels[i].clone()).ok_or_else(|| {
                Error::invalid(format!(
                    "label {label:?} not in registered {} label set for {}",
                    from.task, from.lang
                ))
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct IclLayout {
    pub joiner: String,
    /// Place the most similar exemplar last, next to the query.
    pub most_similar_last: bool,
}

impl Default for IclLayout {
    fn default() -> Self {
        IclLayout {
            joiner: "\n\n".into(),
            most_similar_last: true,
        }
    }
}

/// Renders each exemplar with the evaluation template and its gold label.
/// `options` is the candidate label list shown in `[OPTIONS]`; every
/// rendered label must be one of them.
pub fn build_icl_block<S: AsRef<str>>(
    exemplars: &ExemplarSet,
    template: &PromptTemplate,
    options: &[S],
    label_render: LabelRender<'_>,
    layout: &IclLayout,
) -> Result<String> {
    let options_text = format_options(options);
    let mut blocks = exemplars
        .exemplars
        .iter()
        .map(|ex| {
            let label = label_render.apply(&ex.label)?;
            if !options.iter().any(|o| o.as_ref() == label) {
                return Err(Error::invariant(
                    &ex.id,
                    format!("label {label:?} not in the registered label set"),
                ));
            }
            let ctx = RenderContext::new()
                .with("INPUT", ex.text.as_str())
                .with("OPTIONS", options_text.as_str())
                .with("LABELS_CHOICE", label);
            render(template, &ctx)
        })
        .collect::<Result<Vec<_>>>()?;
    if layout.most_similar_last {
        blocks.reverse();
    }
    Ok(blocks.join(&layout.joiner))
}

/// "In {target language}, c1_src means c1_tgt, ..., and ck_src means ck_tgt".
pub fn build_label_alignment(
    task: &str,
    src_lang: &LanguageTag,
    tgt_lang: &LanguageTag,
    registry: &LabelRegistry,
    names: &LanguageNames,
) -> Result<String> {
    let src = registry.get(task, src_lang)?;
    let tgt = registry.get(task, tgt_lang)?;
    if src.len() != tgt.len() {
        return Err(Error::LabelSetLengthMismatch(task.to_owned()));
    }
    let items: Vec<(&String, &String)> = src.labels.iter().zip(&tgt.labels).collect();
    Ok(format!("In {}, {}", names.name(tgt_lang)?, format_means_list(&items)))
}

/// "s1_tgt means s1_src, ..., and sk_tgt means sk_src" in retrieval order.
pub fn build_query_alignment(pairs: &AlignmentPairs) -> Result<String> {
    if pairs.pairs.is_empty() {
        return Err(Error::invalid("query alignment needs at least one pair"));
    }
    let items: Vec<(&str, &str)> = pairs
        .pairs
        .iter()
        .map(|p| (p.tgt_text.as_str(), p.src_text.as_str()))
        .collect();
    Ok(format_means_list(&items))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssembledPrompt {
    pub icl_block: String,
    pub align_block: String,
    pub query_block: String,
    pub full_text: String,
    /// The candidate label; always the suffix of `full_text`.
    pub continuation: String,
}

impl AssembledPrompt {
    /// Everything before the candidate label.
    pub fn prefix(&self) -> &str {
        &self.full_text[..self.full_text.len() - self.continuation.len()]
    }
}

/// Joins the non-empty blocks with [`BLOCK_JOINER`].
pub fn join_blocks(blocks: &[&str]) -> String {
    blocks
        .iter()
        .filter(|b| !b.is_empty())
        .copied()
        .collect::<Vec<_>>()
        .join(BLOCK_JOINER)
}

/// Builds the full prompt for one candidate label.
pub fn assemble<S: AsRef<str>>(
    icl_block: &str,
    align_block: &str,
    query_text: &str,
    template: &PromptTemplate,
    options: &[S],
    candidate_label: &str,
) -> Result<AssembledPrompt> {
    if !template.body.ends_with("[LABELS_CHOICE]") {
        return Err(Error::invalid(format!(
            "template {}/{} does not end with [LABELS_CHOICE]",
            template.task_kind, template.index
        )));
    }
    let ctx = RenderContext::new()
        .with("INPUT", query_text)
        .with("OPTIONS", format_options(options))
        .with("LABELS_CHOICE", candidate_label);
    let query_block = render(template, &ctx)?;
    let full_text = join_blocks(&[icl_block, align_block, &query_block]);
    Ok(AssembledPrompt {
        icl_block: icl_block.to_owned(),
        align_block: align_block.to_owned(),
        query_block,
        full_text,
        continuation: candidate_label.to_owned(),
    })
}
