//! Labeled datasets, parallel corpora, bilingual lexicons and label sets.
//!
//! Every loader normalizes text to NFC and validates record invariants
//! before returning, so downstream code can assume well-formed data.
//! Loaded collections are immutable.

mod labels;
mod lang;
mod lexicon;

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

pub use labels::{LabelRegistry, LabelSet};
pub use lang::{LanguageNames, LanguageTag};
pub use lexicon::{load_lexicon, Lexicon, LexiconEntry, SenseMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Jsonl,
    Tsv,
}

impl Format {
    /// Picks the format from the file extension, defaulting to JSONL.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("tsv") => Format::Tsv,
            _ => Format::Jsonl,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub id: String,
    pub text: String,
    pub lang: LanguageTag,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelPair {
    pub id: String,
    pub src_lang: LanguageTag,
    pub tgt_lang: LanguageTag,
    pub src_text: String,
    pub tgt_text: String,
}

impl ParallelPair {
    /// Embedding-provider key of the source side.
    pub fn src_key(&self) -> String {
        format!("{}#src", self.id)
    }

    /// Embedding-provider key of the target side.
    pub fn tgt_key(&self) -> String {
        format!("{}#tgt", self.id)
    }

    pub fn reversed(&self) -> ParallelPair {
        ParallelPair {
            id: self.id.clone(),
            src_lang: self.tgt_lang.clone(),
            tgt_lang: self.src_lang.clone(),
            src_text: self.tgt_text.clone(),
            tgt_text: self.src_text.clone(),
        }
    }
}

/// An ordered, id-unique collection of labeled examples.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    examples: Vec<LabeledExample>,
}

impl Dataset {
    pub fn new(examples: Vec<LabeledExample>) -> Result<Self> {
        let mut seen = HashSet::new();
        for ex in &examples {
            if !seen.insert(ex.id.as_str()) {
                return Err(Error::invariant(&ex.id, "duplicate id"));
            }
            if ex.text.is_empty() {
                return Err(Error::invariant(&ex.id, "empty text"));
            }
        }
        Ok(Dataset { examples })
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&LabeledExample> {
        self.examples.iter().find(|ex| ex.id == id)
    }

    /// The single language shared by all examples, if there is one.
    pub fn language(&self) -> Option<&LanguageTag> {
        let first = &self.examples.first()?.lang;
        self.examples.iter().all(|ex| &ex.lang == first).then_some(first)
    }

    /// Checks every label against the registered set for its language.
    /// Languages without a registered set are skipped.
    pub fn validate_labels(&self, registry: &LabelRegistry, task: &str) -> Result<()> {
        for ex in &self.examples {
            if let Some(set) = registry.lookup(task, &ex.lang) {
                if set.index_of(&ex.label).is_none() {
                    return Err(Error::invariant(
                        &ex.id,
                        format!("label {:?} not in {task} label set for {}", ex.label, ex.lang),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// An ordered, id-unique collection of parallel pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParallelCorpus {
    pairs: Vec<ParallelPair>,
}

impl ParallelCorpus {
    pub fn new(pairs: Vec<ParallelPair>) -> Result<Self> {
        let mut seen = HashSet::new();
        for p in &pairs {
            if !seen.insert(p.id.as_str()) {
                return Err(Error::invariant(&p.id, "duplicate id"));
            }
            if p.src_lang == p.tgt_lang {
                return Err(Error::invariant(&p.id, "src_lang equals tgt_lang"));
            }
            if p.src_text.is_empty() || p.tgt_text.is_empty() {
                return Err(Error::invariant(&p.id, "empty text"));
            }
        }
        Ok(ParallelCorpus { pairs })
    }

    pub fn pairs(&self) -> &[ParallelPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs translating between `src` and `tgt`; pairs stored in the
    /// opposite direction are flipped so that `tgt_lang == tgt`.
    pub fn for_languages(&self, src: &LanguageTag, tgt: &LanguageTag) -> Vec<ParallelPair> {
        self.pairs
            .iter()
            .filter_map(|p| {
                if &p.src_lang == src && &p.tgt_lang == tgt {
                    Some(p.clone())
                } else if &p.src_lang == tgt && &p.tgt_lang == src {
                    Some(p.reversed())
                } else {
                    None
                }
            })
            .collect()
    }
}

pub(crate) fn nfc(s: &str) -> String {
    s.nfc().collect()
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Non-blank lines with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line.trim_end_matches('\r')))
        .filter(|(_, line)| !line.trim().is_empty())
}

fn parse_err(name: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        location: format!("{name}:{line}"),
        message: message.into(),
    }
}

#[derive(Deserialize)]
struct RawLabeled {
    id: Option<String>,
    text: String,
    lang: String,
    label: String,
}

#[derive(Deserialize)]
struct RawParallel {
    id: Option<String>,
    src_lang: String,
    tgt_lang: String,
    src_text: String,
    tgt_text: String,
}

/// Line number and `(column, value)` cells of one TSV row.
type TsvRow = (usize, Vec<(String, String)>);

/// Header-driven TSV rows as column-name lookups.
fn tsv_records<'a>(name: &'a str, text: &'a str, required: &'a [&'a str]) -> Result<Vec<TsvRow>> {
    let mut lines = content_lines(text);
    let Some((_, header)) = lines.next() else {
        return Ok(Vec::new());
    };
    let columns: Vec<String> = header.split('\t').map(|c| c.trim().to_owned()).collect();
    for req in required {
        if !columns.iter().any(|c| c == req) {
            return Err(parse_err(name, 1, format!("missing column {req:?}")));
        }
    }
    lines
        .map(|(line_no, line)| {
            let cells: Vec<&str> = line.split('\t').collect();
            if cells.len() != columns.len() {
                return Err(parse_err(
                    name,
                    line_no,
                    format!("expected {} columns, found {}", columns.len(), cells.len()),
                ));
            }
            let row = columns
                .iter()
                .cloned()
                .zip(cells.into_iter().map(str::to_owned))
                .collect();
            Ok((line_no, row))
        })
        .collect()
}

fn take(row: &mut Vec<(String, String)>, key: &str) -> Option<String> {
    let pos = row.iter().position(|(k, _)| k == key)?;
    Some(row.swap_remove(pos).1)
}

fn tag_at(raw: &str, id: &str) -> Result<LanguageTag> {
    LanguageTag::new(raw).map_err(|e| Error::invariant(id, e.to_string()))
}

pub fn load_labeled(path: impl AsRef<Path>, format: Format) -> Result<Dataset> {
    let path = path.as_ref();
    let name = file_name(path);
    let text = read_to_string(path)?;
    let raws: Vec<(usize, RawLabeled)> = match format {
        Format::Jsonl => content_lines(&text)
            .map(|(n, line)| {
                serde_json::from_str(line)
                    .map(|r| (n, r))
                    .map_err(|e| parse_err(&name, n, e.to_string()))
            })
            .collect::<Result<_>>()?,
        Format::Tsv => tsv_records(&name, &text, &["text", "lang", "label"])?
            .into_iter()
            .map(|(n, mut row)| {
                let raw = RawLabeled {
                    id: take(&mut row, "id"),
                    text: take(&mut row, "text").unwrap_or_default(),
                    lang: take(&mut row, "lang").unwrap_or_default(),
                    label: take(&mut row, "label").unwrap_or_default(),
                };
                (n, raw)
            })
            .collect(),
    };
    let examples = raws
        .into_iter()
        .map(|(n, raw)| {
            let id = raw.id.unwrap_or_else(|| format!("{name}:{n}"));
            Ok(LabeledExample {
                lang: tag_at(&raw.lang, &id)?,
                text: nfc(&raw.text),
                label: nfc(&raw.label),
                id,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(examples)
}

pub fn load_parallel(path: impl AsRef<Path>, format: Format) -> Result<ParallelCorpus> {
    let path = path.as_ref();
    let name = file_name(path);
    let text = read_to_string(path)?;
    let raws: Vec<(usize, RawParallel)> = match format {
        Format::Jsonl => content_lines(&text)
            .map(|(n, line)| {
                serde_json::from_str(line)
                    .map(|r| (n, r))
                    .map_err(|e| parse_err(&name, n, e.to_string()))
            })
            .collect::<Result<_>>()?,
        Format::Tsv => tsv_records(&name, &text, &["src_lang", "tgt_lang", "src_text", "tgt_text"])?
            .into_iter()
            .map(|(n, mut row)| {
                let raw = RawParallel {
                    id: take(&mut row, "id"),
                    src_lang: take(&mut row, "src_lang").unwrap_or_default(),
                    tgt_lang: take(&mut row, "tgt_lang").unwrap_or_default(),
                    src_text: take(&mut row, "src_text").unwrap_or_default(),
                    tgt_text: take(&mut row, "tgt_text").unwrap_or_default(),
                };
                (n, raw)
            })
            .collect(),
    };
    let pairs = raws
        .into_iter()
        .map(|(n, raw)| {
            let id = raw.id.unwrap_or_else(|| format!("{name}:{n}"));
            Ok(ParallelPair {
                src_lang: tag_at(&raw.src_lang, &id)?,
                tgt_lang: tag_at(&raw.tgt_lang, &id)?,
                src_text: nfc(&raw.src_text),
                tgt_text: nfc(&raw.tgt_text),
                id,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ParallelCorpus::new(pairs)
}

fn check_tsv_cell(id: &str, value: &str) -> Result<()> {
    if value.contains(['\t', '\n', '\r']) {
        return Err(Error::invariant(id, "value not representable in TSV"));
    }
    Ok(())
}

pub fn write_labeled<W: Write>(out: &mut W, dataset: &Dataset, format: Format) -> Result<()> {
    let io = |e| Error::io("<output>", e);
    if format == Format::Tsv && !dataset.is_empty() {
        writeln!(out, "id\ttext\tlang\tlabel").map_err(io)?;
    }
    for ex in dataset.examples() {
        match format {
            Format::Jsonl => writeln!(out, "{}", serde_json::to_string(ex)?).map_err(io)?,
            Format::Tsv => {
                for v in [&ex.id, &ex.text, &ex.label] {
                    check_tsv_cell(&ex.id, v)?;
                }
                writeln!(out, "{}\t{}\t{}\t{}", ex.id, ex.text, ex.lang, ex.label).map_err(io)?
            }
        }
    }
    Ok(())
}

pub fn write_parallel<W: Write>(out: &mut W, corpus: &ParallelCorpus, format: Format) -> Result<()> {
    let io = |e| Error::io("<output>", e);
    if format == Format::Tsv && !corpus.is_empty() {
        writeln!(out, "id\tsrc_lang\ttgt_lang\tsrc_text\ttgt_text").map_err(io)?;
    }
    for p in corpus.pairs() {
        match format {
            Format::Jsonl => writeln!(out, "{}", serde_json::to_string(p)?).map_err(io)?,
            Format::Tsv => {
                for v in [&p.id, &p.src_text, &p.tgt_text] {
                    check_tsv_cell(&p.id, v)?;
                }
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}",
                    p.id, p.src_lang, p.tgt_lang, p.src_text, p.tgt_text
                )
                .map_err(io)?
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file_with(name: &str, body: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(name);
        fs::File::create(&path).unwrap().write_all(body.as_bytes()).unwrap();
        (dir, path)
    }

    #[test]
    fn minimal_labeled_record() {
        let (_d, p) = file_with(
            "a.jsonl",
            r#"{"id":"a","text":"bagus","lang":"ind","label":"positive"}"#,
        );
        let ds = load_labeled(&p, Format::Jsonl).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.examples()[0].text, "bagus");
    }

    #[test]
    fn empty_file_is_empty_dataset() {
        let (_d, p) = file_with("e.jsonl", "");
        assert!(load_labeled(&p, Format::Jsonl).unwrap().is_empty());
        let (_d, p) = file_with("e.tsv", "");
        assert!(load_labeled(&p, Format::Tsv).unwrap().is_empty());
    }

    #[test]
    fn bad_language_tag_names_record() {
        let (_d, p) = file_with(
            "a.jsonl",
            r#"{"id":"x7","text":"bagus","lang":"indonesian","label":"positive"}"#,
        );
        let err = load_labeled(&p, Format::Jsonl).unwrap_err().to_string();
        assert!(err.contains("invalid language tag"), "{err}");
        assert!(err.contains("x7"), "{err}");
    }

    #[test]
    fn parse_error_carries_line_number() {
        let (_d, p) = file_with(
            "bad.jsonl",
            "{\"id\":\"a\",\"text\":\"x\",\"lang\":\"ind\",\"label\":\"l\"}\n\n{oops\n",
        );
        let err = load_labeled(&p, Format::Jsonl).unwrap_err().to_string();
        assert!(err.starts_with("bad.jsonl:3:"), "{err}");
    }

    #[test]
    fn duplicate_ids_and_empty_text_rejected() {
        let (_d, p) = file_with(
            "d.jsonl",
            "{\"id\":\"a\",\"text\":\"x\",\"lang\":\"ind\",\"label\":\"l\"}\n{\"id\":\"a\",\"text\":\"y\",\"lang\":\"ind\",\"label\":\"l\"}\n",
        );
        assert!(load_labeled(&p, Format::Jsonl)
            .unwrap_err()
            .to_string()
            .contains("duplicate id"));
        let (_d, p) = file_with(
            "d.jsonl",
            "{\"id\":\"a\",\"text\":\"\",\"lang\":\"ind\",\"label\":\"l\"}\n",
        );
        assert!(load_labeled(&p, Format::Jsonl).is_err());
    }

    #[test]
    fn missing_ids_are_synthesized_from_file_and_line() {
        let (_d, p) = file_with(
            "q.jsonl",
            "{\"text\":\"x\",\"lang\":\"ind\",\"label\":\"l\"}\n\n{\"text\":\"y\",\"lang\":\"ind\",\"label\":\"l\"}\n",
        );
        let ds = load_labeled(&p, Format::Jsonl).unwrap();
        let ids: Vec<_> = ds.examples().iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["q.jsonl:1", "q.jsonl:3"]);
    }

    #[test]
    fn text_is_nfc_normalized() {
        // "e" + combining acute accent
        let (_d, p) = file_with(
            "n.jsonl",
            "{\"id\":\"a\",\"text\":\"ne\u{301}gatif\",\"lang\":\"fra\",\"label\":\"ne\u{301}gatif\"}",
        );
        let ds = load_labeled(&p, Format::Jsonl).unwrap();
        assert_eq!(ds.examples()[0].text, "n\u{e9}gatif");
        assert_eq!(ds.examples()[0].label, "négatif");
    }

    #[test]
    fn tsv_labeled_with_header() {
        let (_d, p) = file_with("t.tsv", "id\ttext\tlang\tlabel\nk1\tbagus sekali\tind\tpositive\n");
        let ds = load_labeled(&p, Format::Tsv).unwrap();
        assert_eq!(ds.examples()[0].label, "positive");
        let (_d, p) = file_with("t.tsv", "id\ttext\tlang\tlabel\nk1\tbagus\tind\n");
        let err = load_labeled(&p, Format::Tsv).unwrap_err().to_string();
        assert!(err.starts_with("t.tsv:2:"), "{err}");
    }

    #[test]
    fn parallel_record_and_same_language_error() {
        let (_d, p) = file_with(
            "p.jsonl",
            r#"{"id":"p1","src_lang":"eng","tgt_lang":"ind","src_text":"hello","tgt_text":"halo"}"#,
        );
        let corpus = load_parallel(&p, Format::Jsonl).unwrap();
        assert_eq!(corpus.len(), 1);
        let (_d, p) = file_with(
            "p.jsonl",
            r#"{"id":"p1","src_lang":"eng","tgt_lang":"eng","src_text":"hello","tgt_text":"halo"}"#,
        );
        let err = load_parallel(&p, Format::Jsonl).unwrap_err().to_string();
        assert!(err.contains("p1"), "{err}");
    }

    #[test]
    fn for_languages_flips_reverse_pairs() {
        let pairs = vec![
            ParallelPair {
                id: "a".into(),
                src_lang: "eng".parse().unwrap(),
                tgt_lang: "ind".parse().unwrap(),
                src_text: "hello".into(),
                tgt_text: "halo".into(),
            },
            ParallelPair {
                id: "b".into(),
                src_lang: "ind".parse().unwrap(),
                tgt_lang: "eng".parse().unwrap(),
                src_text: "terima kasih".into(),
                tgt_text: "thanks".into(),
            },
        ];
        let corpus = ParallelCorpus::new(pairs).unwrap();
        let sel = corpus.for_languages(&"eng".parse().unwrap(), &"ind".parse().unwrap());
        assert_eq!(sel.len(), 2);
        assert_eq!(sel[1].tgt_text, "terima kasih");
        assert!(corpus
            .for_languages(&"eng".parse().unwrap(), &"fra".parse().unwrap())
            .is_empty());
    }
}
