use std::collections::HashSet;
use std::path::Path;

use super::{nfc, read_to_string, LanguageTag};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub src_word: String,
    pub tgt_word: String,
    pub src_lang: LanguageTag,
    pub tgt_lang: LanguageTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SenseMode {
    /// Each source word maps to exactly one target word.
    #[default]
    Single,
    /// A source word may appear with several translations.
    Multi,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    pub src_lang: LanguageTag,
    pub tgt_lang: LanguageTag,
    pub entries: Vec<LexiconEntry>,
}

impl Lexicon {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn parse_header(line: &str) -> Option<(LanguageTag, LanguageTag)> {
    let rest = line.strip_prefix('#')?;
    let mut src = None;
    let mut tgt = None;
    for field in rest.split('\t') {
        match field.trim().split_once('=') {
            Some(("src", v)) => src = LanguageTag::new(v.trim()).ok(),
            Some(("tgt", v)) => tgt = LanguageTag::new(v.trim()).ok(),
            _ => {}
        }
    }
    Some((src?, tgt?))
}

/// Parses a lexicon TSV: a `#src=<tag>\ttgt=<tag>` header followed by
/// `src_word\ttgt_word` rows.
pub fn parse_lexicon(name: &str, text: &str, mode: SenseMode) -> Result<Lexicon> {
    let err = |row: usize, message: &str| Error::Parse {
        location: format!("{name}:{row}"),
        message: message.to_owned(),
    };
    let mut rows = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());
    let (header_row, header) = rows.next().ok_or_else(|| err(1, "missing header"))?;
    let (src_lang, tgt_lang) =
        parse_header(header).ok_or_else(|| err(header_row, "expected header \"#src=<tag>\\ttgt=<tag>\""))?;
    if src_lang == tgt_lang {
        return Err(err(header_row, "source and target language are equal"));
    }

    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for (row, line) in rows {
        let cells: Vec<&str> = line.split('\t').collect();
        let [src, tgt] = cells[..] else {
            return Err(err(row, "expected two tab-separated columns"));
        };
        let (src, tgt) = (nfc(src.trim()), nfc(tgt.trim()));
        if src.is_empty() || tgt.is_empty() {
            return Err(err(row, "empty word"));
        }
        if mode == SenseMode::Single && !seen.insert(src.clone()) {
            return Err(err(row, &format!("duplicate source word {src:?}")));
        }
        entries.push(LexiconEntry {
            src_word: src,
            tgt_word: tgt,
            src_lang: src_lang.clone(),
            tgt_lang: tgt_lang.clone(),
        });
    }
    Ok(Lexicon {
        src_lang,
        tgt_lang,
        entries,
    })
}

pub fn load_lexicon(path: impl AsRef<Path>, mode: SenseMode) -> Result<Lexicon> {
    let path = path.as_ref();
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_lexicon(&name, &read_to_string(path)?, mode)
}
