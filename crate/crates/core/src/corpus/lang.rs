use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// ISO 639-3 language code: exactly three lowercase ASCII letters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LanguageTag(String);

impl LanguageTag {
    pub fn new(code: &str) -> Result<Self> {
        if code.len() == 3 && code.bytes().all(|b| b.is_ascii_lowercase()) {
            Ok(LanguageTag(code.to_owned()))
        } else {
            Err(Error::InvalidLanguageTag(code.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for LanguageTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LanguageTag::new(s)
    }
}

impl Serialize for LanguageTag {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for LanguageTag {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        LanguageTag::new(&raw).map_err(serde::de::Error::custom)
    }
}

const BUILTIN_NAMES: &[(&str, &str)] = &[
    ("amh", "Amharic"),
    ("ara", "Arabic"),
    ("ary", "Moroccan Arabic"),
    ("aym", "Aymara"),
    ("btk", "Batak"),
    ("bzd", "Bribri"),
    ("cni", "Ashaninka"),
    ("deu", "German"),
    ("eng", "English"),
    ("fra", "French"),
    ("grn", "Guarani"),
    ("hau", "Hausa"),
    ("hch", "Wixarika"),
    ("hin", "Hindi"),
    ("ibo", "Igbo"),
    ("ind", "Indonesian"),
    ("ita", "Italian"),
    ("jav", "Javanese"),
    ("jpn", "Japanese"),
    ("kin", "Kinyarwanda"),
    ("kor", "Korean"),
    ("lug", "Luganda"),
    ("mad", "Madurese"),
    ("mak", "Makassarese"),
    ("mar", "Marathi"),
    ("min", "Minangkabau"),
    ("nah", "Nahuatl"),
    ("oto", "Otomi"),
    ("pcm", "Nigerian Pidgin"),
    ("por", "Portuguese"),
    ("quy", "Quechua"),
    ("shp", "Shipibo-Konibo"),
    ("sna", "Shona"),
    ("spa", "Spanish"),
    ("sun", "Sundanese"),
    ("swa", "Swahili"),
    ("tar", "Raramuri"),
    ("tel", "Telugu"),
    ("tha", "Thai"),
    ("vie", "Vietnamese"),
    ("xho", "Xhosa"),
    ("yor", "Yoruba"),
    ("zho", "Chinese"),
    ("zul", "Zulu"),
];

/// English display names used when filling `[..._LANG]` placeholders.
#[derive(Debug, Clone)]
pub struct LanguageNames {
    names: BTreeMap<String, String>,
}

impl Default for LanguageNames {
    fn default() -> Self {
        LanguageNames {
            names: BUILTIN_NAMES
                .iter()
                .map(|(code, name)| (code.to_string(), name.to_string()))
                .collect(),
        }
    }
}

impl LanguageNames {
    pub fn with_override(mut self, tag: &LanguageTag, name: impl Into<String>) -> Self {
        self.names.insert(tag.as_str().to_owned(), name.into());
        self
    }

    pub fn name(&self, tag: &LanguageTag) -> Result<&str> {
        self.names
            .get(tag.as_str())
            .map(String::as_str)
            .ok_or_else(|| Error::UnknownLanguageName(tag.to_string()))
    }
}
