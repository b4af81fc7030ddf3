use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::Serialize;

use super::{nfc, read_to_string, LanguageTag};
use crate::error::{Error, Result};

/// Ordered label vocabulary of one task in one language. Position `i` is the
/// canonical class index, shared by every language of the task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelSet {
    pub task: String,
    pub lang: LanguageTag,
    pub labels: Vec<String>,
}

impl LabelSet {
    pub fn new(task: impl Into<String>, lang: LanguageTag, labels: Vec<String>) -> Result<Self> {
        let task = task.into();
        if labels.len() < 2 {
            return Err(Error::invariant(
                format!("{task}/{lang}"),
                "label set needs at least 2 labels",
            ));
        }
        let distinct: HashSet<&String> = labels.iter().collect();
        if distinct.len() != labels.len() {
            return Err(Error::invariant(
                format!("{task}/{lang}"),
                "label set has duplicate labels",
            ));
        }
        Ok(LabelSet { task, lang, labels })
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Label sets keyed by `(task, lang)`. Languages whose labels are listed as
/// `"-"` or `null` in the source file are tracked as explicitly unregistered.
#[derive(Debug, Clone, Default)]
pub struct LabelRegistry {
    sets: BTreeMap<(String, LanguageTag), LabelSet>,
    unregistered: BTreeSet<(String, LanguageTag)>,
}

const BUILTIN: &str = include_str!("../../data/label_sets.json");

impl LabelRegistry {
    /// Parses the `task -> lang -> [labels]` JSON map.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, BTreeMap<String, Option<Vec<String>>>> =
            serde_json::from_str(text).map_err(|e| Error::Parse {
                location: "label sets".into(),
                message: e.to_string(),
            })?;
        let mut registry = LabelRegistry::default();
        for (task, langs) in raw {
            let mut expected_len = None;
            for (lang, labels) in langs {
                let lang = LanguageTag::new(&lang)?;
                let labels = labels.unwrap_or_default();
                if labels.is_empty() || labels.iter().all(|l| l.trim() == "-") {
                    registry.unregistered.insert((task.clone(), lang));
                    continue;
                }
                let labels: Vec<String> = labels.iter().map(|l| nfc(l)).collect();
                match expected_len {
                    None => expected_len = Some(labels.len()),
                    Some(n) if n != labels.len() => {
                        return Err(Error::LabelSetLengthMismatch(task));
                    }
                    Some(_) => {}
                }
                let set = LabelSet::new(task.clone(), lang.clone(), labels)?;
                registry.sets.insert((task.clone(), lang), set);
            }
        }
        Ok(registry)
    }

    /// Registers label sets from a JSON file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&read_to_string(path.as_ref())?)
    }

    /// Label sets of the sentiment, topic and NLI benchmarks shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_json_str(BUILTIN).expect("builtin label sets are valid")
    }

    pub fn lookup(&self, task: &str, lang: &LanguageTag) -> Option<&LabelSet> {
        self.sets.get(&(task.to_owned(), lang.clone()))
    }

    pub fn is_unregistered(&self, task: &str, lang: &LanguageTag) -> bool {
        self.lookup(task, lang).is_none()
    }

    pub fn get(&self, task: &str, lang: &LanguageTag) -> Result<&LabelSet> {
        self.lookup(task, lang).ok_or_else(|| Error::LabelSetUnregistered {
            task: task.to_owned(),
            lang: lang.to_string(),
        })
    }

    pub fn tasks(&self) -> BTreeSet<&str> {
        self.sets.keys().map(|(t, _)| t.as_str()).collect()
    }

    pub fn languages(&self, task: &str) -> Vec<&LanguageTag> {
        self.sets.keys().filter(|(t, _)| t == task).map(|(_, l)| l).collect()
    }

    /// Class index of `label` in any registered language of `task`, trying
    /// `preferred` first.
    pub fn class_index(&self, task: &str, preferred: &LanguageTag, label: &str) -> Option<usize> {
        if let Some(i) = self.lookup(task, preferred).and_then(|s| s.index_of(label)) {
            return Some(i);
        }
        self.sets
            .iter()
            .filter(|((t, _), _)| t == task)
            .find_map(|(_, s)| s.index_of(label))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tag(s: &str) -> LanguageTag {
        s.parse().unwrap()
    }

    #[test]
    fn builtin_sentiment_labels() {
        let reg = LabelRegistry::builtin();
        assert_eq!(
            reg.get("sentiment", &tag("fra")).unwrap().labels,
            ["négatif", "neutre", "positif"]
        );
        assert_eq!(
            reg.get("sentiment", &tag("eng")).unwrap().labels,
            ["negative", "neutral", "positive"]
        );
        assert_eq!(
            reg.get("sentiment", &tag("jav")).unwrap().labels,
            ["negatif", "netral", "positif"]
        );
    }

    #[test]
    fn builtin_dash_rows_are_unregistered() {
        let reg = LabelRegistry::builtin();
        for lang in ["bzd", "cni", "hch", "nah", "shp", "tar"] {
            assert!(reg.is_unregistered("nli", &tag(lang)), "{lang}");
            let err = reg.get("nli", &tag(lang)).unwrap_err().to_string();
            assert!(err.contains("label set unregistered"));
        }
        assert_eq!(
            reg.get("nli", &tag("quy")).unwrap().labels,
            ["hukllanakuy", "chawpi", "contradicción"]
        );
        assert_eq!(reg.get("topic", &tag("ibo")).unwrap().len(), 7);
    }

    #[test]
    fn builtin_sets_are_index_aligned() {
        let reg = LabelRegistry::builtin();
        for task in reg.tasks() {
            let lens: BTreeSet<usize> = reg
                .languages(task)
                .into_iter()
                .map(|l| reg.get(task, l).unwrap().len())
                .collect();
            assert_eq!(lens.len(), 1, "{task}");
        }
    }

    #[test]
    fn unequal_lengths_name_the_task() {
        let err = LabelRegistry::from_json_str(
            r#"{"sentiment": {"fra": ["négatif","neutre","positif"], "deu": ["negativ","positiv"]}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("\"sentiment\""), "{err}");
    }

    #[test]
    fn duplicate_or_single_labels_rejected() {
        assert!(LabelRegistry::from_json_str(r#"{"t": {"eng": ["a","a"]}}"#).is_err());
        assert!(LabelRegistry::from_json_str(r#"{"t": {"eng": ["a"]}}"#).is_err());
    }

    #[test]
    fn class_index_falls_back_across_languages() {
        let reg = LabelRegistry::builtin();
        assert_eq!(reg.class_index("sentiment", &tag("fra"), "neutre"), Some(1));
        assert_eq!(reg.class_index("sentiment", &tag("fra"), "positive"), Some(2));
        assert_eq!(reg.class_index("nli", &tag("bzd"), "contradiction"), Some(2));
        assert_eq!(reg.class_index("sentiment", &tag("fra"), "meh"), None);
    }
}
