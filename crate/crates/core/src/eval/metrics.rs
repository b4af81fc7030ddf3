use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows are gold labels, columns predicted labels. `labels` is the sorted
/// union of both sides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    labels: Vec<String>,
    counts: Vec<Vec<u64>>,
}

fn check_lengths<S: AsRef<str>>(gold: &[S], pred: &[S]) -> Result<()> {
    if gold.len() != pred.len() {
        return Err(Error::invalid(format!(
            "gold has {} labels, predictions have {}",
            gold.len(),
            pred.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::NoScoredQueries);
    }
    Ok(())
}

impl ConfusionMatrix {
    pub fn new<S: AsRef<str>>(gold: &[S], pred: &[S]) -> Result<Self> {
        check_lengths(gold, pred)?;
        let index: BTreeMap<&str, usize> = {
            let mut all: Vec<&str> = gold.iter().chain(pred).map(AsRef::as_ref).collect();
            all.sort_unstable();
            all.dedup();
            all.into_iter().enumerate().map(|(i, l)| (l, i)).collect()
        };
        let n = index.len();
        let mut counts = vec![vec![0u64; n]; n];
        for (g, p) in gold.iter().zip(pred) {
            counts[index[g.as_ref()]][index[p.as_ref()]] += 1;
        }
        Ok(ConfusionMatrix {
            labels: index.keys().map(|l| (*l).to_owned()).collect(),
            counts,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    /// Gold count for class `i`.
    pub fn support(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    fn predicted(&self, i: usize) -> u64 {
        self.counts.iter().map(|row| row[i]).sum()
    }

    /// F1 for class `i`, 0 when precision and recall are both 0 or undefined.
    pub fn f1(&self, i: usize) -> f64 {
        let tp = self.counts[i][i] as f64;
        let support = self.support(i) as f64;
        let predicted = self.predicted(i) as f64;
        if tp == 0.0 {
            return 0.0;
        }
        let precision = tp / predicted;
        let recall = tp / support;
        2.0 * precision * recall / (precision + recall)
    }

    pub fn accuracy(&self) -> f64 {
        self.correct() as f64 / self.total() as f64
    }

    pub fn weighted_f1(&self) -> f64 {
        let n = self.total() as f64;
        (0..self.labels.len())
            .map(|i| self.support(i) as f64 / n * self.f1(i))
            .sum()
    }

    /// Mean F1 over the classes that occur in gold.
    pub fn macro_f1(&self) -> f64 {
        let gold_classes: Vec<usize> = (0..self.labels.len()).filter(|&i| self.support(i) > 0).collect();
        gold_classes.iter().map(|&i| self.f1(i)).sum::<f64>() / gold_classes.len() as f64
    }

    pub fn scores(&self) -> Scores {
        Scores {
            accuracy: self.accuracy(),
            weighted_f1: self.weighted_f1(),
            macro_f1: self.macro_f1(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Scores {
    pub accuracy: f64,
    pub weighted_f1: f64,
    pub macro_f1: f64,
}

impl Scores {
    /// Field-wise arithmetic mean.
    pub fn mean(items: &[Scores]) -> Option<Scores> {
        if items.is_empty() {
            return None;
        }
        let n = items.len() as f64;
        Some(Scores {
            accuracy: items.iter().map(|s| s.accuracy).sum::<f64>() / n,
            weighted_f1: items.iter().map(|s| s.weighted_f1).sum::<f64>() / n,
            macro_f1: items.iter().map(|s| s.macro_f1).sum::<f64>() / n,
        })
    }
}

pub fn accuracy<S: AsRef<str>>(gold: &[S], pred: &[S]) -> Result<f64> {
    Ok(ConfusionMatrix::new(gold, pred)?.accuracy())
}

pub fn weighted_f1<S: AsRef<str>>(gold: &[S], pred: &[S]) -> Result<f64> {
    Ok(ConfusionMatrix::new(gold, pred)?.weighted_f1())
}

pub fn macro_f1<S: AsRef<str>>(gold: &[S], pred: &[S]) -> Result<f64> {
    Ok(ConfusionMatrix::new(gold, pred)?.macro_f1())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let g = ["a", "b", "c", "a"];
        assert_eq!(accuracy(&g, &g).unwrap(), 1.0);
        assert_eq!(weighted_f1(&g, &g).unwrap(), 1.0);
        assert_eq!(macro_f1(&g, &g).unwrap(), 1.0);
    }

    #[test]
    fn half_right_two_classes() {
        let g = ["a", "a", "b", "b"];
        let p = ["a", "b", "a", "b"];
        assert_eq!(weighted_f1(&g, &p).unwrap(), 0.5);
    }

    #[test]
    fn single_class_all_correct() {
        let g = ["a", "a"];
        assert_eq!(weighted_f1(&g, &g).unwrap(), 1.0);
    }

    #[test]
    fn constant_prediction_on_balanced_gold() {
        let g = ["a", "a", "b", "b"];
        let p = ["a", "a", "a", "a"];
        assert_eq!(accuracy(&g, &p).unwrap(), 0.5);
        assert!((macro_f1(&g, &p).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn predicted_only_class_excluded_from_macro() {
        let g = ["a", "a"];
        let p = ["a", "z"];
        let cm = ConfusionMatrix::new(&g, &p).unwrap();
        assert_eq!(cm.labels(), ["a", "z"]);
        assert_eq!(cm.total(), 2);
        // F1(a) = 2/3, z is not a gold class
        assert!((cm.macro_f1() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(accuracy::<&str>(&[], &[]), Err(Error::NoScoredQueries)));
        assert!(accuracy(&["a"], &["a", "b"]).is_err());
    }

    #[test]
    fn mean_of_scores() {
        let s = |w| Scores {
            accuracy: 0.0,
            weighted_f1: w,
            macro_f1: 0.0,
        };
        let m = Scores::mean(&[s(0.6), s(0.7), s(0.8)]).unwrap();
        assert!((m.weighted_f1 - 0.7).abs() < 1e-12);
        assert!(Scores::mean(&[]).is_none());
    }
}
