//! Classification metrics, multi-template report aggregation, baseline
//! deltas, and word-level cross-lingual retrieval accuracy.

mod alignment;
mod metrics;
mod report;

pub use alignment::{lexicon_key, word_retrieval_accuracy, AlignmentQualityReport};
pub use metrics::{accuracy, macro_f1, weighted_f1, ConfusionMatrix, Scores};
pub use report::{aggregate, delta_report, DeltaReport, MetricReport, TemplateScores};
