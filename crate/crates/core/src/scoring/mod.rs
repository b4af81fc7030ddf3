//! Language-model scoring clients, candidate-label selection and the
//! end-to-end task runner.

mod client;
mod http;
mod mock;
mod select;
mod task;

pub use client::{FixtureMt, FixtureScorer, IdentityMt, MtClient, RecordingScorer, ScoreFixture, ScoringClient};
pub use http::{HttpEmbeddings, HttpMt, HttpScorer, EMBED_URL_ENV, MT_URL_ENV, SCORER_URL_ENV};
pub use mock::{MockRule, MockScorer, MockSpec};
pub use select::{argmax_label, select_label, Prediction};
pub use task::{
    run_task, AlignmentMode, Exclusion, LabelLanguageMode, PredictionRecord, TaskConfig, TaskResources, TaskRun,
    TaskRunner, TemplatePredictions,
};
