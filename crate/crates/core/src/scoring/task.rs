use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{select_label, MtClient, Prediction, ScoringClient};
use crate::corpus::{LabelRegistry, LabelSet, LabeledExample, LanguageNames, LanguageTag, ParallelCorpus};
use crate::error::{Error, Result};
use crate::prompting::{
    assemble, build_icl_block, build_label_alignment, build_query_alignment, template, AssembledPrompt, IclLayout,
    LabelRender, PromptTemplate, TaskKind,
};
use crate::retrieval::{
    AlignmentRetriever, ExemplarRetriever, ExemplarSet, RetrievalStrategy, StrategyKind, DEFAULT_K,
};
use crate::similarity::{EmbeddingProvider, SimilarityConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignmentMode {
    #[default]
    None,
    Label,
    Query,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelLanguageMode {
    /// Candidate and exemplar labels stay in the source language.
    #[default]
    SourceOnly,
    /// Labels are rendered in the query's language.
    TargetOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskConfig {
    /// Label-set task name, e.g. `sentiment`.
    pub task: String,
    pub template_kind: TaskKind,
    pub templates: Vec<usize>,
    /// Language of the exemplar dataset and of source-side labels.
    pub source_lang: LanguageTag,
    /// `None` runs zero-shot.
    pub strategy: Option<RetrievalStrategy>,
    pub alignment: AlignmentMode,
    pub alignment_k: usize,
    pub alignment_similarity: SimilarityConfig,
    pub label_language: LabelLanguageMode,
    pub layout: IclLayout,
    pub length_norm: bool,
    pub max_inflight: usize,
}

impl TaskConfig {
    pub fn new(task: impl Into<String>, template_kind: TaskKind, source_lang: LanguageTag) -> Self {
        TaskConfig {
            task: task.into(),
            template_kind,
            templates: vec![0, 1, 2],
            source_lang,
            strategy: None,
            alignment: AlignmentMode::None,
            alignment_k: DEFAULT_K,
            alignment_similarity: SimilarityConfig::default(),
            label_language: LabelLanguageMode::SourceOnly,
            layout: IclLayout::default(),
            length_norm: false,
            max_inflight: 8,
        }
    }
}

/// Data and clients a run draws on.
#[derive(Clone)]
pub struct TaskResources<'a> {
    pub labels: &'a LabelRegistry,
    pub names: &'a LanguageNames,
    pub d_src: Option<&'a [LabeledExample]>,
    pub d_para: Option<&'a ParallelCorpus>,
    pub scorer: &'a dyn ScoringClient,
    pub mt: Option<&'a dyn MtClient>,
    pub embeddings: Option<Arc<dyn EmbeddingProvider>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub template_idx: usize,
    pub query_id: String,
    pub lang: LanguageTag,
    /// Gold and predicted classes, both written as source-language labels.
    pub gold: String,
    pub predicted: String,
    pub prediction: Prediction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplatePredictions {
    pub template_idx: usize,
    pub records: Vec<PredictionRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub query_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRun {
    pub task: String,
    pub template_kind: TaskKind,
    pub per_template: Vec<TemplatePredictions>,
    pub excluded: Vec<Exclusion>,
}

/// Everything about one query that does not depend on the template.
struct PreparedQuery<'q> {
    query: &'q LabeledExample,
    scored_text: String,
    exemplars: ExemplarSet,
    align_block: String,
    candidate_set: LabelSet,
    gold_index: usize,
}

pub struct TaskRunner<'a> {
    config: TaskConfig,
    res: TaskResources<'a>,
    source_labels: &'a LabelSet,
    templates: Vec<&'static PromptTemplate>,
    retriever: Option<ExemplarRetriever>,
}

impl<'a> TaskRunner<'a> {
    /// Validates the configuration against the available resources before
    /// any client is called.
    pub fn new(config: TaskConfig, res: TaskResources<'a>) -> Result<Self> {
        if !config.template_kind.is_evaluation() {
            return Err(Error::Config(format!(
                "{} is not an evaluation template kind",
                config.template_kind
            )));
        }
        if config.templates.is_empty() {
            return Err(Error::Config("at least one template index is required".into()));
        }
        if config.max_inflight == 0 {
            return Err(Error::Config("max_inflight must be ≥ 1".into()));
        }
        let templates = config
            .templates
            .iter()
            .map(|&i| template(config.template_kind, i))
            .collect::<Result<Vec<_>>>()?;
        let source_labels = res
            .labels
            .get(&config.task, &config.source_lang)
            .map_err(|e| Error::Config(e.to_string()))?;

        let retriever = match &config.strategy {
            None => None,
            Some(strategy) => {
                strategy.validate().map_err(|e| Error::Config(e.to_string()))?;
                let d_src = res
                    .d_src
                    .ok_or_else(|| Error::Config("retrieval strategy needs an exemplar dataset".into()))?;
                if let Some(bad) = d_src.iter().find(|e| e.lang != config.source_lang) {
                    return Err(Error::Config(format!(
                        "exemplar {} is in {}, expected {}",
                        bad.id, bad.lang, config.source_lang
                    )));
                }
                match strategy.kind {
                    StrategyKind::Translation if res.d_para.is_none() => {
                        return Err(Error::Config("translation strategy needs a parallel corpus".into()))
                    }
                    StrategyKind::TranslateTest if res.mt.is_none() => {
                        return Err(Error::Config("translate_test strategy needs an MT client".into()))
                    }
                    _ => {}
                }
                Some(ExemplarRetriever::new(d_src, res.embeddings.clone())?)
            }
        };
        if config.alignment == AlignmentMode::Query {
            if res.d_para.is_none() {
                return Err(Error::Config("query alignment needs a parallel corpus".into()));
            }
            if config.alignment_k == 0 {
                return Err(Error::Config("alignment k must be ≥ 1".into()));
            }
            config
                .alignment_similarity
                .validate()
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(TaskRunner {
            config,
            res,
            source_labels,
            templates,
            retriever,
        })
    }

    pub fn config(&self) -> &TaskConfig {
        &self.config
    }

    fn aligners(&self, queries: &[LabeledExample]) -> Result<BTreeMap<LanguageTag, AlignmentRetriever>> {
        let mut out = BTreeMap::new();
        if self.config.alignment != AlignmentMode::Query {
            return Ok(out);
        }
        let d_para = self.res.d_para.expect("checked in new");
        for q in queries {
            if out.contains_key(&q.lang) {
                continue;
            }
            let pairs = d_para.for_languages(&self.config.source_lang, &q.lang);
            let aligner = AlignmentRetriever::new(pairs, &q.lang, self.res.embeddings.clone())?;
            out.insert(q.lang.clone(), aligner);
        }
        Ok(out)
    }

    /// Retrieval and alignment for one query. The inner `Err` is a
    /// per-query exclusion; the outer one aborts the run.
    fn prepare<'q>(
        &self,
        query: &'q LabeledExample,
        aligners: &BTreeMap<LanguageTag, AlignmentRetriever>,
    ) -> Result<std::result::Result<PreparedQuery<'q>, Exclusion>> {
        let exclude = |reason: String| {
            Ok(Err(Exclusion {
                query_id: query.id.clone(),
                reason,
            }))
        };
        let task = &self.config.task;
        let src = &self.config.source_lang;
        let Some(gold_index) = self.res.labels.class_index(task, &query.lang, &query.label) else {
            return exclude(format!("gold label {:?} not in any {task} label set", query.label));
        };
        let candidate_set = match self.config.label_language {
            LabelLanguageMode::SourceOnly => self.source_labels.clone(),
            LabelLanguageMode::TargetOnly => match self.res.labels.lookup(task, &query.lang) {
                Some(set) => set.clone(),
                None => return exclude(format!("label set unregistered for {}", query.lang)),
            },
        };

        let (exemplars, translated) = match (&self.retriever, &self.config.strategy) {
            (Some(retriever), Some(strategy)) => {
                let pairs = self.res.d_para.map(|c| c.for_languages(src, &query.lang));
                retriever.retrieve(query, strategy, pairs.as_deref(), self.res.mt)?
            }
            _ => (ExemplarSet::default(), None),
        };

        let align_block = match self.config.alignment {
            AlignmentMode::None => String::new(),
            AlignmentMode::Label => {
                if self.res.labels.is_unregistered(task, &query.lang) {
                    return exclude(format!("label set unregistered for {}", query.lang));
                }
                build_label_alignment(task, src, &query.lang, self.res.labels, self.res.names)?
            }
            AlignmentMode::Query => {
                let aligner = &aligners[&query.lang];
                let pairs = aligner.retrieve(query, self.config.alignment_k, &self.config.alignment_similarity)?;
                build_query_alignment(&pairs)?
            }
        };

        Ok(Ok(PreparedQuery {
            query,
            scored_text: translated.unwrap_or_else(|| query.text.clone()),
            exemplars,
            align_block,
            candidate_set,
            gold_index,
        }))
    }

    fn prompts(&self, prepared: &PreparedQuery<'_>, template: &PromptTemplate) -> Result<Vec<AssembledPrompt>> {
        let options = &prepared.candidate_set.labels;
        let render = match self.config.label_language {
            LabelLanguageMode::SourceOnly => LabelRender::AsIs,
            LabelLanguageMode::TargetOnly => LabelRender::Mapped {
                from: self.source_labels,
                to: &prepared.candidate_set,
            },
        };
        let icl = build_icl_block(&prepared.exemplars, template, options, render, &self.config.layout)?;
        options
            .iter()
            .map(|label| {
                assemble(
                    &icl,
                    &prepared.align_block,
                    &prepared.scored_text,
                    template,
                    options,
                    label,
                )
            })
            .collect()
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.max_inflight)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))
    }

    /// The prompt for the first candidate label of the first scorable query
    /// under the first template, without calling the scorer.
    pub fn first_prompt(&self, queries: &[LabeledExample]) -> Result<Option<AssembledPrompt>> {
        let aligners = self.aligners(queries)?;
        for q in queries {
            if let Ok(prepared) = self.prepare(q, &aligners)? {
                let mut prompts = self.prompts(&prepared, self.templates[0])?;
                return Ok(Some(prompts.swap_remove(0)));
            }
        }
        Ok(None)
    }

    /// Retrieve, align, assemble and select for every query under every
    /// configured template. Output order is (template, query) in input
    /// order regardless of parallelism.
    pub fn run(&self, queries: &[LabeledExample]) -> Result<TaskRun> {
        let pool = self.pool()?;
        let aligners = self.aligners(queries)?;
        let prepared: Vec<_> = pool.install(|| {
            queries
                .par_iter()
                .map(|q| self.prepare(q, &aligners))
                .collect::<Result<Vec<_>>>()
        })?;

        let mut ready = Vec::new();
        let mut excluded = Vec::new();
        for p in prepared {
            match p {
                Ok(p) => ready.push(p),
                Err(ex) => excluded.push(ex),
            }
        }

        let jobs: Vec<(usize, &PreparedQuery<'_>)> = (0..self.templates.len())
            .flat_map(|t| ready.iter().map(move |p| (t, p)))
            .collect();
        let records: Vec<PredictionRecord> = pool.install(|| {
            jobs.par_iter()
                .map(|&(t, p)| {
                    let template = self.templates[t];
                    let prompts = self.prompts(p, template)?;
                    let prediction = select_label(&p.query.id, &prompts, self.res.scorer, self.config.length_norm)?;
                    let class = p
                        .candidate_set
                        .index_of(&prediction.chosen_label)
                        .expect("chosen label comes from the candidate set");
                    Ok(PredictionRecord {
                        template_idx: template.index,
                        query_id: p.query.id.clone(),
                        lang: p.query.lang.clone(),
                        gold: self.source_labels.labels[p.gold_index].clone(),
                        predicted: self.source_labels.labels[class].clone(),
                        prediction,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })?;

        let mut per_template: Vec<TemplatePredictions> = self
            .templates
            .iter()
            .map(|t| TemplatePredictions {
                template_idx: t.index,
                records: Vec::with_capacity(ready.len()),
            })
            .collect();
        for (i, rec) in records.into_iter().enumerate() {
            per_template[i / ready.len().max(1)].records.push(rec);
        }
        Ok(TaskRun {
            task: self.config.task.clone(),
            template_kind: self.config.template_kind,
            per_template,
            excluded,
        })
    }
}

/// Convenience wrapper: validate, then run.
pub fn run_task(config: TaskConfig, resources: TaskResources<'_>, queries: &[LabeledExample]) -> Result<TaskRun> {
    TaskRunner::new(config, resources)?.run(queries)
}
