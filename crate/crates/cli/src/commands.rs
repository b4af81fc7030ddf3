use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use xalign_core::corpus::{
    load_labeled, load_lexicon, load_parallel, Format, LanguageNames, ParallelCorpus, SenseMode,
};
use xalign_core::eval::{aggregate, delta_report, word_retrieval_accuracy, MetricReport};
use xalign_core::instructgen::{
    count_by_objective, generate_dataset, interleave_replay, BatchSource, GenerateOptions, ReplayMode, ReplayPlan,
    TemplateChoice,
};
use xalign_core::retrieval::{AlignmentRetriever, ExemplarRetriever};
use xalign_core::scoring::{
    AlignmentMode, HttpEmbeddings, RecordingScorer, ScoringClient, TaskResources, TaskRunner, EMBED_URL_ENV,
};
use xalign_core::similarity::{EmbeddingProvider, FileEmbeddings};
use xalign_core::Error;

use crate::config::RunConfig;
use crate::{AlignQualityArgs, EvaluateArgs, GenInstructArgs, PlanReplayArgs, ReportArgs, RetrieveArgs};

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_jsonl<T: Serialize>(out: &mut impl Write, items: impl IntoIterator<Item = T>) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut *out, &item)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn read_jsonl_values(path: &Path) -> Result<Vec<Value>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| {
                Error::Parse {
                    location: format!("{}:{}", path.display(), i + 1),
                    message: e.to_string(),
                }
                .into()
            })
        })
        .collect()
}

pub fn gen_instruct(args: GenInstructArgs) -> Result<()> {
    let corpus = load_parallel(&args.parallel, Format::from_path(&args.parallel))?;
    let mut opts = GenerateOptions::new(args.objectives, args.seed);
    opts.mask_ratio = args.mask_ratio;
    opts.mask_token = args.mask_token;
    opts.tlm_repeats = args.tlm_repeats;
    if let Some(t) = args.template {
        opts.templates = TemplateChoice::Fixed(t);
    }
    let samples = generate_dataset(corpus.pairs(), &opts, &LanguageNames::default())?;
    let mut out = create(&args.out)?;
    write_jsonl(&mut out, &samples)?;
    out.flush()?;
    println!("generated {} samples", samples.len());
    for (objective, n) in count_by_objective(&samples) {
        println!("  {objective}: {n}");
    }
    Ok(())
}

pub fn plan_replay(args: PlanReplayArgs) -> Result<()> {
    let new = read_jsonl_values(&args.new)?;
    let old = match &args.old {
        Some(p) => read_jsonl_values(p)?,
        None => Vec::new(),
    };
    let mode = if args.no_replay {
        ReplayMode::NoReplay { seed: args.seed }
    } else {
        ReplayMode::Replay(ReplayPlan {
            r: args.r,
            seed: args.seed,
        })
    };
    let batches = interleave_replay(&old, &new, &mode, args.batch_size, args.epochs)?;
    let mut out = create(&args.out)?;
    for (i, batch) in batches.iter().enumerate() {
        let items: Vec<Value> = batch
            .iter()
            .map(|r| {
                let record = match r.source {
                    BatchSource::Old => &old[r.index],
                    BatchSource::New => &new[r.index],
                };
                json!({"source": r.source, "index": r.index, "record": record})
            })
            .collect();
        write_jsonl(&mut out, [json!({"batch": i, "items": items})])?;
    }
    out.flush()?;
    println!("wrote {} batches", batches.len());
    Ok(())
}

/// Datasets and clients named by a run config.
struct Loaded {
    config: RunConfig,
    queries: Vec<xalign_core::corpus::LabeledExample>,
    d_src: Option<Vec<xalign_core::corpus::LabeledExample>>,
    d_para: Option<ParallelCorpus>,
}

fn load_run(path: &Path) -> Result<Loaded> {
    let config = RunConfig::load(path)?;
    config.validate()?;
    let labeled = |p: &Path| -> Result<_> {
        let p = config.resolve(p);
        Ok(load_labeled(&p, Format::from_path(&p))?.examples().to_vec())
    };
    let queries = labeled(&config.data.queries)?;
    let d_src = config.data.d_src.as_deref().map(labeled).transpose()?;
    let d_para = config
        .data
        .d_para
        .as_deref()
        .map(|p| {
            let p = config.resolve(p);
            load_parallel(&p, Format::from_path(&p))
        })
        .transpose()?;
    Ok(Loaded {
        config,
        queries,
        d_src,
        d_para,
    })
}

pub fn evaluate(args: EvaluateArgs) -> Result<()> {
    let Loaded {
        mut config,
        queries,
        d_src,
        d_para,
    } = load_run(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = Some(seed);
    }
    if let Some(n) = args.max_inflight {
        config.max_inflight = n;
    }
    if args.out.is_some() {
        config.output = args.out.clone();
    }
    config.validate()?;
    let output = config.output.clone().map(|p| match &args.out {
        Some(_) => p,
        None => config.resolve(&p),
    });
    if output.is_none() && !args.dry_run {
        return Err(Error::Config("no report path: set `output` or pass --out".into()).into());
    }

    let labels = config.label_registry()?;
    let names = config.language_names()?;
    let scorer = config.scorer()?;
    let recorder = args
        .record_fixture
        .as_ref()
        .map(|_| RecordingScorer::new(scorer.as_ref()));
    let active: &dyn ScoringClient = match &recorder {
        Some(r) => r,
        None => scorer.as_ref(),
    };
    let mt = config.mt()?;
    let resources = TaskResources {
        labels: &labels,
        names: &names,
        d_src: d_src.as_deref(),
        d_para: d_para.as_ref(),
        scorer: active,
        mt: mt.as_deref(),
        embeddings: config.embeddings()?,
    };
    let runner = TaskRunner::new(config.task_config()?, resources)?;

    if args.dry_run {
        match runner.first_prompt(&queries)? {
            Some(prompt) => println!("{}", prompt.full_text),
            None => println!("no scorable query"),
        }
        return Ok(());
    }

    let run = runner.run(&queries)?;
    let report = aggregate(&run, &config.config_hash())?;
    let output = output.expect("checked above");
    write_json(&output, &report)?;
    if let Some(p) = &args.predictions {
        let mut out = create(p)?;
        write_jsonl(&mut out, run.per_template.iter().flat_map(|t| &t.records))?;
        out.flush()?;
    }
    if let (Some(p), Some(rec)) = (&args.record_fixture, &recorder) {
        let mut out = create(p)?;
        rec.write_fixture(&mut out)?;
        out.flush()?;
    }
    for (id, reason) in run.excluded.iter().map(|e| (&e.query_id, &e.reason)) {
        eprintln!("excluded {id}: {reason}");
    }
    let a = report.averaged;
    println!(
        "{}: accuracy {:.4}, weighted F1 {:.4}, macro F1 {:.4} over {} template(s); {} excluded",
        report.task,
        a.accuracy,
        a.weighted_f1,
        a.macro_f1,
        report.per_template.len(),
        report.excluded
    );
    println!("report written to {}", output.display());
    Ok(())
}

pub fn retrieve(args: RetrieveArgs) -> Result<()> {
    let Loaded {
        config,
        queries,
        d_src,
        d_para,
    } = load_run(&args.config)?;
    let provider = config.embeddings()?;
    let mt = config.mt()?;
    let strategy = config.strategy();
    let retriever = match (&strategy, &d_src) {
        (Some(_), Some(d)) => Some(ExemplarRetriever::new(d, provider.clone())?),
        _ => None,
    };
    let queries: Vec<_> = match &args.query_id {
        Some(id) => {
            let q: Vec<_> = queries.into_iter().filter(|q| &q.id == id).collect();
            if q.is_empty() {
                return Err(Error::InvalidArgument(format!("no query with id {id:?}")).into());
            }
            q
        }
        None => queries,
    };
    let mut lines = Vec::with_capacity(queries.len());
    for q in &queries {
        let pairs = d_para.as_ref().map(|c| c.for_languages(&config.source_lang, &q.lang));
        let mut line = json!({"query_id": q.id, "lang": q.lang});
        if let (Some(r), Some(s)) = (&retriever, &strategy) {
            let (set, translated) = r.retrieve(q, s, pairs.as_deref(), mt.as_deref())?;
            let exemplars: Vec<Value> = set
                .exemplars
                .iter()
                .zip(&set.provenance)
                .map(|(e, p)| json!({"id": e.id, "label": e.label, "score": p.score}))
                .collect();
            line["strategy"] = json!(s.kind.name());
            line["exemplars"] = json!(exemplars);
            if let Some(t) = translated {
                line["translated"] = json!(t);
            }
        }
        if config.alignment.mode == AlignmentMode::Query {
            let pairs = pairs.expect("validated: query alignment has d_para");
            let aligner = AlignmentRetriever::new(pairs, &q.lang, provider.clone())?;
            let found = aligner.retrieve(q, config.alignment.k, &config.alignment.similarity)?;
            let items: Vec<Value> = found
                .pairs
                .iter()
                .zip(&found.scores)
                .map(|(p, s)| json!({"pair_id": p.id, "score": s}))
                .collect();
            line["alignment"] = json!(items);
        }
        lines.push(line);
    }
    match &args.out {
        Some(p) => {
            let mut out = create(p)?;
            write_jsonl(&mut out, &lines)?;
            out.flush()?;
        }
        None => write_jsonl(&mut std::io::stdout().lock(), &lines)?,
    }
    Ok(())
}

pub fn align_quality(args: AlignQualityArgs) -> Result<()> {
    let mode = if args.multi_sense {
        SenseMode::Multi
    } else {
        SenseMode::Single
    };
    let lexicon = load_lexicon(&args.lexicon, mode)?;
    let provider: Box<dyn EmbeddingProvider> = match &args.embeddings {
        Some(p) => Box::new(FileEmbeddings::load(p)?),
        None => {
            let url = std::env::var(EMBED_URL_ENV)
                .map_err(|_| Error::Config(format!("pass --embeddings or set {EMBED_URL_ENV}")))?;
            Box::new(HttpEmbeddings::new(&url))
        }
    };
    let report = word_retrieval_accuracy(&lexicon, provider.as_ref(), args.k)?;
    println!(
        "{} accuracy@{} = {:.4} ({}/{} words, {} without vectors)",
        report.lang_pair, report.k, report.accuracy_at_k, report.hits, report.n_words, report.n_missing
    );
    if let Some(p) = &args.out {
        write_json(p, &report)?;
    }
    Ok(())
}

fn read_report(path: &Path) -> Result<MetricReport> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::Parse {
            location: path.display().to_string(),
            message: e.to_string(),
        }
        .into()
    })
}

pub fn report(args: ReportArgs) -> Result<()> {
    let delta = delta_report(&read_report(&args.baseline)?, &read_report(&args.treatment)?)?;
    match &args.out {
        Some(p) => write_json(p, &delta)?,
        None => println!("{}", serde_json::to_string_pretty(&delta)?),
    }
    Ok(())
}
