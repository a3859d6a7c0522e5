use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use popdisc_core::classify::{
    evaluate as evaluate_predictions, import_predictions as import_prediction_file, parse_prediction_records, Class, DistRandom,
    EvalReport, LinearSvm, SamplingMode,
};
use popdisc_core::corpus::{
    corpus_stats, filter_for_scoring, ingest_jsonl, write_sentences_jsonl, Corpus, LabelDistribution, Schema,
};
use popdisc_core::features::{TfidfConfig, TfidfModel};
use popdisc_core::promptkit::{emit_answer_key, emit_prompt_file, PromptBuilder, PromptSetting, PromptSpec};
use popdisc_core::scoring::{score_corpus, write_scores_csv, LabelSource, ScoreConfig};
use popdisc_core::stats::{krippendorff_alpha_labels, pearson};
use serde_json::json;

use crate::config::{require_path, RunConfig};
use crate::error::{CliError, CliResult};
use crate::model::Baseline;
use crate::{
    BaselineArg, EvaluateArgs, ImportArgs, IngestArgs, PredictArgs, PromptArgs, SchemaArg, ScoreArgs, StatsArgs,
    TrainArgs,
};

/// Runs `f` against the file at `path` (parents created) or stdout.
pub fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<()> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
            }
            let file = File::create(p).map_err(|e| CliError::io(p, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush().map_err(|e| CliError::io(p, e))
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            f(&mut w)?;
            w.flush().map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

fn write_str(w: &mut dyn Write, s: &str) -> CliResult<()> {
    w.write_all(s.as_bytes())
        .map_err(|e| CliError::io(Path::new("<output>"), e))
}

/// Loads a sentence JSONL corpus; an empty corpus is an input error.
pub fn load_corpus(path: &Path) -> CliResult<Corpus> {
    let corpus = ingest_jsonl(path, Schema::Sentences)?;
    if corpus.is_empty() {
        return Err(popdisc_core::Error::EmptyCorpus.into());
    }
    Ok(corpus)
}

pub fn ingest(cfg: &RunConfig, args: IngestArgs) -> CliResult<()> {
    let input = require_path(Some(args.input), &None, "input")?;
    let schema = match args.schema {
        SchemaArg::Sentences => Schema::Sentences,
        SchemaArg::Raw => Schema::RawSpeeches,
    };
    let corpus = ingest_jsonl(&input, schema)?;
    if corpus.is_empty() {
        return Err(popdisc_core::Error::EmptyCorpus.into());
    }
    let out = cfg.output(args.output, "corpus.jsonl");
    with_output(out.as_deref(), |w| Ok(write_sentences_jsonl(&corpus, w)?))?;

    eprintln!(
        "{}: {} speeches, {} sentences",
        corpus.name,
        corpus.speeches.len(),
        corpus.sentence_count()
    );
    if corpus.sentences().all(|(_, s)| s.gold.is_some()) {
        eprintln!("{}", corpus_stats(&corpus)?);
    }
    Ok(())
}

struct FilterSummary {
    sentences: usize,
    kept: usize,
    dropped: usize,
    dropped_populist: Option<usize>,
    thank_case_variants: usize,
}

fn filter_summary(corpus: &Corpus) -> FilterSummary {
    let mut s = FilterSummary {
        sentences: 0,
        kept: 0,
        dropped: 0,
        dropped_populist: Some(0),
        thank_case_variants: 0,
    };
    for sp in &corpus.speeches {
        let f = filter_for_scoring(sp);
        s.sentences += sp.sentences.len();
        s.kept += f.kept.len();
        s.dropped += f.dropped.len();
        s.thank_case_variants += f.thank_case_variants;
        for d in &f.dropped {
            s.dropped_populist = match (s.dropped_populist, d.gold) {
                (Some(n), Some(g)) => Some(n + usize::from(g.is_populist())),
                _ => None,
            };
        }
    }
    s
}

fn distribution_json(d: &LabelDistribution) -> serde_json::Value {
    json!({
        "total": d.total,
        "neutral": d.neutral,
        "anti_elitism": d.anti_elitism,
        "people_centrism": d.people_centrism,
        "fully_populist": d.fully_populist,
    })
}

pub fn stats(cfg: &RunConfig, args: StatsArgs) -> CliResult<()> {
    let path = require_path(args.corpus, &cfg.paths.corpus, "corpus")?;
    let corpus = load_corpus(&path)?;
    let labelled = corpus.sentences().all(|(_, s)| s.gold.is_some());
    let dist = if labelled { Some(corpus_stats(&corpus)?) } else { None };
    let filter = filter_summary(&corpus);

    let agreement = if args.annotators.len() >= 2 {
        let mut sets = Vec::new();
        for p in &args.annotators {
            let p = require_path(Some(p.clone()), &None, "annotator file")?;
            let text = fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
            sets.push(parse_prediction_records(&text, p.display().to_string())?);
        }
        let codings: Vec<Vec<_>> = sets
            .iter()
            .map(|set| corpus.sentences().map(|(sp, s)| set.get(&sp.id, s.index)).collect())
            .collect();
        Some(krippendorff_alpha_labels(&codings)?)
    } else if args.annotators.len() == 1 {
        return Err(CliError::input("invalid_argument", "agreement needs at least two --annotator files"));
    } else {
        None
    };

    with_output(None, |w| {
        if args.json {
            let v = json!({
                "corpus": corpus.name,
                "speeches": corpus.speeches.len(),
                "distribution": dist.as_ref().map(distribution_json),
                "filter": {
                    "sentences": filter.sentences,
                    "kept": filter.kept,
                    "dropped": filter.dropped,
                    "dropped_populist": filter.dropped_populist,
                    "thank_case_variants": filter.thank_case_variants,
                },
                "agreement": agreement.map(|a| json!({
                    "joint": a.joint,
                    "anti_elitism": a.anti_elitism,
                    "people_centrism": a.people_centrism,
                })),
            });
            write_str(w, &format!("{v}\n"))
        } else {
            let mut s = format!("{}: {} speeches\n", corpus.name, corpus.speeches.len());
            match &dist {
                Some(d) => s.push_str(&format!("{d}\n")),
                None => s.push_str(&format!("sentences: {} (not fully labelled)\n", corpus.sentence_count())),
            }
            let pct = 100.0 * filter.dropped as f64 / filter.sentences.max(1) as f64;
            s.push_str(&format!(
                "scoring filter: kept {} of {}, dropped {} ({pct:.2}%)",
                filter.kept, filter.sentences, filter.dropped
            ));
            if let Some(n) = filter.dropped_populist {
                s.push_str(&format!(", {n} dropped sentences are populist"));
            }
            s.push('\n');
            if filter.thank_case_variants > 0 {
                s.push_str(&format!(
                    "kept case variants of the thank prefix: {}\n",
                    filter.thank_case_variants
                ));
            }
            if let Some(a) = agreement {
                let fmt = |x: Option<f64>| x.map_or("undefined".to_string(), |v| format!("{v:.3}"));
                s.push_str(&format!(
                    "krippendorff alpha: joint {:.3}, AE {}, PC {}\n",
                    a.joint,
                    fmt(a.anti_elitism),
                    fmt(a.people_centrism)
                ));
            }
            write_str(w, &s)
        }
    })
}

fn tfidf_config(cfg: &RunConfig, args: &TrainArgs) -> CliResult<TfidfConfig> {
    let c = TfidfConfig {
        min_df: args.min_df.unwrap_or(cfg.tfidf.min_df),
        max_df: args.max_df.unwrap_or(cfg.tfidf.max_df),
        max_features: args.max_features.unwrap_or(cfg.tfidf.max_features),
        ngram_range: cfg.tfidf.ngram_range,
    };
    c.validate()?;
    Ok(c)
}

fn mean_report_csv(reports: &[EvalReport]) -> String {
    let n = reports.len() as f64;
    let avg = |f: &dyn Fn(&EvalReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    let mut out = String::from("class,precision,recall,f1\n");
    for class in Class::ALL {
        out.push_str(&format!(
            "{},{},{},{}\n",
            class.name(),
            avg(&|r| r.class(class).precision),
            avg(&|r| r.class(class).recall),
            avg(&|r| r.class(class).f1)
        ));
    }
    out.push_str(&format!(
        "macro,{},{},{}\n",
        avg(&|r| r.macro_precision),
        avg(&|r| r.macro_recall),
        avg(&|r| r.macro_f1)
    ));
    out
}

pub fn train_baseline(cfg: &RunConfig, args: TrainArgs) -> CliResult<()> {
    let train_path = require_path(args.train.clone(), &cfg.paths.train, "training corpus")?;
    let train = load_corpus(&train_path)?;
    let test = match args.test.clone().or_else(|| cfg.paths.test.clone()) {
        Some(p) => Some(load_corpus(&require_path(Some(p), &None, "test corpus")?)?),
        None => None,
    };
    let seed = cfg.seed(args.seed);
    let started = Instant::now();

    let model = match args.baseline {
        BaselineArg::Svm => {
            let tcfg = tfidf_config(cfg, &args)?;
            let docs: Vec<&str> = train.sentences().map(|(_, s)| s.text.as_str()).collect();
            let tfidf = TfidfModel::fit(&docs, tcfg)?;
            log::info!("vocabulary: {} n-grams", tfidf.len());
            let svm_cfg = cfg.svm(args.c, args.epochs, args.balanced, seed);
            let svm = LinearSvm::train(&train, &tfidf, &svm_cfg)?;
            Baseline::TfidfSvm { tfidf, svm }
        }
        BaselineArg::DistRandom => {
            let mode = if args.independent {
                SamplingMode::Independent
            } else {
                SamplingMode::Joint
            };
            Baseline::DistRandom(DistRandom::fit(&train, mode)?)
        }
    };
    log::info!("trained {} in {:.2?}", model.name(), started.elapsed());

    if let Some(p) = cfg.output(args.model_out.clone(), "model.json") {
        if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        model.save(&p)?;
    }

    if let (Some(k), Baseline::TfidfSvm { tfidf, svm }) = (args.top_features, &model) {
        let mut csv = String::from("class,rank,ngram,weight\n");
        for class in Class::ALL {
            for (rank, (gram, w)) in svm.top_features(tfidf, class, k)?.into_iter().enumerate() {
                let gram = if gram.contains([',', '"']) {
                    format!("\"{}\"", gram.replace('"', "\"\""))
                } else {
                    gram
                };
                csv.push_str(&format!("{},{},{gram},{w}\n", class.name(), rank + 1));
            }
        }
        match cfg.output(args.top_features_out.clone(), "top_features.csv") {
            Some(p) => with_output(Some(&p), |w| write_str(w, &csv))?,
            None => eprint!("{csv}"),
        }
    }

    if let Some(test) = test {
        let csv = match &model {
            Baseline::TfidfSvm { .. } => {
                let pred = model.predict(&test, seed)?;
                let report = evaluate_predictions(&pred, &test)?;
                eprintln!("{report}");
                report.to_csv()
            }
            Baseline::DistRandom(_) => {
                let runs = args.runs.max(1);
                let mut reports = Vec::new();
                for r in 0..runs {
                    let pred = model.predict(&test, seed + r)?;
                    let report = evaluate_predictions(&pred, &test)?;
                    log::info!("seed {}: macro-F1 {:.4}", seed + r, report.macro_f1);
                    reports.push(report);
                }
                let csv = mean_report_csv(&reports);
                eprintln!("mean over {runs} seeds:\n{csv}");
                csv
            }
        };
        let out = cfg.output(args.report, "report.csv");
        with_output(out.as_deref(), |w| write_str(w, &csv))?;
    }
    log::info!("train-baseline finished in {:.2?}", started.elapsed());
    Ok(())
}

pub fn predict(cfg: &RunConfig, args: PredictArgs) -> CliResult<()> {
    let model = Baseline::load(&require_path(args.model, &cfg.paths.model, "model")?)?;
    let corpus = load_corpus(&require_path(args.corpus, &cfg.paths.corpus, "corpus")?)?;
    let pred = model.predict(&corpus, cfg.seed(args.seed))?;
    let out = cfg.output(args.output, "predictions.jsonl");
    with_output(out.as_deref(), |w| Ok(pred.write_jsonl(w)?))?;
    eprintln!("{}: {} predictions", model.name(), pred.len());
    Ok(())
}

pub fn import_predictions(cfg: &RunConfig, args: ImportArgs) -> CliResult<()> {
    let corpus = load_corpus(&require_path(args.corpus, &cfg.paths.corpus, "corpus")?)?;
    let path = require_path(args.predictions, &cfg.paths.predictions, "predictions")?;
    let pred = import_prediction_file(&path, &corpus)?;
    let out = cfg.output(args.output, "predictions.jsonl");
    with_output(out.as_deref(), |w| Ok(pred.write_jsonl(w)?))?;
    let dist = LabelDistribution::from_labels(pred.iter().map(|(_, _, l)| l));
    eprintln!("imported {} predictions covering {}\n{dist}", pred.len(), corpus.name);
    Ok(())
}

pub fn evaluate(cfg: &RunConfig, args: EvaluateArgs) -> CliResult<()> {
    let gold = load_corpus(&require_path(args.gold, &cfg.paths.corpus, "gold corpus")?)?;
    let path = require_path(args.predictions, &cfg.paths.predictions, "predictions")?;
    let pred = import_prediction_file(&path, &gold)?;
    let report = evaluate_predictions(&pred, &gold)?;
    eprintln!("{report}");
    let out = cfg.output(args.output, "evaluation.csv");
    with_output(out.as_deref(), |w| write_str(w, &report.to_csv()))
}

pub fn score_config(cfg: &RunConfig, args: &ScoreArgs) -> CliResult<ScoreConfig> {
    let mut c = cfg.score.clone();
    if let Some(v) = args.scale {
        c.scale = v;
    }
    if let Some(v) = args.full_boost {
        c.full_boost = v;
    }
    if let Some(v) = args.adjacency_multiplier {
        c.adjacency_multiplier = v;
    }
    if args.pair_fully_populist {
        c.pair_fully_populist = true;
    }
    c.validate()?;
    Ok(c)
}

pub fn score(cfg: &RunConfig, args: ScoreArgs) -> CliResult<()> {
    let score_cfg = score_config(cfg, &args)?;
    let corpus = load_corpus(&require_path(args.corpus.clone(), &cfg.paths.corpus, "corpus")?)?;
    let pred = match args.predictions.clone().or_else(|| cfg.paths.predictions.clone()) {
        Some(p) => Some(import_prediction_file(require_path(Some(p), &None, "predictions")?, &corpus)?),
        None => None,
    };
    let source = pred.as_ref().map_or(LabelSource::Gold, LabelSource::Set);
    let started = Instant::now();
    let scores = score_corpus(&corpus, source, &score_cfg)?;
    let out = cfg.output(args.output, "scores.csv");
    with_output(out.as_deref(), |w| Ok(write_scores_csv(&scores, w)?))?;

    let sentences: usize = scores.iter().map(|s| s.n_sentences).sum();
    let kept: usize = scores.iter().map(|s| s.n_scored).sum();
    let boosted: usize = scores.iter().map(|s| s.adjacency_sentences).sum();
    let pv_defined = scores.iter().filter(|s| s.pv.overall.is_some()).count();
    eprintln!(
        "scored {} speeches ({kept} of {sentences} sentences kept); PV defined for {pv_defined}",
        scores.len()
    );
    eprintln!(
        "adjacency bonus on {boosted} sentences ({:.3}%)",
        100.0 * boosted as f64 / sentences.max(1) as f64
    );
    let pdi: Vec<f64> = scores.iter().map(|s| s.pdi).collect();
    let wpdi: Vec<f64> = scores.iter().map(|s| s.wpdi).collect();
    if let Ok(r) = pearson(&pdi, &wpdi) {
        eprintln!("pdi~wpdi pearson r = {r:.4}");
    }
    log::info!("scoring took {:.2?}", started.elapsed());
    Ok(())
}

pub fn prompts(cfg: &RunConfig, args: PromptArgs) -> CliResult<()> {
    let corpus = load_corpus(&require_path(args.corpus, &cfg.paths.test.clone().or(cfg.paths.corpus.clone()), "corpus")?)?;
    let p = &cfg.prompts;
    let setting = args.setting.or(p.setting).unwrap_or(PromptSetting::Base);
    let spec = PromptSpec {
        setting,
        k: args.k.or(p.k).unwrap_or(0),
        context_window: args
            .context_window
            .or(p.context_window)
            .unwrap_or(popdisc_core::promptkit::MAX_CONTEXT_WINDOW),
        seed: cfg.seed(args.seed),
        option_order: args.option_order.or(p.option_order).unwrap_or_default(),
    };
    spec.validate()?;

    let needs_train = matches!(setting, PromptSetting::KShot | PromptSetting::RagShot) && spec.k > 0;
    let train = if needs_train {
        Some(load_corpus(&require_path(args.train, &cfg.paths.train, "training corpus")?)?)
    } else {
        None
    };
    let bundle = match args.model.or_else(|| cfg.paths.model.clone()) {
        Some(m) if setting == PromptSetting::RagShot => Some(Baseline::load(&require_path(Some(m), &None, "model")?)?),
        _ => None,
    };
    let fitted;
    let tfidf = match (&bundle, &train) {
        (Some(b), _) if b.tfidf().is_some() => b.tfidf(),
        (_, Some(t)) if setting == PromptSetting::RagShot => {
            let docs: Vec<&str> = t.sentences().map(|(_, s)| s.text.as_str()).collect();
            fitted = TfidfModel::fit(&docs, cfg.tfidf.clone())?;
            Some(&fitted)
        }
        _ => None,
    };

    let builder = PromptBuilder::new(spec.clone(), train.as_ref(), tfidf)?;
    let out = cfg.output(args.output, &format!("prompts_{setting}.jsonl"));
    let mut count = 0;
    with_output(out.as_deref(), |w| {
        count = emit_prompt_file(std::slice::from_ref(&builder), &corpus, w)?;
        Ok(())
    })?;
    if let Some(key) = args.answer_key {
        with_output(Some(&key), |w| {
            emit_answer_key(&corpus, spec.option_order, w)?;
            Ok(())
        })?;
    }
    eprintln!("wrote {count} {setting} prompts");
    Ok(())
}
