use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};
use supportive::agreement::{
    adjudication_sheet, fleiss_kappa, majority_gold, merge_adjudication, round_from_path,
    sheet_path, AnnotationMatrix, GoldLabels, Resolution,
};
use supportive::corpus::{
    clean, default_groups, infer_country, load_corpus, load_groups, partition,
    passes_length_filter, read_corpus, CleanText, Corpus, CorpusPartition, FieldMapping,
    HashtagGroup, Polarity, Side,
};
use supportive::experiments::{
    engagement_tsv, group_jaccard, group_location_engagement, hashtag_counts,
    label_location_engagement, run_experiment, term_frequencies, EvalReport, ExperimentConfig,
};
use supportive::linear::{compute_metrics, holdout_split, load_labeled, TextClassifier};
use supportive::scorer::{
    tweets_fingerprint, ExternalCommand, ScoreCache, ScoreTable, ScorerHandle, ScorerHub,
};
use supportive::synth::simulate_annotations;
use supportive::weaklabel::{
    build_eval_sample, build_hashtag_baseline, build_informed, exclude, repeated_rate, Example,
    Provenance as Origin, TextIndex, WeakDataset,
};

use crate::artifacts::{self, read, require, write, Layout, Provenance};
use crate::config::{Loaded, Stage};
use crate::error::CliError;

type Result<T> = std::result::Result<T, CliError>;

const SHEET: &str = "eval";
const ADJUDICATION_SHEET: &str = "adjudicate";

pub struct Ctx {
    pub cfg: Loaded,
    pub layout: Layout,
    pub prov: Provenance,
    pub jobs: Option<usize>,
}

impl Ctx {
    pub fn new(cfg: Loaded, jobs: Option<usize>) -> Result<Self> {
        cfg.validate()?;
        let prov = Provenance {
            config_fingerprint: cfg.fingerprint(),
            master_seed: cfg.config.seeds.master,
            overrides: cfg.overrides.clone(),
        };
        Ok(Self {
            layout: Layout {
                root: cfg.output_dir(),
            },
            cfg,
            prov,
            jobs,
        })
    }

    fn seed(&self, s: Stage) -> u64 {
        self.cfg.config.seeds.stage(s)
    }

    fn groups(&self) -> Result<Vec<HashtagGroup>> {
        match &self.cfg.config.groups {
            Some(p) => Ok(load_groups(self.cfg.resolve(p))?),
            None => Ok(default_groups()),
        }
    }

    pub fn manifest(&self) -> Result<()> {
        artifacts::write_manifest(&self.layout, &self.prov)
    }

    fn corpus(&self) -> Result<Corpus> {
        let text = read(&self.layout.corpus(), "ingest")?;
        let body: String = text
            .lines()
            .filter(|l| !l.starts_with("{\"provenance\""))
            .flat_map(|l| [l, "\n"])
            .collect();
        Ok(read_corpus(body.as_bytes(), &FieldMapping::default())?)
    }

    fn texts(corpus: &Corpus) -> TextIndex {
        corpus
            .records
            .par_iter()
            .map(|r| (r.id.clone(), clean(&r.raw_text)))
            .collect()
    }

    fn partition(&self, corpus: &Corpus) -> Result<CorpusPartition> {
        let path = self.layout.partition();
        let text = read(&path, "partition")?;
        let mut part = CorpusPartition::default();
        for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
            let mut cols = line.split('\t');
            let (Some(id), Some(side)) = (cols.next(), cols.next().and_then(Side::parse)) else {
                return Err(CliError::Data(format!("bad partition row `{line}`")));
            };
            part.insert(id.to_string(), side);
        }
        if part.len() != corpus.len()
            || corpus.records.iter().any(|r| part.side_of(&r.id).is_none())
        {
            return Err(CliError::Missing {
                artifact: path.display().to_string(),
                producer: "partition",
                detail: "does not match corpus.jsonl".into(),
            });
        }
        Ok(part)
    }

    /// The partition restricted to posts passing the length filter.
    fn eligible(&self, part: &CorpusPartition, texts: &TextIndex) -> CorpusPartition {
        let min = self.cfg.config.min_tokens;
        part.restrict(|id| texts.get(id).is_some_and(|t| passes_length_filter(t, min)))
    }

    fn scored_posts(part: &CorpusPartition, texts: &TextIndex) -> Vec<(String, CleanText)> {
        part.supportive
            .union(&part.not_supportive)
            .map(|id| (id.clone(), texts[id].clone()))
            .collect()
    }

    fn scores(&self, posts: &[(String, CleanText)]) -> Result<ScoreTable> {
        let path = self.layout.scores();
        let table = ScoreTable::from_tsv(&read(&path, "score")?)?;
        if table.corpus_fingerprint() != tweets_fingerprint(posts) {
            return Err(CliError::Missing {
                artifact: path.display().to_string(),
                producer: "score",
                detail: "was computed for a different set of posts".into(),
            });
        }
        Ok(table)
    }

    fn dataset(&self, name: &str, producer: &'static str) -> Result<WeakDataset> {
        let path = self.layout.dataset(name);
        require(&path, producer)?;
        Ok(WeakDataset::load(&path)?)
    }

    fn save_dataset(&self, name: &str, mut ds: WeakDataset) -> Result<WeakDataset> {
        ds.config.insert(
            "pipeline_config".into(),
            self.prov.config_fingerprint.clone(),
        );
        write(&self.layout.dataset(name), &ds.to_jsonl())?;
        Ok(ds)
    }

    /// Eligible partition minus the evaluation sample when configured.
    fn training_pool(&self, eligible: &CorpusPartition) -> Result<CorpusPartition> {
        if self.cfg.config.exclude_eval {
            Ok(exclude(eligible, &self.dataset("eval", "sample-eval")?))
        } else {
            Ok(eligible.clone())
        }
    }

    fn latest_sheet(&self) -> Result<PathBuf> {
        let dir = self.layout.annotation();
        let mut best: Option<(u32, PathBuf)> = None;
        if let Ok(entries) = std::fs::read_dir(&dir) {
            for e in entries.flatten() {
                let p = e.path();
                let name = p.file_name().and_then(|n| n.to_str()).unwrap_or_default();
                if !name.starts_with(&format!("{SHEET}.round")) {
                    continue;
                }
                if let Ok(r) = round_from_path(&p) {
                    if best.as_ref().is_none_or(|(b, _)| r > *b) {
                        best = Some((r, p));
                    }
                }
            }
        }
        best.map(|(_, p)| p).ok_or_else(|| CliError::Missing {
            artifact: sheet_path(&dir, SHEET, 1).display().to_string(),
            producer: "sample-eval",
            detail: "is missing".into(),
        })
    }

    fn write_sheet(&self, m: &AnnotationMatrix, name: &str, stage: &str) -> Result<PathBuf> {
        let path = sheet_path(self.layout.annotation(), name, m.round);
        write(
            &path,
            &(self.prov.comment(stage, json!({ "round": m.round })) + &m.to_tsv()),
        )?;
        Ok(path)
    }

    fn gold(&self) -> Result<GoldLabels> {
        Ok(GoldLabels::from_tsv(&read(&self.layout.gold(), "kappa")?)?)
    }
}

pub fn ingest(ctx: &Ctx) -> Result<()> {
    let path = ctx.cfg.resolve(&ctx.cfg.config.corpus);
    if !path.exists() {
        return Err(CliError::Config(format!(
            "corpus file {} does not exist",
            path.display()
        )));
    }
    let corpus = load_corpus(&path, &ctx.cfg.config.fields)?;
    let mut body = serde_json::to_string(&json!({
        "provenance": ctx.prov.value("ingest", json!({
            "corpus_fingerprint": corpus.fingerprint(),
            "records": corpus.len(),
            "skipped_lines": corpus.skipped(),
        }))
    }))
    .expect("json");
    body.push('\n');
    for r in &corpus.records {
        body.push_str(&serde_json::to_string(r).expect("record serializes"));
        body.push('\n');
    }
    write(&ctx.layout.corpus(), &body)?;

    let mut by_country: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    let mut inconsistent = 0;
    for r in &corpus.records {
        let c = infer_country(r);
        *by_country
            .entry((c.value.as_str(), c.source.as_str()))
            .or_default() += 1;
        inconsistent += usize::from(!c.consistent);
    }
    let mut report = ctx.prov.comment("ingest", json!({}));
    report.push_str("metric\tkey\tvalue\n");
    report.push_str(&format!("records\t\t{}\n", corpus.len()));
    report.push_str(&format!("skipped_lines\t\t{}\n", corpus.skipped()));
    report.push_str(&format!("country_inconsistent\t\t{inconsistent}\n"));
    for ((country, source), n) in by_country {
        report.push_str(&format!("country\t{country}/{source}\t{n}\n"));
    }
    write(&ctx.layout.ingest_report(), &report)?;
    eprintln!(
        "ingested {} records, skipped {} lines",
        corpus.len(),
        corpus.skipped()
    );
    Ok(())
}

pub fn partition_cmd(ctx: &Ctx) -> Result<()> {
    let corpus = ctx.corpus()?;
    let part = partition(&corpus, &ctx.groups()?)?;
    let texts = Ctx::texts(&corpus);
    let mut body = ctx.prov.comment(
        "partition",
        json!({ "min_tokens": ctx.cfg.config.min_tokens }),
    );
    body.push_str("id\tside\ttokens\n");
    for (id, side) in part.assignments() {
        body.push_str(&format!("{id}\t{side}\t{}\n", texts[id].token_count));
    }
    write(&ctx.layout.partition(), &body)?;
    let e = ctx.eligible(&part, &texts);
    eprintln!(
        "supportive {} ({} eligible), not-supportive {} ({} eligible), discarded {}, unmatched {}",
        part.supportive.len(),
        e.supportive.len(),
        part.not_supportive.len(),
        e.not_supportive.len(),
        part.discarded.len(),
        part.unmatched.len()
    );
    Ok(())
}

pub fn train_scorer(ctx: &Ctx, only: Option<&str>) -> Result<()> {
    let c = &ctx.cfg.config;
    if let Some(name) = only {
        if !c
            .scorers
            .iter()
            .any(|s| s.name == name && s.train.is_some())
        {
            return Err(CliError::Config(format!(
                "no built-in scorer named `{name}`"
            )));
        }
    }
    for (i, def) in c.scorers.iter().enumerate() {
        let Some(train) = &def.train else { continue };
        if only.is_some_and(|n| n != def.name) {
            continue;
        }
        let path = ctx.cfg.resolve(train);
        if !path.exists() {
            return Err(CliError::Config(format!(
                "training file {} for scorer `{}` does not exist",
                path.display(),
                def.name
            )));
        }
        let rows = load_labeled(&path)?;
        let seed = ctx.seed(Stage::TrainScorer).wrapping_add(i as u64);
        let (fit_rows, test_rows) = holdout_split(&rows, c.split.train, seed);
        let model = TextClassifier::fit(&fit_rows, def.kind, &c.train.with_seed(seed), c.min_df)?;
        let accuracy = if test_rows.is_empty() {
            None
        } else {
            let pred: Vec<bool> = test_rows.iter().map(|(t, _)| model.predict(t)).collect();
            let gold: Vec<bool> = test_rows.iter().map(|(_, y)| *y).collect();
            Some(compute_metrics(&pred, &gold)?.accuracy())
        };
        let header = ctx.prov.comment(
            "train-scorer",
            json!({
                "scorer": def.name,
                "train_rows": fit_rows.len(),
                "heldout_rows": test_rows.len(),
                "heldout_accuracy": accuracy,
            }),
        );
        write(&ctx.layout.model(&def.name), &(header + &model.to_text()))?;
        eprintln!(
            "scorer {}: {} training rows, held-out accuracy {}",
            def.name,
            fit_rows.len(),
            accuracy.map_or("n/a".into(), |a| format!("{a:.4}"))
        );
    }
    Ok(())
}

fn expand(arg: &str, out: &Path) -> Result<String> {
    let exe = std::env::current_exe()
        .map_err(|e| CliError::Config(format!("cannot locate this executable: {e}")))?;
    Ok(arg
        .replace("{self}", &exe.to_string_lossy())
        .replace("{output_dir}", &out.to_string_lossy()))
}

fn hub(ctx: &Ctx) -> Result<ScorerHub> {
    let mut hub = ScorerHub::new();
    for def in &ctx.cfg.config.scorers {
        let handle = match &def.command {
            None => {
                let path = ctx.layout.model(&def.name);
                require(&path, "train-scorer")?;
                ScorerHandle::linear(&def.name, TextClassifier::load(&path)?)
            }
            Some(cmd) => {
                let mut parts = cmd.iter().map(|a| expand(a, &ctx.layout.root));
                let program = parts.next().expect("validated non-empty")?;
                let mut ext = ExternalCommand::new(program, parts.collect::<Result<Vec<_>>>()?);
                ext.timeout_secs = def.timeout_secs;
                ext.batch_size = def.batch_size;
                ext.workers = ctx.jobs.map_or(def.workers, |j| def.workers.min(j.max(1)));
                ScorerHandle::external(&def.name, ext)
            }
        };
        hub.register(handle)?;
    }
    Ok(hub)
}

pub fn score(ctx: &Ctx) -> Result<()> {
    let corpus = ctx.corpus()?;
    let texts = Ctx::texts(&corpus);
    let eligible = ctx.eligible(&ctx.partition(&corpus)?, &texts);
    let posts = Ctx::scored_posts(&eligible, &texts);
    let hub = hub(ctx)?;
    let cache = ScoreCache::new(ctx.layout.cache());
    let table = hub.score_corpus_cached(&posts, Some(&cache))?;
    let header = ctx.prov.comment(
        "score",
        json!({ "scorers": hub.names(), "posts": posts.len() }),
    );
    write(&ctx.layout.scores(), &(header + &table.to_tsv()))?;
    eprintln!(
        "scored {} posts with {}",
        posts.len(),
        hub.names().join(", ")
    );
    Ok(())
}

pub fn sample_eval(ctx: &Ctx) -> Result<()> {
    let corpus = ctx.corpus()?;
    let texts = Ctx::texts(&corpus);
    let eligible = ctx.eligible(&ctx.partition(&corpus)?, &texts);
    let ds = build_eval_sample(
        &eligible,
        &texts,
        ctx.cfg.config.eval_size,
        ctx.seed(Stage::Eval),
    )?;
    let ds = ctx.save_dataset("eval", ds)?;

    // a new sample invalidates every earlier annotation round
    if let Ok(entries) = std::fs::read_dir(ctx.layout.annotation()) {
        for e in entries.flatten() {
            let _ = std::fs::remove_file(e.path());
        }
    }
    let sheet = AnnotationMatrix::blank(
        1,
        ctx.cfg.config.annotators,
        ds.examples.iter().map(|e| {
            let raw = corpus
                .get(&e.id)
                .map_or(e.text.clone(), |r| r.raw_text.clone());
            (e.id.clone(), raw)
        }),
    );
    let path = ctx.write_sheet(&sheet, SHEET, "sample-eval")?;
    eprintln!(
        "sampled {} posts; annotation sheet {}",
        ds.len(),
        path.display()
    );
    Ok(())
}

fn read_truth(path: &Path) -> Result<BTreeMap<String, bool>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read truth file {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let (id, l) = line
            .split_once('\t')
            .ok_or_else(|| CliError::Data(format!("bad truth row `{line}`")))?;
        let v = match l.trim() {
            "1" => true,
            "0" => false,
            other => {
                return Err(CliError::Data(format!(
                    "bad truth label `{other}` for `{id}`"
                )))
            }
        };
        out.insert(id.to_string(), v);
    }
    Ok(out)
}

pub fn simulate_annotation(ctx: &Ctx) -> Result<()> {
    let truth_path = ctx.cfg.config.truth.as_ref().ok_or_else(|| {
        CliError::Config("simulate-annotation needs a `truth` file in the config".into())
    })?;
    let truth = read_truth(&ctx.cfg.resolve(truth_path))?;
    let path = sheet_path(ctx.layout.annotation(), SHEET, 1);
    require(&path, "sample-eval")?;
    let sheet = AnnotationMatrix::load(&path)?;
    let filled = simulate_annotations(
        &sheet,
        &truth,
        ctx.cfg.config.annotator_accuracy,
        ctx.seed(Stage::Annotation),
    )?;
    ctx.write_sheet(&filled, SHEET, "simulate-annotation")?;
    eprintln!(
        "filled {} items x {} annotators",
        filled.items.len(),
        filled.annotators.len()
    );
    Ok(())
}

pub fn kappa(ctx: &Ctx) -> Result<()> {
    let path = ctx.latest_sheet()?;
    let m = AnnotationMatrix::load(&path)?;
    let k = fleiss_kappa(&m)?;
    let gold = majority_gold(&m)?;
    let stage = ctx.prov.comment("kappa", json!({ "round": m.round }));
    write(&ctx.layout.gold(), &(stage.clone() + &gold.to_tsv()))?;
    let mut body = stage;
    body.push_str("round\titems\tannotators\tkappa\tunanimous\tmajority\tunresolved\n");
    body.push_str(&format!(
        "{}\t{}\t{}\t{k:.6}\t{}\t{}\t{}\n",
        m.round,
        m.items.len(),
        m.annotators.len(),
        gold.count(Resolution::Unanimous),
        gold.count(Resolution::Majority),
        gold.count(Resolution::Unresolved)
    ));
    write(&ctx.layout.agreement(), &body)?;
    eprintln!(
        "round {}: kappa {k:.4} over {} items, {} unresolved",
        m.round,
        m.items.len(),
        gold.count(Resolution::Unresolved)
    );
    Ok(())
}

pub fn adjudicate(ctx: &Ctx, revisions: Option<&Path>) -> Result<()> {
    let base = AnnotationMatrix::load(ctx.latest_sheet()?)?;
    match revisions {
        None => {
            let gold = majority_gold(&base)?;
            let next = adjudication_sheet(&base, &gold);
            if next.items.is_empty() {
                eprintln!("round {}: nothing to adjudicate", base.round);
                return Ok(());
            }
            let path = ctx.write_sheet(&next, ADJUDICATION_SHEET, "adjudicate")?;
            eprintln!(
                "{} unresolved items written to {}",
                next.items.len(),
                path.display()
            );
            Ok(())
        }
        Some(rev) => {
            if !rev.exists() {
                return Err(CliError::Config(format!(
                    "revision sheet {} does not exist",
                    rev.display()
                )));
            }
            let merged = merge_adjudication(&base, &AnnotationMatrix::load(rev)?)?;
            ctx.write_sheet(&merged, SHEET, "adjudicate")?;
            kappa(ctx)
        }
    }
}

pub fn informed(ctx: &Ctx) -> Result<()> {
    let corpus = ctx.corpus()?;
    let texts = Ctx::texts(&corpus);
    let eligible = ctx.eligible(&ctx.partition(&corpus)?, &texts);
    let table = ctx.scores(&Ctx::scored_posts(&eligible, &texts))?;
    let pool = ctx.training_pool(&eligible)?;
    let ds = build_informed(
        &table,
        &pool,
        &texts,
        &ctx.cfg.informed(),
        ctx.seed(Stage::Informed),
    )?;
    let (p, n) = ds.count_by_label();
    ctx.save_dataset("informed", ds)?;
    eprintln!("informed: {p} positives, {n} negatives");
    Ok(())
}

pub fn hashtag_baseline(ctx: &Ctx) -> Result<()> {
    let corpus = ctx.corpus()?;
    let texts = Ctx::texts(&corpus);
    let eligible = ctx.eligible(&ctx.partition(&corpus)?, &texts);
    let (p, n) = ctx.dataset("informed", "build-informed")?.count_by_label();
    let pool = ctx.training_pool(&eligible)?;
    let ds = build_hashtag_baseline(&pool, &texts, p, n, ctx.seed(Stage::Hashtag))?;
    ctx.save_dataset("hashtag", ds)?;
    eprintln!("hashtag baseline: {p} positives, {n} negatives");
    Ok(())
}

pub fn pair_rate(ctx: &Ctx) -> Result<()> {
    let c = &ctx.cfg.config;
    let corpus = ctx.corpus()?;
    let texts = Ctx::texts(&corpus);
    let eligible = ctx.eligible(&ctx.partition(&corpus)?, &texts);
    let table = ctx.scores(&Ctx::scored_posts(&eligible, &texts))?;
    let mut body = ctx
        .prov
        .comment("pair-rate", json!({ "n_pairs": c.n_pairs, "runs": c.runs }));
    body.push_str("scorer\trun\tseed\trate\twins\tn_pairs\n");
    let mut summary = String::new();
    for name in table.scorers() {
        let r = repeated_rate(
            &table,
            &eligible,
            name,
            c.n_pairs,
            c.runs,
            ctx.seed(Stage::PairRate),
        )?;
        for (i, run) in r.runs.iter().enumerate() {
            body.push_str(&format!(
                "{name}\t{i}\t{}\t{:.6}\t{}\t{}\n",
                run.seed, run.rate, run.wins, run.n_pairs
            ));
        }
        summary.push_str(&format!("# {name} mean={:.6} std={:.6}\n", r.mean, r.std));
        eprintln!("{name}: {:.2}% ± {:.2}", 100.0 * r.mean, 100.0 * r.std);
    }
    write(&ctx.layout.report("pair_rate.tsv"), &(body + &summary))
}

fn supervised(ctx: &Ctx) -> Result<Option<WeakDataset>> {
    let Some(p) = &ctx.cfg.config.supervised_train else {
        return Ok(None);
    };
    let path = ctx.cfg.resolve(p);
    if !path.exists() {
        return Err(CliError::Config(format!(
            "supervised training file {} does not exist",
            path.display()
        )));
    }
    let mut ds = WeakDataset::new("supervised", 0, BTreeMap::new());
    for (i, (text, y)) in load_labeled(&path)?.into_iter().enumerate() {
        if passes_length_filter(&text, ctx.cfg.config.min_tokens) {
            ds.examples.push(Example {
                id: format!("s{i:06}"),
                text: text.text,
                label: Some(if y {
                    Polarity::Supportive
                } else {
                    Polarity::NotSupportive
                }),
                provenance: Origin::Gold,
                via: Vec::new(),
            });
        }
    }
    Ok(Some(ctx.save_dataset("supervised", ds)?))
}

fn jsonl_with_provenance(ctx: &Ctx, report: &EvalReport) -> String {
    let text = report.to_jsonl();
    let (first, rest) = text.split_once('\n').expect("report has a header line");
    let mut v: Value = serde_json::from_str(first).expect("header is json");
    v["provenance"]["pipeline"] = ctx.prov.value("experiment", json!({}));
    format!("{v}\n{rest}")
}

pub fn experiment(ctx: &Ctx, only: Option<&str>) -> Result<()> {
    let c = &ctx.cfg.config;
    let eval = ctx.dataset("eval", "sample-eval")?;
    let eval = eval.with_labels(&ctx.gold()?.polarities()?);
    let mut sets: Vec<(&str, WeakDataset)> = Vec::new();
    let want = |n: &str| only.is_none_or(|o| o == n);
    if want("supervised") {
        if let Some(ds) = supervised(ctx)? {
            sets.push(("supervised", ds));
        } else if only.is_some() {
            return Err(CliError::Config(
                "no `supervised_train` file is configured".into(),
            ));
        }
    }
    if want("informed") {
        sets.push(("informed", ctx.dataset("informed", "build-informed")?));
    }
    if want("hashtag") {
        sets.push(("hashtag", ctx.dataset("hashtag", "build-hashtag-baseline")?));
    }
    if sets.is_empty() {
        return Err(CliError::Config(format!(
            "unknown model `{}`; expected supervised, informed or hashtag",
            only.unwrap_or_default()
        )));
    }
    let xcfg = ExperimentConfig {
        kind: c.model_kind,
        runs: c.runs,
        base_seed: ctx.seed(Stage::Experiment),
        validation_fraction: c.split.validation,
        min_df: c.min_df,
        train: c.train,
    };
    let mut summary = ctx.prov.comment(
        "experiment",
        json!({ "kind": c.model_kind, "runs": c.runs }),
    );
    summary.push_str("model\tprecision\trecall\tf1\n");
    let mut best: Option<(f64, &str, &WeakDataset)> = None;
    for (name, ds) in &sets {
        let report = run_experiment(&format!("{name}-{}", c.model_kind), ds, &eval, &xcfg)?;
        let header = ctx
            .prov
            .comment("experiment", json!({ "model": report.model }));
        write(
            &ctx.layout.report(&format!("experiment.{name}.tsv")),
            &(header + &report.to_tsv()),
        )?;
        write(
            &ctx.layout.report(&format!("experiment.{name}.jsonl")),
            &jsonl_with_provenance(ctx, &report),
        )?;
        summary.push_str(&report.summary_row());
        summary.push('\n');
        eprintln!("{}", report.summary_row());
        if best.is_none_or(|(f, _, _)| report.f1.mean > f) {
            best = Some((report.f1.mean, name, ds));
        }
    }
    write(&ctx.layout.report("summary.tsv"), &summary)?;

    // the best model labels every post passing the length filter
    let (_, name, ds) = best.expect("at least one model ran");
    let model = TextClassifier::fit(
        &ds.labeled()?,
        c.model_kind,
        &c.train.with_seed(ctx.seed(Stage::Final)),
        c.min_df,
    )?;
    let corpus = ctx.corpus()?;
    let mut body = ctx
        .prov
        .comment("experiment", json!({ "predictions_from": name }));
    body.push_str("id\tlabel\tp\n");
    for r in &corpus.records {
        let t = clean(&r.raw_text);
        if passes_length_filter(&t, c.min_tokens) {
            let p = model.predict_proba(&t);
            let l = if p >= 0.5 {
                Polarity::Supportive
            } else {
                Polarity::NotSupportive
            };
            body.push_str(&format!("{}\t{}\t{p:.6}\n", r.id, l.as_str()));
        }
    }
    write(&ctx.layout.report("predictions.tsv"), &body)
}

fn predictions(ctx: &Ctx) -> Result<BTreeMap<String, bool>> {
    let text = read(&ctx.layout.report("predictions.tsv"), "experiment")?;
    let mut out = BTreeMap::new();
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let mut cols = line.split('\t');
        let (Some(id), Some(l)) = (cols.next(), cols.next().and_then(Polarity::parse)) else {
            return Err(CliError::Data(format!("bad prediction row `{line}`")));
        };
        out.insert(id.to_string(), l == Polarity::Supportive);
    }
    Ok(out)
}

pub fn engagement(ctx: &Ctx) -> Result<()> {
    let corpus = ctx.corpus()?;
    let groups = ctx.groups()?;
    let preds = predictions(ctx)?;
    let header = |what: &str| ctx.prov.comment("engagement", json!({ "table": what }));

    let rows = group_location_engagement(&corpus, &groups)?;
    write(
        &ctx.layout.report("engagement.groups.tsv"),
        &(header("group x location") + &engagement_tsv(&rows)),
    )?;
    let rows = label_location_engagement(&corpus, &preds)?;
    write(
        &ctx.layout.report("engagement.labels.tsv"),
        &(header("location x predicted label") + &engagement_tsv(&rows)),
    )?;
    let counts = hashtag_counts(&corpus, &groups);
    write(
        &ctx.layout.report("hashtag_counts.tsv"),
        &(header("hashtag counts") + &counts.to_tsv()),
    )?;

    let mut body = header("group jaccard");
    body.push_str("group_a\tgroup_b\tintersection\tunion\tjaccard\n");
    for (a, b, j) in group_jaccard(&corpus, &groups) {
        match j {
            Some(j) => body.push_str(&format!(
                "{a}\t{b}\t{}\t{}\t{:.6}\n",
                j.intersection,
                j.union,
                j.value()
            )),
            None => body.push_str(&format!("{a}\t{b}\t0\t0\tNA\n")),
        }
    }
    write(&ctx.layout.report("jaccard.tsv"), &body)
}

pub fn termfreq(ctx: &Ctx) -> Result<()> {
    let corpus = ctx.corpus()?;
    let texts = Ctx::texts(&corpus);
    let eligible = ctx.eligible(&ctx.partition(&corpus)?, &texts);
    let n = ctx.cfg.config.termfreq_top_n;
    let mut body = ctx.prov.comment("termfreq", json!({ "top_n": n }));
    body.push_str("scope\trank\tterm\tcount\n");
    let all: Vec<CleanText> = corpus
        .records
        .iter()
        .map(|r| texts[&r.id].clone())
        .collect();
    let side = |ids: &std::collections::BTreeSet<String>| {
        ids.iter().map(|id| texts[id].clone()).collect::<Vec<_>>()
    };
    for (scope, docs) in [
        ("all", all),
        ("supportive", side(&eligible.supportive)),
        ("not-supportive", side(&eligible.not_supportive)),
    ] {
        for (i, (term, count)) in term_frequencies(&docs, n)?.into_iter().enumerate() {
            body.push_str(&format!("{scope}\t{}\t{term}\t{count}\n", i + 1));
        }
    }
    write(&ctx.layout.report("termfreq.tsv"), &body)
}

/// Every stage in order. Stops after sampling when no ground truth is
/// configured, since the sheet then needs human annotators.
pub fn pipeline(ctx: &Ctx) -> Result<()> {
    ingest(ctx)?;
    partition_cmd(ctx)?;
    train_scorer(ctx, None)?;
    score(ctx)?;
    sample_eval(ctx)?;
    if ctx.cfg.config.truth.is_none() {
        ctx.manifest()?;
        eprintln!(
            "fill {} and continue with `supportive kappa`",
            sheet_path(ctx.layout.annotation(), SHEET, 1).display()
        );
        return Ok(());
    }
    simulate_annotation(ctx)?;
    kappa(ctx)?;
    informed(ctx)?;
    hashtag_baseline(ctx)?;
    pair_rate(ctx)?;
    experiment(ctx, None)?;
    engagement(ctx)?;
    termfreq(ctx)
}
