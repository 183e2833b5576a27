//! Command-line surface and the staged pipeline behind it.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use rayon::prelude::*;
use tagrec_core::evaluation::{
    aggregate, drift_analysis, run_case, EvalConfig, EvalReport, PrecisionMode, DEFAULT_MAX_LAG, MAX_K,
};
use tagrec_core::folksonomy::{filter_test_users, leave_one_out_split};
use tagrec_core::synthetic::{drift_corpus, planted_corpus, to_folksonomy, DriftConfig, PlantedConfig};
use tagrec_core::topics::train_lda;
use tagrec_core::{Blacklist, LdaConfig, Post, Query, TopicModel};

use crate::algorithms::{self, Recommender};
use crate::config::{blacklist_from, RunConfig};
use crate::error::CliError;
use crate::formats::{self, LoadedSplit};
use crate::report;

/// Environment variable holding the worker thread count.
pub const WORKERS_ENV: &str = "TAGREC_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "tagrec", version, about = "Tag recommendation experiments over folksonomy datasets")]
pub struct Cli {
    /// Log more (repeat for debug output); RUST_LOG overrides
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize a raw tag-assignment file into a dataset snapshot
    Ingest(IngestArgs),
    /// Hold out each user's most recent post
    Split(SplitArgs),
    /// Train a topic model on a split and save a snapshot
    Lda(LdaArgs),
    /// Write top-k predictions for every test post
    Recommend(RecommendArgs),
    /// Evaluate algorithms on a split
    Eval(EvalArgs),
    /// Per-user similarity of posts against lag, for topics and tags
    Drift(DriftArgs),
    /// Generate a bundled synthetic corpus
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Tab-separated `user resource tag timestamp` rows
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Tags to drop, one per line (replaces the default list)
    #[arg(long, conflicts_with = "no_default_blacklist")]
    pub blacklist: Option<PathBuf>,
    #[arg(long)]
    pub no_default_blacklist: bool,
    /// Keep this fraction of users, chosen at random
    #[arg(long)]
    pub sample_users: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Dataset snapshot written by `ingest`
    #[arg(long)]
    pub input: PathBuf,
    /// Directory receiving train.tsv and test.tsv
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args)]
pub struct TopicArgs {
    #[arg(long, default_value_t = 20)]
    pub topics: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Gibbs sweeps
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    /// Document-topic prior (default 50 / topics)
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub eta: f64,
}

impl TopicArgs {
    pub fn lda_config(&self) -> LdaConfig {
        let base = LdaConfig::new(self.topics);
        LdaConfig {
            alpha: self.alpha.unwrap_or(base.alpha),
            eta: self.eta,
            iterations: self.iters,
            seed: self.seed,
            ..base
        }
    }
}

#[derive(Clone, Copy, Debug, Args)]
pub struct ScoringArgs {
    /// Weight of the personal component
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    /// Forgetting exponent
    #[arg(long, default_value_t = 0.5)]
    pub d: f64,
    /// Only evaluate users with at least this many posts
    #[arg(long, default_value_t = 1)]
    pub b_min: usize,
}

#[derive(Debug, Args)]
pub struct LdaArgs {
    #[arg(long)]
    pub split: PathBuf,
    #[command(flatten)]
    pub topics: TopicArgs,
    /// Train on training and test posts together
    #[arg(long)]
    pub paper_mode: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model snapshot written by `lda`; trained on the fly when absent
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub topics: TopicArgs,
    /// Train the on-the-fly model on training and test posts together
    #[arg(long)]
    pub paper_mode: bool,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    #[arg(long)]
    pub split: PathBuf,
    #[arg(long)]
    pub algo: String,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    #[arg(long, default_value_t = MAX_K)]
    pub k: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub split: PathBuf,
    /// Comma-separated algorithm names
    #[arg(long, default_value = "3l,3lt-topic,3lt-tag,bllc,mp-ur")]
    pub algos: String,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    /// Also write recall/precision curves
    #[arg(long)]
    pub curves: bool,
    /// Also write pairwise Wilcoxon tests
    #[arg(long)]
    pub sig: bool,
    /// Divide hits by k even when fewer tags were returned
    #[arg(long)]
    pub strict_precision: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DriftArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub topics: TopicArgs,
    #[arg(long, default_value_t = DEFAULT_MAX_LAG)]
    pub max_lag: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    /// Small corpus for the end-to-end pipeline
    Pipeline,
    /// Stable topics with a rotating tag vocabulary
    Drift,
    /// Two disjoint planted vocabularies
    Planted,
}

impl SynthKind {
    fn as_str(self) -> &'static str {
        match self {
            SynthKind::Pipeline => "pipeline",
            SynthKind::Drift => "drift",
            SynthKind::Planted => "planted",
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: SynthKind,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest(a) => ingest(&a),
        Command::Split(a) => split(&a),
        Command::Lda(a) => lda(&a),
        Command::Recommend(a) => recommend(&a),
        Command::Eval(a) => eval(&a),
        Command::Drift(a) => drift(&a),
        Command::Synth(a) => synth(&a),
    }
}

/// Thread pool sized by `TAGREC_WORKERS`, or rayon's default when unset.
pub fn worker_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(WORKERS_ENV) {
        let n: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got '{value}'")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Config(e.to_string()))
}

fn ingest(a: &IngestArgs) -> Result<(), CliError> {
    let blacklist = if a.no_default_blacklist {
        Blacklist::empty()
    } else {
        match &a.blacklist {
            Some(path) => blacklist_from(Some(&formats::read_text(path)?)),
            None => blacklist_from(None),
        }
    };
    let mut config = RunConfig::new("ingest");
    config.blacklist = Some(blacklist.iter().map(str::to_string).collect());
    if a.sample_users.is_some() {
        config.sample_users = a.sample_users;
        config.seed = Some(a.seed);
    }
    config.validate()?;

    let loaded = formats::load_dataset(&a.input, blacklist)?;
    config.dataset = Some(loaded.folksonomy.fingerprint());
    let f = match a.sample_users {
        Some(fraction) => loaded.folksonomy.sample_users(fraction, a.seed)?,
        None => loaded.folksonomy,
    };
    info!("ingested {} rows, dropped {}, kept {} posts", loaded.rows_seen, loaded.rows_dropped, f.posts().len());
    let mut header = config.header();
    header.push(("rows_seen".into(), loaded.rows_seen.to_string()));
    header.push(("rows_dropped".into(), loaded.rows_dropped.to_string()));
    formats::write_text(&a.out, &formats::dataset_snapshot(&f, &header))
}

fn split(a: &SplitArgs) -> Result<(), CliError> {
    let mut config = RunConfig::new("split");
    let loaded = formats::load_dataset(&a.input, Blacklist::empty())?;
    config.dataset = Some(loaded.folksonomy.fingerprint());
    config.validate()?;
    let split = leave_one_out_split(&loaded.folksonomy)?;
    info!("split: {} training posts, {} test posts", split.train.posts().len(), split.test.len());
    formats::write_split(&a.out, &split, &config.header())
}

fn train_for(split: &LoadedSplit, lda: &LdaConfig, paper_mode: bool) -> Result<TopicModel, CliError> {
    info!("training LDA with {} topics for {} sweeps", lda.num_topics, lda.iterations);
    let model = if paper_mode {
        train_lda(&split.split.full(), lda)?
    } else {
        train_lda(&split.split.train, lda)?
    };
    Ok(model)
}

fn lda(a: &LdaArgs) -> Result<(), CliError> {
    let mut config = RunConfig::new("lda");
    config.lda = Some(a.topics.lda_config());
    config.paper_mode = a.paper_mode;
    config.validate()?;
    let split = formats::load_split(&a.split)?;
    config.dataset = Some(split.split_id);
    let model = train_for(&split, &a.topics.lda_config(), a.paper_mode)?;
    let text = formats::model_snapshot(&model, &split.split.train, split.split_id, a.paper_mode, &config.header());
    formats::write_text(&a.out, &text)
}

/// Loads or trains the topic model when any algorithm needs one, and
/// records its parameters in `config`.
fn prepare_model(
    args: &ModelArgs,
    names: &[String],
    split: &LoadedSplit,
    config: &mut RunConfig,
) -> Result<Option<TopicModel>, CliError> {
    if !names.iter().any(|n| algorithms::needs_model(n)) {
        return Ok(None);
    }
    match &args.model {
        Some(path) => {
            let loaded = formats::load_model(path, split)?;
            if args.paper_mode && !loaded.paper_mode {
                return Err(CliError::Fingerprint(format!(
                    "{} was trained without --paper-mode",
                    path.display()
                )));
            }
            config.lda = Some(loaded.model.config().clone());
            config.paper_mode = loaded.paper_mode;
            Ok(Some(loaded.model))
        }
        None => Ok(Some(train_for(split, &args.topics.lda_config(), args.paper_mode)?)),
    }
}

/// Shared front half of `recommend` and `eval`: validate, load, build.
fn setup(
    command: &str,
    names: Vec<String>,
    model_args: &ModelArgs,
    scoring: &ScoringArgs,
    split_dir: &Path,
) -> Result<(RunConfig, LoadedSplit, Option<TopicModel>), CliError> {
    let mut config = RunConfig::new(command);
    config.beta = Some(scoring.beta);
    config.decay = Some(scoring.d);
    config.b_min = Some(scoring.b_min);
    config.algorithms = names;
    if model_args.model.is_none() && config.algorithms.iter().any(|n| algorithms::needs_model(n)) {
        config.lda = Some(model_args.topics.lda_config());
        config.paper_mode = model_args.paper_mode;
    }
    config.validate()?;
    let split = formats::load_split(split_dir)?;
    config.dataset = Some(split.split_id);
    let names = config.algorithms.clone();
    let model = prepare_model(model_args, &names, &split, &mut config)?;
    Ok((config, split, model))
}

fn test_posts(split: &LoadedSplit, b_min: usize) -> Result<Vec<Post>, CliError> {
    let posts = filter_test_users(&split.split, b_min)?;
    if posts.is_empty() {
        return Err(CliError::Data(format!("no test users with at least {b_min} posts")));
    }
    Ok(posts)
}

fn build_all<'a>(
    config: &RunConfig,
    split: &'a LoadedSplit,
    model: Option<&'a TopicModel>,
) -> Result<Vec<Recommender<'a>>, CliError> {
    config
        .algorithms
        .iter()
        .map(|name| algorithms::build(name, &split.split.train, model, config.three_layers()))
        .collect()
}

fn recommend(a: &RecommendArgs) -> Result<(), CliError> {
    let names = algorithms::parse_list(&a.algo);
    if names.len() != 1 {
        return Err(CliError::Config(format!("--algo takes exactly one name, got '{}'", a.algo)));
    }
    let (mut config, split, model) = setup("recommend", names, &a.model, &a.scoring, &a.split)?;
    config.k = Some(a.k);
    config.validate()?;
    let posts = test_posts(&split, a.scoring.b_min)?;
    let algs = build_all(&config, &split, model.as_ref())?;
    let alg = &algs[0];
    let pool = worker_pool()?;
    let ranked = pool.install(|| {
        posts
            .par_iter()
            .map(|p| {
                let query = Query {
                    user: p.user(),
                    resource: p.resource(),
                    ref_time: p.timestamp(),
                };
                alg.recommend(&query, a.k).map(|r| (p, r))
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    let text = report::predictions_tsv(&config.header(), &split.split.train, &ranked);
    formats::write_text(&a.out, &text)
}

/// Evaluates `algs` on `posts`, parallel over posts.
pub fn evaluate_parallel(
    pool: &rayon::ThreadPool,
    algs: &[Recommender<'_>],
    posts: &[Post],
    config: &EvalConfig,
) -> EvalReport {
    let metrics = algs
        .iter()
        .map(|alg| {
            info!("evaluating {}", alg.name());
            let cases = pool.install(|| {
                posts
                    .par_iter()
                    .map(|p| run_case(alg.as_ref(), p, config.precision_mode))
                    .collect()
            });
            aggregate(alg.name(), alg.notes(), cases)
        })
        .collect();
    EvalReport::assemble(metrics, config)
}

fn eval(a: &EvalArgs) -> Result<(), CliError> {
    let names = algorithms::parse_list(&a.algos);
    if names.is_empty() {
        return Err(CliError::Config("--algos is empty".into()));
    }
    let mode = if a.strict_precision { PrecisionMode::Strict } else { PrecisionMode::Returned };
    // validate the algorithm list before loading anything
    let mut probe = RunConfig::new("eval");
    probe.algorithms = names.clone();
    probe.validate()?;

    let (mut config, split, model) = setup("eval", names, &a.model, &a.scoring, &a.split)?;
    config.precision = Some(mode.as_str());
    let posts = test_posts(&split, a.scoring.b_min)?;
    let algs = build_all(&config, &split, model.as_ref())?;
    let eval_config = EvalConfig {
        precision_mode: mode,
        significance: a.sig,
        config_fingerprint: config.fingerprint(),
    };
    let report = evaluate_parallel(&worker_pool()?, &algs, &posts, &eval_config);
    let header = config.header();
    formats::write_text(&a.out.join("report.json"), &report::report_json(&header, &report))?;
    formats::write_text(&a.out.join("report.tsv"), &report::report_tsv(&header, &report))?;
    if a.curves {
        formats::write_text(&a.out.join("curves.tsv"), &report::curves_tsv(&header, &report))?;
    }
    if a.sig {
        formats::write_text(&a.out.join("significance.tsv"), &report::significance_tsv(&header, &report))?;
    }
    Ok(())
}

fn drift(a: &DriftArgs) -> Result<(), CliError> {
    let mut config = RunConfig::new("drift");
    config.lda = Some(a.topics.lda_config());
    config.max_lag = Some(a.max_lag);
    config.validate()?;
    let loaded = formats::load_dataset(&a.input, Blacklist::empty())?;
    let f = loaded.folksonomy;
    config.dataset = Some(f.fingerprint());
    // gist similarity needs topic weights for every post, so the model sees
    // the whole dataset
    let model = train_lda(&f, &a.topics.lda_config())?;
    let table = drift_analysis(&f, &model, a.max_lag);
    let header = config.header();
    formats::write_text(&a.out.join("drift_index.tsv"), &report::drift_tsv(&header, "posts", &table.by_index))?;
    formats::write_text(&a.out.join("drift_days.tsv"), &report::drift_tsv(&header, "days", &table.by_day))
}

/// Canonical snapshot text of a synthetic corpus.
pub fn synth_text(kind: SynthKind) -> Result<String, CliError> {
    let rows = match kind {
        SynthKind::Pipeline => drift_corpus(&DriftConfig::pipeline_fixture()),
        SynthKind::Drift => drift_corpus(&DriftConfig::drift_corpus()),
        SynthKind::Planted => planted_corpus(&PlantedConfig::default()).0,
    };
    let f = to_folksonomy(&rows)?;
    let mut header = RunConfig::new("synth").header();
    header.push(("synthetic".to_string(), kind.as_str().to_string()));
    Ok(formats::dataset_snapshot(&f, &header))
}

fn synth(a: &SynthArgs) -> Result<(), CliError> {
    formats::write_text(&a.out, &synth_text(a.kind)?)
}
