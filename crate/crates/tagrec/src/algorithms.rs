//! Algorithm registry: command-line names to recommenders.

use tagrec_core::baselines::{
    BllC, CollaborativeFiltering, FolkRank, Girptm, GraphMode, LdaRecommender, MostPopular, PageRankParams,
    PopularityKind, DEFAULT_NEIGHBORS,
};
use tagrec_core::{Folksonomy, TagRecommender, ThreeLayers, ThreeLayersConfig, TopicModel, Variant};

use crate::error::CliError;

pub const ALGORITHMS: [&str; 13] = [
    "3l", "3lt-topic", "3lt-tag", "mp", "mp-u", "mp-r", "mp-ur", "lda", "cf", "apr", "folkrank", "bllc", "girptm",
];

pub type Recommender<'a> = Box<dyn TagRecommender + Sync + 'a>;

/// Whether `name` needs a trained topic model.
pub fn needs_model(name: &str) -> bool {
    matches!(name, "3l" | "3lt-topic" | "3lt-tag" | "lda")
}

/// Splits a comma-separated list, keeping first occurrences only.
pub fn parse_list(list: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let name = name.to_ascii_lowercase();
        if !out.contains(&name) {
            out.push(name);
        }
    }
    out
}

pub fn build<'a>(
    name: &str,
    train: &'a Folksonomy,
    model: Option<&'a TopicModel>,
    config: ThreeLayersConfig,
) -> Result<Recommender<'a>, CliError> {
    let need_model = || model.ok_or_else(|| CliError::Config(format!("algorithm '{name}' needs a topic model")));
    let (beta, decay) = (config.beta, config.decay);
    let three = |variant| -> Result<Recommender<'a>, CliError> {
        Ok(Box::new(ThreeLayers::new(variant, train, need_model()?, config.clone())?))
    };
    Ok(match name {
        "3l" => three(Variant::Base)?,
        "3lt-topic" => three(Variant::TopicTime)?,
        "3lt-tag" => three(Variant::TagTime)?,
        "mp" => Box::new(MostPopular::new(train, PopularityKind::Global)),
        "mp-u" => Box::new(MostPopular::new(train, PopularityKind::User)),
        "mp-r" => Box::new(MostPopular::new(train, PopularityKind::Resource)),
        "mp-ur" => Box::new(MostPopular::new(train, PopularityKind::UserResource { beta })),
        "lda" => Box::new(LdaRecommender::new(need_model()?, train)),
        "cf" => Box::new(CollaborativeFiltering::new(train, DEFAULT_NEIGHBORS)),
        "apr" => Box::new(FolkRank::new(train, GraphMode::AdaptedPageRank, PageRankParams::default())),
        "folkrank" => Box::new(FolkRank::new(train, GraphMode::FolkRank, PageRankParams::default())),
        "bllc" => Box::new(BllC::new(train, decay, beta)),
        "girptm" => Box::new(Girptm::new(train, beta)),
        other => {
            return Err(CliError::Config(format!(
                "unknown algorithm '{other}', expected one of {}",
                ALGORITHMS.join(",")
            )))
        }
    })
}
