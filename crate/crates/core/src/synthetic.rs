//! Seeded generators for small test corpora.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::folksonomy::{Blacklist, Folksonomy, FolksonomyBuilder, FolksonomyError, Timestamp, SECONDS_PER_DAY};

/// One tag assignment.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Row {
    pub user: String,
    pub resource: String,
    pub tag: String,
    pub timestamp: Timestamp,
}

const EPOCH: Timestamp = 1_500_000_000;

/// Builds a folksonomy from rows without any tag filtering.
pub fn to_folksonomy(rows: &[Row]) -> Result<Folksonomy, FolksonomyError> {
    let mut builder = FolksonomyBuilder::new(Blacklist::empty());
    for r in rows {
        builder.add_row(&r.user, &r.resource, &r.tag, r.timestamp)?;
    }
    builder.build()
}

/// Documents drawn from disjoint topic vocabularies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlantedConfig {
    pub documents: usize,
    pub topics: usize,
    pub vocab_per_topic: usize,
    pub tags_per_document: usize,
    pub users: usize,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        Self {
            documents: 100,
            topics: 2,
            vocab_per_topic: 10,
            tags_per_document: 5,
            users: 10,
            seed: 7,
        }
    }
}

pub fn planted_tag_name(topic: usize, word: usize) -> String {
    format!("t{topic}-w{word}")
}

/// Document `d` (resource `doc{d}`) belongs to topic `d % topics` and carries
/// distinct tags from that topic's vocabulary only. Returns the rows and each
/// document's topic.
pub fn planted_corpus(config: &PlantedConfig) -> (Vec<Row>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let per_doc = config.tags_per_document.min(config.vocab_per_topic);
    let mut rows = Vec::new();
    let mut labels = Vec::with_capacity(config.documents);
    for d in 0..config.documents {
        let topic = d % config.topics;
        labels.push(topic);
        let user = format!("u{}", d % config.users.max(1));
        let resource = format!("doc{d}");
        let timestamp = EPOCH + d as Timestamp * 3_600;
        let mut words = sample(&mut rng, config.vocab_per_topic, per_doc).into_vec();
        words.sort_unstable();
        for w in words {
            rows.push(Row {
                user: user.clone(),
                resource: resource.clone(),
                tag: planted_tag_name(topic, w),
                timestamp,
            });
        }
    }
    (rows, labels)
}

/// Users with stable topics whose tag vocabulary rotates over time.
///
/// Each topic owns `vocab_per_topic` tags. A user sticks to one topic and
/// tags from a window of `window` consecutive topic tags that advances by one
/// tag every `shift_every` posts. Posts may add a rare noise tag, and may
/// target a resource shared with other users of the same topic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriftConfig {
    pub users: usize,
    pub posts_per_user: usize,
    pub topics: usize,
    pub vocab_per_topic: usize,
    pub window: usize,
    pub tags_per_post: usize,
    pub shift_every: usize,
    pub noise_probability: f64,
    pub noise_pool: usize,
    /// Shared resources per topic; zero makes every resource private.
    pub shared_resources: usize,
    pub shared_probability: f64,
    pub seconds_between_posts: Timestamp,
    pub seed: u64,
}

impl DriftConfig {
    /// The bundled drift corpus: 36 users with 60 posts each.
    pub fn drift_corpus() -> Self {
        Self {
            users: 36,
            posts_per_user: 60,
            topics: 6,
            vocab_per_topic: 40,
            window: 6,
            tags_per_post: 3,
            shift_every: 2,
            noise_probability: 0.3,
            noise_pool: 400,
            shared_resources: 0,
            shared_probability: 0.0,
            seconds_between_posts: SECONDS_PER_DAY,
            seed: 2015,
        }
    }

    /// The bundled pipeline fixture: 10 users with 20 posts each, partly on
    /// shared resources.
    pub fn pipeline_fixture() -> Self {
        Self {
            users: 10,
            posts_per_user: 20,
            topics: 3,
            vocab_per_topic: 24,
            window: 6,
            tags_per_post: 3,
            shift_every: 2,
            noise_probability: 0.2,
            noise_pool: 60,
            shared_resources: 15,
            shared_probability: 0.4,
            seconds_between_posts: SECONDS_PER_DAY,
            seed: 11,
        }
    }
}

pub fn drift_corpus(config: &DriftConfig) -> Vec<Row> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let per_post = config.tags_per_post.min(config.window);
    let mut rows = Vec::new();
    for u in 0..config.users {
        let topic = u % config.topics.max(1);
        let user = format!("user{u:03}");
        let start = rng.gen_range(0..config.vocab_per_topic);
        let offset = rng.gen_range(0..config.seconds_between_posts.max(1));
        let mut used_shared = BTreeSet::new();
        for i in 0..config.posts_per_user {
            let jitter = rng.gen_range(0..config.seconds_between_posts / 2 + 1);
            let timestamp = EPOCH + offset + i as Timestamp * config.seconds_between_posts + jitter;

            let mut resource = format!("{user}-r{i:03}");
            if config.shared_resources > 0 && rng.gen_bool(config.shared_probability) {
                let pick = rng.gen_range(0..config.shared_resources);
                if used_shared.insert(pick) {
                    resource = format!("topic{topic}-r{pick:03}");
                }
            }

            let base = start + i / config.shift_every.max(1);
            let mut tags: Vec<String> = sample(&mut rng, config.window, per_post)
                .into_iter()
                .map(|k| format!("topic{topic}-{:03}", (base + k) % config.vocab_per_topic))
                .collect();
            if config.noise_pool > 0 && rng.gen_bool(config.noise_probability) {
                tags.push(format!("noise{:03}", rng.gen_range(0..config.noise_pool)));
            }
            tags.sort_unstable();
            for tag in tags {
                rows.push(Row {
                    user: user.clone(),
                    resource: resource.clone(),
                    tag,
                    timestamp,
                });
            }
        }
    }
    rows
}
