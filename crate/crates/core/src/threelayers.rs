//! The 3Layers recommender and its time-dependent variants.
//!
//! A user's personomy is held as two row-aligned matrices: a semantic matrix
//! (one topic mixture per bookmark) and a lexical matrix (the bookmark's
//! tags). The topic mixture of the target resource acts as a cue: each
//! bookmark is activated by the cubed cosine between cue and its semantic
//! row, and the activation is passed on to the bookmark's tags.
//!
//! The `TopicTime` and `TagTime` variants weight that flow by the base-level
//! learning term `ln(Δt^-d)` of the last use of a topic or of a tag. The
//! resulting tag scores are softmax-normalized and mixed with the
//! resource's tag popularity.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::folksonomy::{Folksonomy, ResourceId, TagId, Timestamp, UserId};
use crate::math::cosine;
use crate::ranking::{Query, RankedTags, RecommendError, TagRecommender};
use crate::topics::TopicModel;

/// Which of the three models to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    /// 3L: no forgetting.
    Base,
    /// 3LT_topic: forgetting on the level of topics.
    TopicTime,
    /// 3LT_tag: forgetting on the level of tags.
    TagTime,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Base, Variant::TopicTime, Variant::TagTime];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Base => "3l",
            Variant::TopicTime => "3lt-topic",
            Variant::TagTime => "3lt-tag",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThreeLayersConfig {
    /// Weight of the personal component against resource popularity.
    pub beta: f64,
    /// Base-level decay exponent `d`.
    pub decay: f64,
    /// Minimum topic mass for a topic to count as used by a bookmark.
    /// `None` means `1 / Z`.
    pub topic_threshold: Option<f64>,
}

impl Default for ThreeLayersConfig {
    fn default() -> Self {
        Self {
            beta: 0.5,
            decay: 0.5,
            topic_threshold: None,
        }
    }
}

impl ThreeLayersConfig {
    pub fn validate(&self) -> Result<(), RecommendError> {
        check_beta(self.beta)?;
        if !(self.decay >= 0.0 && self.decay.is_finite()) {
            return Err(RecommendError::InvalidParameter(format!("d must be non-negative, got {}", self.decay)));
        }
        Ok(())
    }
}

pub(crate) fn check_beta(beta: f64) -> Result<(), RecommendError> {
    if (0.0..=1.0).contains(&beta) {
        Ok(())
    } else {
        Err(RecommendError::InvalidParameter(format!("beta must lie in [0, 1], got {beta}")))
    }
}

/// One bookmark of a user's memory: a row of the semantic matrix and the
/// matching row of the lexical matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MemoryRow {
    pub semantic: Vec<f64>,
    /// Local tag indices (columns of the lexical matrix), ascending.
    pub lexical: Vec<usize>,
    pub timestamp: Timestamp,
}

/// A user's personomy as semantic and lexical matrices plus last-use times.
#[derive(Clone, Debug, PartialEq)]
pub struct UserMemory {
    user: UserId,
    num_topics: usize,
    rows: Vec<MemoryRow>,
    tags: Vec<TagId>,
    local: BTreeMap<TagId, usize>,
    tag_last_use: Vec<Timestamp>,
    topic_last_use: Vec<Option<Timestamp>>,
}

impl UserMemory {
    /// One row per training post of `user`, with the resource's topic mixture
    /// as semantic row.
    pub fn build(user: UserId, train: &Folksonomy, model: &TopicModel, topic_threshold: Option<f64>) -> Self {
        let bookmarks = train
            .user_posts(user)
            .map(|p| (model.resource_topics(p.resource(), train), p.tags().to_vec(), p.timestamp()))
            .collect();
        Self::from_bookmarks(user, model.num_topics(), bookmarks, topic_threshold)
    }

    /// Builds a memory from explicit `(topics, tags, timestamp)` bookmarks.
    /// Bookmarks are sorted chronologically; local tag ids follow ascending
    /// global tag id.
    pub fn from_bookmarks(
        user: UserId,
        num_topics: usize,
        mut bookmarks: Vec<(Vec<f64>, Vec<TagId>, Timestamp)>,
        topic_threshold: Option<f64>,
    ) -> Self {
        bookmarks.sort_by_key(|b| b.2);
        let mut tags: Vec<TagId> = bookmarks.iter().flat_map(|b| b.1.iter().copied()).collect();
        tags.sort_unstable();
        tags.dedup();
        let local: BTreeMap<TagId, usize> = tags.iter().enumerate().map(|(j, &t)| (t, j)).collect();

        let mut tag_last_use = vec![Timestamp::MIN; tags.len()];
        let rows: Vec<MemoryRow> = bookmarks
            .into_iter()
            .map(|(semantic, row_tags, timestamp)| {
                debug_assert_eq!(semantic.len(), num_topics);
                let mut lexical: Vec<usize> = row_tags.iter().map(|t| local[t]).collect();
                lexical.sort_unstable();
                lexical.dedup();
                for &j in &lexical {
                    tag_last_use[j] = tag_last_use[j].max(timestamp);
                }
                MemoryRow {
                    semantic,
                    lexical,
                    timestamp,
                }
            })
            .collect();

        let threshold = topic_threshold.unwrap_or(1.0 / num_topics.max(1) as f64);
        let topic_last_use = (0..num_topics)
            .map(|k| {
                let above = rows
                    .iter()
                    .filter(|r| r.semantic[k] >= threshold)
                    .map(|r| r.timestamp)
                    .max();
                // a topic never above the threshold dates from the bookmark
                // carrying most of its mass (the latest one on ties)
                above.or_else(|| {
                    rows.iter()
                        .max_by(|a, b| {
                            a.semantic[k]
                                .partial_cmp(&b.semantic[k])
                                .unwrap_or(core::cmp::Ordering::Equal)
                                .then(a.timestamp.cmp(&b.timestamp))
                        })
                        .map(|r| r.timestamp)
                })
            })
            .collect();

        Self {
            user,
            num_topics,
            rows,
            tags,
            local,
            tag_last_use,
            topic_last_use,
        }
    }

    pub fn user(&self) -> UserId {
        self.user
    }

    pub fn num_topics(&self) -> usize {
        self.num_topics
    }

    /// Number of bookmarks `l`.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Number of distinct tags `m`.
    pub fn num_tags(&self) -> usize {
        self.tags.len()
    }

    pub fn rows(&self) -> &[MemoryRow] {
        &self.rows
    }

    /// Global tag id of each lexical column.
    pub fn tags(&self) -> &[TagId] {
        &self.tags
    }

    pub fn local_index(&self, tag: TagId) -> Option<usize> {
        self.local.get(&tag).copied()
    }

    pub fn tag_last_use(&self, column: usize) -> Timestamp {
        self.tag_last_use[column]
    }

    pub fn topic_last_use(&self, topic: usize) -> Option<Timestamp> {
        self.topic_last_use[topic]
    }
}

/// The input-layer cue: the target resource's topics and the reference time.
#[derive(Clone, Debug, PartialEq)]
pub struct Cue {
    pub topics: Vec<f64>,
    pub ref_time: Timestamp,
}

/// Cosine between the cue and every semantic row.
pub fn cue_similarity(cue: &[f64], memory: &UserMemory) -> Vec<f64> {
    memory.rows.iter().map(|r| cosine(cue, &r.semantic)).collect()
}

/// `A_i = Sim_i^3`.
pub fn activation(similarity: &[f64]) -> Vec<f64> {
    similarity.iter().map(|s| s * s * s).collect()
}

/// Base-level learning term `ln(Δ^-d) = -d ln Δ`, with `Δ` clamped to at
/// least one second.
pub fn base_level(delta: i64, d: f64) -> f64 {
    -d * libm::log(delta.max(1) as f64)
}

fn activations(memory: &UserMemory, cue: &Cue) -> Vec<f64> {
    activation(&cue_similarity(&cue.topics, memory))
}

/// 3L: `c_j = Σ_i L_ij A_i`.
pub fn score_3l(memory: &UserMemory, cue: &Cue) -> Vec<f64> {
    let a = activations(memory, cue);
    let mut c = vec![0.0; memory.num_tags()];
    for (row, a_i) in memory.rows.iter().zip(a) {
        for &j in &row.lexical {
            c[j] += a_i;
        }
    }
    c
}

/// 3LT_topic: `c_j = Σ_i L_ij (Σ_k S_ik BLL(k)) A_i`, where `BLL(k)` uses the
/// last bookmark in which topic `k` occurred.
pub fn score_3lt_topic(memory: &UserMemory, cue: &Cue, d: f64) -> Vec<f64> {
    let topic_bll: Vec<f64> = memory
        .topic_last_use
        .iter()
        .map(|last| last.map_or(0.0, |t| base_level(cue.ref_time - t, d)))
        .collect();
    let a = activations(memory, cue);
    let mut c = vec![0.0; memory.num_tags()];
    for (row, a_i) in memory.rows.iter().zip(a) {
        let recency: f64 = row.semantic.iter().zip(&topic_bll).map(|(s, b)| s * b).sum();
        for &j in &row.lexical {
            c[j] += recency * a_i;
        }
    }
    c
}

/// 3LT_tag: `c_j = Σ_i L_ij BLL(j) A_i`, where `BLL(j)` uses the last use of
/// tag `j`.
pub fn score_3lt_tag(memory: &UserMemory, cue: &Cue, d: f64) -> Vec<f64> {
    let a = activations(memory, cue);
    let mut c = vec![0.0; memory.num_tags()];
    for (row, a_i) in memory.rows.iter().zip(a) {
        for &j in &row.lexical {
            c[j] += a_i;
        }
    }
    for (j, c_j) in c.iter_mut().enumerate() {
        *c_j *= base_level(cue.ref_time - memory.tag_last_use[j], d);
    }
    c
}

pub fn score(variant: Variant, memory: &UserMemory, cue: &Cue, d: f64) -> Vec<f64> {
    match variant {
        Variant::Base => score_3l(memory, cue),
        Variant::TopicTime => score_3lt_topic(memory, cue, d),
        Variant::TagTime => score_3lt_tag(memory, cue, d),
    }
}

/// `exp(c_j) / Σ_i exp(c_i)`, evaluated after subtracting the maximum.
pub fn softmax_normalize(c: &[f64]) -> Vec<f64> {
    let Some(max) = c.iter().copied().reduce(f64::max) else {
        return Vec::new();
    };
    let exps: Vec<f64> = c.iter().map(|&x| libm::exp(x - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// How a tag missing from one of the two mixed components is treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbsentTags {
    /// Both components are softmax-normalized over the union of tags; a tag
    /// missing from a component enters it with raw score 0.
    NeutralScore,
    /// Each component is normalized over its own tags only; a missing tag
    /// contributes 0 after normalization.
    Excluded,
}

/// `beta * ||personal|| + (1 - beta) * ||resource||`, ordered by tag id.
pub fn mix_components(
    personal: &[(TagId, f64)],
    resource: &[(TagId, f64)],
    beta: f64,
    absent: AbsentTags,
) -> Vec<(TagId, f64)> {
    let mut union: Vec<TagId> = personal.iter().chain(resource).map(|&(t, _)| t).collect();
    union.sort_unstable();
    union.dedup();

    let normalized = |component: &[(TagId, f64)]| -> BTreeMap<TagId, f64> {
        match absent {
            AbsentTags::NeutralScore => {
                let raw: BTreeMap<TagId, f64> = component.iter().copied().collect();
                let dense: Vec<f64> = union.iter().map(|t| raw.get(t).copied().unwrap_or(0.0)).collect();
                union.iter().copied().zip(softmax_normalize(&dense)).collect()
            }
            AbsentTags::Excluded => {
                let raw: Vec<f64> = component.iter().map(|&(_, s)| s).collect();
                component.iter().map(|&(t, _)| t).zip(softmax_normalize(&raw)).collect()
            }
        }
    };
    let p = normalized(personal);
    let r = normalized(resource);
    union
        .into_iter()
        .map(|t| {
            let ps = p.get(&t).copied().unwrap_or(0.0);
            let rs = r.get(&t).copied().unwrap_or(0.0);
            (t, beta * ps + (1.0 - beta) * rs)
        })
        .collect()
}

/// `|Y_r|` as raw scores.
pub fn resource_popularity(train: &Folksonomy, resource: ResourceId) -> Vec<(TagId, f64)> {
    train
        .resource_tag_frequencies(resource)
        .iter()
        .map(|(&t, &n)| (t, n as f64))
        .collect()
}

/// Full pipeline: memory activation, softmax, and mixing with the
/// resource's tag popularity over the union of the user's and the resource's
/// tags. Returns the top `k`.
pub fn recommend(
    variant: Variant,
    memory: &UserMemory,
    cue: &Cue,
    resource: ResourceId,
    train: &Folksonomy,
    config: &ThreeLayersConfig,
    k: usize,
) -> Result<RankedTags, RecommendError> {
    config.validate()?;
    if k == 0 {
        return Ok(RankedTags::empty());
    }
    let c = score(variant, memory, cue, config.decay);
    let personal: Vec<(TagId, f64)> = memory.tags.iter().copied().zip(c).collect();
    let popularity = resource_popularity(train, resource);
    let mixed = mix_components(&personal, &popularity, config.beta, AbsentTags::NeutralScore);
    Ok(RankedTags::from_scores(mixed, k))
}

/// [`TagRecommender`] wrapper building the user's memory per query.
pub struct ThreeLayers<'a> {
    variant: Variant,
    train: &'a Folksonomy,
    model: &'a TopicModel,
    config: ThreeLayersConfig,
}

impl<'a> ThreeLayers<'a> {
    pub fn new(
        variant: Variant,
        train: &'a Folksonomy,
        model: &'a TopicModel,
        config: ThreeLayersConfig,
    ) -> Result<Self, RecommendError> {
        config.validate()?;
        Ok(Self {
            variant,
            train,
            model,
            config,
        })
    }

    pub fn memory(&self, user: UserId) -> UserMemory {
        UserMemory::build(user, self.train, self.model, self.config.topic_threshold)
    }

    pub fn cue(&self, query: &Query) -> Cue {
        Cue {
            topics: self.model.resource_topics(query.resource, self.train),
            ref_time: query.ref_time,
        }
    }
}

impl TagRecommender for ThreeLayers<'_> {
    fn name(&self) -> &str {
        self.variant.as_str()
    }

    fn recommend(&self, query: &Query, k: usize) -> Result<RankedTags, RecommendError> {
        let memory = self.memory(query.user);
        let cue = self.cue(query);
        recommend(self.variant, &memory, &cue, query.resource, self.train, &self.config, k)
    }
}
