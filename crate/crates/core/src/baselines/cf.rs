use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::baselines::popularity::mp_r;
use crate::folksonomy::{Folksonomy, ResourceId, TagId, UserId};
use crate::ranking::{Query, RankedTags, RecommendError, TagRecommender};

pub const DEFAULT_NEIGHBORS: usize = 20;

/// Cosine over two sparse tag-frequency profiles.
pub fn user_similarity(a: &BTreeMap<TagId, u32>, b: &BTreeMap<TagId, u32>) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: f64 = small
        .iter()
        .filter_map(|(t, &x)| large.get(t).map(|&y| x as f64 * y as f64))
        .sum();
    if dot == 0.0 {
        return 0.0;
    }
    let norm = |m: &BTreeMap<TagId, u32>| libm::sqrt(m.values().map(|&x| (x as f64) * (x as f64)).sum());
    dot / (norm(a) * norm(b))
}

/// The `k_neighbors` most similar users with positive similarity, best first
/// (ties by ascending user id).
fn neighbours(train: &Folksonomy, user: UserId, k_neighbors: usize) -> Vec<(UserId, f64)> {
    let profile = train.user_tag_frequencies(user);
    let mut sims: Vec<(UserId, f64)> = train
        .users()
        .filter(|&v| v != user)
        .map(|v| (v, user_similarity(profile, train.user_tag_frequencies(v))))
        .filter(|&(_, s)| s > 0.0)
        .collect();
    sims.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
    sims.truncate(k_neighbors);
    sims
}

/// User-based collaborative filtering over tag profiles.
///
/// Scores each tag by the summed similarity of the neighbours who assigned
/// it to `resource`. When no neighbour tagged the resource, neighbours' whole
/// profiles are used instead (`Σ sim · freq_v(t)`). Users with an empty
/// profile or without any similar user fall back to MP_r.
pub fn cf(
    train: &Folksonomy,
    user: UserId,
    resource: ResourceId,
    k_neighbors: usize,
    k: usize,
) -> Result<RankedTags, RecommendError> {
    if k_neighbors == 0 {
        return Err(RecommendError::InvalidParameter("k_neighbors must be at least 1".into()));
    }
    if train.user_tag_frequencies(user).is_empty() {
        return Ok(mp_r(train, resource, k));
    }
    let neighbours = neighbours(train, user, k_neighbors);
    if neighbours.is_empty() {
        return Ok(mp_r(train, resource, k));
    }

    let mut scores: BTreeMap<TagId, f64> = BTreeMap::new();
    for &(v, sim) in &neighbours {
        if let Some(post) = train.resource_posts(resource).find(|p| p.user() == v) {
            for &t in post.tags() {
                *scores.entry(t).or_insert(0.0) += sim;
            }
        }
    }
    if scores.is_empty() {
        for &(v, sim) in &neighbours {
            for (&t, &n) in train.user_tag_frequencies(v) {
                *scores.entry(t).or_insert(0.0) += sim * n as f64;
            }
        }
    }
    Ok(RankedTags::from_scores(scores, k))
}

pub struct CollaborativeFiltering<'a> {
    train: &'a Folksonomy,
    k_neighbors: usize,
}

impl<'a> CollaborativeFiltering<'a> {
    pub fn new(train: &'a Folksonomy, k_neighbors: usize) -> Self {
        Self { train, k_neighbors }
    }
}

impl TagRecommender for CollaborativeFiltering<'_> {
    fn name(&self) -> &str {
        "cf"
    }

    fn recommend(&self, query: &Query, k: usize) -> Result<RankedTags, RecommendError> {
        cf(self.train, query.user, query.resource, self.k_neighbors, k)
    }
}
