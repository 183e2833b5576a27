//! Time-aware baselines: BLL+C and a GIRPTM stand-in.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::folksonomy::{Folksonomy, ResourceId, TagId, Timestamp, UserId, SECONDS_PER_DAY};
use crate::math::median_i64;
use crate::ranking::{Query, RankedTags, RecommendError, TagRecommender};
use crate::threelayers::{check_beta, mix_components, resource_popularity, AbsentTags};

/// Marks GIRPTM output as coming from the documented substitute formula.
pub const GIRPTM_NOTE: &str = "girptm: non-canonical stand-in, \
    raw(t) = freq_u(t) * exp(-(ref - t_last)/lambda) / (1 + exp(-(t_last - t_first)/lambda)), \
    lambda = median inter-bookmark gap of the user";

/// Base-level activation of every tag the user applied before:
/// `ln Σ_i (ref_time - t_i)^-d` over all usages, with gaps clamped to at
/// least one second.
pub fn bll_scores(train: &Folksonomy, user: UserId, ref_time: Timestamp, d: f64) -> Vec<(TagId, f64)> {
    let mut deltas: BTreeMap<TagId, Vec<f64>> = BTreeMap::new();
    for post in train.user_posts(user) {
        let delta = (ref_time - post.timestamp()).max(1) as f64;
        for &t in post.tags() {
            deltas.entry(t).or_default().push(delta);
        }
    }
    deltas
        .into_iter()
        .map(|(t, ds)| (t, base_level_activation(&ds, d)))
        .collect()
}

/// `ln Σ_i Δ_i^-d` over the elapsed times of every usage.
pub fn base_level_activation(deltas: &[f64], d: f64) -> f64 {
    libm::log(deltas.iter().map(|&delta| libm::pow(delta, -d)).sum())
}

/// BLL+C: base-level activation of the user's tags mixed with the
/// resource's tag popularity. Each component is normalized over its own
/// tags.
pub fn bll_c(
    train: &Folksonomy,
    user: UserId,
    resource: ResourceId,
    ref_time: Timestamp,
    d: f64,
    beta: f64,
    k: usize,
) -> Result<RankedTags, RecommendError> {
    check_beta(beta)?;
    let personal = bll_scores(train, user, ref_time, d);
    let mixed = mix_components(&personal, &resource_popularity(train, resource), beta, AbsentTags::Excluded);
    Ok(RankedTags::from_scores(mixed, k))
}

/// Stand-in GIRPTM reuse weights; see [`GIRPTM_NOTE`].
pub fn girptm_scores(train: &Folksonomy, user: UserId, ref_time: Timestamp) -> Vec<(TagId, f64)> {
    let timestamps: Vec<Timestamp> = train.user_posts(user).map(|p| p.timestamp()).collect();
    let mut gaps: Vec<i64> = timestamps.windows(2).map(|w| w[1] - w[0]).collect();
    // a single bookmark has no gaps; a day is the fallback scale
    let lambda = median_i64(&mut gaps)
        .unwrap_or(SECONDS_PER_DAY as f64)
        .max(1.0);

    struct Usage {
        count: u32,
        first: Timestamp,
        last: Timestamp,
    }
    let mut usage: BTreeMap<TagId, Usage> = BTreeMap::new();
    for post in train.user_posts(user) {
        for &t in post.tags() {
            let u = usage.entry(t).or_insert(Usage {
                count: 0,
                first: post.timestamp(),
                last: post.timestamp(),
            });
            u.count += 1;
            u.first = u.first.min(post.timestamp());
            u.last = u.last.max(post.timestamp());
        }
    }
    usage
        .into_iter()
        .map(|(t, u)| {
            let recency = libm::exp(-((ref_time - u.last).max(0) as f64) / lambda);
            let span = 1.0 / (1.0 + libm::exp(-((u.last - u.first) as f64) / lambda));
            (t, u.count as f64 * recency * span)
        })
        .collect()
}

pub fn girptm(
    train: &Folksonomy,
    user: UserId,
    resource: ResourceId,
    ref_time: Timestamp,
    beta: f64,
    k: usize,
) -> Result<RankedTags, RecommendError> {
    check_beta(beta)?;
    let personal = girptm_scores(train, user, ref_time);
    let mixed = mix_components(&personal, &resource_popularity(train, resource), beta, AbsentTags::Excluded);
    Ok(RankedTags::from_scores(mixed, k))
}

pub struct BllC<'a> {
    train: &'a Folksonomy,
    d: f64,
    beta: f64,
}

impl<'a> BllC<'a> {
    pub fn new(train: &'a Folksonomy, d: f64, beta: f64) -> Self {
        Self { train, d, beta }
    }
}

impl TagRecommender for BllC<'_> {
    fn name(&self) -> &str {
        "bllc"
    }

    fn recommend(&self, query: &Query, k: usize) -> Result<RankedTags, RecommendError> {
        bll_c(self.train, query.user, query.resource, query.ref_time, self.d, self.beta, k)
    }
}

pub struct Girptm<'a> {
    train: &'a Folksonomy,
    beta: f64,
}

impl<'a> Girptm<'a> {
    pub fn new(train: &'a Folksonomy, beta: f64) -> Self {
        Self { train, beta }
    }
}

impl TagRecommender for Girptm<'_> {
    fn name(&self) -> &str {
        "girptm"
    }

    fn notes(&self) -> Option<&str> {
        Some(GIRPTM_NOTE)
    }

    fn recommend(&self, query: &Query, k: usize) -> Result<RankedTags, RecommendError> {
        girptm(self.train, query.user, query.resource, query.ref_time, self.beta, k)
    }
}
