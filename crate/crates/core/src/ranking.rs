//! Ranked tag lists and the common recommender interface.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use thiserror::Error;

use crate::folksonomy::{ResourceId, TagId, Timestamp, UserId};

/// Tags ordered by non-increasing score; equal scores by ascending tag id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RankedTags(Vec<(TagId, f64)>);

impl RankedTags {
    /// Ranks `scores` and keeps the best `k`. Later duplicates of a tag are
    /// ignored.
    pub fn from_scores(scores: impl IntoIterator<Item = (TagId, f64)>, k: usize) -> Self {
        let mut seen = BTreeMap::new();
        for (tag, score) in scores {
            seen.entry(tag).or_insert(score);
        }
        let mut ranked: Vec<(TagId, f64)> = seen.into_iter().collect();
        ranked.sort_by(compare_entries);
        ranked.truncate(k);
        Self(ranked)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn entries(&self) -> &[(TagId, f64)] {
        &self.0
    }

    pub fn tags(&self) -> impl Iterator<Item = TagId> + '_ {
        self.0.iter().map(|&(t, _)| t)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// 1-based rank of `tag`, if present.
    pub fn rank_of(&self, tag: TagId) -> Option<usize> {
        self.0.iter().position(|&(t, _)| t == tag).map(|p| p + 1)
    }
}

fn compare_entries(a: &(TagId, f64), b: &(TagId, f64)) -> Ordering {
    b.1.partial_cmp(&a.1)
        .unwrap_or(Ordering::Equal)
        .then(a.0.cmp(&b.0))
}

/// One recommendation request: tag `resource` for `user` at `ref_time`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Query {
    pub user: UserId,
    pub resource: ResourceId,
    pub ref_time: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecommendError {
    #[error("user {0:?} is unknown to the recommender")]
    UnknownUser(UserId),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("recommendation failed: {0}")]
    Failed(String),
}

/// Anything that can produce a ranked tag list for a query.
pub trait TagRecommender {
    fn name(&self) -> &str;

    /// Caveats carried into report metadata.
    fn notes(&self) -> Option<&str> {
        None
    }

    fn recommend(&self, query: &Query, k: usize) -> Result<RankedTags, RecommendError>;
}
