use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::folksonomy::{Folksonomy, Post, TagId, SECONDS_PER_DAY};
use crate::math::cosine;
use crate::topics::TopicModel;

pub const DEFAULT_MAX_LAG: usize = 100;

/// Mean similarity of a user's latest post to the posts `lag` steps back.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriftRow {
    pub lag: u64,
    pub mean_gist: f64,
    pub mean_verbatim: f64,
    pub n_users: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DriftTable {
    /// Lag counted in bookmarks, `1..=max_lag`.
    pub by_index: Vec<DriftRow>,
    /// Lag in whole days, over the same bookmarks.
    pub by_day: Vec<DriftRow>,
}

/// Cosine of two binary tag vectors given as sorted tag lists.
fn binary_cosine(a: &[TagId], b: &[TagId]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let (mut i, mut j, mut shared) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    shared as f64 / libm::sqrt((a.len() * b.len()) as f64)
}

#[derive(Default)]
struct Bucket {
    gist: f64,
    verbatim: f64,
    users: usize,
}

impl Bucket {
    fn rows(buckets: BTreeMap<u64, Bucket>) -> Vec<DriftRow> {
        buckets
            .into_iter()
            .filter(|(_, b)| b.users > 0)
            .map(|(lag, b)| DriftRow {
                lag,
                mean_gist: b.gist / b.users as f64,
                mean_verbatim: b.verbatim / b.users as f64,
                n_users: b.users,
            })
            .collect()
    }
}

/// Compares every user's most recent post with up to `max_lag` earlier posts,
/// by topic mixture (gist) and by exact tags (verbatim).
///
/// Similarities are averaged within a user per lag bucket, then across users.
/// Users with fewer than two posts are skipped; empty buckets are omitted.
pub fn drift_analysis(f: &Folksonomy, model: &TopicModel, max_lag: usize) -> DriftTable {
    let mut by_index: BTreeMap<u64, Bucket> = BTreeMap::new();
    let mut by_day: BTreeMap<u64, Bucket> = BTreeMap::new();
    for user in f.users() {
        let posts: Vec<&Post> = f.user_posts(user).collect();
        let Some((&recent, earlier)) = posts.split_last() else {
            continue;
        };
        if earlier.is_empty() {
            continue;
        }
        let recent_gist = model.resource_topics(recent.resource(), f);
        let mut days: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
        for (back, post) in earlier.iter().rev().take(max_lag).enumerate() {
            let gist = cosine(&recent_gist, &model.resource_topics(post.resource(), f));
            let verbatim = binary_cosine(recent.tags(), post.tags());

            let bucket = by_index.entry(back as u64 + 1).or_default();
            bucket.gist += gist;
            bucket.verbatim += verbatim;
            bucket.users += 1;

            let day = ((recent.timestamp() - post.timestamp()) / SECONDS_PER_DAY) as u64;
            let entry = days.entry(day).or_insert((0.0, 0.0, 0));
            entry.0 += gist;
            entry.1 += verbatim;
            entry.2 += 1;
        }
        for (day, (gist, verbatim, n)) in days {
            let bucket = by_day.entry(day).or_default();
            bucket.gist += gist / n as f64;
            bucket.verbatim += verbatim / n as f64;
            bucket.users += 1;
        }
    }
    DriftTable {
        by_index: Bucket::rows(by_index),
        by_day: Bucket::rows(by_day),
    }
}
