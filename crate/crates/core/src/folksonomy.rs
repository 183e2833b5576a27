//! Folksonomy data model: posts (bookmarks), vocabularies, frequency
//! indices, ingestion, the leave-one-out split and test-user filtering.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::math::Digest;

/// Seconds since the Unix epoch.
pub type Timestamp = i64;

pub const SECONDS_PER_DAY: i64 = 86_400;

macro_rules! dense_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

dense_id!(
    /// Dense user id, assigned in first-seen order.
    UserId
);
dense_id!(
    /// Dense resource id, assigned in first-seen order.
    ResourceId
);
dense_id!(
    /// Dense tag id, assigned in first-seen order. Also the global tie-break
    /// key for every ranking.
    TagId
);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FolksonomyError {
    #[error("dataset contains no posts")]
    EmptyDataset,
    #[error("negative timestamp {0}")]
    NegativeTimestamp(Timestamp),
    #[error("post has no tags")]
    EmptyPost,
    #[error("b_min must be at least 1")]
    InvalidMinimum,
    #[error("sampling fraction must lie in (0, 1], got {0}")]
    InvalidFraction(f64),
}

/// Interned strings with dense ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocab {
    names: Vec<String>,
    ids: BTreeMap<String, u32>,
}

impl Vocab {
    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// User, resource and tag vocabularies shared by every view (train, test,
/// merged) of one dataset.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabularies {
    pub users: Vocab,
    pub resources: Vocab,
    pub tags: Vocab,
}

/// Automatically generated tags removed at ingestion.
pub const DEFAULT_BLACKLIST: [&str; 6] = [
    "no-tag",
    "bibtex-import",
    "imported",
    "public",
    "system:imported",
    "system:unfiled",
];

/// Set of normalized tags dropped during ingestion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Blacklist(BTreeSet<String>);

impl Default for Blacklist {
    fn default() -> Self {
        Self::new(DEFAULT_BLACKLIST)
    }
}

impl Blacklist {
    pub fn new<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self(
            entries
                .into_iter()
                .map(|s| lower_trim(s.as_ref()))
                .filter(|s| !s.is_empty())
                .collect(),
        )
    }

    pub fn empty() -> Self {
        Self(BTreeSet::new())
    }

    pub fn contains(&self, tag: &str) -> bool {
        self.0.contains(tag)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

fn lower_trim(raw: &str) -> String {
    raw.trim().to_lowercase().trim().to_string()
}

/// Lowercases and trims a raw tag. `None` when the result is empty or
/// blacklisted.
pub fn normalize_tag(raw: &str, blacklist: &Blacklist) -> Option<String> {
    let tag = lower_trim(raw);
    if tag.is_empty() || blacklist.contains(&tag) {
        None
    } else {
        Some(tag)
    }
}

/// One bookmark: a user annotating a resource with a set of tags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Post {
    user: UserId,
    resource: ResourceId,
    tags: Vec<TagId>,
    timestamp: Timestamp,
}

impl Post {
    /// Tags are deduplicated and stored in ascending id order.
    pub fn new(
        user: UserId,
        resource: ResourceId,
        tags: impl IntoIterator<Item = TagId>,
        timestamp: Timestamp,
    ) -> Result<Self, FolksonomyError> {
        if timestamp < 0 {
            return Err(FolksonomyError::NegativeTimestamp(timestamp));
        }
        let mut tags: Vec<TagId> = tags.into_iter().collect();
        tags.sort_unstable();
        tags.dedup();
        if tags.is_empty() {
            return Err(FolksonomyError::EmptyPost);
        }
        Ok(Self {
            user,
            resource,
            tags,
            timestamp,
        })
    }

    pub fn user(&self) -> UserId {
        self.user
    }

    pub fn resource(&self) -> ResourceId {
        self.resource
    }

    pub fn tags(&self) -> &[TagId] {
        &self.tags
    }

    pub fn timestamp(&self) -> Timestamp {
        self.timestamp
    }

    fn order_key(&self) -> (UserId, Timestamp, ResourceId) {
        (self.user, self.timestamp, self.resource)
    }
}

/// Headline counts of a dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DatasetStats {
    pub posts: usize,
    pub users: usize,
    pub resources: usize,
    pub tags: usize,
    pub tag_assignments: usize,
}

/// One row of the canonical TAS snapshot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CanonicalRow<'a> {
    pub user: &'a str,
    pub timestamp: Timestamp,
    pub resource: &'a str,
    pub tag: &'a str,
}

static EMPTY_FREQ: BTreeMap<TagId, u32> = BTreeMap::new();

/// Indexed, immutable collection of posts.
///
/// Holds at most one post per (user, resource) pair; posts are kept in
/// (user, timestamp, resource) order so each user's slice is chronological.
#[derive(Clone, Debug)]
pub struct Folksonomy {
    vocab: Arc<Vocabularies>,
    posts: Vec<Post>,
    user_posts: Vec<Vec<usize>>,
    resource_posts: Vec<Vec<usize>>,
    tag_freq: Vec<u32>,
    user_tag_freq: Vec<BTreeMap<TagId, u32>>,
    resource_tag_freq: Vec<BTreeMap<TagId, u32>>,
}

impl Folksonomy {
    /// Indexes `posts`. A repeated (user, resource) pair keeps only the
    /// latest-timestamped post (the later one in input order on equal
    /// timestamps).
    pub fn from_posts(vocab: Arc<Vocabularies>, posts: impl IntoIterator<Item = Post>) -> Self {
        let mut latest: BTreeMap<(UserId, ResourceId), Post> = BTreeMap::new();
        for post in posts {
            let key = (post.user, post.resource);
            match latest.get(&key) {
                Some(existing) if existing.timestamp > post.timestamp => {}
                _ => {
                    latest.insert(key, post);
                }
            }
        }
        let mut posts: Vec<Post> = latest.into_values().collect();
        posts.sort_by_key(Post::order_key);

        let n_users = vocab.users.len();
        let n_resources = vocab.resources.len();
        let n_tags = vocab.tags.len();
        let mut user_posts = alloc::vec![Vec::new(); n_users];
        let mut resource_posts = alloc::vec![Vec::new(); n_resources];
        let mut tag_freq = alloc::vec![0u32; n_tags];
        let mut user_tag_freq = alloc::vec![BTreeMap::new(); n_users];
        let mut resource_tag_freq = alloc::vec![BTreeMap::new(); n_resources];
        for (i, post) in posts.iter().enumerate() {
            user_posts[post.user.index()].push(i);
            resource_posts[post.resource.index()].push(i);
            for &tag in &post.tags {
                tag_freq[tag.index()] += 1;
                *user_tag_freq[post.user.index()].entry(tag).or_insert(0) += 1;
                *resource_tag_freq[post.resource.index()].entry(tag).or_insert(0) += 1;
            }
        }
        Self {
            vocab,
            posts,
            user_posts,
            resource_posts,
            tag_freq,
            user_tag_freq,
            resource_tag_freq,
        }
    }

    pub fn vocab(&self) -> &Vocabularies {
        &self.vocab
    }

    pub fn shared_vocab(&self) -> Arc<Vocabularies> {
        Arc::clone(&self.vocab)
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    /// The user's posts in chronological order.
    pub fn user_posts(&self, user: UserId) -> impl DoubleEndedIterator<Item = &Post> + '_ {
        self.user_posts
            .get(user.index())
            .map(Vec::as_slice)
            .unwrap_or(&[])
            .iter()
            .map(move |&i| &self.posts[i])
    }

    pub fn user_post_count(&self, user: UserId) -> usize {
        self.user_posts.get(user.index()).map_or(0, Vec::len)
    }

    pub fn resource_posts(&self, resource: ResourceId) -> impl Iterator<Item = &Post> + '_ {
        self.resource_posts
            .get(resource.index())
            .map(Vec::as_slice)
            .unwrap_or(&[])
            .iter()
            .map(move |&i| &self.posts[i])
    }

    /// Users with at least one post, ascending.
    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        self.user_posts
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_empty())
            .map(|(u, _)| UserId(u as u32))
    }

    /// Resources with at least one post, ascending.
    pub fn resources(&self) -> impl Iterator<Item = ResourceId> + '_ {
        self.resource_posts
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_empty())
            .map(|(r, _)| ResourceId(r as u32))
    }

    pub fn tag_frequency(&self, tag: TagId) -> u32 {
        self.tag_freq.get(tag.index()).copied().unwrap_or(0)
    }

    /// Global tag counts indexed by tag id.
    pub fn tag_frequencies(&self) -> &[u32] {
        &self.tag_freq
    }

    pub fn user_tag_frequencies(&self, user: UserId) -> &BTreeMap<TagId, u32> {
        self.user_tag_freq.get(user.index()).unwrap_or(&EMPTY_FREQ)
    }

    /// `|Y_r|`: how often each tag was assigned to the resource.
    pub fn resource_tag_frequencies(&self, resource: ResourceId) -> &BTreeMap<TagId, u32> {
        self.resource_tag_freq
            .get(resource.index())
            .unwrap_or(&EMPTY_FREQ)
    }

    pub fn user_name(&self, user: UserId) -> &str {
        self.vocab.users.name(user.0)
    }

    pub fn resource_name(&self, resource: ResourceId) -> &str {
        self.vocab.resources.name(resource.0)
    }

    pub fn tag_name(&self, tag: TagId) -> &str {
        self.vocab.tags.name(tag.0)
    }

    pub fn user_id(&self, name: &str) -> Option<UserId> {
        self.vocab.users.get(name).map(UserId)
    }

    pub fn resource_id(&self, name: &str) -> Option<ResourceId> {
        self.vocab.resources.get(name).map(ResourceId)
    }

    pub fn tag_id(&self, name: &str) -> Option<TagId> {
        self.vocab.tags.get(name).map(TagId)
    }

    pub fn stats(&self) -> DatasetStats {
        DatasetStats {
            posts: self.posts.len(),
            users: self.users().count(),
            resources: self.resources().count(),
            tags: self.tag_freq.iter().filter(|&&c| c > 0).count(),
            tag_assignments: self.posts.iter().map(|p| p.tags.len()).sum(),
        }
    }

    /// Every tag assignment sorted by (user, timestamp, resource, tag) name.
    pub fn canonical_rows(&self) -> Vec<CanonicalRow<'_>> {
        let mut rows: Vec<CanonicalRow<'_>> = self
            .posts
            .iter()
            .flat_map(|p| {
                p.tags.iter().map(move |&t| CanonicalRow {
                    user: self.user_name(p.user),
                    timestamp: p.timestamp,
                    resource: self.resource_name(p.resource),
                    tag: self.tag_name(t),
                })
            })
            .collect();
        rows.sort_unstable();
        rows
    }

    /// Content hash over the canonical rows; independent of id assignment.
    pub fn fingerprint(&self) -> u64 {
        let mut digest = Digest::default();
        for row in self.canonical_rows() {
            digest.field(row.user.as_bytes());
            digest.field(&row.timestamp.to_le_bytes());
            digest.field(row.resource.as_bytes());
            digest.field(row.tag.as_bytes());
        }
        digest.finish()
    }

    /// A copy extended by `extra` posts over the same vocabularies.
    pub fn with_posts(&self, extra: &[Post]) -> Folksonomy {
        Folksonomy::from_posts(
            self.shared_vocab(),
            self.posts.iter().chain(extra).cloned(),
        )
    }

    /// Keeps the posts of a seeded random `fraction` of users (at least one).
    pub fn sample_users(&self, fraction: f64, seed: u64) -> Result<Folksonomy, FolksonomyError> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(FolksonomyError::InvalidFraction(fraction));
        }
        let mut users: Vec<UserId> = self.users().collect();
        let keep = ((libm::ceil(fraction * users.len() as f64)) as usize).clamp(1, users.len().max(1));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        users.shuffle(&mut rng);
        let chosen: BTreeSet<UserId> = users.into_iter().take(keep).collect();
        Ok(Folksonomy::from_posts(
            self.shared_vocab(),
            self.posts
                .iter()
                .filter(|p| chosen.contains(&p.user))
                .cloned(),
        ))
    }
}

/// Training folksonomy plus one held-out post per user.
#[derive(Clone, Debug)]
pub struct DatasetSplit {
    pub train: Folksonomy,
    /// Sorted by user id.
    pub test: Vec<Post>,
}

impl DatasetSplit {
    /// Train and test merged back into one folksonomy.
    pub fn full(&self) -> Folksonomy {
        self.train.with_posts(&self.test)
    }

    /// Fingerprint of the dataset this split partitions.
    pub fn split_id(&self) -> u64 {
        self.full().fingerprint()
    }
}

/// Moves each user's most recent post to the test set. Ties on timestamp go
/// to the larger resource id. Users with a single post keep no training data.
pub fn leave_one_out_split(f: &Folksonomy) -> Result<DatasetSplit, FolksonomyError> {
    if f.is_empty() {
        return Err(FolksonomyError::EmptyDataset);
    }
    let mut held_out = BTreeSet::new();
    for indices in &f.user_posts {
        // posts are ordered by (timestamp, resource) within a user
        if let Some(&last) = indices.last() {
            held_out.insert(last);
        }
    }
    let mut train = Vec::with_capacity(f.posts.len() - held_out.len());
    let mut test = Vec::with_capacity(held_out.len());
    for (i, post) in f.posts.iter().enumerate() {
        if held_out.contains(&i) {
            test.push(post.clone());
        } else {
            train.push(post.clone());
        }
    }
    test.sort_by_key(|p| p.user);
    Ok(DatasetSplit {
        train: Folksonomy::from_posts(f.shared_vocab(), train),
        test,
    })
}

/// Test posts whose user has at least `b_min` posts in train and test
/// together. Training data is left untouched.
pub fn filter_test_users(split: &DatasetSplit, b_min: usize) -> Result<Vec<Post>, FolksonomyError> {
    if b_min == 0 {
        return Err(FolksonomyError::InvalidMinimum);
    }
    let mut held_out_per_user: BTreeMap<UserId, usize> = BTreeMap::new();
    for post in &split.test {
        *held_out_per_user.entry(post.user).or_insert(0) += 1;
    }
    Ok(split
        .test
        .iter()
        .filter(|p| split.train.user_post_count(p.user) + held_out_per_user[&p.user] >= b_min)
        .cloned()
        .collect())
}

type Posts = Vec<Post>;

#[derive(Debug)]
struct Group {
    tags: BTreeSet<TagId>,
    timestamp: Timestamp,
}

/// Accumulates raw tag-assignment rows and groups them into posts.
///
/// Rows sharing (user, resource) form one post stamped with the earliest row
/// timestamp. Ids are assigned in first-seen order of kept rows.
#[derive(Debug, Default)]
pub struct FolksonomyBuilder {
    blacklist: Blacklist,
    vocab: Vocabularies,
    // (held_out, user, resource)
    groups: BTreeMap<(bool, UserId, ResourceId), Group>,
    rows_seen: usize,
    rows_dropped: usize,
}

impl FolksonomyBuilder {
    pub fn new(blacklist: Blacklist) -> Self {
        Self {
            blacklist,
            ..Self::default()
        }
    }

    /// Adds one tag assignment. Returns `false` if the tag was dropped by
    /// normalization.
    pub fn add_row(
        &mut self,
        user: &str,
        resource: &str,
        tag: &str,
        timestamp: Timestamp,
    ) -> Result<bool, FolksonomyError> {
        self.add(false, user, resource, tag, timestamp)
    }

    /// Adds one tag assignment of a held-out (test) post.
    pub fn add_held_out_row(
        &mut self,
        user: &str,
        resource: &str,
        tag: &str,
        timestamp: Timestamp,
    ) -> Result<bool, FolksonomyError> {
        self.add(true, user, resource, tag, timestamp)
    }

    fn add(
        &mut self,
        held_out: bool,
        user: &str,
        resource: &str,
        tag: &str,
        timestamp: Timestamp,
    ) -> Result<bool, FolksonomyError> {
        if timestamp < 0 {
            return Err(FolksonomyError::NegativeTimestamp(timestamp));
        }
        self.rows_seen += 1;
        let Some(tag) = normalize_tag(tag, &self.blacklist) else {
            self.rows_dropped += 1;
            return Ok(false);
        };
        let user = UserId(self.vocab.users.intern(user));
        let resource = ResourceId(self.vocab.resources.intern(resource));
        let tag = TagId(self.vocab.tags.intern(&tag));
        let group = self
            .groups
            .entry((held_out, user, resource))
            .or_insert(Group {
                tags: BTreeSet::new(),
                timestamp,
            });
        group.tags.insert(tag);
        group.timestamp = group.timestamp.min(timestamp);
        Ok(true)
    }

    pub fn rows_seen(&self) -> usize {
        self.rows_seen
    }

    pub fn rows_dropped(&self) -> usize {
        self.rows_dropped
    }

    fn into_parts(self) -> Result<(Arc<Vocabularies>, Posts, Posts), FolksonomyError> {
        if self.groups.is_empty() {
            return Err(FolksonomyError::EmptyDataset);
        }
        let mut train = Vec::new();
        let mut test = Vec::new();
        for ((held_out, user, resource), group) in self.groups {
            let post = Post::new(user, resource, group.tags, group.timestamp)?;
            if held_out {
                test.push(post);
            } else {
                train.push(post);
            }
        }
        Ok((Arc::new(self.vocab), train, test))
    }

    /// All rows, held-out or not, as one folksonomy.
    pub fn build(self) -> Result<Folksonomy, FolksonomyError> {
        let (vocab, mut train, test) = self.into_parts()?;
        train.extend(test);
        Ok(Folksonomy::from_posts(vocab, train))
    }

    /// Ordinary rows become the training folksonomy, held-out rows the test
    /// posts.
    pub fn build_split(self) -> Result<DatasetSplit, FolksonomyError> {
        let (vocab, train, mut test) = self.into_parts()?;
        test.sort_by_key(|p| (p.user, p.timestamp, p.resource));
        Ok(DatasetSplit {
            train: Folksonomy::from_posts(vocab, train),
            test,
        })
    }
}
