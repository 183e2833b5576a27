//! Tag recommendation from a user's semantic and lexical memory with
//! time-dependent forgetting, together with the folksonomy data model, an LDA
//! topic pipeline, the classic baseline recommenders and the offline
//! evaluation protocol.
//!
//! The crate is `no_std` and only needs `alloc`. Reading files, the CLI and
//! serialized formats live in the `tagrec` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod evaluation;
pub mod folksonomy;
mod math;
pub mod ranking;
pub mod synthetic;
pub mod threelayers;
pub mod topics;

pub use folksonomy::{
    Blacklist, DatasetSplit, Folksonomy, FolksonomyBuilder, FolksonomyError, Post, ResourceId,
    TagId, Timestamp, UserId,
};
pub use ranking::{Query, RankedTags, RecommendError, TagRecommender};
pub use threelayers::{Cue, ThreeLayers, ThreeLayersConfig, UserMemory, Variant};
pub use topics::{LdaConfig, TopicError, TopicModel};

pub use math::{cosine, digest};
