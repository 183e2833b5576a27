//! Reference recommenders: most-popular family, LDA, user-based CF,
//! Adapted PageRank / FolkRank, and two time-aware baselines.
//!
//! Every baseline is a pure function over an immutable training
//! folksonomy, and each has a [`TagRecommender`](crate::TagRecommender)
//! wrapper for the evaluation harness.

mod cf;
mod graph;
mod lda;
mod popularity;
mod temporal;

pub use cf::{cf, user_similarity, CollaborativeFiltering, DEFAULT_NEIGHBORS};
pub use graph::{
    folkrank, pagerank_rank, FolkGraph, FolkRank, GraphMode, Node, PageRankParams, PageRankResult,
};
pub use lda::{lda_rec, LdaRecommender};
pub use popularity::{mp, mp_r, mp_u, mp_ur, MostPopular, PopularityKind};
pub use temporal::{base_level_activation, bll_c, bll_scores, girptm, girptm_scores, BllC, Girptm, GIRPTM_NOTE};
