//! LDA over resources-as-documents, trained with collapsed Gibbs sampling.
//!
//! A resource's document is the multiset of all tags assigned to it in the
//! training data. The trained model exposes per-resource topic mixtures
//! (`theta`) and per-topic tag distributions (`phi`).

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::folksonomy::{Folksonomy, ResourceId, TagId};
use crate::math::Digest;

const SIMPLEX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopicError {
    #[error("invalid LDA configuration: {0}")]
    InvalidConfig(String),
    #[error("training corpus has no tagged resources")]
    EmptyCorpus,
    #[error("malformed topic model: {0}")]
    Malformed(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LdaConfig {
    pub num_topics: usize,
    /// Symmetric document-topic prior.
    pub alpha: f64,
    /// Symmetric topic-tag prior.
    pub eta: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Gibbs sweeps used when folding in an unseen document.
    pub fold_in_sweeps: usize,
}

impl LdaConfig {
    /// Defaults: `alpha = 50 / Z`, `eta = 0.01`, 1000 iterations, seed 0 and
    /// 50 fold-in sweeps.
    pub fn new(num_topics: usize) -> Self {
        Self {
            num_topics,
            alpha: 50.0 / num_topics.max(1) as f64,
            eta: 0.01,
            iterations: 1000,
            seed: 0,
            fold_in_sweeps: 50,
        }
    }

    pub fn validate(&self) -> Result<(), TopicError> {
        if self.num_topics < 2 {
            return Err(TopicError::InvalidConfig(format!(
                "need at least 2 topics, got {}",
                self.num_topics
            )));
        }
        self.validate_priors()
    }

    /// Checks everything except the topic count, which a loaded model may
    /// have set to one.
    fn validate_priors(&self) -> Result<(), TopicError> {
        if self.num_topics == 0 {
            return Err(TopicError::InvalidConfig("need at least 1 topic".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(TopicError::InvalidConfig(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(TopicError::InvalidConfig(format!("eta must be positive, got {}", self.eta)));
        }
        if self.iterations == 0 {
            return Err(TopicError::InvalidConfig("iterations must be at least 1".into()));
        }
        if self.fold_in_sweeps == 0 {
            return Err(TopicError::InvalidConfig("fold-in sweeps must be at least 1".into()));
        }
        Ok(())
    }
}

/// A trained topic model.
#[derive(Clone, Debug, PartialEq)]
pub struct TopicModel {
    config: LdaConfig,
    /// phi column -> tag
    tags: Vec<TagId>,
    columns: BTreeMap<TagId, usize>,
    theta: BTreeMap<ResourceId, Vec<f64>>,
    /// num_topics x tags.len()
    phi: Vec<Vec<f64>>,
    trained_on: u64,
}

/// Trains LDA on the documents of `train`, consuming one RNG stream with
/// documents ordered by resource name and tokens by tag name. Identical
/// inputs give bit-identical models, whatever order their rows arrived in.
pub fn train_lda(train: &Folksonomy, config: &LdaConfig) -> Result<TopicModel, TopicError> {
    config.validate()?;
    let mut sampler = Sampler::new(train, config)?;
    for _ in 0..config.iterations {
        sampler.sweep();
    }
    Ok(sampler.into_model(train.fingerprint()))
}

struct Sampler<'c> {
    config: &'c LdaConfig,
    rng: ChaCha8Rng,
    resources: Vec<ResourceId>,
    tags: Vec<TagId>,
    columns: BTreeMap<TagId, usize>,
    // tokens per document as phi columns
    docs: Vec<Vec<usize>>,
    assignments: Vec<Vec<usize>>,
    doc_topic: Vec<Vec<u32>>,
    // column-major: word * Z + topic
    word_topic: Vec<u32>,
    topic_total: Vec<u32>,
    weights: Vec<f64>,
}

impl<'c> Sampler<'c> {
    fn new(train: &Folksonomy, config: &'c LdaConfig) -> Result<Self, TopicError> {
        let z = config.num_topics;
        let mut tags: Vec<TagId> = train
            .tag_frequencies()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(t, _)| TagId(t as u32))
            .collect();
        tags.sort_by(|&a, &b| train.tag_name(a).cmp(train.tag_name(b)));
        let columns: BTreeMap<TagId, usize> = tags.iter().enumerate().map(|(i, &t)| (t, i)).collect();

        let mut ordered: Vec<ResourceId> = train.resources().collect();
        ordered.sort_by(|&a, &b| train.resource_name(a).cmp(train.resource_name(b)));
        let mut resources = Vec::new();
        let mut docs = Vec::new();
        for resource in ordered {
            let mut doc: Vec<usize> = train
                .resource_tag_frequencies(resource)
                .iter()
                .flat_map(|(t, &n)| core::iter::repeat_n(columns[t], n as usize))
                .collect();
            doc.sort_unstable();
            if doc.is_empty() {
                warn!("resource {} has no tags, excluded from LDA", train.resource_name(resource));
                continue;
            }
            resources.push(resource);
            docs.push(doc);
        }
        if docs.is_empty() {
            return Err(TopicError::EmptyCorpus);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut doc_topic = vec![vec![0u32; z]; docs.len()];
        let mut word_topic = vec![0u32; tags.len() * z];
        let mut topic_total = vec![0u32; z];
        let mut assignments = Vec::with_capacity(docs.len());
        for (d, doc) in docs.iter().enumerate() {
            let mut zs = Vec::with_capacity(doc.len());
            for &w in doc {
                let k = rng.gen_range(0..z);
                doc_topic[d][k] += 1;
                word_topic[w * z + k] += 1;
                topic_total[k] += 1;
                zs.push(k);
            }
            assignments.push(zs);
        }
        Ok(Self {
            config,
            rng,
            resources,
            tags,
            columns,
            docs,
            assignments,
            doc_topic,
            word_topic,
            topic_total,
            weights: vec![0.0; z],
        })
    }

    fn sweep(&mut self) {
        let z = self.config.num_topics;
        let alpha = self.config.alpha;
        let eta = self.config.eta;
        let v_eta = self.tags.len() as f64 * eta;
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i];
                let old = self.assignments[d][i];
                self.doc_topic[d][old] -= 1;
                self.word_topic[w * z + old] -= 1;
                self.topic_total[old] -= 1;

                let mut total = 0.0;
                for k in 0..z {
                    let p = (self.doc_topic[d][k] as f64 + alpha)
                        * (self.word_topic[w * z + k] as f64 + eta)
                        / (self.topic_total[k] as f64 + v_eta);
                    total += p;
                    self.weights[k] = total;
                }
                let new = draw(&self.weights, total, &mut self.rng);

                self.assignments[d][i] = new;
                self.doc_topic[d][new] += 1;
                self.word_topic[w * z + new] += 1;
                self.topic_total[new] += 1;
            }
        }
    }

    fn into_model(self, trained_on: u64) -> TopicModel {
        let z = self.config.num_topics;
        let alpha = self.config.alpha;
        let eta = self.config.eta;
        let v = self.tags.len();
        let theta = self
            .resources
            .iter()
            .zip(&self.doc_topic)
            .zip(&self.docs)
            .map(|((&r, counts), doc)| {
                let denom = doc.len() as f64 + z as f64 * alpha;
                (r, counts.iter().map(|&c| (c as f64 + alpha) / denom).collect())
            })
            .collect();
        let phi = (0..z)
            .map(|k| {
                let denom = self.topic_total[k] as f64 + v as f64 * eta;
                (0..v)
                    .map(|w| (self.word_topic[w * z + k] as f64 + eta) / denom)
                    .collect()
            })
            .collect();
        TopicModel {
            config: self.config.clone(),
            tags: self.tags,
            columns: self.columns,
            theta,
            phi,
            trained_on,
        }
    }
}

/// Index of the first cumulative weight exceeding a uniform draw on
/// `[0, total)`.
fn draw(cumulative: &[f64], total: f64, rng: &mut ChaCha8Rng) -> usize {
    let u = rng.gen::<f64>() * total;
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

fn check_simplex(row: &[f64], what: &str) -> Result<(), TopicError> {
    if row.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(TopicError::Malformed(format!("{what} has a negative or non-finite entry")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
        return Err(TopicError::Malformed(format!("{what} sums to {sum}")));
    }
    Ok(())
}

impl TopicModel {
    /// Reassembles a model, e.g. from a snapshot. Every row must lie on the
    /// simplex.
    pub fn from_parts(
        config: LdaConfig,
        tags: Vec<TagId>,
        theta: BTreeMap<ResourceId, Vec<f64>>,
        phi: Vec<Vec<f64>>,
        trained_on: u64,
    ) -> Result<Self, TopicError> {
        config.validate_priors()?;
        let z = config.num_topics;
        if phi.len() != z {
            return Err(TopicError::Malformed(format!("expected {z} phi rows, got {}", phi.len())));
        }
        for (k, row) in phi.iter().enumerate() {
            if row.len() != tags.len() {
                return Err(TopicError::Malformed(format!("phi row {k} has {} columns", row.len())));
            }
            check_simplex(row, "phi row")?;
        }
        for row in theta.values() {
            if row.len() != z {
                return Err(TopicError::Malformed("theta row has wrong length".into()));
            }
            check_simplex(row, "theta row")?;
        }
        let columns: BTreeMap<TagId, usize> = tags.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        if columns.len() != tags.len() {
            return Err(TopicError::Malformed("duplicate tag column".into()));
        }
        Ok(Self {
            config,
            tags,
            columns,
            theta,
            phi,
            trained_on,
        })
    }

    pub fn config(&self) -> &LdaConfig {
        &self.config
    }

    pub fn num_topics(&self) -> usize {
        self.config.num_topics
    }

    /// Fingerprint of the folksonomy the model was trained on.
    pub fn trained_on(&self) -> u64 {
        self.trained_on
    }

    /// Tags with a phi column, in column order.
    pub fn tags(&self) -> &[TagId] {
        &self.tags
    }

    pub fn theta(&self, resource: ResourceId) -> Option<&[f64]> {
        self.theta.get(&resource).map(Vec::as_slice)
    }

    pub fn thetas(&self) -> impl Iterator<Item = (ResourceId, &[f64])> + '_ {
        self.theta.iter().map(|(&r, v)| (r, v.as_slice()))
    }

    pub fn phi(&self) -> &[Vec<f64>] {
        &self.phi
    }

    /// `P(tag | topic)`; zero for tags outside the model vocabulary.
    pub fn phi_of(&self, topic: usize, tag: TagId) -> f64 {
        self.columns.get(&tag).map_or(0.0, |&c| self.phi[topic][c])
    }

    pub fn contains_tag(&self, tag: TagId) -> bool {
        self.columns.contains_key(&tag)
    }

    fn uniform(&self) -> Vec<f64> {
        let z = self.num_topics();
        vec![1.0 / z as f64; z]
    }

    /// Folds an unseen document into the model with `phi` frozen.
    ///
    /// Tags outside the model vocabulary are skipped; an empty or all-OOV
    /// document yields the uniform mixture. The result averages the topic
    /// mixtures of the second half of the sweeps and is seeded from the model
    /// seed and the document, so it is deterministic.
    pub fn infer_topics(&self, tags: &[TagId]) -> Vec<f64> {
        let words: Vec<usize> = tags.iter().filter_map(|t| self.columns.get(t).copied()).collect();
        if words.is_empty() {
            return self.uniform();
        }
        let z = self.num_topics();
        let alpha = self.config.alpha;
        let mut digest = Digest::default();
        for &w in &words {
            digest.field(&(w as u64).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ digest.finish());

        let mut counts = vec![0u32; z];
        let mut assignment: Vec<usize> = words
            .iter()
            .map(|_| {
                let k = rng.gen_range(0..z);
                counts[k] += 1;
                k
            })
            .collect();
        let mut weights = vec![0.0; z];
        let mut mixture = vec![0.0; z];
        let sweeps = self.config.fold_in_sweeps;
        let burn_in = sweeps / 2;
        let denom = words.len() as f64 + z as f64 * alpha;
        for sweep in 0..sweeps {
            for (i, &w) in words.iter().enumerate() {
                counts[assignment[i]] -= 1;
                let mut total = 0.0;
                for k in 0..z {
                    total += (counts[k] as f64 + alpha) * self.phi[k][w];
                    weights[k] = total;
                }
                let k = draw(&weights, total, &mut rng);
                assignment[i] = k;
                counts[k] += 1;
            }
            if sweep >= burn_in {
                for k in 0..z {
                    mixture[k] += (counts[k] as f64 + alpha) / denom;
                }
            }
        }
        let collected = (sweeps - burn_in) as f64;
        mixture.iter_mut().for_each(|m| *m /= collected);
        mixture
    }

    /// Topic mixture of a resource: its trained `theta`, else a fold-in of
    /// its tags in `train`, else uniform.
    pub fn resource_topics(&self, resource: ResourceId, train: &Folksonomy) -> Vec<f64> {
        if let Some(theta) = self.theta(resource) {
            return theta.to_vec();
        }
        let tags: Vec<TagId> = train
            .resource_tag_frequencies(resource)
            .iter()
            .flat_map(|(&t, &n)| core::iter::repeat_n(t, n as usize))
            .collect();
        self.infer_topics(&tags)
    }

    /// Sum over documents of `log P(t | d)` for every in-vocabulary token,
    /// with each document folded in first.
    pub fn held_out_log_likelihood(&self, documents: &[Vec<TagId>]) -> f64 {
        let mut total = 0.0;
        for doc in documents {
            let theta = self.infer_topics(doc);
            for &tag in doc {
                let Some(&c) = self.columns.get(&tag) else { continue };
                let p: f64 = (0..self.num_topics()).map(|k| theta[k] * self.phi[k][c]).sum();
                total += libm::log(p);
            }
        }
        total
    }
}
