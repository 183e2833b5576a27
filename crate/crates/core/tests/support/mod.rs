//! Independent oracles shared by the property tests and the acceptance suite.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use tagrec_core::threelayers::{recommend, Cue, UserMemory, Variant};
use tagrec_core::{Blacklist, Folksonomy, FolksonomyBuilder, ResourceId, TagId, ThreeLayersConfig, UserId};

/// A random micro-instance of the memory model.
#[derive(Clone, Debug)]
pub struct Instance {
    pub topics: usize,
    /// Per bookmark: topic weights, tag columns, timestamp.
    pub bookmarks: Vec<(Vec<f64>, Vec<usize>, i64)>,
    pub cue: Vec<f64>,
    pub ref_time: i64,
    /// Resource tag counts, by tag column (may exceed the user's tags).
    pub resource_counts: Vec<(usize, u32)>,
    pub beta: f64,
    pub decay: f64,
}

pub const MAX_TAGS: usize = 8;

pub fn random_instance<R: Rng>(rng: &mut R) -> Instance {
    let topics = rng.gen_range(1..=4);
    let l = rng.gen_range(1..=5);
    let m = rng.gen_range(1..=6);
    let bookmarks = (0..l)
        .map(|_| {
            let mut s: Vec<f64> = (0..topics).map(|_| rng.gen::<f64>()).collect();
            if rng.gen_bool(0.15) {
                // a one-hot row
                s.iter_mut().for_each(|x| *x = 0.0);
                s[rng.gen_range(0..topics)] = 1.0;
            }
            let total: f64 = s.iter().sum();
            s.iter_mut().for_each(|x| *x /= total);
            let mut tags: Vec<usize> = (0..m).filter(|_| rng.gen_bool(0.4)).collect();
            if tags.is_empty() {
                tags.push(rng.gen_range(0..m));
            }
            (s, tags, rng.gen_range(0..1_000_000i64))
        })
        .collect::<Vec<_>>();
    let cue: Vec<f64> = if rng.gen_bool(0.1) {
        vec![0.0; topics]
    } else {
        (0..topics).map(|_| rng.gen::<f64>()).collect()
    };
    let latest = bookmarks.iter().map(|b| b.2).max().unwrap();
    let ref_time = latest + rng.gen_range(0..500_000);
    let mut resource_counts = Vec::new();
    for j in 0..MAX_TAGS {
        if rng.gen_bool(0.3) {
            resource_counts.push((j, rng.gen_range(1..=4)));
        }
    }
    Instance {
        topics,
        bookmarks,
        cue,
        ref_time,
        resource_counts,
        beta: if rng.gen_bool(0.2) { 0.5 } else { rng.gen::<f64>() },
        decay: rng.gen_range(0.1..1.0),
    }
}

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

fn bll(delta: i64, d: f64) -> f64 {
    (delta.max(1) as f64).powf(-d).ln()
}

fn softmax(values: &BTreeMap<usize, f64>) -> BTreeMap<usize, f64> {
    let denom: f64 = values.values().map(|v| v.exp()).sum();
    values.iter().map(|(&k, &v)| (k, v.exp() / denom)).collect()
}

/// Direct transcription of the memory model, by tag column.
pub fn oracle_scores(inst: &Instance, variant: Variant) -> BTreeMap<usize, f64> {
    let z = inst.topics;
    let l = inst.bookmarks.len();
    let activation: Vec<f64> = inst.bookmarks.iter().map(|b| cos(&inst.cue, &b.0).powi(3)).collect();
    let user_tags: BTreeSet<usize> = inst.bookmarks.iter().flat_map(|b| b.1.iter().copied()).collect();

    let tau = 1.0 / z as f64;
    let topic_last: Vec<i64> = (0..z)
        .map(|k| {
            let above: Vec<i64> = inst.bookmarks.iter().filter(|b| b.0[k] >= tau).map(|b| b.2).collect();
            if let Some(&t) = above.iter().max() {
                return t;
            }
            let best = inst.bookmarks.iter().map(|b| b.0[k]).fold(f64::MIN, f64::max);
            inst.bookmarks.iter().filter(|b| b.0[k] == best).map(|b| b.2).max().unwrap()
        })
        .collect();

    let mut c: BTreeMap<usize, f64> = BTreeMap::new();
    for &j in &user_tags {
        let last_use = inst.bookmarks.iter().filter(|b| b.1.contains(&j)).map(|b| b.2).max().unwrap();
        let mut sum = 0.0;
        for i in 0..l {
            let lij = if inst.bookmarks[i].1.contains(&j) { 1.0 } else { 0.0 };
            let weight = match variant {
                Variant::Base => 1.0,
                Variant::TopicTime => (0..z)
                    .map(|k| inst.bookmarks[i].0[k] * bll(inst.ref_time - topic_last[k], inst.decay))
                    .sum(),
                Variant::TagTime => bll(inst.ref_time - last_use, inst.decay),
            };
            sum += lij * weight * activation[i];
        }
        c.insert(j, sum);
    }

    let union: BTreeSet<usize> = user_tags
        .iter()
        .copied()
        .chain(inst.resource_counts.iter().map(|&(j, _)| j))
        .collect();
    let personal: BTreeMap<usize, f64> = union.iter().map(|&j| (j, c.get(&j).copied().unwrap_or(0.0))).collect();
    let counts: BTreeMap<usize, u32> = inst.resource_counts.iter().copied().collect();
    let resource: BTreeMap<usize, f64> =
        union.iter().map(|&j| (j, counts.get(&j).copied().unwrap_or(0) as f64)).collect();
    let (p, r) = (softmax(&personal), softmax(&resource));
    union.iter().map(|&j| (j, inst.beta * p[&j] + (1.0 - inst.beta) * r[&j])).collect()
}

/// Training data holding the instance's resource; tag column `j` is named
/// `t{j}` and has id `j`. The queried resource is returned alongside.
pub fn instance_train(inst: &Instance) -> (Folksonomy, ResourceId) {
    let mut b = FolksonomyBuilder::new(Blacklist::empty());
    for j in 0..MAX_TAGS {
        b.add_row("seed", "seed", &format!("t{j}"), 0).unwrap();
    }
    for &(j, n) in &inst.resource_counts {
        for o in 0..n {
            b.add_row(&format!("o{o}"), "target", &format!("t{j}"), 1).unwrap();
        }
    }
    let f = b.build().unwrap();
    for j in 0..MAX_TAGS {
        assert_eq!(f.tag_id(&format!("t{j}")), Some(TagId(j as u32)));
    }
    let r = f.resource_id("target").unwrap_or(ResourceId(u32::MAX));
    (f, r)
}

pub fn instance_memory(inst: &Instance) -> UserMemory {
    let bookmarks = inst
        .bookmarks
        .iter()
        .map(|(s, tags, t)| (s.clone(), tags.iter().map(|&j| TagId(j as u32)).collect(), *t))
        .collect();
    UserMemory::from_bookmarks(UserId(1000), inst.topics, bookmarks, None)
}

/// Largest deviation between the library and the oracle over all three
/// variants, or a description of a structural mismatch.
pub fn equation_chain_error(inst: &Instance) -> Result<f64, String> {
    let (train, resource) = instance_train(inst);
    let memory = instance_memory(inst);
    let cue = Cue {
        topics: inst.cue.clone(),
        ref_time: inst.ref_time,
    };
    let config = ThreeLayersConfig {
        beta: inst.beta,
        decay: inst.decay,
        topic_threshold: None,
    };
    let mut worst: f64 = 0.0;
    for variant in Variant::ALL {
        let expected = oracle_scores(inst, variant);
        let got = recommend(variant, &memory, &cue, resource, &train, &config, usize::MAX)
            .map_err(|e| e.to_string())?;
        if got.len() != expected.len() {
            return Err(format!("{variant:?}: {} tags, expected {}", got.len(), expected.len()));
        }
        for &(tag, score) in got.entries() {
            let want = expected
                .get(&tag.index())
                .ok_or_else(|| format!("{variant:?}: unexpected tag {tag:?}"))?;
            worst = worst.max((score - want).abs());
        }
        // order: non-increasing scores, ties by tag id
        for w in got.entries().windows(2) {
            if w[0].1 < w[1].1 || (w[0].1 == w[1].1 && w[0].0 > w[1].0) {
                return Err(format!("{variant:?}: ranking out of order"));
            }
        }
    }
    Ok(worst)
}

/// Brute-force metrics over plain tag lists.
pub mod metrics {
    pub fn hits(truth: &[u32], predicted: &[u32], k: usize) -> usize {
        predicted.iter().take(k).filter(|t| truth.contains(t)).count()
    }

    pub fn precision(truth: &[u32], predicted: &[u32], k: usize) -> f64 {
        if predicted.is_empty() {
            return 0.0;
        }
        hits(truth, predicted, k) as f64 / k.min(predicted.len()) as f64
    }

    pub fn recall(truth: &[u32], predicted: &[u32], k: usize) -> f64 {
        hits(truth, predicted, k) as f64 / truth.len() as f64
    }

    pub fn f1(truth: &[u32], predicted: &[u32]) -> f64 {
        let p = precision(truth, predicted, 5);
        let r = recall(truth, predicted, 5);
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn mrr(truth: &[u32], predicted: &[u32]) -> f64 {
        let mut s = 0.0;
        for t in truth {
            if let Some(pos) = predicted.iter().take(10).position(|p| p == t) {
                s += 1.0 / (pos + 1) as f64;
            }
        }
        s / truth.len() as f64
    }

    pub fn map(truth: &[u32], predicted: &[u32]) -> f64 {
        let mut s = 0.0;
        for p in 1..=predicted.len().min(10) {
            if truth.contains(&predicted[p - 1]) {
                s += hits(truth, predicted, p) as f64 / p as f64;
            }
        }
        s / truth.len() as f64
    }
}

/// Twenty hand-built (truth, prediction) pairs; the first two carry the
/// worked values.
pub fn metric_cases() -> Vec<(Vec<u32>, Vec<u32>)> {
    vec![
        (vec![1, 2, 3, 4], vec![1, 9, 2, 8, 7, 6]),
        (vec![1, 2], vec![1, 7, 2]),
        (vec![1, 2, 3, 4, 5], vec![5, 4, 3, 2, 1]),
        (vec![1], vec![2, 3, 4]),
        (vec![1], vec![1]),
        (vec![3], vec![]),
        (vec![1, 2, 3], vec![4, 5, 6, 7, 8, 9, 10, 11, 12, 1]),
        (vec![10], vec![1, 2, 3, 4, 5, 6, 7, 8, 9, 11, 10]),
        (vec![2, 4, 6, 8], vec![1, 2, 3, 4, 5, 6, 7, 8, 9, 10]),
        (vec![7], vec![7, 1, 2]),
        (vec![1, 2, 3, 4, 5, 6, 7], vec![1, 2]),
        (vec![9, 8], vec![8, 9]),
        (vec![5], vec![1, 2, 3, 4, 5]),
        (vec![5, 6], vec![1, 2, 3, 4, 6, 5]),
        (vec![1, 3, 5], vec![2, 3]),
        (vec![11, 12, 13], vec![13, 14, 12, 15, 11]),
        (vec![1], vec![2]),
        (vec![4, 5, 6], vec![6, 5, 4, 3, 2, 1, 0]),
        (vec![100], vec![99, 98, 97, 96, 95, 94, 93, 92, 91, 100]),
        (vec![3, 1], vec![0, 1, 2, 3]),
    ]
}

/// Dense PageRank references for small graphs.
pub mod pagerank {
    use tagrec_core::baselines::{FolkGraph, Node, PageRankParams};
    use tagrec_core::{ResourceId, TagId, UserId};

    /// Dense power iteration with the same update and stopping rule.
    pub fn dense_pagerank(adj: &[Vec<f64>], p: &[f64], params: &PageRankParams) -> Vec<f64> {
        let n = adj.len();
        let total: f64 = p.iter().sum();
        let p: Vec<f64> = p.iter().map(|x| x / total).collect();
        let degree: Vec<f64> = adj.iter().map(|row| row.iter().sum()).collect();
        let mut w = vec![1.0 / n as f64; n];
        for _ in 0..params.max_iters {
            let dangling: f64 = (0..n).filter(|&j| degree[j] == 0.0).map(|j| w[j]).sum();
            let next: Vec<f64> = (0..n)
                .map(|i| {
                    let spread: f64 = (0..n).filter(|&j| degree[j] > 0.0).map(|j| adj[i][j] / degree[j] * w[j]).sum();
                    params.damping * (spread + dangling * p[i]) + (1.0 - params.damping) * p[i]
                })
                .collect();
            let delta: f64 = w.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
            w = next;
            if delta < params.tolerance {
                break;
            }
        }
        w
    }

    /// Fixed point of `w = d A w + (1 - d) p` by Gaussian elimination.
    pub fn solve_fixed_point(adj: &[Vec<f64>], p: &[f64], d: f64) -> Vec<f64> {
        let n = adj.len();
        let total: f64 = p.iter().sum();
        let degree: Vec<f64> = adj.iter().map(|row| row.iter().sum()).collect();
        let mut m = vec![vec![0.0; n + 1]; n];
        for i in 0..n {
            for j in 0..n {
                let a = adj[i][j] / degree[j];
                m[i][j] = if i == j { 1.0 } else { 0.0 } - d * a;
            }
            m[i][n] = (1.0 - d) * p[i] / total;
        }
        for col in 0..n {
            let pivot = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
            m.swap(col, pivot);
            for row in 0..n {
                if row != col {
                    let factor = m[row][col] / m[col][col];
                    for k in col..=n {
                        m[row][k] -= factor * m[col][k];
                    }
                }
            }
        }
        (0..n).map(|i| m[i][n] / m[i][i]).collect()
    }

    pub fn six_node_graph() -> (FolkGraph, Vec<Vec<f64>>) {
        let nodes = vec![
            Node::User(UserId(0)),
            Node::User(UserId(1)),
            Node::Resource(ResourceId(0)),
            Node::Resource(ResourceId(1)),
            Node::Tag(TagId(0)),
            Node::Tag(TagId(1)),
        ];
        let edges = [(0, 2, 2.0), (0, 4, 1.0), (0, 5, 1.0), (1, 3, 1.0), (1, 5, 3.0), (2, 4, 1.0), (3, 5, 1.0), (2, 5, 1.0)];
        let mut adj = vec![vec![0.0; 6]; 6];
        for &(a, b, w) in &edges {
            adj[a][b] += w;
            adj[b][a] += w;
        }
        let graph = FolkGraph::from_weighted_edges(nodes.clone(), edges.iter().map(|&(a, b, w)| (nodes[a], nodes[b], w)));
        (graph, adj)
    }
}
