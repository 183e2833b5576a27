//! Adapted PageRank and FolkRank over the undirected folksonomy graph.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::baselines::popularity::mp;
use crate::folksonomy::{Folksonomy, ResourceId, TagId, UserId};
use crate::ranking::{Query, RankedTags, RecommendError, TagRecommender};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    User(UserId),
    Resource(ResourceId),
    Tag(TagId),
}

/// Users, resources and tags linked by co-occurrence counts: every tag
/// assignment `(u, r, t)` adds one to the edges `u-t`, `r-t` and `u-r`.
#[derive(Clone, Debug)]
pub struct FolkGraph {
    nodes: Vec<Node>,
    index: BTreeMap<Node, usize>,
    adjacency: Vec<Vec<(usize, f64)>>,
    degree: Vec<f64>,
}

impl FolkGraph {
    pub fn build(train: &Folksonomy) -> Self {
        let mut nodes: Vec<Node> = train.users().map(Node::User).collect();
        nodes.extend(train.resources().map(Node::Resource));
        nodes.extend(
            train
                .tag_frequencies()
                .iter()
                .enumerate()
                .filter(|(_, &n)| n > 0)
                .map(|(t, _)| Node::Tag(TagId(t as u32))),
        );
        let mut edges: BTreeMap<(Node, Node), f64> = BTreeMap::new();
        let mut bump = |a: Node, b: Node| {
            let key = if a <= b { (a, b) } else { (b, a) };
            *edges.entry(key).or_insert(0.0) += 1.0;
        };
        for post in train.posts() {
            let u = Node::User(post.user());
            let r = Node::Resource(post.resource());
            for &t in post.tags() {
                bump(u, Node::Tag(t));
                bump(r, Node::Tag(t));
                bump(u, r);
            }
        }
        Self::from_weighted_edges(nodes, edges.into_iter().map(|((a, b), w)| (a, b, w)))
    }

    /// Graph over `nodes` with the given undirected weighted edges. Repeated
    /// edges accumulate.
    pub fn from_weighted_edges(nodes: Vec<Node>, edges: impl IntoIterator<Item = (Node, Node, f64)>) -> Self {
        let index: BTreeMap<Node, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut weights: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); nodes.len()];
        for (a, b, w) in edges {
            let (i, j) = (index[&a], index[&b]);
            *weights[i].entry(j).or_insert(0.0) += w;
            if i != j {
                *weights[j].entry(i).or_insert(0.0) += w;
            }
        }
        let adjacency: Vec<Vec<(usize, f64)>> = weights.into_iter().map(|m| m.into_iter().collect()).collect();
        let degree = adjacency.iter().map(|row| row.iter().map(|e| e.1).sum()).collect();
        Self {
            nodes,
            index,
            adjacency,
            degree,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_index(&self, node: Node) -> Option<usize> {
        self.index.get(&node).copied()
    }

    pub fn edge_weight(&self, a: Node, b: Node) -> f64 {
        match (self.node_index(a), self.node_index(b)) {
            (Some(i), Some(j)) => self.adjacency[i]
                .iter()
                .find(|e| e.0 == j)
                .map_or(0.0, |e| e.1),
            _ => 0.0,
        }
    }

    pub fn neighbours(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PageRankParams {
    /// Weight of the propagated part; `1 - damping` goes to the preference.
    pub damping: f64,
    /// L1 change below which iteration stops.
    pub tolerance: f64,
    pub max_iters: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        Self {
            damping: 0.7,
            tolerance: 1e-6,
            max_iters: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PageRankResult {
    pub weights: Vec<f64>,
    pub iterations: usize,
    /// L1 change of the last iteration.
    pub delta: f64,
    pub converged: bool,
}

/// Power iteration `w <- d * A w + (1 - d) * p` with `A` the column-stochastic
/// transition matrix of the edge weights. `preference` is normalized to sum
/// to one; nodes without edges hand their mass back through the preference.
pub fn pagerank_rank(graph: &FolkGraph, preference: &[f64], params: &PageRankParams) -> PageRankResult {
    let n = graph.len();
    if n == 0 {
        return PageRankResult {
            weights: Vec::new(),
            iterations: 0,
            delta: 0.0,
            converged: true,
        };
    }
    assert_eq!(preference.len(), n, "preference must cover every node");
    let total: f64 = preference.iter().sum();
    let p: Vec<f64> = if total > 0.0 {
        preference.iter().map(|x| x / total).collect()
    } else {
        vec![1.0 / n as f64; n]
    };

    let d = params.damping;
    let mut w = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut delta = f64::INFINITY;
    let mut iterations = 0;
    while iterations < params.max_iters {
        iterations += 1;
        let mut dangling = 0.0;
        next.iter_mut().for_each(|x| *x = 0.0);
        for j in 0..n {
            if graph.degree[j] == 0.0 {
                dangling += w[j];
                continue;
            }
            let share = w[j] / graph.degree[j];
            for &(i, weight) in &graph.adjacency[j] {
                next[i] += share * weight;
            }
        }
        for i in 0..n {
            next[i] = d * (next[i] + dangling * p[i]) + (1.0 - d) * p[i];
        }
        delta = w.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        core::mem::swap(&mut w, &mut next);
        if delta < params.tolerance {
            break;
        }
    }
    PageRankResult {
        weights: w,
        iterations,
        delta,
        converged: delta < params.tolerance,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphMode {
    /// Tags ranked by personalized PageRank weight.
    AdaptedPageRank,
    /// Tags ranked by personalized minus global weight.
    FolkRank,
}

/// APR / FolkRank recommender with the global (uniform-preference) weights
/// computed once.
pub struct FolkRank<'a> {
    train: &'a Folksonomy,
    graph: FolkGraph,
    baseline: PageRankResult,
    params: PageRankParams,
    mode: GraphMode,
}

impl<'a> FolkRank<'a> {
    pub fn new(train: &'a Folksonomy, mode: GraphMode, params: PageRankParams) -> Self {
        let graph = FolkGraph::build(train);
        let uniform = vec![1.0; graph.len()];
        let baseline = pagerank_rank(&graph, &uniform, &params);
        Self {
            train,
            graph,
            baseline,
            params,
            mode,
        }
    }

    pub fn graph(&self) -> &FolkGraph {
        &self.graph
    }

    /// Preference: uniform `1/|V|` plus 0.5 on each query node present in
    /// the graph. `None` when neither node is present.
    fn preference(&self, user: UserId, resource: ResourceId) -> Option<Vec<f64>> {
        let n = self.graph.len();
        let query_nodes: Vec<usize> = [Node::User(user), Node::Resource(resource)]
            .into_iter()
            .filter_map(|node| self.graph.node_index(node))
            .collect();
        if query_nodes.is_empty() {
            return None;
        }
        let mut p = vec![1.0 / n as f64; n];
        for i in query_nodes {
            p[i] += 0.5;
        }
        Some(p)
    }

    pub fn tag_weights(&self, user: UserId, resource: ResourceId) -> Option<Vec<(TagId, f64)>> {
        let preference = self.preference(user, resource)?;
        let personalized = pagerank_rank(&self.graph, &preference, &self.params);
        Some(
            self.graph
                .nodes
                .iter()
                .enumerate()
                .filter_map(|(i, node)| match *node {
                    Node::Tag(t) => {
                        let w = match self.mode {
                            GraphMode::AdaptedPageRank => personalized.weights[i],
                            GraphMode::FolkRank => personalized.weights[i] - self.baseline.weights[i],
                        };
                        Some((t, w))
                    }
                    _ => None,
                })
                .collect(),
        )
    }
}

/// One-shot FolkRank (or APR) query; builds the graph each call.
pub fn folkrank(
    train: &Folksonomy,
    user: UserId,
    resource: ResourceId,
    mode: GraphMode,
    params: &PageRankParams,
    k: usize,
) -> RankedTags {
    FolkRank::new(train, mode, *params).rank(user, resource, k)
}

impl FolkRank<'_> {
    fn rank(&self, user: UserId, resource: ResourceId, k: usize) -> RankedTags {
        match self.tag_weights(user, resource) {
            Some(weights) => RankedTags::from_scores(weights, k),
            None => mp(self.train, k),
        }
    }
}

impl TagRecommender for FolkRank<'_> {
    fn name(&self) -> &str {
        match self.mode {
            GraphMode::AdaptedPageRank => "apr",
            GraphMode::FolkRank => "folkrank",
        }
    }

    fn recommend(&self, query: &Query, k: usize) -> Result<RankedTags, RecommendError> {
        Ok(self.rank(query.user, query.resource, k))
    }
}
