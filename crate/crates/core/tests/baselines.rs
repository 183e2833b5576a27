mod support;

use std::collections::BTreeMap;

use proptest::prelude::*;
use tagrec_core::baselines::{
    bll_c, bll_scores, cf, mp_ur, pagerank_rank, FolkGraph, FolkRank, GraphMode, PageRankParams,
};
use support::pagerank::{dense_pagerank, six_node_graph, solve_fixed_point};
use tagrec_core::threelayers::{mix_components, AbsentTags};
use tagrec_core::{Blacklist, Folksonomy, FolksonomyBuilder, RankedTags, ResourceId, TagId, UserId};

fn build(rows: &[(u8, u8, u8)]) -> Folksonomy {
    let mut b = FolksonomyBuilder::new(Blacklist::empty());
    for &(u, r, t) in rows {
        b.add_row(&format!("u{u}"), &format!("r{r}"), &format!("t{t}"), i64::from(u) * 10 + i64::from(r))
            .unwrap();
    }
    b.build().unwrap()
}

fn rows(users: u8) -> impl Strategy<Value = Vec<(u8, u8, u8)>> {
    prop::collection::vec((0..users, 0u8..6, 0u8..8), 2..50)
}

#[test]
fn six_nodes_match_dense_oracle() {
    let (graph, adj) = six_node_graph();
    let params = PageRankParams::default();
    for p in [vec![1.0; 6], vec![1.0 / 6.0 + 0.5, 1.0 / 6.0, 1.0 / 6.0 + 0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]] {
        let got = pagerank_rank(&graph, &p, &params);
        assert!(got.converged && got.iterations <= 100);
        let dense = dense_pagerank(&adj, &p, &params);
        for (a, b) in got.weights.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        let tight = pagerank_rank(&graph, &p, &PageRankParams { tolerance: 1e-15, max_iters: 10_000, ..params });
        let exact = solve_fixed_point(&adj, &p, params.damping);
        for (a, b) in tight.weights.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }
}

#[test]
fn symmetric_tags_get_equal_weight() {
    let f = build(&[(0, 0, 0), (0, 0, 1), (1, 1, 0), (1, 1, 1)]);
    for mode in [GraphMode::AdaptedPageRank, GraphMode::FolkRank] {
        let rec = FolkRank::new(&f, mode, PageRankParams::default());
        let w = rec.tag_weights(UserId(0), ResourceId(0)).unwrap();
        assert_eq!(w.len(), 2);
        assert!((w[0].1 - w[1].1).abs() < 1e-12);
    }
}

#[test]
fn user_resource_mix_reuses_the_shared_mixer() {
    let f = build(&[(0, 0, 0), (0, 1, 1), (0, 2, 1), (1, 0, 2), (2, 0, 2), (2, 0, 3)]);
    let (u, r) = (UserId(0), ResourceId(0));
    let scores = |m: &BTreeMap<TagId, u32>| m.iter().map(|(&t, &n)| (t, n as f64)).collect::<Vec<_>>();
    let expected = mix_components(
        &scores(f.user_tag_frequencies(u)),
        &scores(f.resource_tag_frequencies(r)),
        0.5,
        AbsentTags::NeutralScore,
    );
    assert_eq!(mp_ur(&f, u, r, 0.5, 10).unwrap(), RankedTags::from_scores(expected, 10));

    let personal = bll_scores(&f, u, 1_000, 0.5);
    let expected = mix_components(&personal, &scores(f.resource_tag_frequencies(r)), 0.5, AbsentTags::Excluded);
    assert_eq!(bll_c(&f, u, r, 1_000, 0.5, 0.5, 10).unwrap(), RankedTags::from_scores(expected, 10));
}

proptest! {
    #[test]
    fn pagerank_ignores_node_order(rows in rows(5), rotate in 0usize..20) {
        let f = build(&rows);
        let graph = FolkGraph::build(&f);
        let mut edges = Vec::new();
        for i in 0..graph.len() {
            for &(j, w) in graph.neighbours(i) {
                if i <= j {
                    edges.push((graph.nodes()[i], graph.nodes()[j], w));
                }
            }
        }
        let mut nodes = graph.nodes().to_vec();
        nodes.reverse();
        let k = rotate % nodes.len();
        nodes.rotate_left(k);
        edges.reverse();
        let permuted = FolkGraph::from_weighted_edges(nodes, edges);

        let params = PageRankParams { tolerance: 1e-13, max_iters: 5_000, ..Default::default() };
        let a = pagerank_rank(&graph, &vec![1.0; graph.len()], &params);
        let b = pagerank_rank(&permuted, &vec![1.0; permuted.len()], &params);
        prop_assert!(a.converged && b.converged);
        for (i, node) in graph.nodes().iter().enumerate() {
            let j = permuted.node_index(*node).unwrap();
            prop_assert!((a.weights[i] - b.weights[j]).abs() < 1e-10);
        }
        let default = pagerank_rank(&graph, &vec![1.0; graph.len()], &PageRankParams::default());
        prop_assert!(default.converged && default.iterations <= 100);
    }

    #[test]
    fn cf_is_similarity_weighted_resource_popularity(rows in rows(10), user in 0u8..10, resource in 0u8..6) {
        let f = build(&rows);
        let (Some(u), Some(r)) = (f.user_id(&format!("u{user}")), f.resource_id(&format!("r{resource}"))) else {
            return Ok(());
        };
        let cosine = |a: &BTreeMap<TagId, u32>, b: &BTreeMap<TagId, u32>| {
            let dot: f64 = a.iter().map(|(t, &x)| x as f64 * b.get(t).copied().unwrap_or(0) as f64).sum();
            let n = |m: &BTreeMap<TagId, u32>| m.values().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
            if dot == 0.0 { 0.0 } else { dot / (n(a) * n(b)) }
        };
        let mut expected: BTreeMap<TagId, f64> = BTreeMap::new();
        for post in f.resource_posts(r) {
            let v = post.user();
            if v == u {
                continue;
            }
            let sim = cosine(f.user_tag_frequencies(u), f.user_tag_frequencies(v));
            if sim > 0.0 {
                for &t in post.tags() {
                    *expected.entry(t).or_insert(0.0) += sim;
                }
            }
        }
        prop_assume!(!expected.is_empty());
        let users = f.users().count();
        let got = cf(&f, u, r, users, 10).unwrap();
        let want = RankedTags::from_scores(expected, 10);
        prop_assert_eq!(got.len(), want.len());
        for (a, b) in got.entries().iter().zip(want.entries()) {
            prop_assert!((a.1 - b.1).abs() < 1e-12);
        }
    }
}
