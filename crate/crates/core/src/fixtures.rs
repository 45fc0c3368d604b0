//! Graph families used by tests, benches and the acceptance suite.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::WeightedGraph;

fn build(n: usize, edges: Vec<(usize, usize, f64)>) -> WeightedGraph {
    WeightedGraph::new(n, edges).expect("fixture edges are valid")
}

/// Unit-weight `K_n`, edges in lexicographic order.
pub fn complete(n: usize) -> WeightedGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            edges.push((u, v, 1.0));
        }
    }
    build(n, edges)
}

/// Two unit-weight `K_k` on vertices `0..k` and `k..2k`, joined by the
/// bridge `{k-1, k}`, which is the last edge.
pub fn dumbbell(k: usize) -> WeightedGraph {
    let mut edges = Vec::new();
    for offset in [0, k] {
        for u in 0..k {
            for v in (u + 1)..k {
                edges.push((offset + u, offset + v, 1.0));
            }
        }
    }
    edges.push((k - 1, k, 1.0));
    build(2 * k, edges)
}

/// Star with `spokes` unit edges around vertex 0.
pub fn star(spokes: usize) -> WeightedGraph {
    build(spokes + 1, (1..=spokes).map(|v| (0, v, 1.0)).collect())
}

pub fn path(n: usize) -> WeightedGraph {
    build(n, (1..n).map(|v| (v - 1, v, 1.0)).collect())
}

pub fn cycle(n: usize) -> WeightedGraph {
    build(n, (0..n).map(|v| (v, (v + 1) % n, 1.0)).collect())
}

pub fn complete_bipartite(a: usize, b: usize) -> WeightedGraph {
    let mut edges = Vec::new();
    for u in 0..a {
        for v in a..a + b {
            edges.push((u, v, 1.0));
        }
    }
    build(a + b, edges)
}

/// `k` parallel copies of a single unit-weight edge, as produced by
/// splitting: total weight 1, one shared parent.
pub fn split_single_edge(k: usize) -> WeightedGraph {
    build(2, vec![(0, 1, 1.0)])
        .split_edge(0, k)
        .expect("k >= 1")
}

/// Uniform simple graph with `m` distinct edges on `n` vertices. Weights
/// are drawn from `[0.5, 2)` when `weighted`, else 1. May be disconnected.
pub fn random_graph(n: usize, m: usize, seed: u64, weighted: bool) -> WeightedGraph {
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
        .collect();
    assert!(m <= pairs.len(), "G({n}, {m}) has too many edges");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pairs.shuffle(&mut rng);
    pairs.truncate(m);
    pairs.sort_unstable();
    let edges = pairs
        .into_iter()
        .map(|(u, v)| {
            let w = if weighted {
                rng.gen_range(0.5..2.0)
            } else {
                1.0
            };
            (u, v, w)
        })
        .collect();
    build(n, edges)
}

/// Random connected graph: a random spanning tree plus extra edges.
pub fn random_connected_graph(n: usize, m: usize, seed: u64, weighted: bool) -> WeightedGraph {
    assert!(m + 1 >= n && m <= n * (n - 1) / 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut chosen = BTreeSet::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let (a, b) = (order[i], order[j]);
        chosen.insert((a.min(b), a.max(b)));
    }
    let mut rest: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
        .filter(|p| !chosen.contains(p))
        .collect();
    rest.shuffle(&mut rng);
    chosen.extend(rest.into_iter().take(m + 1 - n));
    let edges = chosen
        .into_iter()
        .map(|(u, v)| {
            let w = if weighted {
                rng.gen_range(0.5..2.0)
            } else {
                1.0
            };
            (u, v, w)
        })
        .collect();
    build(n, edges)
}

/// Named fixtures of mixed shape, including a disconnected one.
pub fn suite() -> Vec<(String, WeightedGraph)> {
    let mut out: Vec<(String, WeightedGraph)> =
        (3..=6).map(|n| (format!("K{n}"), complete(n))).collect();
    out.push(("dumbbell4".into(), dumbbell(4)));
    out.push(("star5".into(), star(5)));
    out.push(("path5".into(), path(5)));
    out.push(("cycle6".into(), cycle(6)));
    out.push(("K2,3".into(), complete_bipartite(2, 3)));
    out.push(("two-edges".into(), build(4, vec![(0, 1, 1.0), (2, 3, 1.0)])));
    for seed in 0..4 {
        out.push((format!("gnm-8-14-{seed}"), random_graph(8, 14, seed, true)));
    }
    out
}

/// Every connected simple graph on `2..=max_n` vertices with
/// `min_m..=max_m` edges, one representative per isomorphism class, in a
/// deterministic order.
pub fn connected_graph_corpus(max_n: usize, min_m: usize, max_m: usize) -> Vec<WeightedGraph> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
            .collect();
        let mut seen = BTreeSet::new();
        for bits in 0u64..(1 << pairs.len()) {
            let m = bits.count_ones() as usize;
            if m < min_m.max(n - 1) || m > max_m {
                continue;
            }
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| bits >> i & 1 == 1)
                .map(|(_, &p)| p)
                .collect();
            if !is_connected(n, &edges) {
                continue;
            }
            let canon = canonical_form(n, &edges);
            if seen.insert(canon.clone()) {
                out.push(build(
                    n,
                    canon.into_iter().map(|(u, v)| (u, v, 1.0)).collect(),
                ));
            }
        }
    }
    out
}

fn is_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut label: Vec<usize> = (0..n).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for &(u, v) in edges {
            let l = label[u].min(label[v]);
            if label[u] != l || label[v] != l {
                label[u] = l;
                label[v] = l;
                changed = true;
            }
        }
    }
    label.iter().all(|&l| l == 0)
}

/// Lexicographically smallest sorted edge list over all relabelings that
/// order vertices by descending degree.
fn canonical_form(n: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut degree = vec![0usize; n];
    for &(u, v) in edges {
        degree[u] += 1;
        degree[v] += 1;
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| std::cmp::Reverse(degree[v]));
    for v in by_degree {
        match groups.last_mut() {
            Some(g) if degree[g[0]] == degree[v] => g.push(v),
            _ => groups.push(vec![v]),
        }
    }

    let mut best: Option<Vec<(usize, usize)>> = None;
    let mut order = Vec::with_capacity(n);
    permute_groups(&groups, 0, &mut order, &mut |order| {
        let mut position = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            position[v] = i;
        }
        let mut relabeled: Vec<(usize, usize)> = edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (position[u], position[v]);
                (a.min(b), a.max(b))
            })
            .collect();
        relabeled.sort_unstable();
        if best.as_ref().is_none_or(|b| relabeled < *b) {
            best = Some(relabeled);
        }
    });
    best.unwrap_or_default()
}

fn permute_groups(
    groups: &[Vec<usize>],
    g: usize,
    order: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if g == groups.len() {
        visit(order);
        return;
    }
    let mut group = groups[g].clone();
    heap_permutations(&mut group, groups[g].len(), &mut |perm| {
        let len = order.len();
        order.extend_from_slice(perm);
        permute_groups(groups, g + 1, order, visit);
        order.truncate(len);
    });
}

fn heap_permutations(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k <= 1 {
        visit(items);
        return;
    }
    for i in 0..k - 1 {
        heap_permutations(items, k - 1, visit);
        if k.is_multiple_of(2) {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
    heap_permutations(items, k - 1, visit);
}
