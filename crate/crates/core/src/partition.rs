//! Two-way edge partitions whose halves each carry about half of the
//! Laplacian quadratic form.
//!
//! A partition `E_1 ⊔ E_2` is scored by its deviation
//! `d = max |lambda(R_1) - 1/2|`, where `R_1` is the normalized form of
//! `L_{H_1}` against `L_G` on `range(L_G)`. By construction
//! `(1/2 - d) L_G ⪯ L_{H_j} ⪯ (1/2 + d) L_G` for both sides. Existence of a
//! partition with `d <= 5 sqrt(alpha)` (`alpha` the maximum leverage score)
//! is guaranteed; the finders here search for one.

use std::cmp::Ordering;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::graph::WeightedGraph;
use crate::leverage::EdgeEmbedding;
use crate::linalg::loewner_leq;

pub const DEFAULT_BRUTE_FORCE_CAP: usize = 22;
/// Hard ceiling on the brute-force cap (masks are `u64`, enumeration is
/// `2^(m-1)`).
pub const MAX_BRUTE_FORCE_CAP: usize = 40;

const BRUTE_CHUNK: u64 = 1 << 12;
const RANDOM_CHUNK: u64 = 256;
/// Tolerance on Löwner checks of partition bounds.
pub const BOUNDS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Brute,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionResult {
    /// `true` for edges on side 1.
    pub first_side: Vec<bool>,
    pub deviation: f64,
    pub method: Method,
    /// Maximum leverage score of the partitioned graph.
    pub alpha: f64,
    /// `5 sqrt(alpha)`.
    pub bound: f64,
    pub satisfied_bound: bool,
    pub candidates: u64,
}

impl PartitionResult {
    pub fn side_sizes(&self) -> (usize, usize) {
        let first = self.first_side.iter().filter(|&&s| s).count();
        (first, self.first_side.len() - first)
    }

    pub fn is_degenerate(&self) -> bool {
        let (a, b) = self.side_sizes();
        a == 0 || b == 0
    }

    /// The bound `5 sqrt(alpha)` says nothing once it reaches 1/2.
    pub fn bound_is_vacuous(&self) -> bool {
        self.bound >= 0.5
    }

    /// Edge indices of side 1 and side 2.
    pub fn sides(&self) -> (Vec<usize>, Vec<usize>) {
        (0..self.first_side.len()).partition(|&i| self.first_side[i])
    }
}

/// How to search for a partition. Seeds of random searches inside the
/// recursive sparsifier are derived per subgraph from `seed`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Partitioner {
    Brute { cap: usize },
    Random { budget: u64, seed: u64 },
}

impl Default for Partitioner {
    fn default() -> Self {
        Partitioner::Brute {
            cap: DEFAULT_BRUTE_FORCE_CAP,
        }
    }
}

impl Partitioner {
    /// Partitions `g`; `salt` decorrelates random streams between calls.
    pub fn partition(
        &self,
        g: &WeightedGraph,
        salt: u64,
        exec: Execution,
    ) -> Result<PartitionResult> {
        match *self {
            Partitioner::Brute { cap } => brute_force_partition_with(g, cap, exec),
            Partitioner::Random { budget, seed } => {
                random_partition_with(g, budget, derive_seed(seed, salt), exec)
            }
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match *self {
            Partitioner::Random { seed, .. } => Some(seed),
            Partitioner::Brute { .. } => None,
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    splitmix64(seed ^ splitmix64(salt))
}

fn check_partitionable(g: &WeightedGraph) -> Result<()> {
    if g.m() < 2 {
        return Err(Error::TooFewEdges { m: g.m() });
    }
    Ok(())
}

fn finish(
    first_side: Vec<bool>,
    deviation: f64,
    method: Method,
    emb: &EdgeEmbedding,
    candidates: u64,
) -> PartitionResult {
    let alpha = (0..emb.edges())
        .map(|e| emb.leverage(e))
        .fold(0.0, f64::max)
        .min(1.0);
    let bound = 5.0 * alpha.sqrt();
    PartitionResult {
        first_side,
        deviation,
        method,
        alpha,
        bound,
        satisfied_bound: deviation <= bound,
        candidates,
    }
}

/// Lexicographic order of the sorted side-1 index sets encoded by two masks.
fn lex_cmp(a: u64, b: u64) -> Ordering {
    let diff = a ^ b;
    if diff == 0 {
        return Ordering::Equal;
    }
    let j = diff.trailing_zeros();
    let above = |x: u64| j < 63 && (x >> (j + 1)) != 0;
    // The set holding j has j where the other has a larger element, unless
    // the other set ends there (and is then a proper prefix).
    if a & (1 << j) != 0 {
        if above(b) {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    } else if above(a) {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// Deviations closer than this count as tied, so that roundoff in the
/// eigensolver does not decide between equally good partitions.
pub const TIE_RESOLUTION: f64 = 1.0 / (1u64 << 40) as f64;

fn tie_key(d: f64) -> i64 {
    (d / TIE_RESOLUTION).round() as i64
}

fn better_mask(x: (f64, u64), y: (f64, u64)) -> (f64, u64) {
    match tie_key(x.0)
        .cmp(&tie_key(y.0))
        .then_with(|| lex_cmp(x.1, y.1))
    {
        Ordering::Greater => y,
        _ => x,
    }
}

/// Exhaustive search with the default cap and execution.
pub fn brute_force_partition(g: &WeightedGraph) -> Result<PartitionResult> {
    brute_force_partition_with(g, DEFAULT_BRUTE_FORCE_CAP, Execution::default())
}

/// Enumerates all `2^(m-1)` partitions with edge 0 on side 1 and returns
/// the one with least deviation, ties going to the lexicographically
/// smallest side-1 index set.
pub fn brute_force_partition_with(
    g: &WeightedGraph,
    cap: usize,
    exec: Execution,
) -> Result<PartitionResult> {
    check_partitionable(g)?;
    let cap = cap.min(MAX_BRUTE_FORCE_CAP);
    let m = g.m();
    if m > cap {
        return Err(Error::BruteForceCap { m, cap });
    }
    let emb = EdgeEmbedding::new(g)?;
    let total: u64 = 1 << (m - 1);
    let chunks = total.div_ceil(BRUTE_CHUNK);

    let best = exec::map_reduce(
        exec,
        chunks as usize,
        |c| -> Result<(f64, u64)> {
            let mut scratch = Vec::new();
            let lo = c as u64 * BRUTE_CHUNK;
            let hi = (lo + BRUTE_CHUNK).min(total);
            let mut best = (f64::INFINITY, u64::MAX);
            for j in lo..hi {
                let mask = 1 | (j << 1);
                let d = emb.deviation(|e| mask >> e & 1 == 1, &mut scratch)?;
                best = better_mask(best, (d, mask));
            }
            Ok(best)
        },
        |a, b| Ok(better_mask(a?, b?)),
    )
    .expect("at least one chunk")?;

    let (d, mask) = best;
    let first_side = (0..m).map(|e| mask >> e & 1 == 1).collect();
    Ok(finish(first_side, d, Method::Brute, &emb, total))
}

/// Uniform random search with the default execution.
pub fn random_partition(g: &WeightedGraph, budget: u64, seed: u64) -> Result<PartitionResult> {
    random_partition_with(g, budget, seed, Execution::default())
}

/// Draws `budget` uniform two-colorings from a ChaCha8 stream seeded with
/// `seed` and keeps the one with least deviation (earliest draw on ties).
///
/// Colorings are drawn sequentially, so a larger budget extends the same
/// stream and can only improve the result.
pub fn random_partition_with(
    g: &WeightedGraph,
    budget: u64,
    seed: u64,
    exec: Execution,
) -> Result<PartitionResult> {
    check_partitionable(g)?;
    if budget == 0 {
        return Err(Error::InvalidParameter(
            "random budget must be at least 1".into(),
        ));
    }
    let m = g.m();
    let words = m.div_ceil(64);
    let emb = EdgeEmbedding::new(g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut best: Option<(f64, u64, Vec<u64>)> = None;
    let mut drawn = 0u64;
    while drawn < budget {
        let count = RANDOM_CHUNK.min(budget - drawn);
        let samples: Vec<Vec<u64>> = (0..count)
            .map(|_| (0..words).map(|_| rng.next_u64()).collect())
            .collect();
        let scored = exec::map_collect(exec, &samples, |bits| -> Result<f64> {
            let mut scratch = Vec::new();
            emb.deviation(|e| bits[e / 64] >> (e % 64) & 1 == 1, &mut scratch)
        });
        for (i, d) in scored.into_iter().enumerate() {
            let d = d?;
            if best.as_ref().is_none_or(|b| tie_key(d) < tie_key(b.0)) {
                best = Some((d, drawn + i as u64, samples[i].clone()));
            }
        }
        drawn += count;
    }

    let (d, _, bits) = best.expect("budget >= 1");
    let first_side = (0..m).map(|e| bits[e / 64] >> (e % 64) & 1 == 1).collect();
    Ok(finish(first_side, d, Method::Random, &emb, budget))
}

/// Löwner bounds of one side of a partition against the whole graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoewnerWitness {
    pub side: u8,
    pub edges: usize,
    /// `(1/2 - d) L_G ⪯ L_H` at the measured deviation.
    pub measured_lower: bool,
    /// `L_H ⪯ (1/2 + d) L_G` at the measured deviation.
    pub measured_upper: bool,
    /// Same two checks at `d* = 5 sqrt(alpha)`.
    pub theoretical_lower: bool,
    pub theoretical_upper: bool,
}

/// `((1/2 - d) L_G ⪯ L_H, L_H ⪯ (1/2 + d) L_G)`, evaluated directly on the
/// Laplacians.
pub fn half_bounds_hold(g: &WeightedGraph, h: &WeightedGraph, d: f64) -> Result<(bool, bool)> {
    let (lg, lh) = (g.laplacian(), h.laplacian());
    Ok((
        loewner_leq(&lg.scale(0.5 - d), &lh, BOUNDS_TOL)?,
        loewner_leq(&lh, &lg.scale(0.5 + d), BOUNDS_TOL)?,
    ))
}

/// Checks both halves of `p` against `g` at the measured and theoretical
/// deviations.
pub fn partition_bounds_check(
    g: &WeightedGraph,
    p: &PartitionResult,
) -> Result<(LoewnerWitness, LoewnerWitness)> {
    let (h1, h2) = g.bipartition(&p.first_side)?;
    let witness = |side: u8, h: &WeightedGraph| -> Result<LoewnerWitness> {
        let (measured_lower, measured_upper) = half_bounds_hold(g, h, p.deviation)?;
        let (theoretical_lower, theoretical_upper) = half_bounds_hold(g, h, p.bound)?;
        Ok(LoewnerWitness {
            side,
            edges: h.m(),
            measured_lower,
            measured_upper,
            theoretical_lower,
            theoretical_upper,
        })
    };
    Ok((witness(1, &h1)?, witness(2, &h2)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn sorted_set(mask: u64) -> Vec<u32> {
        (0..64).filter(|i| mask >> i & 1 == 1).collect()
    }

    #[test]
    fn lex_order_matches_sorted_sets() {
        let masks: Vec<u64> = (1..256).map(|j| 1 | (j << 1)).collect();
        for &a in &masks {
            for &b in &masks {
                assert_eq!(
                    lex_cmp(a, b),
                    sorted_set(a).cmp(&sorted_set(b)),
                    "{a:b} {b:b}"
                );
            }
        }
    }

    #[test]
    fn two_parallel_edges_split_exactly() {
        let g = WeightedGraph::new(2, [(0, 1, 1.0), (0, 1, 1.0)]).unwrap();
        let p = brute_force_partition(&g).unwrap();
        assert!(p.deviation.abs() < 1e-15);
        assert_eq!(p.first_side, vec![true, false]);
        assert_eq!(p.candidates, 2);
    }

    #[test]
    fn star_is_stuck_at_one_half() {
        let g = fixtures::star(5);
        let p = brute_force_partition(&g).unwrap();
        assert!((p.deviation - 0.5).abs() < 1e-12);
        assert!(p.satisfied_bound && p.bound_is_vacuous());
        // lexicographic tie-break picks {0} and keeps both sides nonempty
        assert_eq!(p.sides().0, vec![0]);
        assert!(!p.is_degenerate());
    }

    #[test]
    fn brute_force_size_limits() {
        let one = WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap();
        assert!(matches!(
            brute_force_partition(&one),
            Err(Error::TooFewEdges { m: 1 })
        ));
        let k8 = fixtures::complete(8);
        assert!(matches!(
            brute_force_partition(&k8),
            Err(Error::BruteForceCap { m: 28, cap: 22 })
        ));
        assert!(random_partition(&k8, 0, 1).is_err());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let g = fixtures::random_graph(7, 13, 11, true);
        let a = brute_force_partition_with(&g, 22, Execution::Sequential).unwrap();
        let b = brute_force_partition_with(&g, 22, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        let a = random_partition_with(&g, 700, 5, Execution::Sequential).unwrap();
        let b = random_partition_with(&g, 700, 5, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_single_draw_outcomes() {
        let g = WeightedGraph::new(2, [(0, 1, 1.0), (0, 1, 1.0)]).unwrap();
        for seed in 0..20 {
            let p = random_partition(&g, 1, seed).unwrap();
            let d = p.deviation;
            assert!(d.abs() < 1e-15 || (d - 0.5).abs() < 1e-15, "{d}");
            assert_eq!(p.is_degenerate(), d > 0.25);
        }
    }

    #[test]
    fn random_is_reproducible() {
        let g = fixtures::complete(6);
        assert_eq!(
            random_partition(&g, 300, 9).unwrap(),
            random_partition(&g, 300, 9).unwrap()
        );
    }

    #[test]
    fn bounds_check_on_degenerate_partition() {
        let g = fixtures::complete(4);
        let emb = EdgeEmbedding::new(&g).unwrap();
        let p = finish(vec![true; 6], 0.5, Method::Brute, &emb, 1);
        let (w1, w2) = partition_bounds_check(&g, &p).unwrap();
        assert!(w1.measured_lower && w1.measured_upper);
        assert!(w2.measured_lower && w2.measured_upper);
        let (_, empty) = g.bipartition(&p.first_side).unwrap();
        let (lower, upper) = half_bounds_hold(&g, &empty, 0.49).unwrap();
        assert!(!lower && upper);
        let short = PartitionResult {
            first_side: vec![true; 5],
            ..p
        };
        assert!(partition_bounds_check(&g, &short).is_err());
    }
}
