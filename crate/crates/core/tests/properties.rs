use proptest::prelude::*;

use kssparse::general::{sparsify_general, split_bad_edges, RunConfig};
use kssparse::linalg::{approx_factors, loewner_leq, pinv, Convention, SymmetricMatrix};
use kssparse::partition::{brute_force_partition, random_partition};
use kssparse::{fixtures, leverage_scores, Mode, Partitioner, WeightedGraph};

fn graph_strategy(max_n: usize, max_m: usize) -> impl Strategy<Value = WeightedGraph> {
    (2..=max_n).prop_flat_map(move |n| {
        let pairs = n * (n - 1) / 2;
        (Just(n), 1..=pairs.min(max_m), any::<u64>(), any::<bool>())
            .prop_map(|(n, m, seed, weighted)| fixtures::random_graph(n, m, seed, weighted))
    })
}

fn multigraph_strategy() -> impl Strategy<Value = WeightedGraph> {
    (2usize..8).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n, 0.1f64..10.0), 1..20).prop_map(move |raw| {
            let edges: Vec<_> = raw
                .into_iter()
                .map(|(u, v, w)| {
                    if u == v {
                        (u, (u + 1) % n, w)
                    } else {
                        (u, v, w)
                    }
                })
                .collect();
            WeightedGraph::new(n, edges).unwrap()
        })
    })
}

fn rel_close(a: &SymmetricMatrix, b: &SymmetricMatrix, rtol: f64) -> bool {
    let scale = a.max_abs().max(b.max_abs()).max(1.0);
    a.sub(b).unwrap().max_abs() <= rtol * scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_is_psd_with_zero_row_sums(g in multigraph_strategy()) {
        let l = g.laplacian();
        for i in 0..g.n() {
            let row: f64 = (0..g.n()).map(|j| l.get(i, j)).sum();
            prop_assert!(row.abs() <= 1e-12 * g.total_weight().max(1.0));
        }
        prop_assert!(loewner_leq(&SymmetricMatrix::zeros(g.n()), &l, 1e-10).unwrap());
    }

    #[test]
    fn split_then_recombine_restores_the_graph(g in multigraph_strategy(), k in 1usize..=64, pick in any::<prop::sample::Index>()) {
        let e = pick.index(g.m());
        let s = g.split_edge(e, k).unwrap();
        prop_assert_eq!(s.m(), g.m() + k - 1);
        prop_assert!(rel_close(&s.laplacian(), &g.laplacian(), 1e-12));
        let back = s.recombine();
        prop_assert_eq!(back.m(), g.m());
        for (a, b) in back.edges().iter().zip(g.edges()) {
            prop_assert_eq!((a.u, a.v, a.parent), (b.u, b.v, b.parent));
            prop_assert!((a.weight - b.weight).abs() <= 1e-12 * b.weight);
        }
    }

    #[test]
    fn split_copies_divide_leverage(g in graph_strategy(7, 12), k in 1usize..=64, pick in any::<prop::sample::Index>()) {
        let e = pick.index(g.m());
        let before = leverage_scores(&g).unwrap();
        let after = leverage_scores(&g.split_edge(e, k).unwrap()).unwrap();
        for c in e..e + k {
            prop_assert!((after.scores[c] - before.scores[e] / k as f64).abs() <= 1e-9);
        }
        prop_assert!((after.sum - before.sum).abs() <= 1e-8);
    }

    #[test]
    fn leverage_sums_to_rank_and_is_scale_invariant(g in multigraph_strategy(), s in 0.01f64..100.0) {
        let p = leverage_scores(&g).unwrap();
        prop_assert!((p.sum - p.expected_sum() as f64).abs() <= 1e-8);
        prop_assert!(p.scores.iter().all(|&l| (0.0..=1.0).contains(&l)));
        let q = leverage_scores(&g.scaled(s).unwrap()).unwrap();
        for (a, b) in p.scores.iter().zip(&q.scores) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn partition_halves_sum_to_the_whole(g in graph_strategy(6, 10)) {
        prop_assume!(g.m() >= 2);
        let p = brute_force_partition(&g).unwrap();
        let (h1, h2) = g.bipartition(&p.first_side).unwrap();
        prop_assert_eq!(h1.m() + h2.m(), g.m());
        let sum = h1.laplacian().add(&h2.laplacian()).unwrap();
        prop_assert!(rel_close(&sum, &g.laplacian(), 1e-12));
        prop_assert!(p.deviation <= 0.5 + 1e-12);
    }

    #[test]
    fn random_search_never_beats_exhaustive(g in graph_strategy(6, 10), seed in any::<u64>()) {
        prop_assume!(g.m() >= 2);
        let exact = brute_force_partition(&g).unwrap();
        let sampled = random_partition(&g, 64, seed).unwrap();
        prop_assert!(sampled.deviation >= exact.deviation - 1e-9);
    }

    #[test]
    fn split_bad_edges_caps_leverage(g in graph_strategy(8, 14), factor in 1.0f64..20.0) {
        let m_hat = g.m() as f64 * factor;
        let (s, report) = split_bad_edges(&g, m_hat).unwrap();
        prop_assert!(report.max_leverage_after <= 3.0 * g.n() as f64 / m_hat + 1e-9);
        prop_assert!(report.count_bound_ok);
        prop_assert!(rel_close(&s.laplacian(), &g.laplacian(), 1e-12));
    }

    #[test]
    fn linear_and_exponential_conventions_agree(eps in 1e-6f64..0.999) {
        // e^{-x} >= 1 - x and e^{x} >= 1 + x, so linear ⊂ exponential
        let (ll, lu) = Convention::Linear.bounds(eps);
        let (el, eu) = Convention::Exponential.bounds(eps);
        prop_assert!(el >= ll && eu >= lu);
        // and the exponential interval sits inside the linear one at eps' = e^eps - 1
        let (wl, wu) = Convention::Linear.bounds(eps.exp() - 1.0);
        prop_assert!(wl <= el && eu <= wu + 1e-15);
    }

    #[test]
    fn scaling_gives_exact_factors(g in graph_strategy(7, 12), s in 0.1f64..10.0) {
        let cert = approx_factors(&g.laplacian(), &g.scaled(s).unwrap().laplacian()).unwrap();
        prop_assert!(cert.kernel_match);
        prop_assert!((cert.lower - s).abs() <= 1e-9 * s && (cert.upper - s).abs() <= 1e-9 * s);
    }
}

/// Löwner order reverses under pseudoinversion for matrices sharing a range.
#[test]
fn pseudoinverse_reverses_loewner_order() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let g = fixtures::random_connected_graph(6, rng.gen_range(5..=15), rng.gen(), true);
        // B = A + PSD perturbation on the same range
        let extra = fixtures::random_connected_graph(6, 5, rng.gen(), true);
        let a = g.laplacian();
        let b = a.add(&extra.laplacian()).unwrap();
        assert!(loewner_leq(&a, &b, 1e-10).unwrap());
        let (pa, pb) = (pinv(&a, None).unwrap(), pinv(&b, None).unwrap());
        assert!(loewner_leq(&pb, &pa, 1e-9).unwrap());
    }
}

#[test]
fn relaxed_runs_are_deterministic_and_sound() {
    let g = fixtures::random_connected_graph(25, 200, 5, true);
    let mut cfg = RunConfig::new(
        0.5,
        Mode::Relaxed,
        Partitioner::Random {
            budget: 1024,
            seed: 3,
        },
    );
    cfg.target_size = Some(60);
    let (h1, r1) = sparsify_general(&g, &cfg).unwrap();
    let (h2, r2) = sparsify_general(&g, &cfg).unwrap();
    assert_eq!(h1, h2);
    assert_eq!(r1, r2);
    assert!(h1.m() <= 60);
    assert!(r1.composition_ok);
    assert!(r1.certificate.kernel_match);
    let eps = r1.certificate.epsilon();
    assert!(kssparse::is_epsilon_approx(&g.laplacian(), &h1.laplacian(), eps + 1e-9).unwrap());
}

#[test]
fn sequential_and_parallel_runs_match() {
    use kssparse::Execution;
    let g = fixtures::complete(10);
    let mut cfg = RunConfig::new(
        0.5,
        Mode::Relaxed,
        Partitioner::Random {
            budget: 2048,
            seed: 9,
        },
    );
    cfg.target_size = Some(20);
    cfg.execution = Execution::Sequential;
    let seq = sparsify_general(&g, &cfg).unwrap();
    cfg.execution = Execution::Parallel;
    let par = sparsify_general(&g, &cfg).unwrap();
    assert_eq!(seq, par);
}
