//! Acceptance criteria 1-11. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line, even when all pass.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use kssparse::bounded::envelope_check;
use kssparse::general::{
    delta_sequence, m_hat_closed_form, m_hat_sequence, split_bad_edges, GeneralConstants,
};
use kssparse::linalg::{approx_factors, normalized_form, range_projector};
use kssparse::partition::{brute_force_partition, partition_bounds_check};
use kssparse::{fixtures, leverage_scores, read_graph, WeightedGraph};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture(name: &str) -> PathBuf {
    fixture_dir().join(name)
}

fn fixture_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixture_dir())
        .expect("fixtures directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "graph"))
        .collect();
    files.sort();
    files
}

fn kssparse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kssparse"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    check(t < limit, || format!("took {t:?}, limit {limit:?}"))?;
    Ok(t)
}

/// Connected unit-weight graphs with `n <= 6` and `2 <= m <= 10`.
fn small_corpus() -> Vec<WeightedGraph> {
    fixtures::connected_graph_corpus(6, 2, 10)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    for n in 3..=12 {
        let p = leverage_scores(&fixtures::complete(n)).map_err(|e| e.to_string())?;
        let target = 2.0 / n as f64;
        for (e, &l) in p.scores.iter().enumerate() {
            check((l - target).abs() <= 1e-9, || {
                format!("K{n} edge {e}: {l} != 2/n")
            })?;
        }
        check((p.sum - (n - 1) as f64).abs() <= 1e-8, || {
            format!("K{n}: sum {}", p.sum)
        })?;
    }
    let t = within(start, Duration::from_secs(1))?;
    Ok(format!("K3..K12 uniform 2/n, sums n-1 ({t:.0?})"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let g = read_graph(fixture("dumbbell4.graph")).map_err(|e| e.to_string())?;
    let p = leverage_scores(&g).map_err(|e| e.to_string())?;
    let bridge = p.scores[g.m() - 1];
    check((bridge - 1.0).abs() <= 1e-9, || {
        format!("bridge leverage {bridge}")
    })?;
    let t = within(start, Duration::from_secs(1))?;
    Ok(format!("bridge leverage {bridge:.12} ({t:.0?})"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let corpus = small_corpus();
    let mut worst = 0.0f64;
    for (i, g) in corpus.iter().enumerate() {
        let p = brute_force_partition(g).map_err(|e| e.to_string())?;
        let (h1, h2) = g.bipartition(&p.first_side).map_err(|e| e.to_string())?;
        let lg = g.laplacian();
        let n1 = normalized_form(&lg, &h1.laplacian()).map_err(|e| e.to_string())?;
        let n2 = normalized_form(&lg, &h2.laplacian()).map_err(|e| e.to_string())?;
        let proj = range_projector(&lg).map_err(|e| e.to_string())?;
        let gap = n1.add(&n2).unwrap().sub(&proj).unwrap().max_abs();
        worst = worst.max(gap);
        check(gap <= 1e-9, || {
            format!("graph {i}: halves miss the projector by {gap:e}")
        })?;
        check(p.deviation <= 0.5, || {
            format!("graph {i}: d = {}", p.deviation)
        })?;
        check(p.deviation <= p.bound, || {
            format!(
                "graph {i}: d = {} > 5 sqrt(alpha) = {}",
                p.deviation, p.bound
            )
        })?;
    }
    let t = within(start, Duration::from_secs(120))?;
    Ok(format!(
        "{} graphs, max projector gap {worst:.1e} ({t:.0?})",
        corpus.len()
    ))
}

fn criterion_4() -> Outcome {
    let corpus = small_corpus();
    for (i, g) in corpus.iter().enumerate() {
        let p = brute_force_partition(g).map_err(|e| e.to_string())?;
        let (w1, w2) = partition_bounds_check(g, &p).map_err(|e| e.to_string())?;
        for w in [w1, w2] {
            check(w.measured_lower && w.measured_upper, || {
                format!(
                    "graph {i} side {}: (1/2 ± d) bounds fail at d = {}",
                    w.side, p.deviation
                )
            })?;
        }
    }
    Ok(format!(
        "{} graphs, both halves within (1/2 ± d) L_G",
        corpus.len()
    ))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0usize;
    for case in 0..100 {
        let n = rng.gen_range(3..=8);
        let m = rng.gen_range(2..=(n * (n - 1) / 2).min(14));
        let g = fixtures::random_graph(n, m, rng.gen(), true);
        let parent = leverage_scores(&g).map_err(|e| e.to_string())?;
        let p = brute_force_partition(&g).map_err(|e| e.to_string())?;
        let (h1, h2) = g.bipartition(&p.first_side).map_err(|e| e.to_string())?;
        let (s1, s2) = p.sides();
        for (h, side) in [(h1, s1), (h2, s2)] {
            if h.m() == 0 {
                continue;
            }
            let cert = approx_factors(&g.laplacian(), &h.laplacian()).map_err(|e| e.to_string())?;
            let child = leverage_scores(&h).map_err(|e| e.to_string())?;
            for (&e, &lc) in side.iter().zip(&child.scores) {
                let l = parent.scores[e];
                let lo = l / cert.upper - 1e-9;
                let hi = if cert.lower > 0.0 {
                    l / cert.lower + 1e-9
                } else {
                    f64::INFINITY
                };
                check(lo <= lc && lc <= hi, || {
                    format!("case {case} edge {e}: {lc} outside [{lo}, {hi}]")
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!(
        "100 graphs, {checked} child leverages within [l/b, l/a]"
    ))
}

fn criterion_6() -> Outcome {
    let mut graphs: Vec<WeightedGraph> = (0..8)
        .map(|s| fixtures::random_graph(7, 12, s, true))
        .collect();
    graphs.push(fixtures::dumbbell(4));
    let mut splits = 0;
    for (gi, g) in graphs.iter().enumerate() {
        let lg = g.laplacian();
        let before = leverage_scores(g).map_err(|e| e.to_string())?;
        for e in 0..g.m() {
            for k in [1, 2, 3, 5, 17, 64] {
                let s = g.split_edge(e, k).map_err(|e| e.to_string())?;
                let ls = s.laplacian();
                for i in 0..g.n() {
                    for j in 0..g.n() {
                        let (a, b) = (lg.get(i, j), ls.get(i, j));
                        check((a - b).abs() <= 1e-12 * a.abs().max(1.0), || {
                            format!("graph {gi} edge {e} k {k}: L[{i}][{j}] {a} vs {b}")
                        })?;
                    }
                }
                let after = leverage_scores(&s).map_err(|e| e.to_string())?;
                let want = before.scores[e] / k as f64;
                for c in e..e + k {
                    check((after.scores[c] - want).abs() <= 1e-9, || {
                        format!(
                            "graph {gi} edge {e} k {k}: copy leverage {} vs {want}",
                            after.scores[c]
                        )
                    })?;
                }
                splits += 1;
            }
        }
        for factor in [1.0, 2.0, 10.0] {
            let m_hat = factor * g.m() as f64;
            let (_, r) = split_bad_edges(g, m_hat).map_err(|e| e.to_string())?;
            let cap = 3.0 * g.n() as f64 / m_hat;
            check(r.max_leverage_after <= cap + 1e-9, || {
                format!(
                    "graph {gi} m_hat {m_hat}: max leverage {} > {cap}",
                    r.max_leverage_after
                )
            })?;
        }
    }
    Ok(format!(
        "{splits} single-edge splits, split_bad_edges capped at 3n/m_hat"
    ))
}

fn criterion_7() -> Outcome {
    let mut corpus: Vec<WeightedGraph> = fixtures::suite().into_iter().map(|(_, g)| g).collect();
    corpus.extend(fixtures::connected_graph_corpus(5, 1, 10));
    for path in fixture_files() {
        corpus.push(read_graph(&path).map_err(|e| e.to_string())?);
    }
    let mut largest = 0usize;
    for (i, g) in corpus.iter().enumerate() {
        for factor in [1.0, 2.0, 10.0] {
            let m_hat = factor * g.m() as f64;
            let (_, r) = split_bad_edges(g, m_hat).map_err(|e| e.to_string())?;
            largest = largest.max(r.split_edges.len());
            check(r.split_edges.len() as f64 <= m_hat / 3.0, || {
                format!("graph {i} m_hat {m_hat}: |S| = {}", r.split_edges.len())
            })?;
        }
    }
    Ok(format!(
        "{} graphs x 3 m_hat, largest |S| = {largest}",
        corpus.len()
    ))
}

fn criterion_8() -> Outcome {
    let k = GeneralConstants::default();
    let n = 10;
    let m = 1_000_000;
    for delta_t in [k.strict_delta(0.5), 1e-3, 0.1] {
        for t in 0..=64 {
            let deltas = delta_sequence(delta_t, t);
            let iter = m_hat_sequence(m, n, &deltas);
            for (j, &want) in iter.iter().enumerate() {
                let closed = m_hat_closed_form(m, n, &deltas, j);
                check((closed - want).abs() <= 1e-9 * want.abs(), || {
                    format!("delta_T {delta_t} T {t} k {j}: {closed} vs {want}")
                })?;
            }
            let sum: f64 = deltas.iter().map(|d| d.sqrt()).sum();
            let bound = (2.0 + 2f64.sqrt()) * delta_t.sqrt();
            check(sum <= bound + 1e-12, || {
                format!("T {t}: sum sqrt(delta) {sum} > {bound}")
            })?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..200 {
        let len = rng.gen_range(1..=40);
        let mut ells = vec![rng.gen_range(1e-12..1e-6)];
        for i in 1..len {
            let ratio = if rng.gen_bool(0.3) {
                1.5
            } else {
                rng.gen_range(1.5..4.0)
            };
            ells.push(ells[i - 1] * ratio);
        }
        let r = envelope_check(&ells);
        check(r.geometric.iter().all(|g| g.premise && g.holds), || {
            format!("sequence {case}: geometric sum bound failed")
        })?;
    }
    Ok("closed-form m_hat, sum sqrt(delta_i), and geometric leverage sums hold for T <= 64".into())
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("k12-sparse.graph");
    let report = dir.path().join("k12-report.json");
    let start = Instant::now();
    let run = kssparse(&[
        "sparsify",
        fixture("k12.graph").to_str().unwrap(),
        "--epsilon",
        "0.5",
        "--target-size",
        "30",
        "--method",
        "random",
        "--budget",
        "8192",
        "--seed",
        "12",
        "--out",
        out.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    let t = within(start, Duration::from_secs(60))?;
    check(run.status.code() == Some(0), || {
        format!(
            "sparsify exited {:?}: {}",
            run.status,
            String::from_utf8_lossy(&run.stderr)
        )
    })?;
    let r: Value =
        serde_json::from_slice(&std::fs::read(&report).unwrap()).map_err(|e| e.to_string())?;
    let cert = &r["certificate"];
    let eps = cert["epsilon"].as_f64().ok_or("no epsilon in report")?;
    let (a, b) = (
        cert["lower"].as_f64().unwrap(),
        cert["upper"].as_f64().unwrap(),
    );
    let comp = &r["composition"];
    let (ca, cb) = (
        comp["lower"].as_f64().unwrap(),
        comp["upper"].as_f64().unwrap(),
    );
    check(a >= ca - 1e-8 && b <= cb + 1e-8, || {
        format!("end-to-end [{a}, {b}] escapes composed [{ca}, {cb}]")
    })?;
    let composed_eps = (cb - 1.0).max(1.0 - ca);
    check(eps <= composed_eps + 1e-8, || {
        format!("epsilon {eps} > composed {composed_eps}")
    })?;
    let edges = r["output_edges"].as_u64().unwrap();
    check(edges <= 30, || format!("{edges} edges above the target"))?;

    let eps_arg = format!("{eps}");
    let verify = kssparse(&[
        "verify",
        fixture("k12.graph").to_str().unwrap(),
        out.to_str().unwrap(),
        "--epsilon",
        &eps_arg,
    ]);
    check(verify.status.code() == Some(0), || {
        format!("verify at eps {eps} exited {:?}", verify.status)
    })?;
    Ok(format!("66 -> {edges} edges, measured eps {eps:.6} (composed {composed_eps:.6}), verified ({t:.1?})"))
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut inputs = fixture_files();
    for (name, g) in fixtures::suite() {
        let path = dir.path().join(format!("{name}.graph"));
        kssparse::write_graph(&g, &path).map_err(|e| e.to_string())?;
        inputs.push(path);
    }
    let named = ["delta_i >= 3n/m_hat_i", "1/900", "level budget"];
    for input in &inputs {
        let out = dir.path().join("strict-out.graph");
        for eps in ["0.1", "0.5", "0.9"] {
            let run = kssparse(&[
                "sparsify",
                input.to_str().unwrap(),
                "--mode",
                "strict",
                "--epsilon",
                eps,
                "--method",
                "brute",
                "--out",
                out.to_str().unwrap(),
            ]);
            let stderr = String::from_utf8_lossy(&run.stderr);
            check(run.status.code() == Some(2), || {
                format!("{} eps {eps}: exit {:?}", input.display(), run.status)
            })?;
            check(named.iter().any(|s| stderr.contains(s)), || {
                format!(
                    "{} eps {eps}: diagnostic names no inequality: {stderr}",
                    input.display()
                )
            })?;
            check(!out.exists(), || {
                format!("{}: strict run wrote a graph", input.display())
            })?;
        }
    }
    Ok(format!(
        "{} inputs x 3 epsilons exit 2 naming the violated inequality",
        inputs.len()
    ))
}

fn criterion_11() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut bytes = Vec::new();
    for round in 0..2 {
        let out = dir.path().join(format!("out{round}.graph"));
        let report = dir.path().join(format!("report{round}.json"));
        let run = kssparse(&[
            "sparsify",
            fixture("k12.graph").to_str().unwrap(),
            "--epsilon",
            "0.5",
            "--target-size",
            "30",
            "--budget",
            "2048",
            "--seed",
            "99",
            "--out",
            out.to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
        ]);
        check(run.status.success(), || {
            format!("run {round} exited {:?}", run.status)
        })?;
        bytes.push((
            std::fs::read(&out).unwrap(),
            std::fs::read(&report).unwrap(),
            run.stdout,
        ));
    }
    check(bytes[0] == bytes[1], || {
        "outputs differ between identical runs".into()
    })?;
    let part = |_| {
        kssparse(&[
            "partition",
            fixture("k12.graph").to_str().unwrap(),
            "--method",
            "random",
            "--seed",
            "4",
            "--json",
        ])
        .stdout
    };
    check(part(0) == part(1), || {
        "random partition output differs".into()
    })?;
    Ok("graph files, reports, and partition output byte-identical across runs".into())
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("leverage exactness on K_n", criterion_1),
        ("bridge leverage", criterion_2),
        ("partition identity", criterion_3),
        ("half-Laplacian Loewner bounds", criterion_4),
        ("leverage recurrence", criterion_5),
        ("split invariants", criterion_6),
        ("bad-edge count bound", criterion_7),
        ("schedule arithmetic", criterion_8),
        ("end-to-end relaxed run", criterion_9),
        ("strict-mode honesty", criterion_10),
        ("determinism", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
