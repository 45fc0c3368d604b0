//! Recursive sparsification of graphs whose leverage scores are uniformly
//! small.
//!
//! The graph is partitioned repeatedly; after `t` levels the path always
//! descends into the side with fewer edges, and the surviving subgraph is
//! reweighted by `2^t`. Each level costs a factor `(1/2 ± d_i)` against its
//! parent, and the leverage ceiling `l_i <= delta` keeps those factors from
//! compounding badly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::graph::WeightedGraph;
use crate::leverage::{leverage_scores, LeverageProfile};
use crate::linalg::approx_factors;
use crate::partition::{PartitionResult, Partitioner};

/// Slack on the leverage recurrence check.
pub const RECURRENCE_TOL: f64 = 1e-9;
/// A level whose best partition reaches this deviation would leave the
/// chosen side disconnected relative to its parent.
pub const DEGENERATE_DEVIATION: f64 = 0.5 - 1e-9;
/// Deepest recursion the engine will run (node ids are `u64`).
pub const MAX_LEVELS: usize = 48;
/// Upper limit on `delta` in relaxed mode.
pub const RELAXED_DELTA_LIMIT: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Worst-case constants; every premise is checked and violations abort.
    Strict,
    /// Measured deviations replace the worst-case per-level factors.
    Relaxed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrictConstants {
    /// `3 + sqrt(6)`, the geometric-sum constant for `sum sqrt(l_i)`.
    pub c: f64,
    /// Leverage ceiling for strict runs, chosen so that `5 sqrt(l) <= 1/6`.
    pub small_leverage: f64,
}

impl Default for StrictConstants {
    fn default() -> Self {
        StrictConstants {
            c: 3.0 + 6f64.sqrt(),
            small_leverage: 1.0 / 900.0,
        }
    }
}

impl StrictConstants {
    /// Per-level factor interval `(e^{-10 sqrt(l)}, e^{10 sqrt(l)})`.
    pub fn level_factor(&self, ell: f64) -> (f64, f64) {
        let x = 10.0 * ell.sqrt();
        ((-x).exp(), x.exp())
    }
}

/// `floor(log2(1/gamma) - log2(2/delta))`, or 0 when negative.
pub fn recursion_depth(gamma: f64, delta: f64, mode: Mode) -> Result<usize> {
    let limit_ok = match mode {
        Mode::Strict => delta <= StrictConstants::default().small_leverage,
        Mode::Relaxed => delta < RELAXED_DELTA_LIMIT,
    };
    if !(gamma > 0.0 && gamma <= delta && limit_ok) {
        let limit = match mode {
            Mode::Strict => "delta <= 1/900",
            Mode::Relaxed => "delta < 1/4",
        };
        return Err(Error::InvalidParameter(format!(
            "need 0 < gamma <= delta and {limit}; got gamma = {gamma:e}, delta = {delta:e}"
        )));
    }
    Ok(floor_depth((1.0 / gamma).log2() - (2.0 / delta).log2()))
}

/// Floors a real depth, absorbing roundoff at exact integers.
pub(crate) fn floor_depth(x: f64) -> usize {
    let t = (x + 1e-9).floor();
    if t <= 0.0 {
        0
    } else {
        t as usize
    }
}

/// How far to descend.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Depth {
    Fixed(usize),
    /// Descend until the path subgraph has at most `target` distinct parent
    /// edges.
    UntilSize {
        target: usize,
        max_levels: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundedOptions {
    pub mode: Mode,
    pub delta: f64,
    pub partitioner: Partitioner,
    pub execution: Execution,
    /// Partition every sibling at every level so that the trace carries the
    /// maximum leverage over all `2^i` subgraphs, not just the path.
    pub track_global: bool,
    /// Mixed into random seeds; distinct per call site.
    pub salt: u64,
}

impl BoundedOptions {
    pub fn new(mode: Mode, delta: f64, partitioner: Partitioner) -> Self {
        BoundedOptions {
            mode,
            delta,
            partitioner,
            execution: Execution::default(),
            track_global: true,
            salt: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Requested depth reached.
    Depth,
    /// Size target reached.
    Target,
    /// `t = 0`: no partitioning possible.
    NoHeadroom,
    /// Path subgraph has fewer than two edges.
    TooFewEdges,
    /// Best partition found would disconnect the chosen side (relaxed).
    Degenerate,
    /// Relaxed level cap reached.
    LevelCap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    pub parent_edges: usize,
    /// Max leverage of the path subgraph at this level.
    pub max_leverage: f64,
    /// Max leverage over all subgraphs at this level, when tracked.
    pub global_max_leverage: Option<f64>,
    pub deviation: f64,
    /// `5 sqrt(max_leverage)`.
    pub mss_bound: f64,
    pub mss_bound_met: bool,
    pub side_edges: [usize; 2],
    /// 1 or 2.
    pub chosen: u8,
    pub chosen_edges: usize,
    pub chosen_parents: usize,
    /// Spectrum range of the chosen child against this level's subgraph.
    pub child_lower: f64,
    pub child_upper: f64,
    pub child_kernel_match: bool,
    /// Every child leverage `l'` lies in `[l/b - tol, l/a + tol]`.
    pub leverage_recurrence_ok: bool,
    pub partitions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparsifyTrace {
    pub mode: Mode,
    pub delta: f64,
    /// Max leverage of the input.
    pub gamma: f64,
    /// `gamma * m / n`.
    pub rho: f64,
    pub planned_depth: Option<usize>,
    /// Levels actually performed (`t`).
    pub depth: usize,
    /// `2^t`.
    pub reweight: f64,
    pub levels: Vec<LevelRecord>,
    pub final_max_leverage: Option<f64>,
    pub final_global_max_leverage: Option<f64>,
    pub global_tracking: bool,
    /// `sum_i 10 sqrt(l_i)` over performed levels, global `l_i` when tracked.
    pub accumulated_log_factor: f64,
    /// `sum_i -ln(1 - 2 d_i)`: log of the measured worst-case upper factor.
    pub measured_log_factor: f64,
    pub stop: StopReason,
    pub notes: Vec<String>,
}

impl SparsifyTrace {
    /// `l_0, ..., l_t` along the path, or over all subgraphs when tracked
    /// and `global` is set.
    pub fn leverage_sequence(&self, global: bool) -> Vec<f64> {
        let pick = |path: f64, all: Option<f64>| if global { all.unwrap_or(path) } else { path };
        let mut seq: Vec<f64> = self
            .levels
            .iter()
            .map(|l| pick(l.max_leverage, l.global_max_leverage))
            .collect();
        if let Some(last) = self.final_max_leverage {
            seq.push(pick(last, self.final_global_max_leverage));
        }
        seq
    }

    /// `prod_i (1 - 2 d_i)` and `prod_i (1 + 2 d_i)`.
    pub fn deviation_factors(&self) -> (f64, f64) {
        self.levels.iter().fold((1.0, 1.0), |(lo, hi), l| {
            (
                lo * (1.0 - 2.0 * l.deviation),
                hi * (1.0 + 2.0 * l.deviation),
            )
        })
    }

    /// `prod_i 2 a_i` and `prod_i 2 b_i` from the measured child factors.
    pub fn measured_factors(&self) -> (f64, f64) {
        self.levels.iter().fold((1.0, 1.0), |(lo, hi), l| {
            (lo * 2.0 * l.child_lower, hi * 2.0 * l.child_upper)
        })
    }
}

/// Sparsifies `g` with depth `recursion_depth(gamma, delta)`, where `gamma`
/// is the measured maximum leverage. Returns `g` unchanged when `t = 0`.
pub fn sparsify_bounded(
    g: &WeightedGraph,
    opts: &BoundedOptions,
) -> Result<(WeightedGraph, SparsifyTrace)> {
    let profile = leverage_scores(g)?;
    let t = recursion_depth(profile.max, opts.delta, opts.mode)?;
    sparsify_to_depth(g, Depth::Fixed(t), opts)
}

struct Node {
    id: u64,
    graph: WeightedGraph,
}

/// The recursion engine behind [`sparsify_bounded`], with an explicit depth
/// rule.
pub fn sparsify_to_depth(
    g: &WeightedGraph,
    depth: Depth,
    opts: &BoundedOptions,
) -> Result<(WeightedGraph, SparsifyTrace)> {
    let profile = leverage_scores(g)?;
    let gamma = profile.max;
    let strict = opts.mode == Mode::Strict;
    if strict && gamma > opts.delta {
        return Err(Error::Infeasible(format!(
            "input max leverage {gamma:e} exceeds delta = {:e} (leverage ceiling)",
            opts.delta
        )));
    }

    let mut trace = SparsifyTrace {
        mode: opts.mode,
        delta: opts.delta,
        gamma,
        rho: gamma * g.m() as f64 / g.n() as f64,
        planned_depth: match depth {
            Depth::Fixed(t) => Some(t),
            Depth::UntilSize { .. } => None,
        },
        depth: 0,
        reweight: 1.0,
        levels: Vec::new(),
        final_max_leverage: None,
        final_global_max_leverage: None,
        global_tracking: opts.track_global,
        accumulated_log_factor: 0.0,
        measured_log_factor: 0.0,
        stop: StopReason::Depth,
        notes: Vec::new(),
    };
    if !opts.track_global {
        trace
            .notes
            .push("leverage maxima are path-local (sibling tracking off)".into());
    }
    if depth == Depth::Fixed(0) {
        trace.stop = StopReason::NoHeadroom;
        trace
            .notes
            .push("depth t = 0: graph returned unchanged".into());
        return Ok((g.clone(), trace));
    }

    let mut path = Node {
        id: 1,
        graph: g.clone(),
    };
    let mut path_profile = profile;
    let mut siblings = vec![Node {
        id: 1,
        graph: g.clone(),
    }];
    let mut global_max = opts.track_global.then_some(gamma);

    for level in 0.. {
        let stop = match depth {
            Depth::Fixed(t) if level >= t => Some(StopReason::Depth),
            Depth::UntilSize { target, .. } if path.graph.distinct_parents() <= target => {
                Some(StopReason::Target)
            }
            Depth::UntilSize { max_levels, .. } if level >= max_levels.min(MAX_LEVELS) => {
                Some(StopReason::LevelCap)
            }
            Depth::Fixed(_) if level >= MAX_LEVELS => Some(StopReason::LevelCap),
            _ if path.graph.m() < 2 => Some(StopReason::TooFewEdges),
            _ => None,
        };
        if let Some(stop) = stop {
            trace.stop = stop;
            break;
        }

        let p = opts.partitioner.partition(
            &path.graph,
            node_salt(opts.salt, path.id),
            opts.execution,
        )?;
        if !strict && p.deviation >= DEGENERATE_DEVIATION {
            trace.stop = StopReason::Degenerate;
            trace.notes.push(format!(
                "level {level}: best deviation {:.6} would disconnect the chosen side",
                p.deviation
            ));
            break;
        }

        let (h1, h2) = path.graph.bipartition(&p.first_side)?;
        let chosen: u8 = if h1.m() <= h2.m() { 1 } else { 2 };
        let side_edges = [h1.m(), h2.m()];
        let child = if chosen == 1 { h1 } else { h2 };

        let cert = approx_factors(&path.graph.laplacian(), &child.laplacian())?;
        let child_profile = if child.m() > 0 {
            Some(leverage_scores(&child)?)
        } else {
            None
        };
        let recurrence_ok = child_profile.as_ref().is_none_or(|cp| {
            leverage_recurrence_holds(
                &path_profile,
                cp,
                &p.first_side,
                chosen == 1,
                cert.lower,
                cert.upper,
            )
        });

        let (partitions, next_global) = if opts.track_global {
            let (next, count, max) = expand_siblings(&siblings, &path, &p, opts)?;
            siblings = next;
            (count, max)
        } else {
            (1, None)
        };

        let ell = global_max.unwrap_or(path_profile.max);
        let record = LevelRecord {
            level,
            parent_edges: path.graph.m(),
            max_leverage: path_profile.max,
            global_max_leverage: global_max,
            deviation: p.deviation,
            mss_bound: p.bound,
            mss_bound_met: p.satisfied_bound,
            side_edges,
            chosen,
            chosen_edges: child.m(),
            chosen_parents: child.distinct_parents(),
            child_lower: cert.lower,
            child_upper: cert.upper,
            child_kernel_match: cert.kernel_match,
            leverage_recurrence_ok: recurrence_ok,
            partitions,
        };
        trace.accumulated_log_factor += 10.0 * ell.sqrt();
        trace.measured_log_factor += -(1.0 - 2.0 * p.deviation).ln();
        trace.levels.push(record);
        trace.depth = level + 1;

        let child_max = child_profile.as_ref().map_or(0.0, |cp| cp.max);
        global_max = next_global;
        if strict {
            let (ell_next, scope) = match global_max {
                Some(x) => (x, "all subgraphs"),
                None => (child_max, "path subgraph"),
            };
            if ell_next > opts.delta {
                return Err(Error::Infeasible(format!(
                    "level {}: max leverage {ell_next:e} over {scope} exceeds delta = {:e} (leverage ceiling)",
                    level + 1,
                    opts.delta
                )));
            }
        }

        path = Node {
            id: 2 * path.id + u64::from(chosen == 2),
            graph: child,
        };
        match child_profile {
            Some(cp) => path_profile = cp,
            None => {
                trace.stop = StopReason::TooFewEdges;
                break;
            }
        }
    }

    if path.graph.m() > 0 {
        trace.final_max_leverage = Some(path_profile.max);
    }
    trace.final_global_max_leverage = global_max;
    trace.reweight = 2f64.powi(trace.depth as i32);
    let out = if trace.depth == 0 {
        path.graph
    } else {
        path.graph.scaled(trace.reweight)?
    };
    Ok((out, trace))
}

fn node_salt(salt: u64, id: u64) -> u64 {
    salt.rotate_left(48) ^ id
}

/// Partitions every sibling at the current level (reusing the path's
/// partition) and returns the next level, the number of partitions, and the
/// max leverage over the next level's subgraphs.
fn expand_siblings(
    siblings: &[Node],
    path: &Node,
    path_partition: &PartitionResult,
    opts: &BoundedOptions,
) -> Result<(Vec<Node>, usize, Option<f64>)> {
    let expanded = exec::map_collect(
        opts.execution,
        siblings,
        |node| -> Result<Vec<(Node, Option<LeverageProfile>)>> {
            if node.graph.m() < 2 {
                let prof = if node.graph.m() == 1 {
                    Some(leverage_scores(&node.graph)?)
                } else {
                    None
                };
                return Ok(vec![(
                    Node {
                        id: 2 * node.id,
                        graph: node.graph.clone(),
                    },
                    prof,
                )]);
            }
            let assignment = if node.id == path.id {
                path_partition.first_side.clone()
            } else {
                opts.partitioner
                    .partition(
                        &node.graph,
                        node_salt(opts.salt, node.id),
                        Execution::Sequential,
                    )?
                    .first_side
            };
            let (h1, h2) = node.graph.bipartition(&assignment)?;
            let mut out = Vec::with_capacity(2);
            for (bit, h) in [(0u64, h1), (1u64, h2)] {
                let prof = if h.m() > 0 {
                    Some(leverage_scores(&h)?)
                } else {
                    None
                };
                out.push((
                    Node {
                        id: 2 * node.id + bit,
                        graph: h,
                    },
                    prof,
                ));
            }
            Ok(out)
        },
    );

    let mut next = Vec::new();
    let mut partitions = 0;
    let mut max: Option<f64> = None;
    for (node, result) in siblings.iter().zip(expanded) {
        let children = result?;
        if node.graph.m() >= 2 {
            partitions += 1;
        }
        for (child, prof) in children {
            if let Some(p) = prof {
                max = Some(max.map_or(p.max, |m: f64| m.max(p.max)));
            }
            if child.graph.m() > 0 {
                next.push(child);
            }
        }
    }
    Ok((next, partitions, max))
}

/// `l/b - tol <= l' <= l/a + tol` for every edge of the chosen side, where
/// `a L_P ⪯ L_C ⪯ b L_P` are the measured factors.
fn leverage_recurrence_holds(
    parent: &LeverageProfile,
    child: &LeverageProfile,
    first_side: &[bool],
    chose_first: bool,
    a: f64,
    b: f64,
) -> bool {
    let parents = first_side
        .iter()
        .zip(&parent.scores)
        .filter(|(&s, _)| s == chose_first)
        .map(|(_, &l)| l);
    parents.zip(&child.scores).all(|(l, &lc)| {
        let upper = if a > 0.0 {
            l / a + RECURRENCE_TOL
        } else {
            f64::INFINITY
        };
        lc >= l / b - RECURRENCE_TOL && lc <= upper
    })
}

/// One consecutive-level comparison of the leverage envelope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeStep {
    pub level: usize,
    pub previous: f64,
    pub current: f64,
    /// `l_i <= 2 e^{10 sqrt(l_{i-1})} l_{i-1}`.
    pub exp_upper_ok: bool,
    /// `l_i <= (1/2 - 5 sqrt(l_{i-1}))^{-1} l_{i-1}`; vacuous (true) when
    /// `5 sqrt(l_{i-1}) >= 1/2`.
    pub mss_upper_ok: bool,
    /// `l_i >= (1/2 + 5 sqrt(l_{i-1}))^{-1} l_{i-1}`.
    pub mss_lower_ok: bool,
    /// `l_i >= (3/2) l_{i-1}`.
    pub growth_lower_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricCheck {
    pub k: usize,
    pub sum_sqrt: f64,
    /// `(3 + sqrt 6) sqrt(l_k)`.
    pub bound: f64,
    pub holds: bool,
    /// Whether `l_i >= (3/2) l_{i-1}` held for all `i <= k`, the premise of
    /// the bound.
    pub premise: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub steps: Vec<EnvelopeStep>,
    pub geometric: Vec<GeometricCheck>,
    pub path_local: bool,
}

impl EnvelopeReport {
    pub fn upper_bounds_hold(&self) -> bool {
        self.steps.iter().all(|s| s.exp_upper_ok && s.mss_upper_ok)
    }

    /// The geometric bound holds wherever its premise did.
    pub fn geometric_sound(&self) -> bool {
        self.geometric.iter().all(|g| !g.premise || g.holds)
    }
}

/// Envelope inequalities on a strict-mode trace's leverage sequence.
pub fn leverage_envelope_check(trace: &SparsifyTrace) -> Result<EnvelopeReport> {
    if trace.mode != Mode::Strict {
        return Err(Error::InvalidParameter(
            "leverage envelope checks apply to strict-mode traces only".into(),
        ));
    }
    let mut report = envelope_check(&trace.leverage_sequence(true));
    report.path_local = !trace.global_tracking;
    Ok(report)
}

/// Envelope inequalities on an arbitrary leverage sequence `l_0, l_1, ...`.
pub fn envelope_check(ells: &[f64]) -> EnvelopeReport {
    let c = StrictConstants::default().c;
    let steps: Vec<EnvelopeStep> = ells
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let (prev, cur) = (w[0], w[1]);
            let root = 5.0 * prev.sqrt();
            EnvelopeStep {
                level: i + 1,
                previous: prev,
                current: cur,
                exp_upper_ok: cur <= 2.0 * (10.0 * prev.sqrt()).exp() * prev,
                mss_upper_ok: root >= 0.5 || cur <= prev / (0.5 - root),
                mss_lower_ok: cur >= prev / (0.5 + root),
                growth_lower_ok: cur >= 1.5 * prev,
            }
        })
        .collect();

    let mut geometric = Vec::new();
    let mut sum = ells.first().map_or(0.0, |l| l.sqrt());
    let mut premise = true;
    for (k, &ell) in ells.iter().enumerate().skip(1) {
        sum += ell.sqrt();
        premise &= steps[k - 1].growth_lower_ok;
        let bound = c * ell.sqrt();
        geometric.push(GeometricCheck {
            k,
            sum_sqrt: sum,
            bound,
            holds: sum <= bound,
            premise,
        });
    }
    EnvelopeReport {
        steps,
        geometric,
        path_local: false,
    }
}
