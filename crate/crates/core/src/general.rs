//! The general sparsifier: split high-leverage edges, run the bounded
//! sparsifier, recombine, and repeat under a geometric `delta` schedule.

use serde::{Deserialize, Serialize};

use crate::bounded::{
    self, floor_depth, BoundedOptions, Depth, Mode, SparsifyTrace, StrictConstants, MAX_LEVELS,
    RELAXED_DELTA_LIMIT,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::graph::WeightedGraph;
use crate::leverage::leverage_scores;
use crate::linalg::{approx_factors, ApproxCertificate};
use crate::partition::Partitioner;

/// Slack on the composition and telescoping checks.
pub const COMPOSITION_TOL: f64 = 1e-8;
/// Default `delta_T` for relaxed runs.
pub const DEFAULT_RELAXED_DELTA: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralConstants {
    /// `3 + sqrt 6`.
    pub c: f64,
    /// `c (2 + sqrt 2)`.
    pub c_prime: f64,
    /// `1 - 1/log2(3)`, the exponent in the defining inequality of `beta`.
    pub beta_exponent: f64,
    /// Smallest `beta` with `beta^{1 - 1/log2 3} > 300 c'^2`, plus a relative
    /// margin so the inequality holds strictly in floating point.
    pub beta: f64,
}

impl Default for GeneralConstants {
    fn default() -> Self {
        let c = StrictConstants::default().c;
        let c_prime = c * (2.0 + 2f64.sqrt());
        let beta_exponent = 1.0 - 1.0 / 3f64.log2();
        let beta = (300.0 * c_prime * c_prime).powf(1.0 / beta_exponent) * (1.0 + 1e-5);
        GeneralConstants {
            c,
            c_prime,
            beta_exponent,
            beta,
        }
    }
}

impl GeneralConstants {
    /// `(eps / 10 c')^2`, the strict final-step leverage ceiling.
    pub fn strict_delta(&self, eps: f64) -> f64 {
        (eps / (10.0 * self.c_prime)).powi(2)
    }

    /// `beta n / eps^2`: strict runs stop once this small.
    pub fn termination_size(&self, n: usize, eps: f64) -> f64 {
        self.beta * n as f64 / (eps * eps)
    }
}

/// `floor(log3(m/n) - log3(1/eps^2))`, clamped at 0.
pub fn outer_steps(n: usize, m: usize, eps: f64) -> usize {
    let log3 = |x: f64| x.ln() / 3f64.ln();
    floor_depth(log3(m as f64 / n as f64) - log3(1.0 / (eps * eps)))
}

/// `delta_i = delta_T / 2^{T-i}` for `i = 0..=T`.
pub fn delta_sequence(delta_t: f64, t: usize) -> Vec<f64> {
    (0..=t)
        .map(|i| delta_t / 2f64.powi((t - i) as i32))
        .collect()
}

/// `m̂_0 = m`, `m̂_{i+1} = m̂_i/3 + 6n/delta_i`; one more entry than `deltas`.
pub fn m_hat_sequence(m: usize, n: usize, deltas: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(deltas.len() + 1);
    out.push(m as f64);
    for &d in deltas {
        let prev = *out.last().unwrap();
        out.push(prev / 3.0 + 6.0 * n as f64 / d);
    }
    out
}

/// Closed form of `m̂_k`: `m̂_0/3^k + sum_{i<k} (1/3)^{k-1-i} 6n/delta_i`.
pub fn m_hat_closed_form(m: usize, n: usize, deltas: &[f64], k: usize) -> f64 {
    let head = m as f64 / 3f64.powi(k as i32);
    let tail: f64 = (0..k)
        .map(|i| 3f64.powi(-((k - 1 - i) as i32)) * 6.0 * n as f64 / deltas[i])
        .sum();
    head + tail
}

/// `floor(log2(m̂/3n) - log2(2/delta))`, clamped at 0.
pub fn level_budget(n: usize, m_hat: f64, delta: f64) -> usize {
    floor_depth((m_hat / (3.0 * n as f64)).log2() - (2.0 / delta).log2())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeasibilityBasis {
    /// The schedule's own premise (`m > beta n / eps^2`) guarantees it.
    Proved,
    /// Only checked numerically.
    Checked,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub index: usize,
    pub delta: f64,
    pub m_hat: f64,
    /// `3n / m̂`: edges with larger leverage are split.
    pub split_threshold: f64,
    /// `floor(log2(m̂/3n) - log2(2/delta))`.
    pub level_budget: usize,
    /// `m̂/3 + 6n/delta`.
    pub size_bound: f64,
    /// `delta >= 3n/m̂`.
    pub threshold_ok: bool,
    /// `delta <= 1/900` (strict) or `delta < 1/4` (relaxed).
    pub smallness_ok: bool,
    /// `level_budget >= 1`.
    pub depth_ok: bool,
}

impl ScheduleStep {
    pub fn feasible(&self) -> bool {
        self.threshold_ok && self.smallness_ok && self.depth_ok
    }

    /// The first failing premise, worded with its numbers.
    pub fn violation(&self, n: usize) -> Option<String> {
        let i = self.index;
        if !self.threshold_ok {
            Some(format!(
                "step {i}: delta_{i} = {:e} < 3n/m_hat_{i} = 3*{n}/{} = {:e} (delta_i >= 3n/m_hat_i violated; split edges would exceed the leverage ceiling)",
                self.delta, self.m_hat, self.split_threshold
            ))
        } else if !self.smallness_ok {
            Some(format!(
                "step {i}: delta_{i} = {:e} > 1/900 (leverage ceiling exceeds the small-leverage threshold)",
                self.delta
            ))
        } else if !self.depth_ok {
            Some(format!(
                "step {i}: level budget floor(log2(m_hat/3n) - log2(2/delta)) = floor(log2({:e}) - log2({:e})) < 1 (no room to partition)",
                self.m_hat / (3.0 * n as f64),
                2.0 / self.delta
            ))
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    pub mode: Mode,
    /// `T`; the run performs at most `T + 1` steps.
    pub outer_steps: usize,
    pub delta_t: f64,
    pub deltas: Vec<f64>,
    /// `m̂_0, ..., m̂_{T+1}`.
    pub m_hat: Vec<f64>,
    /// `beta n / eps^2`.
    pub termination_size: f64,
    pub steps: Vec<ScheduleStep>,
    pub feasibility: FeasibilityBasis,
}

impl Schedule {
    /// `sum_i 10 c sqrt(delta_i)`, the strict factor budget (at most `eps`).
    pub fn strict_factor_sum(&self) -> f64 {
        let c = StrictConstants::default().c;
        self.deltas.iter().map(|d| 10.0 * c * d.sqrt()).sum()
    }

    pub fn first_violation(&self) -> Option<String> {
        self.steps.iter().find_map(|s| s.violation(self.n))
    }
}

/// Lays out the `delta_i` and `m̂_i` schedule for an input with `n` vertices
/// and `m` edges. `delta_t` is only accepted in relaxed mode.
pub fn build_schedule(
    n: usize,
    m: usize,
    eps: f64,
    mode: Mode,
    delta_t: Option<f64>,
) -> Result<Schedule> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {eps}"
        )));
    }
    if n < 2 || m == 0 {
        return Err(Error::InvalidParameter(format!(
            "need n >= 2 and m >= 1, got n = {n}, m = {m}"
        )));
    }
    let constants = GeneralConstants::default();
    let delta_t = match (mode, delta_t) {
        (Mode::Strict, None) => constants.strict_delta(eps),
        (Mode::Strict, Some(_)) => {
            return Err(Error::InvalidParameter(
                "strict mode derives delta_T from epsilon; it cannot be overridden".into(),
            ))
        }
        (Mode::Relaxed, d) => {
            let d = d.unwrap_or(DEFAULT_RELAXED_DELTA);
            if !(d > 0.0 && d < RELAXED_DELTA_LIMIT) {
                return Err(Error::InvalidParameter(format!(
                    "relaxed delta_T must lie in (0, 1/4), got {d}"
                )));
            }
            d
        }
    };
    let t = outer_steps(n, m, eps);
    let deltas = delta_sequence(delta_t, t);
    let m_hat = m_hat_sequence(m, n, &deltas);
    let small = StrictConstants::default().small_leverage;
    let steps = deltas
        .iter()
        .zip(&m_hat)
        .enumerate()
        .map(|(index, (&delta, &mh))| {
            let split_threshold = 3.0 * n as f64 / mh;
            let budget = level_budget(n, mh, delta);
            ScheduleStep {
                index,
                delta,
                m_hat: mh,
                split_threshold,
                level_budget: budget,
                size_bound: mh / 3.0 + 6.0 * n as f64 / delta,
                threshold_ok: delta >= split_threshold,
                smallness_ok: match mode {
                    Mode::Strict => delta <= small,
                    Mode::Relaxed => delta < RELAXED_DELTA_LIMIT,
                },
                depth_ok: budget >= 1,
            }
        })
        .collect();
    let termination_size = constants.termination_size(n, eps);
    let feasibility = if mode == Mode::Strict && m as f64 > termination_size {
        FeasibilityBasis::Proved
    } else {
        FeasibilityBasis::Checked
    };
    Ok(Schedule {
        n,
        m,
        epsilon: eps,
        mode,
        outer_steps: t,
        delta_t,
        deltas,
        m_hat,
        termination_size,
        steps,
        feasibility,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub m_hat: f64,
    /// `3n / m̂`.
    pub threshold: f64,
    /// `ceil(m̂ / 3n)`.
    pub multiplicity: usize,
    /// Indices of the split edges (`S`).
    pub split_edges: Vec<usize>,
    /// `m̂ / 3`.
    pub count_bound: f64,
    pub count_bound_ok: bool,
    pub edges_after: usize,
    pub max_leverage_before: f64,
    pub max_leverage_after: f64,
}

/// Splits every edge with leverage above `3n/m̂` into `ceil(m̂/3n)` parallel
/// copies. Copies share their original's parent id.
pub fn split_bad_edges(g: &WeightedGraph, m_hat: f64) -> Result<(WeightedGraph, SplitReport)> {
    if m_hat.is_nan() || m_hat < g.m() as f64 {
        return Err(Error::InvalidParameter(format!(
            "m_hat = {m_hat} is below the edge count {}",
            g.m()
        )));
    }
    let n = g.n() as f64;
    let threshold = 3.0 * n / m_hat;
    let k = (m_hat / (3.0 * n)).ceil().max(1.0) as usize;
    let before = leverage_scores(g)?;
    let split: Vec<usize> = (0..g.m())
        .filter(|&e| before.scores[e] > threshold)
        .collect();
    let mut mult = vec![1; g.m()];
    for &e in &split {
        mult[e] = k;
    }
    let out = g.split_edges(&mult)?;
    let after = if split.is_empty() {
        before.max
    } else {
        leverage_scores(&out)?.max
    };
    let count_bound = m_hat / 3.0;
    let report = SplitReport {
        m_hat,
        threshold,
        multiplicity: k,
        count_bound_ok: split.len() as f64 <= count_bound,
        split_edges: split,
        count_bound,
        edges_after: out.m(),
        max_leverage_before: before.max,
        max_leverage_after: after,
    };
    Ok((out, report))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOptions {
    pub mode: Mode,
    pub partitioner: Partitioner,
    pub execution: Execution,
    pub track_global: bool,
    /// Relaxed only: descend until at most this many recombined edges.
    pub target: usize,
    pub salt: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub index: usize,
    pub delta: f64,
    pub m_hat: f64,
    pub input_edges: usize,
    pub split: SplitReport,
    /// Worst-case level budget for this step.
    pub level_budget: usize,
    pub trace: SparsifyTrace,
    pub output_edges: usize,
    /// `m̂/3 + 6n/delta`.
    pub size_bound: f64,
    pub size_bound_ok: bool,
    /// Measured factors of the output against the step's input.
    pub lower: f64,
    pub upper: f64,
    pub kernel_match: bool,
    /// Measured factors lie within `prod (1/2 ± d_i)` after reweighting.
    pub telescoping_ok: bool,
}

/// One outer step: split, bounded sparsification, recombination. Edge parent
/// ids of the output refer to edge indices of `g`.
pub fn sparsify_step(
    g: &WeightedGraph,
    index: usize,
    m_hat: f64,
    delta: f64,
    opts: &StepOptions,
) -> Result<(WeightedGraph, StepReport)> {
    let n = g.n();
    let strict = opts.mode == Mode::Strict;
    if strict && delta < 3.0 * n as f64 / m_hat {
        return Err(Error::Infeasible(format!(
            "step {index}: delta = {delta:e} < 3n/m_hat = {:e}",
            3.0 * n as f64 / m_hat
        )));
    }
    let input = WeightedGraph::new(n, g.edges().iter().map(|e| (e.u, e.v, e.weight)))?;
    let (split_graph, split) = split_bad_edges(&input, m_hat)?;
    let budget = level_budget(n, m_hat, delta);
    let depth = match opts.mode {
        Mode::Strict => Depth::Fixed(budget),
        Mode::Relaxed => Depth::UntilSize {
            target: opts.target,
            max_levels: MAX_LEVELS,
        },
    };
    let bopts = BoundedOptions {
        mode: opts.mode,
        delta,
        partitioner: opts.partitioner,
        execution: opts.execution,
        track_global: opts.track_global,
        salt: opts.salt ^ index as u64,
    };
    let (sparse, trace) = bounded::sparsify_to_depth(&split_graph, depth, &bopts)?;
    let out = sparse.recombine();

    let cert = approx_factors(&input.laplacian(), &out.laplacian())?;
    let (lo, hi) = trace.deviation_factors();
    let telescoping_ok = cert.lower >= lo - COMPOSITION_TOL && cert.upper <= hi + COMPOSITION_TOL;
    let size_bound = m_hat / 3.0 + 6.0 * n as f64 / delta;
    let size_bound_ok = out.m() as f64 <= size_bound;
    if strict && !size_bound_ok {
        return Err(Error::Infeasible(format!(
            "step {index}: output has {} edges, above m_hat/3 + 6n/delta = {size_bound:e}",
            out.m()
        )));
    }
    let report = StepReport {
        index,
        delta,
        m_hat,
        input_edges: g.m(),
        split,
        level_budget: budget,
        trace,
        output_edges: out.m(),
        size_bound,
        size_bound_ok,
        lower: cert.lower,
        upper: cert.upper,
        kernel_match: cert.kernel_match,
        telescoping_ok,
    };
    Ok((out, report))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub epsilon: f64,
    pub mode: Mode,
    /// Relaxed only; defaults to [`DEFAULT_RELAXED_DELTA`].
    pub delta_t: Option<f64>,
    /// Relaxed only; defaults to `2n`.
    pub target_size: Option<usize>,
    pub partitioner: Partitioner,
    pub execution: Execution,
    pub track_global: bool,
}

impl RunConfig {
    pub fn new(epsilon: f64, mode: Mode, partitioner: Partitioner) -> Self {
        RunConfig {
            epsilon,
            mode,
            delta_t: None,
            target_size: None,
            partitioner,
            execution: Execution::default(),
            track_global: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStop {
    /// At most `beta n / eps^2` edges (strict) or the target size (relaxed).
    SizeReached,
    /// All `T + 1` scheduled steps ran.
    ScheduleExhausted,
    /// A step did not reduce the edge count.
    NoProgress,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralRun {
    pub schedule: Schedule,
    pub target_size: Option<usize>,
    pub steps: Vec<StepReport>,
    pub stop: RunStop,
    /// Actual edge counts `m_0, m_1, ...`.
    pub edge_counts: Vec<usize>,
    pub certificate: ApproxCertificate,
    /// `prod a_step` and `prod b_step`.
    pub composed_lower: f64,
    pub composed_upper: f64,
    pub composition_ok: bool,
    /// Strict: `sum 10 c sqrt(delta_i)` over executed steps. Relaxed:
    /// `sum_steps sum_levels -ln(1 - 2 d_i)`.
    pub factor_sum: f64,
    pub notes: Vec<String>,
}

impl GeneralRun {
    pub fn measured_epsilon(&self) -> f64 {
        self.certificate.epsilon()
    }
}

/// Runs the outer loop. Strict mode checks every step's premises before
/// doing anything and reports the first violation as [`Error::Infeasible`].
pub fn sparsify_general(g: &WeightedGraph, cfg: &RunConfig) -> Result<(WeightedGraph, GeneralRun)> {
    let n = g.n();
    let strict = cfg.mode == Mode::Strict;
    if strict && cfg.target_size.is_some() {
        return Err(Error::InvalidParameter(
            "strict mode stops at beta n / eps^2 edges; a target size cannot be set".into(),
        ));
    }
    let schedule = build_schedule(n, g.m(), cfg.epsilon, cfg.mode, cfg.delta_t)?;
    let target = (!strict).then(|| cfg.target_size.unwrap_or(2 * n));
    let mut notes = Vec::new();
    let mut current = g.clone();
    let mut steps = Vec::new();
    let mut edge_counts = vec![g.m()];
    let mut stop = RunStop::ScheduleExhausted;
    let mut factor_sum = 0.0;

    for sched in &schedule.steps {
        if strict {
            if let Some(v) = sched.violation(n) {
                return Err(Error::Infeasible(v));
            }
        }
        let small_enough = match target {
            Some(t) => current.m() <= t,
            None => current.m() as f64 <= schedule.termination_size,
        };
        if small_enough {
            stop = RunStop::SizeReached;
            break;
        }
        let mut m_hat = sched.m_hat;
        if (current.m() as f64) > m_hat {
            notes.push(format!(
                "step {}: m_hat = {m_hat} raised to the actual edge count {}",
                sched.index,
                current.m()
            ));
            m_hat = current.m() as f64;
        }
        let opts = StepOptions {
            mode: cfg.mode,
            partitioner: cfg.partitioner,
            execution: cfg.execution,
            track_global: cfg.track_global,
            target: target.unwrap_or(0),
            salt: (sched.index as u64) << 32,
        };
        let (next, report) = sparsify_step(&current, sched.index, m_hat, sched.delta, &opts)?;
        if !report.kernel_match {
            return Err(Error::KernelMismatch {
                step: sched.index,
                rank_g: n - current.components(),
                rank_h: n - next.components(),
            });
        }
        factor_sum += if strict {
            10.0 * StrictConstants::default().c * sched.delta.sqrt()
        } else {
            report.trace.measured_log_factor
        };
        let progressed = next.m() < current.m();
        edge_counts.push(next.m());
        steps.push(report);
        current = next;
        if !progressed {
            stop = RunStop::NoProgress;
            break;
        }
        if target.is_some_and(|t| current.m() <= t) {
            stop = RunStop::SizeReached;
            break;
        }
    }

    let certificate = approx_factors(&g.laplacian(), &current.laplacian())?;
    let (composed_lower, composed_upper) = steps
        .iter()
        .fold((1.0, 1.0), |(lo, hi), s| (lo * s.lower, hi * s.upper));
    let composition_ok = certificate.lower >= composed_lower - COMPOSITION_TOL
        && certificate.upper <= composed_upper + COMPOSITION_TOL;
    let run = GeneralRun {
        schedule,
        target_size: target,
        steps,
        stop,
        edge_counts,
        certificate,
        composed_lower,
        composed_upper,
        composition_ok,
        factor_sum,
        notes,
    };
    Ok((current, run))
}
