//! Leverage scores `l_e = w_e (d_u - d_v)^T L^+ (d_u - d_v)`.
//!
//! Both the scores and the partition deviation are computed from the edge
//! embedding `y_e = Lambda^{-1/2} U^T b_e`, where `U`, `Lambda` are the
//! range eigenpairs of `L`. Then `l_e = |y_e|^2` and `sum_e y_e y_e^T = I_r`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::linalg::{eig_sym, eigenvalues_in_place};

/// Leverage scores may leave `[0, 1]` by this much before clamping.
pub const LEVERAGE_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeverageProfile {
    pub scores: Vec<f64>,
    pub max: f64,
    pub sum: f64,
    pub components: usize,
    pub n: usize,
}

impl LeverageProfile {
    /// `n - components`: the value `sum` must match.
    pub fn expected_sum(&self) -> usize {
        self.n - self.components
    }
}

/// Rows `y_e` of the normalized edge embedding, flattened `m x r`.
#[derive(Clone, Debug)]
pub struct EdgeEmbedding {
    m: usize,
    r: usize,
    rows: Vec<f64>,
}

impl EdgeEmbedding {
    pub fn new(g: &WeightedGraph) -> Result<Self> {
        let n = g.n();
        let eig = eig_sym(&g.laplacian())?;
        // ker(L) is spanned by the component indicators, so its dimension is
        // known exactly and the top n - c eigenpairs span the range.
        let r = n - g.components();
        let first = n - r;
        let inv_sqrt: Vec<f64> = eig.values[first..]
            .iter()
            .map(|&l| if l > 0.0 { 1.0 / l.sqrt() } else { 0.0 })
            .collect();
        let mut rows = vec![0.0; g.m() * r];
        for (e, edge) in g.edges().iter().enumerate() {
            let sw = edge.weight.sqrt();
            for (c, s) in inv_sqrt.iter().enumerate() {
                let k = first + c;
                rows[e * r + c] = sw * (eig.component(edge.u, k) - eig.component(edge.v, k)) * s;
            }
        }
        Ok(EdgeEmbedding { m: g.m(), r, rows })
    }

    pub fn edges(&self) -> usize {
        self.m
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn row(&self, e: usize) -> &[f64] {
        &self.rows[e * self.r..(e + 1) * self.r]
    }

    pub fn leverage(&self, e: usize) -> f64 {
        self.row(e).iter().map(|x| x * x).sum()
    }

    /// Deviation `max |lambda - 1/2|` over the eigenvalues of
    /// `R_1 = sum_{e in side 1} y_e y_e^T`.
    ///
    /// `R_2 = I - R_1` has the same deviation, so only the smaller side is
    /// accumulated. `scratch` is reused between calls.
    pub fn deviation(
        &self,
        in_first: impl Fn(usize) -> bool,
        scratch: &mut Vec<f64>,
    ) -> Result<f64> {
        let r = self.r;
        if r == 0 {
            return Ok(0.0);
        }
        let firsts = (0..self.m).filter(|&e| in_first(e)).count();
        let take_first = firsts * 2 <= self.m;
        scratch.clear();
        scratch.resize(r * r, 0.0);
        for e in (0..self.m).filter(|&e| in_first(e) == take_first) {
            let y = self.row(e);
            for i in 0..r {
                let yi = y[i];
                if yi == 0.0 {
                    continue;
                }
                for j in i..r {
                    scratch[i * r + j] += yi * y[j];
                }
            }
        }
        for i in 0..r {
            for j in (i + 1)..r {
                scratch[j * r + i] = scratch[i * r + j];
            }
        }
        let values = eigenvalues_in_place(r, scratch)?;
        // 0 ⪯ R_1 ⪯ I, so anything outside [0, 1] is roundoff
        let lo = values[0].clamp(0.0, 1.0);
        let hi = values[r - 1].clamp(0.0, 1.0);
        Ok((lo - 0.5).abs().max((hi - 0.5).abs()))
    }
}

/// Per-edge leverage scores with sum and max.
pub fn leverage_scores(g: &WeightedGraph) -> Result<LeverageProfile> {
    if g.m() == 0 {
        return Err(Error::NoEdges);
    }
    let emb = EdgeEmbedding::new(g)?;
    Ok(profile_from(g, &emb))
}

pub(crate) fn profile_from(g: &WeightedGraph, emb: &EdgeEmbedding) -> LeverageProfile {
    let scores: Vec<f64> = (0..emb.edges())
        .map(|e| {
            let l = emb.leverage(e);
            debug_assert!(
                (-LEVERAGE_SLACK..=1.0 + LEVERAGE_SLACK).contains(&l),
                "leverage {l} out of range"
            );
            l.clamp(0.0, 1.0)
        })
        .collect();
    let max = scores.iter().copied().fold(0.0, f64::max);
    let sum = scores.iter().sum();
    LeverageProfile {
        scores,
        max,
        sum,
        components: g.components(),
        n: g.n(),
    }
}
