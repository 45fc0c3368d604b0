//! Löwner order and spectral approximation certificates.
//!
//! For Laplacians `L_G`, `L_H` the certificate is the spectrum of the
//! normalized form `R = L_G^{+1/2} L_H L_G^{+1/2}` restricted to
//! `range(L_G)`. `H` is an ε-approximation of `G` exactly when the kernels
//! agree and that spectrum lies in `[1 - ε, 1 + ε]`.

use serde::{Deserialize, Serialize};

use super::eigen::{eig_sym, eigenvalues_in_place, pinv_sqrt, EigenDecomposition};
use super::SymmetricMatrix;
use crate::error::{Error, Result};

/// Relative eigenvalue cutoff used to decide which directions belong to a
/// Laplacian's range.
pub const RANGE_RTOL: f64 = 1e-9;

/// Absolute slack on certified factors.
pub const CERTIFICATION_TOL: f64 = 1e-9;

/// Which two-sided bound an ε is read against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `(1 - ε) L_G ⪯ L_H ⪯ (1 + ε) L_G`
    Linear,
    /// `e^{-ε} L_G ⪯ L_H ⪯ e^{ε} L_G`
    Exponential,
}

impl Convention {
    pub fn bounds(self, eps: f64) -> (f64, f64) {
        match self {
            Convention::Linear => (1.0 - eps, 1.0 + eps),
            Convention::Exponential => ((-eps).exp(), eps.exp()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxCertificate {
    /// Smallest eigenvalue of the normalized form on `range(L_G)`.
    pub lower: f64,
    /// Largest eigenvalue of the normalized form on `range(L_G)`.
    pub upper: f64,
    pub kernel_match: bool,
    pub rank_g: usize,
    pub rank_h: usize,
    /// Unit-`L_G`-norm vectors attaining `lower` and `upper`.
    pub witness_lower: Vec<f64>,
    pub witness_upper: Vec<f64>,
}

impl ApproxCertificate {
    /// `max(b - 1, 1 - a)`, the plain ε this certificate supports.
    pub fn epsilon(&self) -> f64 {
        (self.upper - 1.0).max(1.0 - self.lower).max(0.0)
    }

    /// `max(ln b, -ln a)`; infinite when `a <= 0`.
    pub fn epsilon_exp(&self) -> f64 {
        if self.lower <= 0.0 {
            return f64::INFINITY;
        }
        self.upper.ln().max(-self.lower.ln()).max(0.0)
    }

    /// Whether the certificate proves an ε-approximation under `convention`,
    /// with [`CERTIFICATION_TOL`] slack on both factors.
    pub fn certifies(&self, eps: f64, convention: Convention) -> bool {
        let (lo, hi) = convention.bounds(eps);
        self.kernel_match
            && self.lower >= lo - CERTIFICATION_TOL
            && self.upper <= hi + CERTIFICATION_TOL
    }
}

struct RangeFrame {
    eig: EigenDecomposition,
    /// Indices of eigenpairs spanning the range, ascending.
    range: Vec<usize>,
    kernel: Vec<usize>,
}

impl RangeFrame {
    fn new(l: &SymmetricMatrix, rtol: f64) -> Result<Self> {
        let eig = eig_sym(l)?;
        let cut = eig.cutoff(rtol);
        let (range, kernel) = (0..eig.dim()).partition(|&k| eig.values[k] > cut);
        Ok(RangeFrame { eig, range, kernel })
    }
}

/// `P L_G^{+1/2} L_H L_G^{+1/2} P` as an `n x n` matrix.
pub fn normalized_form(lg: &SymmetricMatrix, lh: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    check_dims(lg, lh)?;
    let half = pinv_sqrt(lg, Some(RANGE_RTOL))?;
    lh.sandwich(&half)
}

/// Orthogonal projector onto `range(L)`.
pub fn range_projector(l: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let eig = eig_sym(l)?;
    let cut = eig.cutoff(RANGE_RTOL);
    Ok(eig.rebuild(|x| (x > cut).then_some(1.0)))
}

fn check_dims(a: &SymmetricMatrix, b: &SymmetricMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

/// `A ⪯ B`: the smallest eigenvalue of `B - A` is at least
/// `-tol * max(1, max|lambda(B - A)|)`.
pub fn loewner_leq(a: &SymmetricMatrix, b: &SymmetricMatrix, tol: f64) -> Result<bool> {
    let diff = b.sub(a)?;
    let n = diff.dim();
    if n == 0 {
        return Ok(true);
    }
    let mut scratch = diff.as_slice().to_vec();
    let values = eigenvalues_in_place(n, &mut scratch)?;
    let scale = values.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    Ok(values[0] >= -tol * scale)
}

/// Certificate for `L_H` against `L_G` with the default range tolerance.
pub fn approx_factors(lg: &SymmetricMatrix, lh: &SymmetricMatrix) -> Result<ApproxCertificate> {
    approx_factors_with_tol(lg, lh, RANGE_RTOL)
}

pub fn approx_factors_with_tol(
    lg: &SymmetricMatrix,
    lh: &SymmetricMatrix,
    rtol: f64,
) -> Result<ApproxCertificate> {
    check_dims(lg, lh)?;
    let n = lg.dim();
    let g = RangeFrame::new(lg, rtol)?;
    let h_eig = eig_sym(lh)?;
    let rank_h = h_eig.rank(rtol);
    let rank_g = g.range.len();

    // L_H must vanish on ker(L_G).
    let h_scale = h_eig.max_abs_value().max(f64::MIN_POSITIVE);
    let kernel_inside = g.kernel.iter().all(|&k| {
        let x = g.eig.vector(k);
        let hx = lh.matvec(&x);
        hx.iter().map(|v| v * v).sum::<f64>().sqrt() <= rtol * h_scale
    });
    let kernel_match = rank_g == rank_h && kernel_inside;

    if rank_g == 0 {
        return Ok(ApproxCertificate {
            lower: 1.0,
            upper: 1.0,
            kernel_match,
            rank_g,
            rank_h,
            witness_lower: vec![0.0; n],
            witness_upper: vec![0.0; n],
        });
    }

    // W = U_r diag(1/sqrt(lambda_r)); R = W^T L_H W is r x r.
    let r = rank_g;
    let w: Vec<Vec<f64>> = g
        .range
        .iter()
        .map(|&k| {
            let s = 1.0 / g.eig.values[k].sqrt();
            g.eig.vector(k).into_iter().map(|x| x * s).collect()
        })
        .collect();
    let hw: Vec<Vec<f64>> = w.iter().map(|col| lh.matvec(col)).collect();
    let mut data = vec![0.0; r * r];
    for i in 0..r {
        for j in i..r {
            let x: f64 = w[i].iter().zip(&hw[j]).map(|(a, b)| a * b).sum();
            data[i * r + j] = x;
            data[j * r + i] = x;
        }
    }
    let reduced = SymmetricMatrix::symmetrize(r, data);
    let red = eig_sym(&reduced)?;
    let lift = |k: usize| -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (c, col) in w.iter().enumerate() {
            let coef = red.component(c, k);
            for (xi, wi) in x.iter_mut().zip(col) {
                *xi += coef * wi;
            }
        }
        x
    };
    Ok(ApproxCertificate {
        lower: red.values[0],
        upper: red.values[r - 1],
        kernel_match,
        rank_g,
        rank_h,
        witness_lower: lift(0),
        witness_upper: lift(r - 1),
    })
}

/// `(1 - ε) L_G ⪯ L_H ⪯ (1 + ε) L_G` with matching kernels.
///
/// Any `ε > 0` is accepted; for `ε >= 1` the lower bound only asks for a
/// nonnegative factor, and the kernel condition carries the content.
pub fn is_epsilon_approx(lg: &SymmetricMatrix, lh: &SymmetricMatrix, eps: f64) -> Result<bool> {
    is_epsilon_approx_with(lg, lh, eps, Convention::Linear)
}

pub fn is_epsilon_approx_with(
    lg: &SymmetricMatrix,
    lh: &SymmetricMatrix,
    eps: f64,
    convention: Convention,
) -> Result<bool> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive and finite, got {eps}"
        )));
    }
    Ok(approx_factors(lg, lh)?.certifies(eps, convention))
}
