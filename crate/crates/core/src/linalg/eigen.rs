use super::SymmetricMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 64;
/// Off-diagonal Frobenius norm, relative to the full norm, that counts as
/// converged when the sweep budget runs out.
const RESIDUAL_TOL: f64 = 1e-10;

/// Spectral factorization `A = V diag(values) V^T`, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    n: usize,
    pub values: Vec<f64>,
    /// Row-major `n x n`; column `k` is the eigenvector of `values[k]`.
    vectors: Vec<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Entry `i` of eigenvector `k`.
    pub fn component(&self, i: usize, k: usize) -> f64 {
        self.vectors[i * self.n + k]
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.component(i, k)).collect()
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Rebuilds `sum_k f(lambda_k) v_k v_k^T` over the eigenpairs for which
    /// `f` returns a value.
    pub fn rebuild(&self, f: impl Fn(f64) -> Option<f64>) -> SymmetricMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for (k, &lambda) in self.values.iter().enumerate() {
            let Some(s) = f(lambda) else { continue };
            for i in 0..n {
                let vi = s * self.component(i, k);
                if vi == 0.0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += vi * self.component(j, k);
                }
            }
        }
        SymmetricMatrix::symmetrize(n, data)
    }

    /// Eigenvalue cutoff below which `|lambda|` counts as zero, for a
    /// relative tolerance `rtol`.
    pub fn cutoff(&self, rtol: f64) -> f64 {
        rtol * self.max_abs_value()
    }

    pub fn rank(&self, rtol: f64) -> usize {
        let cut = self.cutoff(rtol);
        self.values.iter().filter(|x| x.abs() > cut).count()
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
pub fn eig_sym(a: &SymmetricMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    let mut m = a.as_slice().to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    jacobi(n, &mut m, Some(&mut v))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let values = order.iter().map(|&k| m[k * n + k]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &k) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + col] = v[i * n + k];
        }
    }
    Ok(EigenDecomposition { n, values, vectors })
}

/// Eigenvalues only, ascending. `m` is a row-major symmetric `n x n`
/// scratch buffer and is destroyed.
pub fn eigenvalues_in_place(n: usize, m: &mut [f64]) -> Result<Vec<f64>> {
    jacobi(n, m, None)?;
    let mut values: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn jacobi(n: usize, a: &mut [f64], mut v: Option<&mut [f64]>) -> Result<()> {
    let total: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += a[p * n + q] * a[p * n + q];
            }
        }
        (2.0 * s).sqrt()
    };
    if !total.is_finite() {
        return Err(Error::NoConvergence {
            sweeps: 0,
            residual: f64::NAN,
        });
    }

    for _ in 0..MAX_SWEEPS {
        if off(a) <= f64::EPSILON * total {
            return Ok(());
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                if let Some(v) = v.as_deref_mut() {
                    for k in 0..n {
                        let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    let residual = off(a);
    if residual <= RESIDUAL_TOL * total.max(f64::MIN_POSITIVE) {
        Ok(())
    } else {
        Err(Error::NoConvergence {
            sweeps: MAX_SWEEPS,
            residual,
        })
    }
}

/// Default relative rank tolerance, `n * 2^-52`.
fn default_rank_rtol(n: usize) -> f64 {
    n.max(1) as f64 * f64::EPSILON
}

/// Moore-Penrose pseudoinverse. Eigenvalues with
/// `|lambda| <= rank_rtol * max|lambda|` are treated as zero; `None` selects
/// `n * 2^-52`.
pub fn pinv(a: &SymmetricMatrix, rank_rtol: Option<f64>) -> Result<SymmetricMatrix> {
    let eig = eig_sym(a)?;
    let cut = eig.cutoff(rank_rtol.unwrap_or_else(|| default_rank_rtol(a.dim())));
    Ok(eig.rebuild(|l| (l.abs() > cut).then(|| 1.0 / l)))
}

/// `(A^+)^{1/2}` for positive semidefinite `A`.
pub fn pinv_sqrt(a: &SymmetricMatrix, rank_rtol: Option<f64>) -> Result<SymmetricMatrix> {
    let eig = eig_sym(a)?;
    let cut = eig.cutoff(rank_rtol.unwrap_or_else(|| default_rank_rtol(a.dim())));
    Ok(eig.rebuild(|l| (l > cut).then(|| 1.0 / l.sqrt())))
}
