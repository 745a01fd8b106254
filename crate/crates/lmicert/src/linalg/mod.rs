//! Symmetric and dense linear algebra over f64 and exact rationals.

mod dense;
pub mod exact;
mod sym;

pub use dense::Matrix;
pub use sym::{hvec_index, hvec_pair, tri, SymF, SymMatrix, SymQ};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("rho undefined for zero matrix")]
    ZeroMatrix,
}

pub fn hvec<T: Clone + num_traits::Zero>(x: &SymMatrix<T>) -> Vec<T> {
    x.hvec()
}

pub fn unhvec<T: Clone + num_traits::Zero>(n: usize, v: &[T]) -> SymMatrix<T> {
    SymMatrix::unhvec(n, v)
}

#[derive(Clone, Debug)]
pub struct SymEigen {
    /// Descending.
    pub values: Vec<f64>,
    /// Column k is the unit eigenvector of `values[k]`.
    pub vectors: Matrix,
}

/// Cyclic Jacobi eigendecomposition.
pub fn sym_eigen(x: &SymF) -> SymEigen {
    let n = x.n();
    let mut a = x.to_dense();
    let mut v = Matrix::identity(n);
    let norm = a.frobenius();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= f64::EPSILON * 1e-3 * norm || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap_or(std::cmp::Ordering::Equal));
    SymEigen {
        values: order.iter().map(|&i| a[(i, i)]).collect(),
        vectors: v.select_cols(&order),
    }
}

pub fn sym_eigenvalues(x: &SymF) -> Vec<f64> {
    sym_eigen(x).values
}

#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    /// Descending, length min(p,q).
    pub s: Vec<f64>,
    pub v: Matrix,
}

/// One-sided Jacobi SVD: A = U·diag(s)·Vᵀ.
pub fn svd(a: &Matrix) -> Svd {
    if a.rows() < a.cols() {
        let t = svd(&a.transpose());
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    let (p, q) = (a.rows(), a.cols());
    let mut u = a.clone();
    let mut v = Matrix::identity(q);
    for _sweep in 0..80 {
        let mut rotated = false;
        for i in 0..q {
            for j in i + 1..q {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for k in 0..p {
                    alpha += u[(k, i)] * u[(k, i)];
                    beta += u[(k, j)] * u[(k, j)];
                    gamma += u[(k, i)] * u[(k, j)];
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..p {
                    let ui = u[(k, i)];
                    let uj = u[(k, j)];
                    u[(k, i)] = c * ui - s * uj;
                    u[(k, j)] = s * ui + c * uj;
                }
                for k in 0..q {
                    let vi = v[(k, i)];
                    let vj = v[(k, j)];
                    v[(k, i)] = c * vi - s * vj;
                    v[(k, j)] = s * vi + c * vj;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..q).map(|j| u.col(j).iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));
    let mut uu = Matrix::zeros(p, q);
    for (c, &j) in order.iter().enumerate() {
        if norms[j] > 0.0 {
            for k in 0..p {
                uu[(k, c)] = u[(k, j)] / norms[j];
            }
        }
    }
    Svd { u: uu, s: order.iter().map(|&j| norms[j]).collect(), v: v.select_cols(&order) }
}

pub fn singular_values(a: &Matrix) -> Vec<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Vec::new();
    }
    svd(a).s
}

/// Minimum-norm least-squares solution of A·x = b, dropping singular
/// values below `rcond`·σ₁.
pub fn lstsq(a: &Matrix, b: &[f64], rcond: f64) -> Vec<f64> {
    let d = svd(a);
    let smax = d.s.first().copied().unwrap_or(0.0);
    let mut x = vec![0.0; a.cols()];
    for (k, &s) in d.s.iter().enumerate() {
        if s <= rcond * smax || s == 0.0 {
            continue;
        }
        let coef: f64 = (0..a.rows()).map(|i| d.u[(i, k)] * b[i]).sum::<f64>() / s;
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += coef * d.v[(j, k)];
        }
    }
    x
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RankRevealResult {
    pub r: usize,
    /// Selected columns in pivot order.
    pub cols: Vec<usize>,
    /// Matching pivot rows.
    pub rows: Vec<usize>,
    /// σ_r(A); +∞ when r = 0.
    pub sigma_r: f64,
    /// σ_{r+1}(A); 0 when r = min(p,q).
    pub sigma_r_plus_1: f64,
    pub c_pq: f64,
}

/// The constant reported alongside every rank-revealing result.
pub fn c_pq(p: usize, q: usize) -> f64 {
    (p.max(1) * q.max(1)) as f64
}

/// Gaussian elimination with complete pivoting, stopped once the largest
/// remaining Schur-complement entry is below `epsilon`. The pivot count is
/// capped by the number of singular values ≥ `epsilon`.
pub fn rank_revealing_columns(a: &Matrix, epsilon: f64) -> RankRevealResult {
    assert!(epsilon > 0.0, "epsilon must be positive");
    let (p, q) = (a.rows(), a.cols());
    let mut s = a.clone();
    let mut rows_left: Vec<usize> = (0..p).collect();
    let mut cols_left: Vec<usize> = (0..q).collect();
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    while !rows_left.is_empty() && !cols_left.is_empty() {
        let mut best = (0, 0, -1.0);
        for (ri, &i) in rows_left.iter().enumerate() {
            for (ci, &j) in cols_left.iter().enumerate() {
                let v = s[(i, j)].abs();
                // ties go to the smaller column, then row
                if v > best.2 {
                    best = (ri, ci, v);
                }
            }
        }
        if best.2 < epsilon {
            break;
        }
        let pi = rows_left.remove(best.0);
        let pj = cols_left.remove(best.1);
        let piv = s[(pi, pj)];
        for &i in &rows_left {
            let f = s[(i, pj)] / piv;
            if f == 0.0 {
                continue;
            }
            for &j in &cols_left {
                s[(i, j)] -= f * s[(pi, j)];
            }
            s[(i, pj)] = 0.0;
        }
        rows.push(pi);
        cols.push(pj);
    }
    let sv = singular_values(a);
    let count = sv.iter().filter(|&&x| x >= epsilon).count();
    let r = cols.len().min(count);
    cols.truncate(r);
    rows.truncate(r);
    RankRevealResult {
        r,
        cols,
        rows,
        sigma_r: if r == 0 { f64::INFINITY } else { sv[r - 1] },
        sigma_r_plus_1: sv.get(r).copied().unwrap_or(0.0),
        c_pq: c_pq(p, q),
    }
}

/// Smallest nonzero singular value, with the numerical rank decided at `epsilon`.
pub fn rho(a: &Matrix, epsilon: f64) -> Result<f64, LinalgError> {
    let rr = rank_revealing_columns(a, epsilon);
    if rr.r == 0 {
        return Err(LinalgError::ZeroMatrix);
    }
    Ok(rr.sigma_r)
}

/// Eigenvector clipping onto the PSD cone.
pub fn project_psd(x: &SymF) -> SymF {
    let e = sym_eigen(x);
    let n = x.n();
    SymF::from_fn(n, |i, j| {
        (0..n)
            .filter(|&k| e.values[k] > 0.0)
            .map(|k| e.values[k] * e.vectors[(i, k)] * e.vectors[(j, k)])
            .sum()
    })
}
