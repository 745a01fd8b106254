//! Floating-point refinement and Lagrange multipliers.

use thiserror::Error;

use crate::linalg::{self, Matrix};
use crate::poly::{jacobian, jacobian_f64, MultiPoly, PolySystem};
use crate::rational::{self, Q};

#[derive(Debug, Error, PartialEq)]
pub enum NewtonError {
    #[error("system is not square ({polys} polynomials, {vars} variables)")]
    NotSquare { polys: usize, vars: usize },
    #[error("no multiplier with z·u = 1 at this point (residual {0:e}); re-draw u")]
    RedrawU(f64),
}

#[derive(Clone, Debug)]
pub struct NewtonResult {
    pub x: Vec<f64>,
    pub residual: f64,
    pub steps: Vec<f64>,
    pub singular: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Plain Newton on a square system; reports, never claims, convergence.
pub fn newton_refine(f: &PolySystem, x0: &[f64], iters: usize) -> Result<NewtonResult, NewtonError> {
    if !f.is_square() {
        return Err(NewtonError::NotSquare { polys: f.len(), vars: f.nvars() });
    }
    let jac = jacobian(f);
    let mut x = x0.to_vec();
    let mut steps = Vec::new();
    let mut singular = false;
    for _ in 0..iters {
        let fx = f.eval_f64(&x).unwrap();
        if norm(&fx) == 0.0 {
            break;
        }
        let j = jacobian_f64(&jac, &x);
        let rhs: Vec<f64> = fx.iter().map(|v| -v).collect();
        let Some(dx) = j.solve(&rhs, 1e-14) else {
            singular = true;
            break;
        };
        let s = norm(&dx);
        for (a, d) in x.iter_mut().zip(&dx) {
            *a += d;
        }
        steps.push(s);
        if s <= 1e-16 * (1.0 + norm(&x)) {
            break;
        }
    }
    let residual = norm(&f.eval_f64(&x).unwrap());
    Ok(NewtonResult { x, residual, steps, singular })
}

/// Gauss–Newton with minimum-norm steps and backtracking; works on
/// non-square and singular systems.
pub fn gauss_newton(f: &PolySystem, x0: &[f64], iters: usize) -> NewtonResult {
    let jac = jacobian(f);
    let mut x = x0.to_vec();
    let mut r = norm(&f.eval_f64(&x).unwrap());
    let mut steps = Vec::new();
    for _ in 0..iters {
        if r == 0.0 {
            break;
        }
        let fx = f.eval_f64(&x).unwrap();
        let j = jacobian_f64(&jac, &x);
        let rhs: Vec<f64> = fx.iter().map(|v| -v).collect();
        let dx = linalg::lstsq(&j, &rhs, 1e-13);
        let mut t = 1.0;
        let mut improved = false;
        while t > 1e-6 {
            let cand: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + t * d).collect();
            let rc = norm(&f.eval_f64(&cand).unwrap());
            if rc < r {
                steps.push(t * norm(&dx));
                x = cand;
                r = rc;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    NewtonResult { x, residual: r, steps, singular: false }
}

/// [∇φ; J(f)] at x, shape (c+1) × N.
pub fn phi_jacobian(f: &PolySystem, phi: &MultiPoly, x: &[f64]) -> Matrix {
    let n = f.nvars();
    let jac = jacobian(f);
    let jf = jacobian_f64(&jac, x);
    Matrix::from_fn(f.len() + 1, n, |i, j| {
        if i == 0 {
            phi.derivative(j).eval_f64(x).unwrap()
        } else {
            jf[(i - 1, j)]
        }
    })
}

/// Least-squares z with zᵀ[∇φ; J(f)] = 0 and zᵀu = 1 at x.
pub fn initial_z(f: &PolySystem, phi: &MultiPoly, u: &[Q], x: &[f64]) -> Result<(Vec<f64>, f64), NewtonError> {
    let a = phi_jacobian(f, phi, x);
    let (rows, n) = (a.rows(), a.cols());
    let scale = 1.0 + a.max_abs();
    // unknown z (rows); equations: Aᵀz = 0 (n rows) and uᵀz = 1
    let m = Matrix::from_fn(n + 1, rows, |i, k| if i < n { a[(k, i)] / scale } else { rational::to_f64(&u[k]) });
    let mut rhs = vec![0.0; n + 1];
    rhs[n] = 1.0;
    let z = linalg::lstsq(&m, &rhs, 1e-12);
    let res: Vec<f64> = m.mul_vec(&z).iter().zip(&rhs).map(|(a, b)| a - b).collect();
    let residual = norm(&res);
    if residual > 1e-6 {
        return Err(NewtonError::RedrawU(residual));
    }
    Ok((z, residual))
}
