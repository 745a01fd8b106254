//! Approximate maximum-rank feasible point: Dykstra alternating projections
//! from random starts, a Gauss–Newton polish on X = GGᵀ, and averaging.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::linalg::{self, exact, hvec_pair, lstsq, project_psd, sym_eigen, tri, Matrix, SymF};
use crate::rational::{self, Q};
use crate::sdp::SdpInstance;

#[derive(Debug, Error, PartialEq)]
pub enum FrontendError {
    #[error("frontend did not converge (best residual {best_residual:e})")]
    NoConvergence { best_residual: f64 },
    #[error("inconsistent constraint system: b is not in the range of the map")]
    Inconsistent,
}

#[derive(Clone, Debug)]
pub struct FrontendOpts {
    pub tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Rank threshold ε₁; `None` means √tol.
    pub eps1: Option<f64>,
}

impl Default for FrontendOpts {
    fn default() -> Self {
        FrontendOpts { tol: 1e-9, max_iter: 50_000, restarts: 8, seed: 1, eps1: None }
    }
}

impl FrontendOpts {
    pub fn eps1(&self) -> f64 {
        self.eps1.unwrap_or_else(|| self.tol.sqrt())
    }
}

#[derive(Clone, Debug)]
pub struct FrontendResult {
    pub x_tilde: SymF,
    pub residual: f64,
    pub min_eig: f64,
    pub detected_rank: usize,
    pub iterations: usize,
    pub restarts_used: usize,
}

impl FrontendResult {
    fn new(inst: &SdpInstance, x: SymF, eps1: f64, iterations: usize, restarts_used: usize) -> Self {
        let residual = inst.residual_f64(&x);
        let min_eig = *linalg::sym_eigenvalues(&x).last().unwrap();
        let detected_rank = linalg::rank_revealing_columns(&x.to_dense(), eps1).r;
        FrontendResult { x_tilde: x, residual, min_eig, detected_rank, iterations, restarts_used }
    }

    /// Recompute residual and minimum eigenvalue from `x_tilde`.
    pub fn is_consistent(&self, inst: &SdpInstance) -> bool {
        let r = inst.residual_f64(&self.x_tilde);
        let l = *linalg::sym_eigenvalues(&self.x_tilde).last().unwrap();
        let scale = 1.0 + self.x_tilde.frobenius();
        (r - self.residual).abs() <= 1e-14 * scale && (l - self.min_eig).abs() <= 1e-14 * scale
    }
}

/// Frobenius-orthogonal projector onto {X : 𝒜(X) = b}, in hvec coordinates.
pub struct AffineProjector {
    n: usize,
    /// Rows gᵢ with 𝒜(X)ᵢ = gᵢ·hvec(X).
    g: Matrix,
    /// Off-diagonal weight 2, diagonal weight 1.
    w: Vec<f64>,
    gram: Matrix,
    b: Vec<f64>,
}

impl AffineProjector {
    pub fn new(inst: &SdpInstance) -> Result<Self, FrontendError> {
        let n = inst.n;
        let k = tri(n);
        let w: Vec<f64> = (0..k).map(|p| if hvec_pair(n, p).0 == hvec_pair(n, p).1 { 1.0 } else { 2.0 }).collect();
        // exact consistency check
        let gq: Vec<Vec<Q>> = inst
            .a
            .iter()
            .map(|a| {
                a.hvec_ref()
                    .iter()
                    .enumerate()
                    .map(|(p, v)| if w[p] == 2.0 { v * rational::q(2) } else { v.clone() })
                    .collect()
            })
            .collect();
        if exact::solve_affine(&gq, &inst.b, k).is_none() {
            return Err(FrontendError::Inconsistent);
        }
        let g = Matrix::from_fn(inst.m(), k, |i, j| rational::to_f64(&gq[i][j]));
        let gram = Matrix::from_fn(inst.m(), inst.m(), |i, j| {
            (0..k).map(|p| g[(i, p)] * g[(j, p)] / w[p]).sum()
        });
        Ok(AffineProjector { n, g, w, gram, b: inst.b_f64() })
    }

    pub fn project(&self, x: &SymF) -> SymF {
        let h = x.hvec();
        let r: Vec<f64> = self.g.mul_vec(&h).iter().zip(&self.b).map(|(a, b)| a - b).collect();
        let lam = lstsq(&self.gram, &r, 1e-13);
        let mut out = h;
        for (p, o) in out.iter_mut().enumerate() {
            let corr: f64 = (0..self.g.rows()).map(|i| self.g[(i, p)] * lam[i]).sum();
            *o -= corr / self.w[p];
        }
        SymF::unhvec(self.n, &out)
    }
}

pub fn project_affine(inst: &SdpInstance, x: &SymF) -> Result<SymF, FrontendError> {
    Ok(AffineProjector::new(inst)?.project(x))
}

pub use crate::linalg::project_psd as psd_projection;

/// Solve 𝒜(GGᵀ) = b for G ∈ ℝ^{n×r} by damped Gauss–Newton with
/// minimum-norm steps, starting from the rank-r truncation of `x`.
pub fn polish(inst: &SdpInstance, x: &SymF, r: usize, iters: usize) -> Option<SymF> {
    let n = inst.n;
    let b = inst.b_f64();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let target = 1e-14 * (1.0 + bnorm);
    if r == 0 {
        return (bnorm == 0.0).then(|| SymF::zeros(n));
    }
    let a: Vec<Matrix> = inst.a.iter().map(|a| a.to_f64().to_dense()).collect();
    let e = sym_eigen(x);
    let mut g = Matrix::from_fn(n, r, |i, k| e.vectors[(i, k)] * e.values[k].max(0.0).sqrt());
    let gram = |g: &Matrix| SymF::from_dense(&g.mul(&g.transpose()));
    let res = |g: &Matrix| -> Vec<f64> {
        let x = gram(g);
        inst.apply_map_f64(&x).unwrap().iter().zip(&b).map(|(v, bb)| v - bb).collect()
    };
    let norm = |v: &[f64]| v.iter().map(|t| t * t).sum::<f64>().sqrt();
    let mut rv = res(&g);
    let mut rn = norm(&rv);
    for _ in 0..iters {
        if rn <= target {
            break;
        }
        let jac = Matrix::from_fn(a.len(), n * r, |i, c| {
            let (row, col) = (c / r, c % r);
            2.0 * (0..n).map(|t| a[i][(row, t)] * g[(t, col)]).sum::<f64>()
        });
        let step = lstsq(&jac, &rv, 1e-12);
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let cand = Matrix::from_fn(n, r, |i, k| g[(i, k)] - t * step[i * r + k]);
            let cv = res(&cand);
            let cn = norm(&cv);
            if cn < rn {
                g = cand;
                rv = cv;
                rn = cn;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (rn <= 1e-12 * (1.0 + bnorm)).then(|| gram(&g))
}

/// Rank suggested by the largest relative gap in the spectrum of a PSD matrix.
fn gap_rank(x: &SymF) -> usize {
    let vals = linalg::sym_eigenvalues(x);
    let top = vals[0].max(0.0);
    let floor = 1e-13 * top.max(1.0);
    if top <= floor {
        return 0;
    }
    let clipped: Vec<f64> = vals.iter().map(|v| v.max(floor)).collect();
    let mut best = (0, 0.0);
    for i in 0..clipped.len() {
        let next = clipped.get(i + 1).copied().unwrap_or(floor);
        let gap = (clipped[i] / next).ln();
        if gap > best.1 {
            best = (i + 1, gap);
        }
    }
    best.0
}

fn polish_ladder(inst: &SdpInstance, x: &SymF) -> Option<SymF> {
    let n = inst.n;
    let r0 = gap_rank(x);
    let order = (r0..=n).chain((0..r0).rev());
    for r in order {
        if let Some(p) = polish(inst, x, r, 200) {
            return Some(p);
        }
    }
    None
}

const CHECKPOINTS: [usize; 6] = [50, 200, 1000, 5000, 20_000, 50_000];

pub fn find_feasible_point(inst: &SdpInstance, opts: &FrontendOpts) -> Result<FrontendResult, FrontendError> {
    let proj = AffineProjector::new(inst)?;
    let n = inst.n;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let scale = 1.0 + inst.b_f64().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut converged: Vec<SymF> = Vec::new();
    let mut iterations = 0;
    let mut best_residual = f64::INFINITY;
    let mut from_identity = None;
    for restart in 0..opts.restarts.max(1) {
        let start = if restart == 0 {
            SymF::identity(n)
        } else {
            let bm = Matrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
            SymF::from_dense(&bm.mul(&bm.transpose()).scale(1.0 / n as f64).add(&Matrix::identity(n))).scale(scale)
        };
        let mut x = start;
        let mut p = SymF::zeros(n);
        let mut q = SymF::zeros(n);
        let mut found = None;
        for it in 1..=opts.max_iter {
            let y = proj.project(&x.add(&p));
            p = x.add(&p).sub(&y);
            let xn = project_psd(&y.add(&q));
            q = y.add(&q).sub(&xn);
            x = xn;
            iterations += 1;
            let res = inst.residual_f64(&x);
            best_residual = best_residual.min(res);
            if CHECKPOINTS.contains(&it) || it == opts.max_iter {
                if let Some(pol) = polish_ladder(inst, &x) {
                    best_residual = best_residual.min(inst.residual_f64(&pol));
                    found = Some(pol);
                    break;
                }
            }
            if res <= opts.tol * 1e-3 {
                let pol = polish_ladder(inst, &x).unwrap_or(x.clone());
                found = Some(pol);
                break;
            }
        }
        if let Some(f) = found {
            if restart == 0 {
                from_identity = Some(f.clone());
            }
            converged.push(f);
        }
    }
    if converged.is_empty() {
        return Err(FrontendError::NoConvergence { best_residual });
    }
    let count = converged.len();
    let mut avg = SymF::zeros(n);
    for c in &converged {
        avg = avg.add(c);
    }
    let avg = proj.project(&avg.scale(1.0 / count as f64));
    let mut result = FrontendResult::new(inst, avg, opts.eps1(), iterations, opts.restarts.max(1));
    // the projection of I is kept when averaging gains no rank
    if let Some(x0) = from_identity {
        let r0 = FrontendResult::new(inst, x0, opts.eps1(), iterations, opts.restarts.max(1));
        if r0.detected_rank == result.detected_rank && r0.residual <= opts.tol && r0.min_eig >= -opts.tol {
            result = r0;
        }
    }
    if result.residual > opts.tol || result.min_eig < -opts.tol {
        return Err(FrontendError::NoConvergence { best_residual: result.residual });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::{corpus_entry, parse_instance};

    #[test]
    fn affine_projection_examples() {
        let one = parse_instance("n 1\nm 1\nb 1\nA 1 1 1 1\n").unwrap();
        let p = project_affine(&one, &SymF::zeros(1)).unwrap();
        assert!((p.get(0, 0) - 1.0).abs() < 1e-15);
        let dru = corpus_entry("DruWo2017-2.3.2P").unwrap().instance;
        let p = project_affine(&dru, &SymF::zeros(3)).unwrap();
        // least-norm point: ⟨A₂,X⟩ = 1 with X ∥ A₂, ‖A₂‖² = 3
        assert!((p.get(1, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((p.get(2, 0) - 1.0 / 3.0).abs() < 1e-15);
        assert!(p.get(2, 2).abs() < 1e-15);
        let again = project_affine(&dru, &p).unwrap();
        assert!(again.sub(&p).frobenius() < 1e-15);
        let bad = parse_instance("n 1\nm 2\nb 1 2\nA 1 1 1 1\nA 2 1 1 1\n").unwrap();
        assert!(matches!(project_affine(&bad, &SymF::zeros(1)), Err(FrontendError::Inconsistent)));
    }

    #[test]
    fn trivial_instance_is_exact() {
        let one = parse_instance("n 1\nm 1\nb 1\nA 1 1 1 1\n").unwrap();
        let r = find_feasible_point(&one, &FrontendOpts::default()).unwrap();
        assert_eq!(*r.x_tilde.get(0, 0), 1.0);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn druwo_and_deklerk_ranks() {
        let dru = corpus_entry("DruWo2017-2.3.2P").unwrap().instance;
        let r = find_feasible_point(&dru, &FrontendOpts::default()).unwrap();
        assert!(r.residual <= 1e-9 && r.min_eig >= -1e-9);
        assert_eq!(r.detected_rank, 2);
        assert!(r.is_consistent(&dru));
        let dk = corpus_entry("deKlerk2002-2.1P").unwrap().instance;
        assert_eq!(find_feasible_point(&dk, &FrontendOpts::default()).unwrap().detected_rank, 1);
    }
}
