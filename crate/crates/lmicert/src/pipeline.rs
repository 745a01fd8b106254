//! Chart selection, the linearized system Q(Y)·hvec(X) = q, fixed-variable
//! selection and the final polynomial system.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::{self, exact, hvec_index, hvec_pair, tri, Matrix, RankRevealResult, SymF, SymQ};
use crate::poly::{Label, MultiPoly, PolySystem};
use crate::rational::{self, Q};
use crate::sdp::SdpInstance;

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error("terminate with failure: S is singular to working precision")]
    SingularS,
    #[error("fixed system is inconsistent: map constraint {0} reduces to a nonzero constant")]
    Inconsistent(usize),
    #[error("precondition fails: phi(delta) <= delta")]
    PhiTooSmall,
    #[error("rho undefined for zero matrix")]
    ZeroMatrix,
}

pub fn x_var_name(n: usize, p: usize) -> String {
    let (i, j) = hvec_pair(n, p);
    if n < 10 {
        format!("x{}{}", j + 1, i + 1)
    } else {
        format!("x{}_{}", j + 1, i + 1)
    }
}

/// Name of the kernel entry in original row `row` (0-based) and column `l`.
pub fn y_var_name(n: usize, row: usize, l: usize, ncols: usize) -> String {
    if ncols == 1 {
        format!("y{}", row + 1)
    } else if n < 10 {
        format!("y{}{}", row + 1, l + 1)
    } else {
        format!("y{}_{}", row + 1, l + 1)
    }
}

#[derive(Clone, Debug)]
pub struct ChartSelection {
    pub n: usize,
    /// ι, sorted, 0-based.
    pub iota: Vec<usize>,
    pub r: usize,
    /// Complement of ι, sorted.
    pub complement: Vec<usize>,
    /// perm[k] is the original index placed at position k (ι first).
    pub perm: Vec<usize>,
    /// r × (n−r).
    pub y_tilde: Matrix,
    /// ‖X̃·K(Ỹ)‖_F.
    pub kernel_residual: f64,
}

impl ChartSelection {
    pub fn from_iota(n: usize, iota: &[usize], y: Matrix) -> Self {
        let mut iota = iota.to_vec();
        iota.sort_unstable();
        let complement: Vec<usize> = (0..n).filter(|i| !iota.contains(i)).collect();
        let perm = iota.iter().chain(&complement).copied().collect();
        ChartSelection { n, r: iota.len(), iota, complement, perm, y_tilde: y, kernel_residual: 0.0 }
    }

    pub fn ncols(&self) -> usize {
        self.n - self.r
    }

    pub fn ny(&self) -> usize {
        self.r * self.ncols()
    }

    /// Position of original index `i` in the permuted order (0-based).
    pub fn position(&self, i: usize) -> usize {
        self.perm.iter().position(|&p| p == i).unwrap()
    }

    /// Kernel-equation positions (original row, column), 1-based, omitted
    /// because the permuted position satisfies i − j > r.
    pub fn dropped_rows(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for l in 0..self.ncols() {
                if self.position(i) + 1 > self.r + l + 1 {
                    out.push((i + 1, l + 1));
                }
            }
        }
        out
    }

    pub fn y_names(&self) -> Vec<String> {
        let mut v = Vec::new();
        for &a in &self.iota {
            for l in 0..self.ncols() {
                v.push(y_var_name(self.n, a, l, self.ncols()));
            }
        }
        v
    }

    pub fn y_flat(&self) -> Vec<f64> {
        (0..self.r).flat_map(|a| (0..self.ncols()).map(move |l| (a, l))).map(|(a, l)| self.y_tilde[(a, l)]).collect()
    }

    /// K(Y) (n × (n−r)) with rows ι holding Y and rows ῑ the identity.
    pub fn kernel_matrix(&self, y: &Matrix) -> Matrix {
        let mut k = Matrix::zeros(self.n, self.ncols());
        for (a, &i) in self.iota.iter().enumerate() {
            for l in 0..self.ncols() {
                k[(i, l)] = y[(a, l)];
            }
        }
        for (l, &c) in self.complement.iter().enumerate() {
            k[(c, l)] = 1.0;
        }
        k
    }
}

/// ι from the rank-revealing columns of X̃, then Ỹ = −S̃⁻¹R̃ᵀ.
pub fn select_chart(x: &SymF, eps1: f64) -> Result<ChartSelection, PipelineError> {
    let n = x.n();
    let rr = linalg::rank_revealing_columns(&x.to_dense(), eps1);
    let chart = ChartSelection::from_iota(n, &rr.cols, Matrix::zeros(rr.r, n - rr.r));
    let d = x.to_dense();
    let s = d.select(&chart.iota, &chart.iota);
    let rt = d.select(&chart.iota, &chart.complement);
    let mut y = Matrix::zeros(chart.r, chart.ncols());
    for l in 0..chart.ncols() {
        let rhs: Vec<f64> = rt.col(l).iter().map(|v| -v).collect();
        let col = s.solve(&rhs, 1e-14).ok_or(PipelineError::SingularS)?;
        for a in 0..chart.r {
            y[(a, l)] = col[a];
        }
    }
    let kernel_residual = d.mul(&chart.kernel_matrix(&y)).frobenius();
    Ok(ChartSelection { y_tilde: y, kernel_residual, ..chart })
}

/// Exact kernel block Y = −S⁻¹Rᵀ of a rational X for a given ι.
pub fn kernel_block_exact(x: &SymQ, iota: &[usize]) -> Option<Vec<Vec<Q>>> {
    let n = x.n();
    let comp: Vec<usize> = (0..n).filter(|i| !iota.contains(i)).collect();
    let s: Vec<Vec<Q>> = iota.iter().map(|&a| iota.iter().map(|&b| x.get(a, b).clone()).collect()).collect();
    let rt: Vec<Vec<Q>> = iota.iter().map(|&a| comp.iter().map(|&c| -x.get(a, c)).collect()).collect();
    if iota.is_empty() {
        return Some(Vec::new());
    }
    let inv = exact::inverse(&s)?;
    Some(exact::mat_mul(&inv, &rt))
}

/// Polynomials 𝒜(X) − b over the given variable count (X first).
pub fn map_polys(inst: &SdpInstance, nvars: usize) -> Vec<MultiPoly> {
    let n = inst.n;
    inst.a
        .iter()
        .zip(&inst.b)
        .map(|(a, b)| {
            let mut p = MultiPoly::constant(nvars, -b.clone());
            for pos in 0..tri(n) {
                let (i, j) = hvec_pair(n, pos);
                let v = a.get(i, j);
                if v.is_zero() {
                    continue;
                }
                let c = if i == j { v.clone() } else { v * rational::q(2) };
                p = p.add(&MultiPoly::var(nvars, pos).scale(&c));
            }
            p
        })
        .collect()
}

/// Kernel polynomials (X·K(Y))_{i,l} with the omitted positions removed.
/// Y variables start at index `tri(n)`.
pub fn kernel_polys(chart: &ChartSelection, nvars: usize) -> Vec<(MultiPoly, Label)> {
    kernel_entries(chart, nvars, false)
}

/// All n·(n−r) entries of X·K(Y), or only the kept ones.
pub fn kernel_entries(chart: &ChartSelection, nvars: usize, all: bool) -> Vec<(MultiPoly, Label)> {
    let n = chart.n;
    let k = tri(n);
    let ncols = chart.ncols();
    let dropped = chart.dropped_rows();
    let mut out = Vec::new();
    for l in 0..ncols {
        for i in 0..n {
            if !all && dropped.contains(&(i + 1, l + 1)) {
                continue;
            }
            let mut p = MultiPoly::var(nvars, hvec_index(n, i, chart.complement[l]));
            for (a, &ia) in chart.iota.iter().enumerate() {
                let xv = MultiPoly::var(nvars, hvec_index(n, i, ia));
                let yv = MultiPoly::var(nvars, k + a * ncols + l);
                p = p.add(&xv.mul(&yv));
            }
            out.push((p, Label::KernelEntry(i + 1, l + 1)));
        }
    }
    out
}

/// The linearized system in variables (hvec(X), Y).
#[derive(Clone, Debug)]
pub struct Linearized {
    pub system: PolySystem,
    pub k: usize,
    pub ny: usize,
    pub dropped: Vec<(usize, usize)>,
}

impl Linearized {
    pub fn p(&self) -> usize {
        self.system.len()
    }

    /// Q(Y) evaluated at a flattened Y.
    pub fn q_matrix(&self, y: &[f64]) -> Matrix {
        let mut point = vec![0.0; self.k];
        point.extend_from_slice(y);
        Matrix::from_fn(self.p(), self.k, |i, j| {
            self.system.polys[i].derivative(j).eval_f64(&point).unwrap()
        })
    }

    pub fn q_matrix_exact(&self, y: &[Q]) -> Vec<Vec<Q>> {
        let mut point = vec![Q::zero(); self.k];
        point.extend_from_slice(y);
        (0..self.p())
            .map(|i| (0..self.k).map(|j| self.system.polys[i].derivative(j).eval_q(&point).unwrap()).collect())
            .collect()
    }

    /// Right-hand side q.
    pub fn q_vector(&self) -> Vec<Q> {
        self.system.polys.iter().map(|p| -p.constant_term()).collect()
    }

    /// Largest singular value of the matricization of the linear map Y ↦ Q(Y) − Q(0).
    pub fn q_operator_norm(&self) -> f64 {
        if self.ny == 0 {
            return 0.0;
        }
        let q0 = self.q_matrix(&vec![0.0; self.ny]);
        let cols: Vec<Vec<f64>> = (0..self.ny)
            .map(|t| {
                let mut e = vec![0.0; self.ny];
                e[t] = 1.0;
                self.q_matrix(&e).sub(&q0).data().to_vec()
            })
            .collect();
        let m = Matrix::from_fn(cols[0].len(), self.ny, |i, j| cols[j][i]);
        m.norm2()
    }
}

pub fn variable_names(chart: &ChartSelection) -> Vec<String> {
    let mut v: Vec<String> = (0..tri(chart.n)).map(|p| x_var_name(chart.n, p)).collect();
    v.extend(chart.y_names());
    v
}

/// Map and kept kernel polynomials over (hvec(X), Y).
pub fn build_linearized(inst: &SdpInstance, chart: &ChartSelection) -> Linearized {
    let vars = variable_names(chart);
    let nv = vars.len();
    let mut sys = PolySystem::new(vars);
    for (i, p) in map_polys(inst, nv).into_iter().enumerate() {
        sys.push(p, Label::MapConstraint(i));
    }
    for (p, l) in kernel_polys(chart, nv) {
        sys.push(p, l);
    }
    Linearized { system: sys, k: tri(inst.n), ny: chart.ny(), dropped: chart.dropped_rows() }
}

#[derive(Clone, Debug)]
pub struct FixedSkeleton {
    pub j: Vec<usize>,
    pub j_prime: Vec<usize>,
    pub fixed_values: Vec<Q>,
    pub rank_reveal: RankRevealResult,
}

pub const DEFAULT_MAX_DEN: u64 = 1_000_000;

/// J from the rank-revealing columns of Q(Ỹ), J′ its complement,
/// fixed values by bounded continued fractions of X̃.
pub fn select_fixed_vars(qtilde: &Matrix, eps2: f64, x_tilde: &SymF, max_den: u64) -> FixedSkeleton {
    let rr = linalg::rank_revealing_columns(qtilde, eps2);
    let mut j = rr.cols.clone();
    j.sort_unstable();
    let j_prime: Vec<usize> = (0..qtilde.cols()).filter(|c| !j.contains(c)).collect();
    let h = x_tilde.hvec();
    let fixed_values = j_prime.iter().map(|&p| rational::rationalize_bounded(h[p], max_den)).collect();
    FixedSkeleton { j, j_prime, fixed_values, rank_reveal: rr }
}

#[derive(Clone, Debug)]
pub struct FixedSystem {
    pub chart: ChartSelection,
    /// Map, kernel and fixing polynomials before substitution, over (hvec(X), Y).
    pub full: PolySystem,
    /// After substituting fixed values and eliminating via map constraints.
    pub system: PolySystem,
    pub j: Vec<usize>,
    pub j_prime: Vec<usize>,
    pub fixed_values: Vec<Q>,
    pub dropped_rows: Vec<(usize, usize)>,
    /// Every hvec entry of X as a polynomial (affine) in the reduced variables.
    pub x_expr: Vec<MultiPoly>,
    /// Reduced-variable index of each Y entry.
    pub y_index: Vec<usize>,
}

impl FixedSystem {
    pub fn n(&self) -> usize {
        self.chart.n
    }

    pub fn x_q(&self, point: &[Q]) -> SymQ {
        let v: Vec<Q> = self.x_expr.iter().map(|e| e.eval_q(point).unwrap()).collect();
        SymQ::unhvec(self.n(), &v)
    }

    pub fn x_f64(&self, point: &[f64]) -> SymF {
        let v: Vec<f64> = self.x_expr.iter().map(|e| e.eval_f64(point).unwrap()).collect();
        SymF::unhvec(self.n(), &v)
    }

    /// Full (hvec(X), Y) point from a reduced point.
    pub fn lift_q(&self, point: &[Q]) -> Vec<Q> {
        let mut v: Vec<Q> = self.x_expr.iter().map(|e| e.eval_q(point).unwrap()).collect();
        v.extend(self.y_index.iter().map(|&i| point[i].clone()));
        v
    }

    /// Reduced point from a full (hvec(X), Y) point.
    pub fn restrict_f64(&self, full: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.system.nvars()];
        for (name, v) in self.full.vars.iter().zip(full) {
            if let Some(i) = self.system.var_index(name) {
                out[i] = *v;
            }
        }
        out
    }
}

/// Substitute fixed values, then eliminate one X variable per map constraint.
pub fn build_fixed_system(
    inst: &SdpInstance,
    chart: &ChartSelection,
    skel: &FixedSkeleton,
) -> Result<FixedSystem, PipelineError> {
    let lin = build_linearized(inst, chart);
    let k = lin.k;
    let nv = lin.system.nvars();
    let mut full = lin.system.clone();
    for (&v, c) in skel.j_prime.iter().zip(&skel.fixed_values) {
        let p = MultiPoly::var(nv, v).sub(&MultiPoly::constant(nv, c.clone()));
        full.push(p, Label::FixedVar(v));
    }
    // substitution over the full variable set, tracking each X entry
    let mut x_expr: Vec<MultiPoly> = (0..k).map(|p| MultiPoly::var(nv, p)).collect();
    let mut polys: Vec<(MultiPoly, Label)> =
        lin.system.polys.iter().cloned().zip(lin.system.labels.iter().cloned()).collect();
    let mut gone = vec![false; nv];
    let apply = |v: usize, by: &MultiPoly, polys: &mut Vec<(MultiPoly, Label)>, x_expr: &mut Vec<MultiPoly>| {
        for (p, _) in polys.iter_mut() {
            if p.uses_var(v) {
                *p = p.substitute(v, by);
            }
        }
        for e in x_expr.iter_mut() {
            if e.uses_var(v) {
                *e = e.substitute(v, by);
            }
        }
    };
    for (&v, c) in skel.j_prime.iter().zip(&skel.fixed_values) {
        apply(v, &MultiPoly::constant(nv, c.clone()), &mut polys, &mut x_expr);
        gone[v] = true;
    }
    let mut idx = 0;
    while idx < polys.len() {
        let Label::MapConstraint(ci) = polys[idx].1 else {
            idx += 1;
            continue;
        };
        let p = polys[idx].0.clone();
        if p.is_zero() {
            polys.remove(idx);
            continue;
        }
        let Some(v) = (0..k).find(|&v| p.uses_var(v)) else {
            return Err(PipelineError::Inconsistent(ci));
        };
        let mut e = vec![0; nv];
        e[v] = 1;
        let coef = p.coeff(&e);
        let by = MultiPoly::var(nv, v).sub(&p.scale(&coef.recip()));
        polys.remove(idx);
        apply(v, &by, &mut polys, &mut x_expr);
        gone[v] = true;
    }
    polys.retain(|(p, _)| !p.is_zero());
    let keep: Vec<usize> = (0..nv).filter(|&v| !gone[v]).collect();
    let mut map = vec![None; nv];
    for (new, &old) in keep.iter().enumerate() {
        map[old] = Some(new);
    }
    let vars: Vec<String> = keep.iter().map(|&v| full.vars[v].clone()).collect();
    let nr = vars.len();
    let mut system = PolySystem::new(vars);
    for (p, l) in polys {
        system.push(p.remap(nr, &map), l);
    }
    let x_expr = x_expr.iter().map(|e| e.remap(nr, &map)).collect();
    let y_index = (k..nv).map(|v| map[v].expect("Y variables are never eliminated")).collect();
    Ok(FixedSystem {
        chart: chart.clone(),
        full,
        system,
        j: skel.j.clone(),
        j_prime: skel.j_prime.clone(),
        fixed_values: skel.fixed_values.clone(),
        dropped_rows: chart.dropped_rows(),
        x_expr,
        y_index,
    })
}

/// Chart, fixed variables and reduced system from an approximate solution.
pub fn run_pipeline(
    inst: &SdpInstance,
    x_tilde: &SymF,
    eps1: f64,
    eps2: f64,
    max_den: u64,
) -> Result<FixedSystem, PipelineError> {
    let chart = select_chart(x_tilde, eps1)?;
    let lin = build_linearized(inst, &chart);
    let qt = lin.q_matrix(&chart.y_flat());
    let skel = select_fixed_vars(&qt, eps2, x_tilde, max_den);
    build_fixed_system(inst, &chart, &skel)
}

#[derive(Clone, Debug)]
pub struct Diagnostics {
    pub rho_star: f64,
    pub c_nn: f64,
    pub c_pq: f64,
    pub phi_delta: f64,
    pub q_norm: f64,
    pub rho_q: f64,
    pub psi_delta: f64,
    pub windows_ok: bool,
}

pub fn phi(delta: f64, rho_star: f64, c_nn: f64, n: usize, x_norm: f64) -> f64 {
    ((rho_star - delta) / c_nn - delta).powi(2) / (n as f64 * x_norm) - delta
}

pub fn psi(delta: f64, phi_delta: f64, q_norm: f64, x_norm: f64) -> f64 {
    q_norm * (x_norm / (phi_delta - delta) + 1.0) * delta / phi_delta
}

/// Window checks for ε₁, ε₂ given X* (or a proxy) and a perturbation size δ.
pub fn tolerance_diagnostics(
    inst: &SdpInstance,
    x_star: &SymF,
    delta: f64,
    eps1: f64,
    eps2: f64,
) -> Result<Diagnostics, PipelineError> {
    let n = x_star.n();
    let d = x_star.to_dense();
    let rho_star = linalg::rho(&d, eps1).map_err(|_| PipelineError::ZeroMatrix)?;
    let c_nn = linalg::c_pq(n, n);
    let x_norm = d.norm2();
    let phi_delta = phi(delta, rho_star, c_nn, n, x_norm);
    if phi_delta <= delta {
        return Err(PipelineError::PhiTooSmall);
    }
    let chart = select_chart(x_star, eps1)?;
    let lin = build_linearized(inst, &chart);
    let q_norm = lin.q_operator_norm();
    let qs = lin.q_matrix(&chart.y_flat());
    let c_pq = linalg::c_pq(qs.rows(), qs.cols());
    let rho_q = linalg::rho(&qs, eps2).unwrap_or(0.0);
    let psi_delta = psi(delta, phi_delta, q_norm, x_norm);
    let windows_ok = delta < eps1
        && eps1 < (rho_star - delta) / c_nn
        && psi_delta < eps2
        && eps2 < (rho_q - psi_delta) / c_pq;
    Ok(Diagnostics { rho_star, c_nn, c_pq, phi_delta, q_norm, rho_q, psi_delta, windows_ok })
}

/// Lift a rational point to exact hvec(X) for seeding fixed values.
pub fn skeleton_from_exact(j: &[usize], j_prime: &[usize], x: &SymQ) -> FixedSkeleton {
    let h = x.hvec();
    FixedSkeleton {
        j: j.to_vec(),
        j_prime: j_prime.to_vec(),
        fixed_values: j_prime.iter().map(|&p| h[p].clone()).collect(),
        rank_reveal: RankRevealResult {
            r: j.len(),
            cols: j.to_vec(),
            rows: Vec::new(),
            sigma_r: f64::NAN,
            sigma_r_plus_1: f64::NAN,
            c_pq: f64::NAN,
        },
    }
}

pub fn one() -> Q {
    Q::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::corpus_entry;

    fn diag(v: &[f64]) -> SymF {
        SymF::from_fn(v.len(), |i, j| if i == j { v[i] } else { 0.0 })
    }

    #[test]
    fn chart_examples() {
        let c = select_chart(&diag(&[1.0, 1.0, 0.0]), 1e-6).unwrap();
        assert_eq!(c.iota, vec![0, 1]);
        assert!(c.y_tilde.max_abs() == 0.0);
        let c = select_chart(&SymF::identity(3), 1e-6).unwrap();
        assert_eq!((c.iota.clone(), c.y_tilde.cols()), (vec![0, 1, 2], 0));
        let v = [1.0, 2.0, 3.0];
        let c = select_chart(&SymF::from_fn(3, |i, j| v[i] * v[j]), 1e-6).unwrap();
        assert_eq!(c.iota, vec![2]);
        assert!((c.y_tilde[(0, 0)] + 1.0 / 3.0).abs() < 1e-15);
        assert!((c.y_tilde[(0, 1)] + 2.0 / 3.0).abs() < 1e-15);
        assert!(c.kernel_residual < 1e-14);
    }

    #[test]
    fn linearized_shapes() {
        let dru = corpus_entry("DruWo2017-2.3.2P").unwrap().instance;
        let chart = select_chart(&diag(&[1.0, 1.0, 0.0]), 1e-6).unwrap();
        let lin = build_linearized(&dru, &chart);
        assert_eq!((lin.p(), lin.k), (5, 6));
        let q0 = lin.q_matrix(&[0.0, 0.0]);
        // kernel rows at Y = 0 pick the third column of X: x13, x23, x33
        let picks: Vec<usize> = (2..5).map(|i| (0..6).find(|&j| q0[(i, j)] != 0.0).unwrap()).collect();
        assert_eq!(picks, vec![hvec_index(3, 0, 2), hvec_index(3, 1, 2), hvec_index(3, 2, 2)]);
        let hns = corpus_entry("HNS2020-4.1D").unwrap().instance;
        let chart = ChartSelection::from_iota(4, &[0, 1], Matrix::zeros(2, 2));
        let lin = build_linearized(&hns, &chart);
        assert_eq!(lin.dropped, vec![(4, 1)]);
        assert_eq!(lin.p(), 9 + 8 - 1);
    }

    #[test]
    fn full_rank_chart_has_no_kernel_block() {
        let one = crate::sdp::parse_instance("n 1\nm 1\nb 1\nA 1 1 1 1\n").unwrap();
        let f = run_pipeline(&one, &SymF::identity(1), 1e-6, 1e-3, DEFAULT_MAX_DEN).unwrap();
        assert_eq!(f.chart.r, 1);
        assert_eq!(f.system.nvars(), 0);
        assert!(f.full.labels.iter().all(|l| matches!(l, Label::MapConstraint(_) | Label::FixedVar(_))));
    }

    #[test]
    fn diagnostics_limits() {
        let dru = corpus_entry("DruWo2017-2.3.2P").unwrap().instance;
        let xs = diag(&[1.0, 1.0, 0.0]);
        let d = tolerance_diagnostics(&dru, &xs, 0.0, 1e-6, 1e-3).unwrap();
        assert!((d.phi_delta - 1.0 / (d.c_nn * d.c_nn * 3.0)).abs() < 1e-15);
        assert_eq!(d.psi_delta, 0.0);
        let delta = 1e-6;
        let d = tolerance_diagnostics(&dru, &xs, delta, 1e-5, 1e-3).unwrap();
        let hand = ((1.0 - delta) / 9.0 - delta).powi(2) / 3.0 - delta;
        assert!((d.phi_delta - hand).abs() < 1e-15);
        assert_eq!(tolerance_diagnostics(&dru, &xs, 1.0, 1e-6, 1e-3).unwrap_err(), PipelineError::PhiTooSmall);
    }
}
