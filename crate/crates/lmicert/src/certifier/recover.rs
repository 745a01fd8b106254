//! Exact reconstruction of zeros and ideal-membership cofactors.

use num_traits::Zero;

use crate::linalg::exact::{self, QMat};
use crate::linalg::{self, Matrix};
use crate::pipeline::FixedSystem;
use crate::poly::{jacobian, jacobian_f64, MultiPoly, PolySystem};
use crate::rational::{self, Q};

pub const RATIONAL_TOLS: [f64; 5] = [1e-12, 1e-10, 1e-8, 1e-6, 1e-4];

/// Round the Y part to nearby simple rationals, then solve the remaining
/// (linear) equations in X exactly. Returns a reduced point with F = 0.
pub fn recover_rational(fs: &FixedSystem, approx: &[f64]) -> Option<Vec<Q>> {
    let f = &fs.system;
    let nv = f.nvars();
    let is_y: Vec<bool> = (0..nv).map(|i| fs.y_index.contains(&i)).collect();
    let xs: Vec<usize> = (0..nv).filter(|&i| !is_y[i]).collect();
    for tol in RATIONAL_TOLS {
        let mut point: Vec<Q> = vec![Q::zero(); nv];
        for &i in &fs.y_index {
            point[i] = rational::simplest_near(approx[i], tol);
        }
        let mut rows: QMat = Vec::new();
        let mut rhs = Vec::new();
        let mut linear = true;
        for p in &f.polys {
            let mut s = p.clone();
            for &i in &fs.y_index {
                if s.uses_var(i) {
                    s = s.substitute(i, &MultiPoly::constant(nv, point[i].clone()));
                }
            }
            if s.total_degree() > 1 {
                linear = false;
                break;
            }
            rows.push(
                xs.iter()
                    .map(|&v| {
                        let mut e = vec![0; nv];
                        e[v] = 1;
                        s.coeff(&e)
                    })
                    .collect(),
            );
            rhs.push(-s.constant_term());
        }
        if !linear {
            return None;
        }
        let sol = if xs.is_empty() {
            rhs.iter().all(Zero::is_zero).then(|| (Vec::new(), Vec::new()))
        } else {
            exact::solve_affine(&rows, &rhs, xs.len())
        };
        let Some((part, null)) = sol else { continue };
        let mut xv = part;
        for nb in &null {
            // each basis vector has a single 1 at its free coordinate
            let free = nb.iter().position(|c| *c == rational::q(1)).unwrap();
            let val = rational::simplest_near(approx[xs[free]], tol);
            for (a, b) in xv.iter_mut().zip(nb) {
                *a += &val * b;
            }
        }
        for (k, &v) in xs.iter().enumerate() {
            point[v] = xv[k].clone();
        }
        if f.polys.iter().all(|p| p.eval_q(&point).unwrap().is_zero()) {
            return Some(point);
        }
    }
    None
}

/// Rows of F whose Jacobian at x is nonsingular, chosen greedily.
pub fn choose_square_rows(f: &PolySystem, x: &[f64], skip: usize) -> Option<Vec<usize>> {
    let n = f.nvars();
    let j = jacobian_f64(&jacobian(f), x);
    let mut rows: Vec<usize> = Vec::new();
    let order: Vec<usize> = (0..f.len()).cycle().skip(skip % f.len().max(1)).take(f.len()).collect();
    for i in order {
        let mut cand = rows.clone();
        cand.push(i);
        let m = Matrix::from_fn(cand.len(), n, |a, b| j[(cand[a], b)]);
        let s = linalg::singular_values(&m);
        let smax = s.first().copied().unwrap_or(0.0);
        if s.last().copied().unwrap_or(0.0) > 1e-8 * smax.max(1.0) {
            rows = cand;
        }
        if rows.len() == n {
            rows.sort_unstable();
            return Some(rows);
        }
    }
    None
}

fn monomials_upto(n: usize, d: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0; n]];
    let mut frontier = out.clone();
    for _ in 0..d {
        let mut next = Vec::new();
        for m in &frontier {
            let start = m.iter().rposition(|&e| e > 0).unwrap_or(0);
            for v in start..n {
                let mut e = m.clone();
                e[v] += 1;
                next.push(e);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Polynomials h with f = Σ hᵢ gᵢ and deg(hᵢ gᵢ) ≤ d, searching d up to
/// deg f + extra.
pub fn find_cofactors(g: &[MultiPoly], f: &MultiPoly, extra: u32) -> Option<Vec<MultiPoly>> {
    let n = f.nvars();
    let df = f.total_degree();
    let dg: u32 = g.iter().map(MultiPoly::total_degree).max().unwrap_or(0);
    for d in df.max(dg)..=df.max(dg) + extra {
        let mut unknowns: Vec<(usize, Vec<u32>)> = Vec::new();
        for (i, gi) in g.iter().enumerate() {
            let gd = gi.total_degree();
            if gd > d {
                continue;
            }
            for m in monomials_upto(n, d - gd) {
                unknowns.push((i, m));
            }
        }
        let mut rows: std::collections::BTreeMap<Vec<u32>, Vec<(usize, Q)>> = Default::default();
        for (k, (i, m)) in unknowns.iter().enumerate() {
            for (e, c) in g[*i].terms() {
                let prod: Vec<u32> = e.iter().zip(m).map(|(a, b)| a + b).collect();
                rows.entry(prod).or_default().push((k, c.clone()));
            }
        }
        for (e, _) in f.terms() {
            rows.entry(e.clone()).or_default();
        }
        let keys: Vec<Vec<u32>> = rows.keys().cloned().collect();
        let a: QMat = keys
            .iter()
            .map(|key| {
                let mut r = vec![Q::zero(); unknowns.len()];
                for (k, c) in &rows[key] {
                    r[*k] += c;
                }
                r
            })
            .collect();
        let b: Vec<Q> = keys.iter().map(|key| f.coeff(key)).collect();
        if let Some((sol, _)) = exact::solve_affine(&a, &b, unknowns.len()) {
            let mut h = vec![MultiPoly::zero(n); g.len()];
            for ((i, m), c) in unknowns.iter().zip(sol) {
                if !c.is_zero() {
                    h[*i].add_term(m.clone(), c);
                }
            }
            return Some(h);
        }
    }
    None
}

/// s and h with s·f = Σ hᵢ gᵢ and s(x) ≠ 0, so that f vanishes at any zero
/// of G near x where s does not. Degrees as in [`find_cofactors`].
pub fn find_local_cofactors(g: &[MultiPoly], f: &MultiPoly, extra: u32, x: &[f64]) -> Option<(MultiPoly, Vec<MultiPoly>)> {
    let n = f.nvars();
    let df = f.total_degree();
    let dg: u32 = g.iter().map(MultiPoly::total_degree).max().unwrap_or(0);
    for d in df.max(dg)..=df.max(dg) + extra {
        let mut unknowns: Vec<(Option<usize>, Vec<u32>)> = Vec::new();
        for (i, gi) in g.iter().enumerate() {
            let gd = gi.total_degree();
            if gd <= d {
                unknowns.extend(monomials_upto(n, d - gd).into_iter().map(|m| (Some(i), m)));
            }
        }
        unknowns.extend(monomials_upto(n, d - df).into_iter().map(|m| (None, m)));
        let mut rows: std::collections::BTreeMap<Vec<u32>, Vec<(usize, Q)>> = Default::default();
        for (k, (i, m)) in unknowns.iter().enumerate() {
            let (p, sign) = match i {
                Some(i) => (&g[*i], rational::q(1)),
                None => (f, rational::q(-1)),
            };
            for (e, c) in p.terms() {
                let prod: Vec<u32> = e.iter().zip(m).map(|(a, b)| a + b).collect();
                rows.entry(prod).or_default().push((k, c * &sign));
            }
        }
        let a: QMat = rows
            .values()
            .map(|entries| {
                let mut r = vec![Q::zero(); unknowns.len()];
                for (k, c) in entries {
                    r[*k] += c;
                }
                r
            })
            .collect();
        let mut best: Option<(f64, Vec<Q>)> = None;
        for v in exact::nullspace(&a, unknowns.len()) {
            let mut sv = 0.0;
            let mut norm = 0.0f64;
            for ((i, m), c) in unknowns.iter().zip(&v) {
                if i.is_none() && !c.is_zero() {
                    let cf = rational::to_f64(c);
                    sv += cf * m.iter().zip(x).map(|(&e, &xi)| xi.powi(e as i32)).product::<f64>();
                    norm = norm.max(cf.abs());
                }
            }
            if norm > 0.0 && sv.abs() / norm > best.as_ref().map_or(1e-8, |b| b.0) {
                best = Some((sv.abs() / norm, v));
            }
        }
        if let Some((_, v)) = best {
            let mut h = vec![MultiPoly::zero(n); g.len()];
            let mut s = MultiPoly::zero(n);
            for ((i, m), c) in unknowns.iter().zip(v) {
                if c.is_zero() {
                    continue;
                }
                match i {
                    Some(i) => h[*i].add_term(m.clone(), c),
                    None => s.add_term(m.clone(), c),
                }
            }
            return Some((s, h));
        }
    }
    None
}

pub fn check_cofactors(g: &[MultiPoly], f: &MultiPoly, h: &[MultiPoly]) -> bool {
    check_local_cofactors(g, f, &MultiPoly::constant(f.nvars(), rational::q(1)), h)
}

/// s·f = Σ hᵢ gᵢ exactly.
pub fn check_local_cofactors(g: &[MultiPoly], f: &MultiPoly, s: &MultiPoly, h: &[MultiPoly]) -> bool {
    let mut acc = MultiPoly::zero(f.nvars());
    for (gi, hi) in g.iter().zip(h) {
        acc = acc.add(&gi.mul(hi));
    }
    acc == s.mul(f)
}

/// Exact z with zᵀ[∇φ; J(F)](x) = 0 and zᵀu = 1, if one exists.
pub fn exact_multiplier(f: &PolySystem, phi: &MultiPoly, u: &[Q], x: &[Q]) -> Option<Vec<Q>> {
    let n = f.nvars();
    let jac = jacobian(f);
    let mut grads: Vec<Vec<Q>> = vec![(0..n).map(|j| phi.derivative(j).eval_q(x).unwrap()).collect()];
    for row in &jac {
        grads.push(row.iter().map(|p| p.eval_q(x).unwrap()).collect());
    }
    let c1 = grads.len();
    let mut a: QMat = (0..n).map(|j| (0..c1).map(|k| grads[k][j].clone()).collect()).collect();
    a.push(u.to_vec());
    let mut b = vec![Q::zero(); n];
    b.push(rational::q(1));
    exact::solve_affine(&a, &b, c1).map(|(z, _)| z)
}
