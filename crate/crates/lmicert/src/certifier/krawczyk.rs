//! Krawczyk existence and uniqueness test over rational boxes.

use num_traits::{One, Signed};

use super::interval::{box_mid, eval_poly, IBox, Interval, BITS};
use crate::linalg::Matrix;
use crate::poly::{jacobian, MultiPoly, PolySystem};
use crate::rational::{self, Q};

pub const DEFAULT_SCHEDULE: [f64; 9] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10];

/// K(B) = c − Y·F(c) + (I − Y·J(B))·(B − c) ⊂ int(B), with c = mid(B) and Y
/// the floating-point inverse of J(c) taken exactly. Deterministic in B.
pub fn krawczyk_test(f: &PolySystem, jac: &[Vec<MultiPoly>], b: &[Interval]) -> bool {
    let n = f.nvars();
    if f.len() != n || b.len() != n || b.iter().any(Interval::is_point) {
        return false;
    }
    let c = box_mid(b);
    let cf: Vec<f64> = c.iter().map(rational::to_f64).collect();
    let jc = Matrix::from_fn(n, n, |i, j| jac[i][j].eval_f64(&cf).unwrap());
    let Some(yf) = jc.inverse(1e-14) else { return false };
    if yf.data().iter().any(|v| !v.is_finite()) {
        return false;
    }
    let y: Vec<Vec<Q>> = (0..n).map(|i| (0..n).map(|j| rational::from_f64(yf[(i, j)])).collect()).collect();
    let fc: Vec<Q> = f.polys.iter().map(|p| p.eval_q(&c).unwrap()).collect();
    let jb: Vec<Vec<Interval>> = jac.iter().map(|row| row.iter().map(|p| eval_poly(p, b)).collect()).collect();
    let d: Vec<Interval> = b.iter().zip(&c).map(|(bi, ci)| bi.sub(&Interval::point(ci.clone()))).collect();
    for i in 0..n {
        let mut yfc = Q::default();
        for k in 0..n {
            yfc += &y[i][k] * &fc[k];
        }
        let mut k_i = Interval::point(&c[i] - yfc).round_out(BITS);
        for j in 0..n {
            let mut m = Interval::point(if i == j { Q::one() } else { Q::default() });
            for k in 0..n {
                if y[i][k].is_positive() || y[i][k].is_negative() {
                    m = m.sub(&jb[k][j].scale(&y[i][k])).round_out(BITS);
                }
            }
            k_i = k_i.add(&m.mul(&d[j])).round_out(BITS);
        }
        if !k_i.interior_of(&b[i]) {
            return false;
        }
    }
    true
}

/// Try boxes of the scheduled radii (relative to max(1, |cᵢ|)) around the
/// center; the first passing box is returned.
pub fn krawczyk_certify(f: &PolySystem, center: &[f64], schedule: &[f64]) -> Option<IBox> {
    if !f.is_square() || center.len() != f.nvars() {
        return None;
    }
    let jac = jacobian(f);
    let c: Vec<Q> = center.iter().map(|&v| rational::from_f64(v)).collect();
    for &r in schedule {
        let b: IBox = c
            .iter()
            .zip(center)
            .map(|(ci, &cf)| Interval::around(ci, &rational::from_f64(r * cf.abs().max(1.0))))
            .collect();
        if krawczyk_test(f, &jac, &b) {
            return Some(b);
        }
    }
    None
}

/// Widest component, for reporting.
pub fn box_width(b: &[Interval]) -> Q {
    b.iter().map(|i| i.width().abs()).max().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Label;
    use crate::rational::{q, qf};

    fn sys(vars: &[&str], polys: &[&str]) -> PolySystem {
        let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let mut s = PolySystem::new(vars.clone());
        for (i, p) in polys.iter().enumerate() {
            s.push(MultiPoly::parse(p, &vars).unwrap(), Label::LagrangeRow(i));
        }
        s
    }

    #[test]
    fn sqrt_two() {
        let f = sys(&["x"], &["x^2-2"]);
        let b = krawczyk_certify(&f, &[1.414213], &[1e-6]).unwrap();
        assert!(b[0].width() <= qf(1, 100_000));
        // √2 is inside: lo² < 2 < hi²
        assert!(&b[0].lo * &b[0].lo < q(2) && &b[0].hi * &b[0].hi > q(2));
    }

    #[test]
    fn no_zero_no_box() {
        let f = sys(&["x"], &["x^2+1"]);
        assert!(krawczyk_certify(&f, &[0.0], &DEFAULT_SCHEDULE).is_none());
        let g = sys(&["x"], &["x^2"]);
        assert!(krawczyk_certify(&g, &[0.0], &DEFAULT_SCHEDULE).is_none());
    }

    #[test]
    fn two_variables() {
        let f = sys(&["x", "y"], &["x^2+y^2-1", "x-y"]);
        let h = 0.5f64.sqrt();
        let b = krawczyk_certify(&f, &[h, h], &DEFAULT_SCHEDULE).unwrap();
        for i in &b {
            assert!(&i.lo * &i.lo < qf(1, 2) && &i.hi * &i.hi > qf(1, 2));
        }
    }
}
