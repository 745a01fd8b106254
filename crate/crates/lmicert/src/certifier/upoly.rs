//! Univariate polynomials over ℚ: Sturm sequences, real root isolation and
//! exact eigenvalue counting for symmetric rational matrices.

use num_traits::{One, Signed, Zero};

use super::interval::Interval;
use crate::linalg::exact::{self, QMat};
use crate::rational::{self, Q};

/// Coefficients in ascending order, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UPoly {
    c: Vec<Q>,
}

impl UPoly {
    pub fn new(mut c: Vec<Q>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        UPoly { c }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        UPoly::new(c.iter().map(|&v| rational::q(v)).collect())
    }

    pub fn zero() -> Self {
        UPoly { c: Vec::new() }
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn lead(&self) -> Q {
        self.c.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for a in self.c.iter().rev() {
            acc = acc * x + a;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, a| acc * x + rational::to_f64(a))
    }

    pub fn eval_interval(&self, x: &Interval) -> Interval {
        let mut acc = Interval::zero();
        for a in self.c.iter().rev() {
            acc = acc.mul(x).add(&Interval::point(a.clone())).round_out(super::interval::BITS);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        UPoly::new(self.c.iter().enumerate().skip(1).map(|(k, a)| a * rational::q(k as i64)).collect())
    }

    pub fn neg(&self) -> Self {
        UPoly { c: self.c.iter().map(|a| -a).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        UPoly::new(
            (0..n)
                .map(|k| self.c.get(k).cloned().unwrap_or_default() + o.c.get(k).cloned().unwrap_or_default())
                .collect(),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero();
        }
        let mut c = vec![Q::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        UPoly::new(c)
    }

    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut r = self.c.clone();
        let dl = d.lead();
        let dd = d.degree();
        if r.len() < d.c.len() {
            return (UPoly::zero(), self.clone());
        }
        let mut q = vec![Q::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let f = &r[k + dd] / &dl;
            if f.is_zero() {
                continue;
            }
            for (j, b) in d.c.iter().enumerate() {
                r[k + j] -= &f * b;
            }
            q[k] = f;
        }
        r.truncate(dd);
        (UPoly::new(q), UPoly::new(r))
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead();
        UPoly { c: self.c.iter().map(|a| a / &l).collect() }
    }

    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).degree() == 0
    }

    pub fn squarefree_part(&self) -> Self {
        let g = self.gcd(&self.derivative());
        if g.degree() == 0 {
            return self.clone();
        }
        self.div_rem(&g).0
    }

    /// p(t + s).
    pub fn shift(&self, s: &Q) -> Self {
        let mut c = self.c.clone();
        let n = c.len();
        for i in 0..n {
            for k in (i..n.saturating_sub(1)).rev() {
                let t = &c[k + 1] * s;
                c[k] += t;
            }
        }
        UPoly::new(c)
    }

    /// p(−t).
    pub fn reflect(&self) -> Self {
        UPoly::new(self.c.iter().enumerate().map(|(k, a)| if k % 2 == 1 { -a } else { a.clone() }).collect())
    }

    /// Sign changes in the coefficient sequence.
    pub fn sign_variations(&self) -> usize {
        variations(self.c.iter().filter(|a| !a.is_zero()).map(|a| a.is_positive()))
    }

    /// Cauchy bound: every root has |t| < bound.
    pub fn root_bound(&self) -> Q {
        let l = self.lead().abs();
        let m = self.c.iter().rev().skip(1).map(|a| a.abs() / &l).max().unwrap_or_else(Q::zero);
        m + Q::one()
    }
}

fn variations(signs: impl Iterator<Item = bool>) -> usize {
    let mut prev = None;
    let mut n = 0;
    for s in signs {
        if prev.is_some_and(|p| p != s) {
            n += 1;
        }
        prev = Some(s);
    }
    n
}

pub struct Sturm {
    seq: Vec<UPoly>,
}

impl Sturm {
    pub fn new(p: &UPoly) -> Self {
        let mut seq = vec![p.clone(), p.derivative()];
        while !seq.last().unwrap().is_zero() {
            let n = seq.len();
            let r = seq[n - 2].div_rem(&seq[n - 1]).1.neg();
            if r.is_zero() {
                break;
            }
            seq.push(r);
        }
        seq.retain(|s| !s.is_zero());
        Sturm { seq }
    }

    fn var_at(&self, x: &Q) -> usize {
        variations(self.seq.iter().map(|s| s.eval(x)).filter(|v| !v.is_zero()).map(|v| v.is_positive()))
    }

    /// Distinct real roots in (a, b].
    pub fn count(&self, a: &Q, b: &Q) -> usize {
        self.var_at(a).saturating_sub(self.var_at(b))
    }
}

/// Disjoint isolating intervals for the distinct real roots of `p`, each of
/// width below `width`. Exact rational roots hit by bisection come back as
/// point intervals.
pub fn isolate_real_roots(p: &UPoly, width: &Q) -> Vec<Interval> {
    if p.degree() == 0 {
        return Vec::new();
    }
    let sf = p.squarefree_part();
    let st = Sturm::new(&sf);
    let b = sf.root_bound();
    let mut out = Vec::new();
    let mut stack = vec![(-b.clone(), b)];
    while let Some((lo, hi)) = stack.pop() {
        let k = st.count(&lo, &hi);
        if k == 0 {
            continue;
        }
        if k == 1 {
            out.push(refine(&sf, &st, lo, hi, width));
            continue;
        }
        let mid = (&lo + &hi) / rational::q(2);
        stack.push((mid.clone(), hi));
        stack.push((lo, mid));
    }
    out.sort_by(|a, b| a.lo.cmp(&b.lo));
    out
}

/// Shrink (lo, hi] holding exactly one root of the squarefree `p`.
pub fn refine(p: &UPoly, st: &Sturm, mut lo: Q, mut hi: Q, width: &Q) -> Interval {
    if p.eval(&hi).is_zero() {
        return Interval::point(hi);
    }
    while &(&hi - &lo) >= width {
        let mid = (&lo + &hi) / rational::q(2);
        if p.eval(&mid).is_zero() {
            return Interval::point(mid);
        }
        if st.count(&lo, &mid) == 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Interval::new(lo, hi)
}

/// det(tI − M).
pub fn charpoly(m: &QMat) -> UPoly {
    UPoly::new(exact::charpoly(m))
}

/// Eigenvalues of the symmetric M strictly above `s`, with multiplicity.
/// Descartes' rule is exact for real-rooted polynomials.
pub fn eig_count_above(cp: &UPoly, s: &Q) -> usize {
    cp.shift(s).sign_variations()
}

/// Eigenvalues of the symmetric M strictly below `s`, with multiplicity.
pub fn eig_count_below(cp: &UPoly, s: &Q) -> usize {
    cp.shift(s).reflect().sign_variations()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    #[test]
    fn division_and_gcd() {
        let a = UPoly::from_ints(&[-1, 0, 1]);
        let b = UPoly::from_ints(&[1, 1]);
        let (qq, r) = a.div_rem(&b);
        assert_eq!(qq, UPoly::from_ints(&[-1, 1]));
        assert!(r.is_zero());
        let sq = a.mul(&b);
        assert!(!sq.is_squarefree());
        assert_eq!(sq.squarefree_part().monic(), a);
    }

    #[test]
    fn isolation_examples() {
        let none = UPoly::from_ints(&[1, 0, 1]);
        assert!(isolate_real_roots(&none, &qf(1, 1000)).is_empty());
        // t(t−1)(t+2) = t³ + t² − 2t
        let p = UPoly::from_ints(&[0, -2, 1, 1]);
        let r = isolate_real_roots(&p, &qf(1, 1_000_000));
        assert_eq!(r.len(), 3);
        for (iv, root) in r.iter().zip([q(-2), q(0), q(1)]) {
            assert!(iv.contains(&root));
        }
        assert!(isolate_real_roots(&UPoly::from_ints(&[5]), &q(1)).is_empty());
    }

    #[test]
    fn eigen_counts() {
        let m = vec![vec![q(2), q(1)], vec![q(1), q(2)]];
        let cp = charpoly(&m);
        assert_eq!(eig_count_above(&cp, &q(0)), 2);
        assert_eq!(eig_count_above(&cp, &q(2)), 1);
        assert_eq!(eig_count_below(&cp, &q(3)), 1);
        assert_eq!(eig_count_above(&cp, &q(3)), 0);
        let d = vec![vec![q(1), q(0)], vec![q(0), q(0)]];
        let cp = charpoly(&d);
        assert_eq!((eig_count_above(&cp, &q(0)), eig_count_below(&cp, &q(0))), (1, 0));
        assert_eq!(UPoly::from_ints(&[1, 2, 1]).shift(&q(-1)), UPoly::from_ints(&[0, 0, 1]));
    }
}
