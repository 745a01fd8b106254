//! Rigorous eigenvalue bounds for symmetric matrices with interval entries.

use num_traits::{Signed, Zero};

use super::interval::Interval;
use super::upoly::{charpoly, eig_count_above, eig_count_below};
use crate::linalg::{self, hvec_pair, SymQ};
use crate::rational::{self, Q};

#[derive(Clone, Debug, PartialEq)]
pub enum PsdVerdict {
    /// λ_r(X) ≥ margin > 0 for every X in the box.
    Certified { margin: Q },
    /// Some eigenvalue is provably negative everywhere in the box.
    NotPsd,
    Inconclusive { margin: Option<Q> },
}

impl PsdVerdict {
    pub fn margin(&self) -> Option<&Q> {
        match self {
            PsdVerdict::Certified { margin } => Some(margin),
            PsdVerdict::Inconclusive { margin } => margin.as_ref(),
            PsdVerdict::NotPsd => None,
        }
    }
}

/// Rational upper bound on √x.
pub fn sqrt_up(x: &Q) -> Q {
    if x.is_zero() {
        return Q::zero();
    }
    let mut s = rational::from_f64(rational::to_f64(x).sqrt() * (1.0 + 1e-12) + f64::MIN_POSITIVE);
    while &(&s * &s) < x {
        s = &s * rational::qf(1_000_001, 1_000_000) + rational::from_f64(f64::MIN_POSITIVE);
    }
    s
}

/// Midpoint matrix and an upper bound on ‖X − mid‖₂ over the box.
pub fn midpoint_and_radius(n: usize, hv: &[Interval]) -> (SymQ, Q) {
    let mid: Vec<Q> = hv.iter().map(Interval::mid).collect();
    let mut s = Q::zero();
    for (p, iv) in hv.iter().enumerate() {
        let (i, j) = hvec_pair(n, p);
        let r = iv.rad();
        let w = if i == j { rational::q(1) } else { rational::q(2) };
        s += w * &r * &r;
    }
    (SymQ::unhvec(n, &mid), sqrt_up(&s))
}

/// Exact lower bound s ≤ λ_r(M) from a floating estimate, or None when
/// λ_r(M) ≤ 0 numerically.
pub fn lambda_r_lower(m: &SymQ, r: usize) -> Option<Q> {
    if r == 0 {
        return None;
    }
    let cp = charpoly(&m.to_rows());
    let ev = linalg::sym_eigenvalues(&m.to_f64());
    let mu = ev[r - 1];
    if mu <= 0.0 {
        return None;
    }
    let mut shrink = 1e-9;
    for _ in 0..12 {
        let s = rational::simplest_between(&rational::from_f64(mu * (1.0 - 10.0 * shrink)), &rational::from_f64(mu * (1.0 - shrink)));
        if s.is_positive() && eig_count_above(&cp, &s) >= r {
            return Some(s);
        }
        shrink *= 10.0;
    }
    None
}

/// λ_r lower bound over the box minus the radius; r = 0 means X = 0 and
/// nothing is needed beyond the kernel argument.
pub fn psd_certify(n: usize, r: usize, hv: &[Interval]) -> PsdVerdict {
    let (m, rho) = midpoint_and_radius(n, hv);
    let cp = charpoly(&m.to_rows());
    if eig_count_below(&cp, &-rho.clone()) > 0 {
        return PsdVerdict::NotPsd;
    }
    if r == 0 {
        return if rho.is_zero() && m.is_zero() {
            PsdVerdict::Certified { margin: Q::zero() }
        } else {
            PsdVerdict::Inconclusive { margin: None }
        };
    }
    match lambda_r_lower(&m, r) {
        Some(s) => {
            let margin = s - rho;
            if margin.is_positive() {
                PsdVerdict::Certified { margin }
            } else {
                PsdVerdict::Inconclusive { margin: Some(margin) }
            }
        }
        None => PsdVerdict::Inconclusive { margin: None },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    fn pts(v: &[Q]) -> Vec<Interval> {
        v.iter().cloned().map(Interval::point).collect()
    }

    #[test]
    fn exact_diag() {
        // diag(1, 1, 0)
        let hv = pts(&[q(1), q(0), q(0), q(1), q(0), q(0)]);
        match psd_certify(3, 2, &hv) {
            PsdVerdict::Certified { margin } => assert!(margin > qf(9, 10) && margin <= q(1)),
            v => panic!("{v:?}"),
        }
        let neg = pts(&[q(-1), q(0), q(1)]);
        assert_eq!(psd_certify(2, 1, &neg), PsdVerdict::NotPsd);
    }

    #[test]
    fn radius_eats_margin() {
        let hv = vec![Interval::new(qf(1, 2), qf(3, 2)), Interval::point(q(0)), Interval::new(q(-1), q(1))];
        assert!(matches!(psd_certify(2, 1, &hv), PsdVerdict::Inconclusive { .. }));
        assert!(sqrt_up(&q(2)) * sqrt_up(&q(2)) >= q(2));
    }

    #[test]
    fn full_rank() {
        let hv = vec![Interval::new(qf(199, 100), qf(201, 100)), Interval::point(q(0)), Interval::point(q(3))];
        match psd_certify(2, 2, &hv) {
            PsdVerdict::Certified { margin } => assert!(margin > qf(19, 10)),
            v => panic!("{v:?}"),
        }
    }
}
