//! Closed intervals with exact rational endpoints.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::poly::MultiPoly;
use crate::rational::{self, Q};

/// Endpoint precision after outward rounding.
pub const BITS: u32 = 160;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Q,
    pub hi: Q,
}

pub type IBox = Vec<Interval>;

impl Interval {
    pub fn new(lo: Q, hi: Q) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Interval { lo, hi }
    }

    pub fn point(x: Q) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn around(c: &Q, r: &Q) -> Self {
        Interval { lo: c - r, hi: c + r }
    }

    pub fn zero() -> Self {
        Interval::point(Q::zero())
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> Q {
        (&self.lo + &self.hi) / rational::q(2)
    }

    pub fn rad(&self) -> Q {
        self.width() / rational::q(2)
    }

    /// max |x| over the interval.
    pub fn mag(&self) -> Q {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn contains(&self, x: &Q) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&Q::zero())
    }

    pub fn subset_of(&self, o: &Interval) -> bool {
        o.lo <= self.lo && self.hi <= o.hi
    }

    /// Strict inclusion in the interior of `o`.
    pub fn interior_of(&self, o: &Interval) -> bool {
        o.lo < self.lo && self.hi < o.hi
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -&self.hi, hi: -&self.lo }
    }

    pub fn scale(&self, c: &Q) -> Interval {
        let a = c * &self.lo;
        let b = c * &self.hi;
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        if self.is_point() {
            return o.scale(&self.lo);
        }
        if o.is_point() {
            return self.scale(&o.lo);
        }
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval { lo, hi }
    }

    pub fn pow(&self, e: u32) -> Interval {
        if e == 0 {
            return Interval::point(rational::q(1));
        }
        if e % 2 == 1 || !self.contains_zero() {
            let a = num_traits::pow(self.lo.clone(), e as usize);
            let b = num_traits::pow(self.hi.clone(), e as usize);
            return if a <= b { Interval { lo: a, hi: b } } else { Interval { lo: b, hi: a } };
        }
        Interval { lo: Q::zero(), hi: num_traits::pow(self.mag(), e as usize) }
    }

    pub fn hull(&self, o: &Interval) -> Interval {
        Interval { lo: self.lo.clone().min(o.lo.clone()), hi: self.hi.clone().max(o.hi.clone()) }
    }

    /// Outward rounding to a dyadic grid; point intervals with short
    /// endpoints are left alone.
    pub fn round_out(&self, bits: u32) -> Interval {
        Interval { lo: rational::round_down(&self.lo, bits), hi: rational::round_up(&self.hi, bits) }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (rational::to_f64(&self.lo), rational::to_f64(&self.hi))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", rational::format_q(&self.lo), rational::format_q(&self.hi))
    }
}

pub fn point_box(x: &[Q]) -> IBox {
    x.iter().cloned().map(Interval::point).collect()
}

pub fn box_mid(b: &[Interval]) -> Vec<Q> {
    b.iter().map(Interval::mid).collect()
}

pub fn box_contains(b: &[Interval], x: &[Q]) -> bool {
    b.len() == x.len() && b.iter().zip(x).all(|(i, v)| i.contains(v))
}

/// Natural interval extension of a polynomial, rounding outward after
/// each term.
pub fn eval_poly(p: &MultiPoly, b: &[Interval]) -> Interval {
    if b.iter().all(Interval::is_point) {
        let x: Vec<Q> = b.iter().map(|i| i.lo.clone()).collect();
        return Interval::point(p.eval_q(&x).expect("box length"));
    }
    let mut acc = Interval::zero();
    for (m, c) in p.terms() {
        let mut t = Interval::point(c.clone());
        for (i, &e) in m.iter().enumerate() {
            if e > 0 {
                t = t.mul(&b[i].pow(e)).round_out(BITS);
            }
        }
        acc = acc.add(&t).round_out(BITS);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    #[test]
    fn arithmetic_encloses() {
        let a = Interval::new(q(-1), q(2));
        let b = Interval::new(q(3), q(4));
        assert_eq!(a.mul(&b), Interval::new(q(-4), q(8)));
        assert_eq!(a.pow(2), Interval::new(q(0), q(4)));
        assert_eq!(a.sub(&b), Interval::new(q(-5), q(-1)));
        assert!(Interval::new(qf(1, 3), qf(1, 2)).interior_of(&Interval::new(q(0), q(1))));
        let third = Interval::point(qf(1, 3));
        assert!(third.round_out(20).is_point());
        let tiny = qf(1, 3i64.pow(30));
        let r = Interval::point(tiny.clone()).round_out(20);
        assert!(r.contains(&tiny) && !r.is_point());
    }

    #[test]
    fn poly_enclosure() {
        let vars = vec!["x".to_string(), "y".to_string()];
        let p = MultiPoly::parse("x^2*y-3*x+1/2", &vars).unwrap();
        let b = vec![Interval::new(q(1), q(2)), Interval::new(q(-1), q(1))];
        let e = eval_poly(&p, &b);
        for (x, y) in [(1, -1), (2, 1), (1, 1), (2, -1)] {
            assert!(e.contains(&p.eval_q(&[q(x), q(y)]).unwrap()));
        }
    }
}
