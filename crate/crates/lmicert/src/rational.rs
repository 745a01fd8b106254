//! Helpers for exact rationals: conversion, rationalization, dyadic rounding.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Exact value of a finite binary64.
pub fn from_f64(x: f64) -> Q {
    Q::from_float(x).unwrap_or_else(Q::zero)
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // very large numerator/denominator: go through a scaled quotient
        let n = x.numer().bits() as i64;
        let d = x.denom().bits() as i64;
        let shift = n - d;
        let scaled = if shift > 0 {
            x / Q::from_integer(BigInt::one() << (shift as usize))
        } else {
            x * Q::from_integer(BigInt::one() << ((-shift) as usize))
        };
        scaled.to_f64().unwrap_or(0.0) * 2f64.powi(shift as i32)
    })
}

/// Best rational approximation of `x` with denominator at most `max_den`
/// (continued-fraction convergents plus the best semiconvergent).
pub fn rationalize_bounded(x: f64, max_den: u64) -> Q {
    if !x.is_finite() {
        return Q::zero();
    }
    let target = from_f64(x);
    let max_den = BigInt::from(max_den.max(1));
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let mut rest = target.clone();
    loop {
        let a = rest.floor().to_integer();
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        if q2 > max_den {
            let k = (&max_den - &q0) / &q1;
            let semi = Q::new(&k * &p1 + &p0, &k * &q1 + &q0);
            let conv = Q::new(p1.clone(), q1.clone());
            return if (&semi - &target).abs() < (&conv - &target).abs() { semi } else { conv };
        }
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let frac = &rest - Q::from_integer(a);
        if frac.is_zero() {
            return Q::new(p1, q1);
        }
        rest = frac.recip();
    }
}

/// The rational with smallest denominator in the closed interval [lo, hi].
pub fn simplest_between(lo: &Q, hi: &Q) -> Q {
    assert!(lo <= hi);
    if lo.is_negative() && hi.is_positive() || lo.is_zero() || hi.is_zero() {
        return Q::zero();
    }
    if hi.is_negative() {
        return -simplest_between(&-hi, &-lo);
    }
    let fl = lo.floor();
    if fl == *lo {
        return fl;
    }
    if &(fl.clone() + Q::one()) <= hi {
        return fl + Q::one();
    }
    // lo, hi share the integer part; recurse on reciprocals of fractional parts
    let inner = simplest_between(&(hi - &fl).recip(), &(lo - &fl).recip());
    fl + inner.recip()
}

/// Simplest rational within `tol` of `x`.
pub fn simplest_near(x: f64, tol: f64) -> Q {
    let c = from_f64(x);
    let t = from_f64(tol.abs());
    simplest_between(&(&c - &t), &(&c + &t))
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

/// Largest multiple of 2^-bits that is <= x.
pub fn round_down(x: &Q, bits: u32) -> Q {
    if x.denom().bits() <= bits as u64 + 1 {
        return x.clone();
    }
    let s = pow2(bits);
    let n = (x.numer() * &s).div_floor(x.denom());
    Q::new(n, s)
}

/// Smallest multiple of 2^-bits that is >= x.
pub fn round_up(x: &Q, bits: u32) -> Q {
    -round_down(&-x, bits)
}

pub fn format_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().ok()?;
        let d: BigInt = b.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Q::new(n, d))
    } else if s.contains('.') || s.contains('e') || s.contains('E') {
        let v: f64 = s.parse().ok()?;
        // decimal literals are read exactly
        parse_decimal(s).or_else(|| Some(from_f64(v)))
    } else {
        let n: BigInt = s.parse().ok()?;
        Some(Q::from_integer(n))
    }
}

fn parse_decimal(s: &str) -> Option<Q> {
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], s[p + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    let digits = format!("{ip}{fp}");
    let n: BigInt = if digits.is_empty() { return None } else { digits.parse().ok()? };
    let e = exp - fp.len() as i32;
    let ten = BigInt::from(10);
    let mut v = if e >= 0 {
        Q::from_integer(n * num_traits::pow(ten, e as usize))
    } else {
        Q::new(n, num_traits::pow(ten, (-e) as usize))
    };
    if neg {
        v = -v;
    }
    Some(v)
}

pub fn lcm_denominators<'a>(xs: impl IntoIterator<Item = &'a Q>) -> BigInt {
    xs.into_iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_rationalization() {
        assert_eq!(rationalize_bounded(0.5 + 1e-12, 1_000_000), qf(1, 2));
        assert_eq!(rationalize_bounded(std::f64::consts::PI, 1000), qf(355, 113));
        assert_eq!(rationalize_bounded(-2.0, 10), q(-2));
    }

    #[test]
    fn simplest() {
        assert_eq!(simplest_between(&qf(3, 10), &qf(4, 10)), qf(1, 3));
        assert_eq!(simplest_near(0.333333333, 1e-6), qf(1, 3));
        assert_eq!(simplest_near(-1.5 + 1e-12, 1e-9), qf(-3, 2));
        assert_eq!(simplest_near(1e-12, 1e-9), q(0));
    }

    #[test]
    fn dyadic_rounding_brackets() {
        let x = qf(1, 3);
        let lo = round_down(&x, 20);
        let hi = round_up(&x, 20);
        assert!(lo <= x && x <= hi);
        assert!(&hi - &lo <= Q::new(BigInt::one(), pow2(20)));
        let y = qf(-7, 3);
        assert!(round_down(&y, 8) <= y && y <= round_up(&y, 8));
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("-3/6"), Some(qf(-1, 2)));
        assert_eq!(parse_q("0.25"), Some(qf(1, 4)));
        assert_eq!(parse_q("1e-3"), Some(qf(1, 1000)));
        assert_eq!(format_q(&qf(4, 2)), "2");
        assert_eq!(parse_q("1/0"), None);
    }
}
