//! Sparse multivariate polynomials over ℚ and systems of them.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, Q};

#[derive(Debug, Error, PartialEq)]
pub enum PolyError {
    #[error("point has {got} coordinates, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("u must be nonzero")]
    ZeroU,
    #[error("phi must be linear")]
    NonlinearPhi,
    #[error("u has length {got}, expected {expected}")]
    ULength { expected: usize, got: usize },
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub type Monomial = Vec<u32>;

/// Degree-reverse-lexicographic comparison (larger first when reversed).
pub fn cmp_grevlex(a: &[u32], b: &[u32]) -> Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    if da != db {
        return da.cmp(&db);
    }
    for (x, y) in a.iter().zip(b).rev() {
        if x != y {
            // smaller exponent in the last differing variable is larger
            return y.cmp(x);
        }
    }
    Ordering::Equal
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, Q>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Q::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, Q)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// Linear form Σ cᵢxᵢ + c₀.
    pub fn linear(coeffs: &[Q], c0: Q) -> Self {
        let n = coeffs.len();
        let mut p = Self::constant(n, c0);
        for (i, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(e, c.clone());
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        assert_eq!(m.len(), self.nvars, "exponent vector length");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.iter().sum()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m[i]).max().unwrap_or(0)
    }

    pub fn constant_term(&self) -> Q {
        self.terms.get(&vec![0; self.nvars]).cloned().unwrap_or_else(Q::zero)
    }

    pub fn coeff(&self, m: &[u32]) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn uses_var(&self, i: usize) -> bool {
        self.terms.keys().any(|m| m[i] > 0)
    }

    pub fn neg(&self) -> Self {
        MultiPoly { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn scale(&self, s: &Q) -> Self {
        if s.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.nvars, o.nvars);
        let mut p = self.clone();
        for (m, c) in &o.terms {
            p.add_term(m.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.nvars, o.nvars);
        let mut acc: BTreeMap<Monomial, Q> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let m: Monomial = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
                *acc.entry(m).or_insert_with(Q::zero) += ca * cb;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        MultiPoly { nvars: self.nvars, terms: acc }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Self::constant(self.nvars, Q::one());
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut p = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            if m[i] == 0 {
                continue;
            }
            let mut e = m.clone();
            e[i] -= 1;
            p.add_term(e, c * Q::from_integer(BigInt::from(m[i])));
        }
        p
    }

    pub fn eval_q(&self, x: &[Q]) -> Result<Q, PolyError> {
        self.check_len(x.len())?;
        let mut s = Q::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(m) {
                if e > 0 {
                    t *= num_traits::pow(xi.clone(), e as usize);
                }
            }
            s += t;
        }
        Ok(s)
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<f64, PolyError> {
        self.check_len(x.len())?;
        let mut s = 0.0;
        for (m, c) in &self.terms {
            let mut t = rational::to_f64(c);
            for (xi, &e) in x.iter().zip(m) {
                if e > 0 {
                    t *= xi.powi(e as i32);
                }
            }
            s += t;
        }
        Ok(s)
    }

    fn check_len(&self, got: usize) -> Result<(), PolyError> {
        if got != self.nvars {
            return Err(PolyError::Length { expected: self.nvars, got });
        }
        Ok(())
    }

    /// Replace variable `i` by the polynomial `by` (same variable set).
    pub fn substitute(&self, i: usize, by: &MultiPoly) -> Self {
        let maxe = self.degree_in(i);
        let powers: Vec<MultiPoly> = (0..=maxe).map(|e| by.pow(e)).collect();
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut rest = m.clone();
            rest[i] = 0;
            let mono = Self::from_terms(self.nvars, [(rest, c.clone())]);
            out = out.add(&mono.mul(&powers[m[i] as usize]));
        }
        out
    }

    /// Rewrite over a new variable set: `map[old] = Some(new)`; variables
    /// mapped to `None` must not occur.
    pub fn remap(&self, new_nvars: usize, map: &[Option<usize>]) -> Self {
        let mut p = Self::zero(new_nvars);
        for (m, c) in &self.terms {
            let mut e = vec![0; new_nvars];
            for (old, &k) in m.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let new = map[old].expect("remap dropped a variable in use");
                e[new] += k;
            }
            p.add_term(e, c.clone());
        }
        p
    }

    /// Terms sorted in decreasing grevlex order.
    pub fn sorted_terms(&self) -> Vec<(&Monomial, &Q)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| cmp_grevlex(b.0, a.0));
        v
    }

    pub fn leading_coeff(&self) -> Q {
        self.sorted_terms().first().map(|t| t.1.clone()).unwrap_or_else(Q::zero)
    }

    /// Scaled to leading grevlex coefficient 1.
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.leading_coeff().recip())
    }

    /// Integer multiple with denominators cleared and content removed, sign
    /// fixed so the leading coefficient is positive.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let l = rational::lcm_denominators(self.terms.values());
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            let v = (c * Q::from_integer(l.clone())).to_integer();
            g = num_integer::Integer::gcd(&g, &v);
        }
        let mut s = Q::new(l, g);
        if self.leading_coeff().is_negative() {
            s = -s;
        }
        self.scale(&s)
    }

    pub fn to_string_with(&self, vars: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.sorted_terms().into_iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { "-" } else { "+" });
            }
            let mono: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| if e == 1 { vars[i].clone() } else { format!("{}^{}", vars[i], e) })
                .collect();
            if mono.is_empty() {
                out.push_str(&rational::format_q(&a));
            } else {
                if !a.is_one() {
                    let _ = write!(out, "{}*", rational::format_q(&a));
                }
                out.push_str(&mono.join("*"));
            }
        }
        out
    }

    /// Parse a polynomial written with `+ - * ^`, integer or `p/q`
    /// coefficients and the given variable names.
    pub fn parse(text: &str, vars: &[String]) -> Result<Self, PolyError> {
        Parser { s: text.as_bytes(), pos: 0, vars }.poly()
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    vars: &'a [String],
}

impl Parser<'_> {
    fn err<T>(&self, msg: &str) -> Result<T, PolyError> {
        Err(PolyError::Parse { pos: self.pos, msg: msg.into() })
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn poly(&mut self) -> Result<MultiPoly, PolyError> {
        let n = self.vars.len();
        let mut p = MultiPoly::zero(n);
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    Q::one()
                }
                Some(b'-') => {
                    self.pos += 1;
                    -Q::one()
                }
                None if !first => break,
                None => return self.err("empty polynomial"),
                _ if first => Q::one(),
                _ => return self.err("expected '+' or '-'"),
            };
            first = false;
            let (m, c) = self.term()?;
            p.add_term(m, c * sign);
            if self.peek().is_none() {
                break;
            }
        }
        Ok(p)
    }

    fn term(&mut self) -> Result<(Monomial, Q), PolyError> {
        let n = self.vars.len();
        let mut m = vec![0u32; n];
        let mut c = Q::one();
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_digit() => c *= self.number()?,
                Some(b) if b.is_ascii_alphabetic() || b == b'_' => {
                    let start = self.pos;
                    while self.pos < self.s.len()
                        && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_')
                    {
                        self.pos += 1;
                    }
                    let name = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                    let Some(i) = self.vars.iter().position(|v| v == name) else {
                        self.pos = start;
                        return self.err(&format!("unknown variable {name}"));
                    };
                    let mut e = 1;
                    if self.peek() == Some(b'^') {
                        self.pos += 1;
                        self.ws();
                        let st = self.pos;
                        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                            self.pos += 1;
                        }
                        e = match std::str::from_utf8(&self.s[st..self.pos]).unwrap().parse() {
                            Ok(v) => v,
                            Err(_) => return self.err("bad exponent"),
                        };
                    }
                    m[i] += e;
                }
                _ => return self.err("expected number or variable"),
            }
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok((m, c))
    }

    fn number(&mut self) -> Result<Q, PolyError> {
        let st = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let num: BigInt = std::str::from_utf8(&self.s[st..self.pos]).unwrap().parse().unwrap();
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.ws();
            let sd = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let den: BigInt = match std::str::from_utf8(&self.s[sd..self.pos]).unwrap().parse() {
                Ok(d) => d,
                Err(_) => return self.err("bad denominator"),
            };
            if den.is_zero() {
                return self.err("zero denominator");
            }
            return Ok(Q::new(num, den));
        }
        Ok(Q::from_integer(num))
    }
}

/// Where a polynomial came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    MapConstraint(usize),
    /// 1-based (row, column) of X·K in original coordinates.
    KernelEntry(usize, usize),
    /// Variable index (hvec position) pinned by the polynomial.
    FixedVar(usize),
    LagrangeRow(usize),
    Normalization,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolySystem {
    pub vars: Vec<String>,
    pub polys: Vec<MultiPoly>,
    pub labels: Vec<Label>,
}

impl PolySystem {
    pub fn new(vars: Vec<String>) -> Self {
        PolySystem { vars, polys: Vec::new(), labels: Vec::new() }
    }

    pub fn push(&mut self, p: MultiPoly, label: Label) {
        assert_eq!(p.nvars(), self.vars.len(), "variable set mismatch");
        self.polys.push(p);
        self.labels.push(label);
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn is_square(&self) -> bool {
        self.polys.len() == self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<Vec<f64>, PolyError> {
        self.polys.iter().map(|p| p.eval_f64(x)).collect()
    }

    pub fn eval_q(&self, x: &[Q]) -> Result<Vec<Q>, PolyError> {
        self.polys.iter().map(|p| p.eval_q(x)).collect()
    }

    pub fn display(&self) -> Vec<String> {
        self.polys.iter().map(|p| p.to_string_with(&self.vars)).collect()
    }
}

pub fn jacobian(f: &PolySystem) -> Vec<Vec<MultiPoly>> {
    f.polys.iter().map(|p| (0..f.nvars()).map(|j| p.derivative(j)).collect()).collect()
}

pub fn jacobian_f64(jac: &[Vec<MultiPoly>], x: &[f64]) -> crate::linalg::Matrix {
    let rows = jac.len();
    let cols = jac.first().map_or(x.len(), |r| r.len());
    crate::linalg::Matrix::from_fn(rows, cols, |i, j| jac[i][j].eval_f64(x).expect("point length"))
}

/// The Lagrange system f = 0, zᵀJ(φ,f) = 0, zᵀu = 1 in variables (x, z₀…z_c).
pub fn lagrange_system(f: &PolySystem, phi: &MultiPoly, u: &[Q]) -> Result<PolySystem, PolyError> {
    let n = f.nvars();
    let c = f.len();
    if u.len() != c + 1 {
        return Err(PolyError::ULength { expected: c + 1, got: u.len() });
    }
    if u.iter().all(|x| x.is_zero()) {
        return Err(PolyError::ZeroU);
    }
    if phi.total_degree() > 1 || phi.nvars() != n {
        return Err(PolyError::NonlinearPhi);
    }
    let total = n + c + 1;
    let mut vars = f.vars.clone();
    vars.extend((0..=c).map(|i| format!("z{i}")));
    let lift: Vec<Option<usize>> = (0..n).map(Some).collect();
    let mut sys = PolySystem::new(vars);
    for (p, l) in f.polys.iter().zip(&f.labels) {
        sys.push(p.remap(total, &lift), l.clone());
    }
    let mut rows = vec![phi.remap(total, &lift)];
    rows.extend(f.polys.iter().map(|p| p.remap(total, &lift)));
    for j in 0..n {
        let mut acc = MultiPoly::zero(total);
        for (i, g) in rows.iter().enumerate() {
            let d = g.derivative(j);
            if !d.is_zero() {
                acc = acc.add(&d.mul(&MultiPoly::var(total, n + i)));
            }
        }
        sys.push(acc, Label::LagrangeRow(j));
    }
    let mut norm = MultiPoly::constant(total, -Q::one());
    for (i, ui) in u.iter().enumerate() {
        norm = norm.add(&MultiPoly::var(total, n + i).scale(ui));
    }
    sys.push(norm, Label::Normalization);
    Ok(sys)
}

/// Seeded draw of a linear form φ with nonzero integer coefficients in
/// [−99,99] and a nonzero integer vector u of length c+1.
pub fn random_phi_u(nvars: usize, c: usize, seed: u64) -> (MultiPoly, Vec<Q>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nonzero = |rng: &mut ChaCha8Rng| loop {
        let v: i64 = rng.gen_range(-99..=99);
        if v != 0 {
            return rational::q(v);
        }
    };
    let coeffs: Vec<Q> = (0..nvars).map(|_| nonzero(&mut rng)).collect();
    let u: Vec<Q> = (0..=c).map(|_| nonzero(&mut rng)).collect();
    (MultiPoly::linear(&coeffs, Q::zero()), u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn evaluation_examples() {
        let vars = names(&["x1", "x2"]);
        let p = MultiPoly::parse("x1*x2 - 1", &vars).unwrap();
        assert_eq!(p.eval_q(&[q(1), q(1)]).unwrap(), q(0));
        let vars = names(&["x22", "x23", "y1", "y2"]);
        let f = MultiPoly::parse("y1 - 1/2*x22 + 1/2", &vars).unwrap();
        assert_eq!(f.eval_q(&[q(1), q(0), q(0), q(0)]).unwrap(), q(0));
        assert_eq!(f.eval_q(&[q(3), q(0), q(1), q(0)]).unwrap(), q(0));
        assert!(matches!(f.eval_q(&[q(1)]), Err(PolyError::Length { .. })));
    }

    #[test]
    fn printing_is_grevlex() {
        let vars = names(&["a", "b", "c"]);
        let p = MultiPoly::parse("c^2 + a*b + b^2 + a^2 + 3 - 2*a", &vars).unwrap();
        assert_eq!(p.to_string_with(&vars), "a^2+a*b+b^2+c^2-2*a+3");
        let back = MultiPoly::parse(&p.to_string_with(&vars), &vars).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn jacobian_of_square() {
        let mut s = PolySystem::new(names(&["x"]));
        s.push(MultiPoly::parse("x^2-1", &s.vars).unwrap(), Label::Normalization);
        let j = jacobian(&s);
        assert_eq!(j[0][0], MultiPoly::parse("2*x", &s.vars).unwrap());
    }

    #[test]
    fn lagrange_shape_and_errors() {
        let mut s = PolySystem::new(names(&["x"]));
        s.push(MultiPoly::parse("x-1", &s.vars).unwrap(), Label::MapConstraint(0));
        let phi = MultiPoly::var(1, 0);
        let l = lagrange_system(&s, &phi, &[q(1), q(1)]).unwrap();
        assert_eq!(l.len(), 3);
        assert_eq!(l.display(), vec!["x-1", "z0+z1", "z0+z1-1"]);
        assert_eq!(lagrange_system(&s, &phi, &[q(0), q(0)]), Err(PolyError::ZeroU));
        let sq = MultiPoly::parse("x^2", &s.vars).unwrap();
        assert_eq!(lagrange_system(&s, &sq, &[q(1), q(1)]), Err(PolyError::NonlinearPhi));
    }

    #[test]
    fn phi_u_draws() {
        let (a, ua) = random_phi_u(4, 3, 11);
        let (b, ub) = random_phi_u(4, 3, 11);
        assert_eq!((a.clone(), ua.clone()), (b, ub));
        assert_eq!(ua.len(), 4);
        for seed in 0..1000 {
            let (p, u) = random_phi_u(5, 2, seed);
            assert_eq!(p.num_terms(), 5);
            assert!(u.iter().all(|x| !x.is_zero()));
        }
        let mut distinct = std::collections::HashSet::new();
        for seed in 0..200 {
            distinct.insert(random_phi_u(4, 1, seed).0.to_string_with(&names(&["a", "b", "c", "d"])));
        }
        assert_eq!(distinct.len(), 200);
    }

    #[test]
    fn primitive_and_substitution() {
        let vars = names(&["x", "y"]);
        let p = MultiPoly::parse("1/2*x - 3/4*y + 1/4", &vars).unwrap();
        assert_eq!(p.primitive().to_string_with(&vars), "2*x-3*y+1");
        let s = p.substitute(0, &MultiPoly::parse("y+1", &vars).unwrap());
        assert_eq!(s, MultiPoly::parse("-1/4*y + 3/4", &vars).unwrap());
        assert_eq!(qf(1, 2), MultiPoly::parse("1/2", &vars).unwrap().constant_term());
    }
}
