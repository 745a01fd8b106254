//! Local isolation test: dimensions of the Macaulay dual space of the ideal
//! at a rational point, computed modulo a large prime.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::poly::MultiPoly;
use crate::rational::Q;

pub const PRIME: u64 = (1 << 61) - 1;

#[derive(Clone, Copy, Debug)]
pub struct DualOpts {
    pub d_max: u32,
    pub col_budget: usize,
}

impl Default for DualOpts {
    fn default() -> Self {
        DualOpts { d_max: 6, col_budget: 1000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Isolation {
    /// Dual dimensions stabilized; the last entry is the multiplicity.
    Isolated { dims: Vec<usize> },
    /// Still growing at `d_max`.
    Growing { dims: Vec<usize> },
    OverBudget { dims: Vec<usize> },
    NotAZero,
    UnluckyPrime,
}

impl Isolation {
    pub fn is_isolated(&self) -> bool {
        matches!(self, Isolation::Isolated { .. })
    }

    pub fn multiplicity(&self) -> Option<usize> {
        match self {
            Isolation::Isolated { dims } => dims.last().copied(),
            _ => None,
        }
    }
}

fn mulm(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn powm(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulm(r, a);
        }
        a = mulm(a, a);
        e >>= 1;
    }
    r
}

fn invm(a: u64) -> u64 {
    powm(a, PRIME - 2)
}

fn big_mod(x: &BigInt) -> u64 {
    x.mod_floor(&BigInt::from(PRIME)).to_u64().unwrap()
}

fn q_mod(x: &Q) -> Option<u64> {
    let d = big_mod(x.denom());
    if d == 0 {
        return None;
    }
    Some(mulm(big_mod(x.numer()), invm(d)))
}

/// Monomials in `n` variables of total degree ≤ d, by degree then lex.
fn monomials(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e);
            rec(n, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for k in 0..=d {
        let mut level = Vec::new();
        rec(n, k, &mut Vec::new(), &mut level);
        level.retain(|m| m.iter().sum::<u32>() == k);
        out.extend(level);
    }
    out
}

fn binom(n: usize, k: usize) -> usize {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r.min(usize::MAX as u128) as usize
}

/// Rank of a set of sparse rows modulo PRIME by leading-entry elimination.
fn sparse_rank(rows: Vec<Vec<(usize, u64)>>, ncols: usize) -> usize {
    let mut pivots: HashMap<usize, Vec<(usize, u64)>> = HashMap::new();
    for mut row in rows {
        if pivots.len() == ncols {
            break;
        }
        loop {
            row.retain(|&(_, v)| v != 0);
            let Some(&(lead, lv)) = row.first() else { break };
            match pivots.get(&lead) {
                None => {
                    let inv = invm(lv);
                    for e in row.iter_mut() {
                        e.1 = mulm(e.1, inv);
                    }
                    pivots.insert(lead, row);
                    break;
                }
                Some(p) => {
                    // row −= lv · p, merging sorted column lists
                    let mut out = Vec::with_capacity(row.len() + p.len());
                    let (mut i, mut j) = (0, 0);
                    while i < row.len() || j < p.len() {
                        let take_row = j == p.len() || (i < row.len() && row[i].0 < p[j].0);
                        let take_p = i == row.len() || (j < p.len() && p[j].0 < row[i].0);
                        if take_row {
                            out.push(row[i]);
                            i += 1;
                        } else if take_p {
                            out.push((p[j].0, (PRIME - mulm(lv, p[j].1)) % PRIME));
                            j += 1;
                        } else {
                            let v = (row[i].1 + PRIME - mulm(lv, p[j].1)) % PRIME;
                            out.push((row[i].0, v));
                            i += 1;
                            j += 1;
                        }
                    }
                    row = out;
                }
            }
        }
    }
    pivots.len()
}

/// Dual-space dimensions at orders 1, 2, … of the ideal generated by
/// `polys` at `point`; isolated when two consecutive orders agree.
pub fn isolation_gate(polys: &[MultiPoly], point: &[Q], opts: DualOpts) -> Isolation {
    let nv = point.len();
    let used: Vec<usize> = (0..nv).filter(|&v| polys.iter().any(|p| p.uses_var(v))).collect();
    let n = used.len();
    let mut map = vec![None; nv];
    for (k, &v) in used.iter().enumerate() {
        map[v] = Some(k);
    }
    // shift to the origin and reduce
    let mut shifted: Vec<Vec<(Vec<u32>, u64)>> = Vec::new();
    for p in polys {
        let mut s = p.clone();
        for &v in &used {
            if point[v].is_zero() || !s.uses_var(v) {
                continue;
            }
            s = s.substitute(v, &MultiPoly::var(nv, v).add(&MultiPoly::constant(nv, point[v].clone())));
        }
        let s = s.remap(n, &map);
        if !s.constant_term().is_zero() {
            return Isolation::NotAZero;
        }
        let mut terms = Vec::new();
        for (m, c) in s.terms() {
            let Some(v) = q_mod(c) else { return Isolation::UnluckyPrime };
            if v != 0 {
                terms.push((m.clone(), v));
            }
        }
        if !terms.is_empty() {
            shifted.push(terms);
        }
    }
    let mut dims = vec![1usize];
    for d in 1..=opts.d_max {
        let ncols = binom(n + d as usize, d as usize);
        if ncols > opts.col_budget {
            return Isolation::OverBudget { dims };
        }
        let cols = monomials(n, d);
        let index: HashMap<&[u32], usize> = cols.iter().enumerate().map(|(i, m)| (m.as_slice(), i)).collect();
        let mults = monomials(n, d - 1);
        let mut rows = Vec::new();
        for f in &shifted {
            for m in &mults {
                let md: u32 = m.iter().sum();
                let mut row: Vec<(usize, u64)> = Vec::new();
                for (e, c) in f {
                    let deg: u32 = e.iter().sum::<u32>() + md;
                    if deg > d {
                        continue;
                    }
                    let prod: Vec<u32> = e.iter().zip(m).map(|(a, b)| a + b).collect();
                    row.push((index[prod.as_slice()], *c));
                }
                if !row.is_empty() {
                    row.sort_unstable();
                    rows.push(row);
                }
            }
        }
        let dim = ncols - sparse_rank(rows, ncols);
        let prev = *dims.last().unwrap();
        dims.push(dim);
        if dim == prev {
            return Isolation::Isolated { dims };
        }
    }
    Isolation::Growing { dims }
}
