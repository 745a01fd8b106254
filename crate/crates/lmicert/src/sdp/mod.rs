//! SDP feasibility instances 𝒜(X) = b, their text format and rotations.

mod corpus;

pub use corpus::{corpus, corpus_entry, CorpusEntry, CERTIFIABLE};

use std::collections::HashSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{exact, SymF, SymQ};
use crate::rational::{self, Q};

#[derive(Debug, Error, PartialEq)]
pub enum SdpError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("m must be ≥ 1")]
    NoConstraints,
    #[error("line {line}: index out of range")]
    IndexOutOfRange { line: usize },
    #[error("line {line}: duplicate entry")]
    Duplicate { line: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("rotation matrix is singular")]
    SingularRotation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpInstance {
    pub name: String,
    pub n: usize,
    pub a: Vec<SymQ>,
    pub b: Vec<Q>,
    pub c: Option<SymQ>,
}

impl SdpInstance {
    pub fn m(&self) -> usize {
        self.a.len()
    }

    /// (⟨A₁,X⟩_F, …, ⟨A_m,X⟩_F) in exact arithmetic.
    pub fn apply_map(&self, x: &SymQ) -> Result<Vec<Q>, SdpError> {
        self.check_dim(x.n())?;
        Ok(self.a.iter().map(|a| a.dot(x)).collect())
    }

    pub fn apply_map_f64(&self, x: &SymF) -> Result<Vec<f64>, SdpError> {
        self.check_dim(x.n())?;
        Ok(self.a.iter().map(|a| a.to_f64().dot(x)).collect())
    }

    /// ‖𝒜(X) − b‖₂.
    pub fn residual_f64(&self, x: &SymF) -> f64 {
        let ax = self.apply_map_f64(x).expect("dimension");
        ax.iter().zip(&self.b).map(|(v, b)| (v - rational::to_f64(b)).powi(2)).sum::<f64>().sqrt()
    }

    pub fn b_f64(&self) -> Vec<f64> {
        self.b.iter().map(rational::to_f64).collect()
    }

    fn check_dim(&self, got: usize) -> Result<(), SdpError> {
        if got != self.n {
            return Err(SdpError::Dimension { expected: self.n, got });
        }
        Ok(())
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {}", self.name);
        let _ = writeln!(s, "n {}", self.n);
        let _ = writeln!(s, "m {}", self.m());
        let bs: Vec<String> = self.b.iter().map(rational::format_q).collect();
        let _ = writeln!(s, "b {}", bs.join(" "));
        for (k, a) in self.a.iter().enumerate() {
            for i in 0..self.n {
                for j in i..self.n {
                    let v = a.get(i, j);
                    if !v.is_zero() {
                        let _ = writeln!(s, "A {} {} {} {}", k + 1, i + 1, j + 1, rational::format_q(v));
                    }
                }
            }
        }
        if let Some(c) = &self.c {
            for i in 0..self.n {
                for j in i..self.n {
                    let v = c.get(i, j);
                    if !v.is_zero() {
                        let _ = writeln!(s, "C {} {} {}", i + 1, j + 1, rational::format_q(v));
                    }
                }
            }
        }
        s
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> SdpError {
    SdpError::Parse { line, msg: msg.into() }
}

/// Parse the line-oriented instance format. The first comment line, if
/// any, becomes the instance name.
pub fn parse_instance(text: &str) -> Result<SdpInstance, SdpError> {
    let mut name = None;
    let mut n = None;
    let mut m = None;
    let mut b: Option<Vec<Q>> = None;
    let mut entries: Vec<(usize, usize, usize, usize, Q)> = Vec::new();
    let mut centries: Vec<(usize, usize, usize, Q)> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(c) = t.strip_prefix('#') {
            if name.is_none() && !c.trim().is_empty() {
                name = Some(c.trim().to_string());
            }
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        let int = |s: &str| s.parse::<usize>().map_err(|_| parse_err(line, format!("bad integer '{s}'")));
        let rat = |s: &str| rational::parse_q(s).ok_or_else(|| parse_err(line, format!("bad rational '{s}'")));
        match toks[0] {
            "n" if toks.len() == 2 => n = Some(int(toks[1])?),
            "m" if toks.len() == 2 => m = Some(int(toks[1])?),
            "b" => b = Some(toks[1..].iter().map(|s| rat(s)).collect::<Result<_, _>>()?),
            "A" if toks.len() == 5 => {
                entries.push((line, int(toks[1])?, int(toks[2])?, int(toks[3])?, rat(toks[4])?))
            }
            "C" if toks.len() == 4 => centries.push((line, int(toks[1])?, int(toks[2])?, rat(toks[3])?)),
            _ => return Err(parse_err(line, format!("unrecognized line '{t}'"))),
        }
    }
    let n = n.ok_or_else(|| parse_err(0, "missing 'n' header"))?;
    let m = m.ok_or_else(|| parse_err(0, "missing 'm' header"))?;
    if n == 0 {
        return Err(parse_err(0, "n must be ≥ 1"));
    }
    if m == 0 {
        return Err(SdpError::NoConstraints);
    }
    let b = b.ok_or_else(|| parse_err(0, "missing 'b' line"))?;
    if b.len() != m {
        return Err(parse_err(0, format!("b has {} entries, m = {m}", b.len())));
    }
    let mut a = vec![SymQ::zeros(n); m];
    let mut seen = HashSet::new();
    for (line, k, i, j, v) in entries {
        if k == 0 || k > m || i == 0 || i > n || j == 0 || j > n {
            return Err(SdpError::IndexOutOfRange { line });
        }
        let (i, j) = (i.min(j), i.max(j));
        if !seen.insert((k, i, j)) {
            return Err(SdpError::Duplicate { line });
        }
        a[k - 1].set(i - 1, j - 1, v);
    }
    let c = if centries.is_empty() {
        None
    } else {
        let mut c = SymQ::zeros(n);
        let mut cseen = HashSet::new();
        for (line, i, j, v) in centries {
            if i == 0 || i > n || j == 0 || j > n {
                return Err(SdpError::IndexOutOfRange { line });
            }
            let (i, j) = (i.min(j), i.max(j));
            if !cseen.insert((i, j)) {
                return Err(SdpError::Duplicate { line });
            }
            c.set(i - 1, j - 1, v);
        }
        Some(c)
    };
    Ok(SdpInstance { name: name.unwrap_or_else(|| "unnamed".into()), n, a, b, c })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationSpec {
    pub t: Vec<Vec<i64>>,
    pub seed: u64,
}

impl RotationSpec {
    /// Integer matrix with entries uniform in [−3,3], redrawn until nonsingular.
    pub fn from_seed(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let t: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-3..=3)).collect()).collect();
            let spec = RotationSpec { t, seed };
            if !exact::det(&spec.t_q()).is_zero() {
                return spec;
            }
        }
    }

    pub fn t_q(&self) -> Vec<Vec<Q>> {
        self.t.iter().map(|r| r.iter().map(|&v| Q::from_integer(BigInt::from(v))).collect()).collect()
    }

    pub fn t_inv(&self) -> Option<Vec<Vec<Q>>> {
        exact::inverse(&self.t_q())
    }
}

/// Aᵢ ↦ TᵀAᵢT (and likewise C); b is unchanged.
pub fn rotate_instance(inst: &SdpInstance, spec: &RotationSpec) -> Result<SdpInstance, SdpError> {
    let t = spec.t_q();
    if t.len() != inst.n {
        return Err(SdpError::Dimension { expected: inst.n, got: t.len() });
    }
    if exact::det(&t).is_zero() {
        return Err(SdpError::SingularRotation);
    }
    Ok(SdpInstance {
        name: format!("{}@T{}", inst.name, spec.seed),
        n: inst.n,
        a: inst.a.iter().map(|a| a.congruence(&t)).collect(),
        b: inst.b.clone(),
        c: inst.c.as_ref().map(|c| c.congruence(&t)),
    })
}

/// M·X·Mᵀ for an exact square M.
pub fn congruent_transform(x: &SymQ, m: &[Vec<Q>]) -> SymQ {
    x.congruence(&exact::transpose(&m.to_vec()))
}
