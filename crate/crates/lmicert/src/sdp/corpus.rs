//! The 20 benchmark instances, transcribed from their printed equations.

use num_traits::Zero;

use super::SdpInstance;
use crate::linalg::SymQ;
use crate::rational::{self, Q};

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub instance: SdpInstance,
    pub r_min: usize,
    /// `None` where the benchmark table prints "−".
    pub r_max: Option<usize>,
    /// An exact feasible point of rank `r_min`, when one is rational.
    pub min_point: Option<SymQ>,
    /// An exact feasible point of maximum rank, when one is rational.
    pub max_point: Option<SymQ>,
}

/// Rows whose hybrid column is uncrossed and finite.
pub const CERTIFIABLE: [&str; 16] = [
    "DruWo2017-2.3.2P",
    "Gupta2013-12.3P",
    "Hauenstein2.6P",
    "Helmberg2000-2.2.1P",
    "LauVall2020-2.5.1P",
    "LauVall2020-2.5.2P",
    "Pataki2017-4P",
    "deKlerk2002-2.1P",
    "DruWo2017-2.3.2D",
    "Gupta2013-12.3D",
    "HNS2020-4.1D",
    "Hauenstein2.6D",
    "Helmberg2000-2.2.1D",
    "Pataki2017-4D",
    "Permenter2018-4.3.1D",
    "Permenter2018-4.3.2D",
];

/// Parse a linear expression in entries `xij` (e.g. "1 - x33 - 2x12")
/// into (matrix with the ⟨A,X⟩_F convention, constant).
fn linear_expr(n: usize, text: &str) -> (SymQ, Q) {
    let mut a = SymQ::zeros(n);
    let mut constant = Q::zero();
    let cleaned = text.replace(' ', "").replace('-', "+-");
    for term in cleaned.split('+').filter(|t| !t.is_empty()) {
        let (neg, body) = match term.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, term),
        };
        let (coef, var) = match body.find('x') {
            Some(p) => (&body[..p], Some(&body[p + 1..])),
            None => (body, None),
        };
        let mut c = if coef.is_empty() { rational::q(1) } else { rational::parse_q(coef).expect("coefficient") };
        if neg {
            c = -c;
        }
        match var {
            None => constant += c,
            Some(ij) => {
                let b = ij.as_bytes();
                assert_eq!(b.len(), 2, "entry index");
                let (i, j) = ((b[0] - b'1') as usize, (b[1] - b'1') as usize);
                let v = if i == j { c } else { c / rational::q(2) };
                let cur = a.get(i, j).clone();
                a.set(i, j, cur + v);
            }
        }
    }
    (a, constant)
}

fn instance(name: &str, n: usize, objective: &str, constraints: &[&str]) -> SdpInstance {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for eq in constraints {
        let (lhs, rhs) = eq.split_once('=').expect("equation");
        let (al, cl) = linear_expr(n, lhs);
        let (ar, cr) = linear_expr(n, rhs);
        assert!(ar.is_zero(), "variables on the right-hand side");
        a.push(al);
        b.push(cr - cl);
    }
    let c = if objective.trim() == "0" { None } else { Some(linear_expr(n, objective).0) };
    SdpInstance { name: name.into(), n, a, b, c }
}

fn point(n: usize, entries: &[(usize, usize, i64)]) -> SymQ {
    let mut x = SymQ::zeros(n);
    for &(i, j, v) in entries {
        x.set(i - 1, j - 1, rational::q(v));
    }
    x
}

struct Row {
    name: &'static str,
    n: usize,
    r_min: usize,
    r_max: Option<usize>,
    objective: &'static str,
    constraints: &'static [&'static str],
    min_point: Option<&'static [(usize, usize, i64)]>,
    max_point: Option<&'static [(usize, usize, i64)]>,
}

const ROWS: &[Row] = &[
    Row {
        name: "DruWo2017-2.3.2P",
        n: 3,
        r_min: 1,
        r_max: Some(2),
        objective: "x22",
        constraints: &["x33 = 0", "2x13 + x22 = 1"],
        min_point: Some(&[(2, 2, 1)]),
        max_point: Some(&[(1, 1, 1), (2, 2, 1)]),
    },
    Row {
        name: "Gupta2013-12.3P",
        n: 3,
        r_min: 1,
        r_max: Some(2),
        objective: "x33",
        constraints: &["1 - x33 - 2x12 = 0", "x22 = 0"],
        min_point: Some(&[(3, 3, 1)]),
        max_point: Some(&[(1, 1, 1), (3, 3, 1)]),
    },
    Row {
        name: "Hauenstein2.6P",
        n: 3,
        r_min: 1,
        r_max: Some(2),
        objective: "x11",
        constraints: &["x11 + 2x23 = 2", "x22 = 0"],
        min_point: Some(&[(1, 1, 2)]),
        max_point: Some(&[(1, 1, 2), (3, 3, 1)]),
    },
    Row {
        name: "Helmberg2000-2.2.1P",
        n: 3,
        r_min: 1,
        r_max: Some(2),
        objective: "x12",
        constraints: &["x33 - x12 = 1", "x11 = 0", "x13 = 0", "x23 = 0"],
        min_point: Some(&[(3, 3, 1)]),
        max_point: Some(&[(2, 2, 1), (3, 3, 1)]),
    },
    Row {
        name: "LauVall2020-2.5.1P",
        n: 2,
        r_min: 1,
        r_max: Some(1),
        objective: "-2x12",
        constraints: &["x11 = 1", "x22 = 0"],
        min_point: Some(&[(1, 1, 1)]),
        max_point: Some(&[(1, 1, 1)]),
    },
    Row {
        name: "LauVall2020-2.5.2P",
        n: 3,
        r_min: 1,
        r_max: Some(2),
        objective: "-x11 - x22",
        constraints: &["x11 = 0", "2x13 + x22 = 1"],
        min_point: Some(&[(2, 2, 1)]),
        max_point: Some(&[(2, 2, 1), (3, 3, 1)]),
    },
    Row {
        name: "Pataki2017-4P",
        n: 3,
        r_min: 1,
        r_max: Some(2),
        objective: "x11 + x22",
        constraints: &["x11 = 0", "2x13 + x22 = 1"],
        min_point: Some(&[(2, 2, 1)]),
        max_point: Some(&[(2, 2, 1), (3, 3, 1)]),
    },
    Row {
        name: "deKlerk2002-2.1P",
        n: 2,
        r_min: 1,
        r_max: Some(1),
        objective: "2x12 + x22",
        constraints: &["x11 = 0", "x22 - 1 = 0"],
        min_point: Some(&[(2, 2, 1)]),
        max_point: Some(&[(2, 2, 1)]),
    },
    Row {
        name: "DruWo2017-2.3.2D",
        n: 3,
        r_min: 1,
        r_max: Some(2),
        objective: "x22",
        constraints: &["x11 = 0", "x12 = 0", "x22 - x13 - 1 = 0", "x23 = 0"],
        min_point: Some(&[(2, 2, 1)]),
        max_point: Some(&[(2, 2, 1), (3, 3, 1)]),
    },
    Row {
        name: "Gupta2013-12.3D",
        n: 3,
        r_min: 1,
        r_max: Some(2),
        objective: "x33",
        constraints: &["x11 = 0", "2x13 = 0", "2x23 = 0", "x33 - x12 - 1 = 0"],
        min_point: Some(&[(3, 3, 1)]),
        max_point: Some(&[(2, 2, 1), (3, 3, 1)]),
    },
    Row {
        name: "HNS2020-4.1D",
        n: 4,
        r_min: 2,
        r_max: Some(2),
        objective: "x11 + 2x22 + 4x34",
        constraints: &[
            "x11 = 1",
            "x13 = 0",
            "x14 = 0",
            "x22 = 2",
            "x23 = 0",
            "x24 = 0",
            "x33 - 2x12 = 0",
            "2x34 = 4",
            "x44 - x12 = 0",
        ],
        min_point: None,
        max_point: None,
    },
    Row {
        name: "Hauenstein2.6D",
        n: 3,
        r_min: 1,
        r_max: Some(2),
        objective: "x11",
        constraints: &["2x12 = 0", "2x13 = 0", "2x23 - 2x11 + 2 = 0", "x33 = 0"],
        min_point: Some(&[(1, 1, 1)]),
        max_point: Some(&[(1, 1, 1), (2, 2, 1)]),
    },
    Row {
        name: "Helmberg2000-2.2.1D",
        n: 3,
        r_min: 1,
        r_max: Some(2),
        objective: "x12",
        constraints: &["x22 = 0", "2x12 + x33 - 1 = 0"],
        min_point: Some(&[(3, 3, 1)]),
        max_point: Some(&[(1, 1, 1), (3, 3, 1)]),
    },
    Row {
        name: "Pataki2017-4D",
        n: 3,
        r_min: 1,
        r_max: Some(2),
        objective: "x11 + x22",
        constraints: &["2x12 = 0", "x22 - x13 - 1 = 0", "2x23 = 0", "x33 = 0"],
        min_point: Some(&[(2, 2, 1)]),
        max_point: Some(&[(1, 1, 1), (2, 2, 1)]),
    },
    Row {
        name: "Permenter2018-4.3.1D",
        n: 5,
        r_min: 0,
        r_max: Some(1),
        objective: "0",
        constraints: &[
            "x12 = 0",
            "x13 = 0",
            "x14 = 0",
            "x15 = 0",
            "x11 + x22 = 0",
            "x24 = 0",
            "x25 = 0",
            "x34 = 0",
            "x35 = 0",
            "x33 - x23 + x44 = 0",
            "x45 = 0",
        ],
        min_point: Some(&[]),
        max_point: Some(&[(5, 5, 1)]),
    },
    Row {
        name: "Permenter2018-4.3.2D",
        n: 4,
        r_min: 2,
        r_max: Some(2),
        objective: "x11 - x22 - x33 + x44",
        constraints: &[
            "x11 = 1",
            "x13 = 0",
            "x14 + x23 = 0",
            "x24 = 0",
            "2x12 + x33 + 1 = 0",
            "x22 + 2x34 = -1",
            "x44 = 1",
        ],
        min_point: Some(&[(1, 1, 1), (2, 1, -1), (2, 2, 1), (3, 3, 1), (4, 3, -1), (4, 4, 1)]),
        max_point: Some(&[(1, 1, 1), (2, 1, -1), (2, 2, 1), (3, 3, 1), (4, 3, -1), (4, 4, 1)]),
    },
    Row {
        name: "PatakiCleanDim4P",
        n: 4,
        r_min: 1,
        r_max: None,
        objective: "x11 + x22 + x33",
        constraints: &["x11 = 0", "2x14 + x22 = 0", "2x24 + x33 = 10"],
        min_point: Some(&[(3, 3, 10)]),
        max_point: None,
    },
    Row {
        name: "PatakiCleanDim5P",
        n: 5,
        r_min: 1,
        r_max: None,
        objective: "x11 + x22 + x33 + x44",
        constraints: &["x11 = 0", "2x15 + x22 = 0", "2x25 + x33 = 0", "2x35 + x44 = 10"],
        min_point: Some(&[(4, 4, 10)]),
        max_point: None,
    },
    Row {
        name: "PatakiCleanDim6P",
        n: 6,
        r_min: 1,
        r_max: None,
        objective: "x11 + x22 + x33 + x44 + x55",
        constraints: &["x11 = 0", "2x16 + x22 = 0", "2x26 + x33 = 0", "2x36 + x44 = 0", "2x46 + x55 = 10"],
        min_point: Some(&[(5, 5, 10)]),
        max_point: None,
    },
    Row {
        name: "HeNaSa2016-6.2P",
        n: 6,
        r_min: 2,
        r_max: None,
        objective: "x11 - 3x15 + x23 - 4x25 + x33 + 2x44 + x46 + x56 + x66",
        constraints: &[
            "x11 = 1",
            "x12 = 0",
            "x14 = 0",
            "2x13 + x22 = 0",
            "2x23 = 1",
            "2x15 + 2x24 = -3",
            "x33 = 1",
            "2x25 + 2x34 = -4",
            "x35 = 0",
            "2x16 + x44 = 2",
            "x26 + x45 = 0",
            "2x46 = 1",
            "2x36 + x55 = 0",
            "2x56 = 1",
            "x66 = 1",
        ],
        min_point: None,
        max_point: None,
    },
];

pub fn corpus() -> Vec<CorpusEntry> {
    ROWS.iter()
        .map(|r| CorpusEntry {
            instance: instance(r.name, r.n, r.objective, r.constraints),
            r_min: r.r_min,
            r_max: r.r_max,
            min_point: r.min_point.map(|e| point(r.n, e)),
            max_point: r.max_point.map(|e| point(r.n, e)),
        })
        .collect()
}

pub fn corpus_entry(name: &str) -> Option<CorpusEntry> {
    corpus().into_iter().find(|e| e.instance.name == name)
}
