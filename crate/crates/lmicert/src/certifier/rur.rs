//! Exact-solver interface: input export, rational parametrization parsing
//! and real point extraction.

use std::io::Write as _;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::interval::Interval;
use super::upoly::{isolate_real_roots, UPoly};
use crate::poly::{MultiPoly, PolySystem};
use crate::rational::{self, Q};

#[derive(Debug, Error, PartialEq)]
pub enum RurError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("solver reports a positive-dimensional solution set")]
    PositiveDimensional,
    #[error("invalid parametrization: {0}")]
    Invalid(String),
    #[error("empty system")]
    EmptySystem,
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver timed out after {0:?}")]
    Timeout(Duration),
    #[error("solver i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver exited with status {0}")]
    Failed(i32),
}

/// x_i = q_i(t) / (c_i · q₀(t)) at the real roots of q.
#[derive(Clone, Debug, PartialEq)]
pub struct Rur {
    pub var_names: Vec<String>,
    pub linform: Vec<Q>,
    pub q: UPoly,
    pub denom: UPoly,
    pub numerators: Vec<(UPoly, Q)>,
}

#[derive(Clone, Debug, PartialEq)]
enum Tree {
    Int(BigInt, usize),
    Str(String, usize),
    List(Vec<Tree>, usize),
}

impl Tree {
    fn pos(&self) -> usize {
        match self {
            Tree::Int(_, p) | Tree::Str(_, p) | Tree::List(_, p) => *p,
        }
    }

    fn list(&self, what: &str) -> Result<&[Tree], RurError> {
        match self {
            Tree::List(v, _) => Ok(v),
            t => Err(RurError::Parse { pos: t.pos(), msg: format!("expected list for {what}") }),
        }
    }

    fn int(&self, what: &str) -> Result<&BigInt, RurError> {
        match self {
            Tree::Int(v, _) => Ok(v),
            t => Err(RurError::Parse { pos: t.pos(), msg: format!("expected integer for {what}") }),
        }
    }

    fn small(&self, what: &str) -> Result<i64, RurError> {
        let v = self.int(what)?;
        i64::try_from(v).map_err(|_| RurError::Parse { pos: self.pos(), msg: format!("{what} out of range") })
    }
}

struct Reader<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn ws(&mut self) {
        while self.pos < self.s.len() && (self.s[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn err<T>(&self, msg: &str) -> Result<T, RurError> {
        Err(RurError::Parse { pos: self.pos, msg: msg.to_string() })
    }

    fn tree(&mut self) -> Result<Tree, RurError> {
        self.ws();
        let start = self.pos;
        match self.s.get(self.pos) {
            None => self.err("unexpected end of input"),
            Some(b'[') => {
                self.pos += 1;
                let mut items = Vec::new();
                self.ws();
                if self.s.get(self.pos) == Some(&b']') {
                    self.pos += 1;
                    return Ok(Tree::List(items, start));
                }
                loop {
                    items.push(self.tree()?);
                    self.ws();
                    match self.s.get(self.pos) {
                        Some(b',') => self.pos += 1,
                        Some(b']') => {
                            self.pos += 1;
                            return Ok(Tree::List(items, start));
                        }
                        None => return self.err("unexpected end of input"),
                        _ => return self.err("expected ',' or ']'"),
                    }
                }
            }
            Some(b'\'') | Some(b'"') => {
                let quote = self.s[self.pos];
                self.pos += 1;
                let from = self.pos;
                while self.pos < self.s.len() && self.s[self.pos] != quote {
                    self.pos += 1;
                }
                if self.pos == self.s.len() {
                    return self.err("unterminated string");
                }
                let v = String::from_utf8_lossy(&self.s[from..self.pos]).into_owned();
                self.pos += 1;
                Ok(Tree::Str(v, start))
            }
            Some(c) if *c == b'-' || c.is_ascii_digit() => {
                self.pos += 1;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                match txt.parse::<BigInt>() {
                    Ok(v) => Ok(Tree::Int(v, start)),
                    Err(_) => Err(RurError::Parse { pos: start, msg: "bad integer".into() }),
                }
            }
            Some(_) => self.err("unexpected character"),
        }
    }
}

fn parse_tree(text: &str) -> Result<Tree, RurError> {
    let mut r = Reader { s: text.as_bytes(), pos: 0 };
    let t = r.tree()?;
    r.ws();
    if r.s.get(r.pos) == Some(&b':') {
        r.pos += 1;
        r.ws();
    }
    if r.pos != r.s.len() {
        return r.err("trailing input");
    }
    Ok(t)
}

/// `[d, [c0, …, cd]]` with ascending coefficients.
fn upoly(t: &Tree) -> Result<UPoly, RurError> {
    let v = t.list("polynomial")?;
    if v.len() != 2 {
        return Err(RurError::Parse { pos: t.pos(), msg: "polynomial must be [degree, coefficients]".into() });
    }
    let d = v[0].small("degree")?;
    let cs = v[1].list("coefficients")?;
    let coeffs: Vec<Q> = cs.iter().map(|c| c.int("coefficient").map(|i| Q::from_integer(i.clone()))).collect::<Result<_, _>>()?;
    if d >= 0 && coeffs.len() != d as usize + 1 {
        return Err(RurError::Parse { pos: t.pos(), msg: format!("degree {d} but {} coefficients", coeffs.len()) });
    }
    Ok(UPoly::new(coeffs))
}

/// Layout: `[dim, [nb, [char, nvars, deg, [vars], [linform],
/// [[q], [q₀], [[[qᵢ], cᵢ], …]]]]]`; dim = 1 flags positive dimension and
/// dim = −1 an empty solution set.
pub fn parse_rur(text: &str) -> Result<Rur, RurError> {
    let t = parse_tree(text)?;
    let top = t.list("top level")?;
    let Some(flag) = top.first() else {
        return Err(RurError::Parse { pos: t.pos(), msg: "empty output".into() });
    };
    match flag.small("dimension flag")? {
        1 => return Err(RurError::PositiveDimensional),
        -1 => {
            return Ok(Rur {
                var_names: Vec::new(),
                linform: Vec::new(),
                q: UPoly::from_ints(&[1]),
                denom: UPoly::from_ints(&[1]),
                numerators: Vec::new(),
            })
        }
        0 => {}
        f => return Err(RurError::Parse { pos: flag.pos(), msg: format!("unknown dimension flag {f}") }),
    }
    let body = top.get(1).ok_or(RurError::Parse { pos: t.pos(), msg: "missing parametrization".into() })?;
    let body = body.list("parametrization block")?;
    let param = body.get(1).ok_or(RurError::Parse { pos: t.pos(), msg: "missing parametrization".into() })?;
    let p = param.list("parametrization")?;
    if p.len() != 6 {
        return Err(RurError::Parse { pos: param.pos(), msg: "parametrization needs 6 fields".into() });
    }
    let nvars = p[1].small("variable count")? as usize;
    let deg = p[2].small("degree")?;
    let var_names: Vec<String> = p[3]
        .list("variables")?
        .iter()
        .map(|v| match v {
            Tree::Str(s, _) => Ok(s.clone()),
            o => Err(RurError::Parse { pos: o.pos(), msg: "variable names must be strings".into() }),
        })
        .collect::<Result<_, _>>()?;
    let linform: Vec<Q> =
        p[4].list("linear form")?.iter().map(|c| c.int("linear form").map(|i| Q::from_integer(i.clone()))).collect::<Result<_, _>>()?;
    let polys = p[5].list("polynomials")?;
    if polys.len() != 3 {
        return Err(RurError::Parse { pos: p[5].pos(), msg: "expected [q, q0, numerators]".into() });
    }
    let q = upoly(&polys[0])?;
    let denom = upoly(&polys[1])?;
    let mut numerators = Vec::new();
    for e in polys[2].list("numerators")? {
        let pair = e.list("numerator")?;
        if pair.len() != 2 {
            return Err(RurError::Parse { pos: e.pos(), msg: "numerator must be [poly, c]".into() });
        }
        numerators.push((upoly(&pair[0])?, Q::from_integer(pair[1].int("numerator scale")?.clone())));
    }
    if var_names.len() != nvars || numerators.len() != nvars {
        return Err(RurError::Invalid(format!("{nvars} variables declared, {} names, {} numerators", var_names.len(), numerators.len())));
    }
    if deg >= 0 && q.degree() != deg as usize {
        return Err(RurError::Invalid(format!("declared degree {deg}, q has degree {}", q.degree())));
    }
    if q.is_zero() {
        return Err(RurError::Invalid("q is zero".into()));
    }
    for (qi, c) in &numerators {
        if qi.degree() > q.degree() {
            return Err(RurError::Invalid("numerator degree exceeds deg q".into()));
        }
        if c.is_zero() {
            return Err(RurError::Invalid("zero numerator scale".into()));
        }
    }
    Ok(Rur { var_names, linform, q, denom, numerators })
}

/// Serialize in the layout accepted by [`parse_rur`].
pub fn format_rur(r: &Rur) -> String {
    fn ints(p: &UPoly) -> String {
        let l = rational::lcm_denominators(p.coeffs());
        let c: Vec<String> = p.coeffs().iter().map(|a| (a * Q::from_integer(l.clone())).to_integer().to_string()).collect();
        format!("[{}, [{}]]", p.degree(), c.join(", "))
    }
    let vars: Vec<String> = r.var_names.iter().map(|v| format!("'{v}'")).collect();
    let lf: Vec<String> = r.linform.iter().map(|c| c.to_integer().to_string()).collect();
    let nums: Vec<String> = r.numerators.iter().map(|(p, c)| format!("[{}, {}]", ints(p), c.to_integer())).collect();
    format!(
        "[0, [1, [0, {}, {}, [{}], [{}], [{}, {}, [{}]]]]]:\n",
        r.var_names.len(),
        r.q.degree(),
        vars.join(", "),
        lf.join(", "),
        ints(&r.q),
        ints(&r.denom),
        nums.join(", ")
    )
}

#[derive(Clone, Debug)]
pub struct RurPoint {
    pub t: Interval,
    pub coords: Vec<Interval>,
    /// Exact coordinates when the root t is rational and was hit exactly.
    pub exact: Option<Vec<Q>>,
}

#[derive(Clone, Debug)]
pub struct RealPoints {
    pub points: Vec<RurPoint>,
    pub took_squarefree_part: bool,
}

fn coords_at(r: &Rur, t: &Interval) -> Option<Vec<Interval>> {
    let d = r.denom.eval_interval(t);
    if d.contains_zero() {
        return None;
    }
    let inv = Interval::new(Q::from_integer(1.into()) / &d.hi, Q::from_integer(1.into()) / &d.lo);
    Some(
        r.numerators
            .iter()
            .map(|(qi, c)| qi.eval_interval(t).mul(&inv).scale(&(Q::from_integer(1.into()) / c)).round_out(super::interval::BITS))
            .collect(),
    )
}

/// One interval vector per real root of q, each coordinate narrower than
/// `width` when attainable within the refinement budget.
pub fn rur_real_points(r: &Rur, width: &Q) -> Result<RealPoints, RurError> {
    if r.q.is_zero() {
        return Err(RurError::Invalid("q is zero".into()));
    }
    let took = !r.q.is_squarefree();
    let q = if took { r.q.squarefree_part() } else { r.q.clone() };
    let mut points = Vec::new();
    for t in isolate_real_roots(&q, width) {
        if t.is_point() {
            let x = &t.lo;
            let den = r.denom.eval(x);
            if den.is_zero() {
                return Err(RurError::Invalid("denominator vanishes at a root".into()));
            }
            let ex: Vec<Q> = r.numerators.iter().map(|(qi, c)| qi.eval(x) / (c * &den)).collect();
            points.push(RurPoint { coords: ex.iter().cloned().map(Interval::point).collect(), exact: Some(ex), t });
            continue;
        }
        let mut t = t;
        let mut w = width.clone();
        let mut coords = None;
        for _ in 0..200 {
            if let Some(c) = coords_at(r, &t) {
                if c.iter().all(|i| &i.width() < width) {
                    coords = Some(c);
                    break;
                }
                coords = Some(c);
            }
            w /= Q::from_integer(1024.into());
            t = shrink(&q, t, &w);
            if t.is_point() {
                break;
            }
        }
        if t.is_point() {
            let x = &t.lo;
            let den = r.denom.eval(x);
            let ex: Vec<Q> = r.numerators.iter().map(|(qi, c)| qi.eval(x) / (c * &den)).collect();
            points.push(RurPoint { coords: ex.iter().cloned().map(Interval::point).collect(), exact: Some(ex), t });
            continue;
        }
        let coords = coords.ok_or_else(|| RurError::Invalid("denominator vanishes at a root".into()))?;
        points.push(RurPoint { t, coords, exact: None });
    }
    Ok(RealPoints { points, took_squarefree_part: took })
}

fn shrink(q: &UPoly, t: Interval, w: &Q) -> Interval {
    super::upoly::refine(q, &super::upoly::Sturm::new(q), t.lo, t.hi, w)
}

/// Variables line, characteristic line, then the denominator-cleared
/// polynomials separated by commas.
pub fn export_solver_input(f: &PolySystem) -> Result<String, RurError> {
    if f.is_empty() {
        return Err(RurError::EmptySystem);
    }
    let mut s = f.vars.join(",");
    s.push_str("\n0\n");
    let lines: Vec<String> = f.polys.iter().map(|p| integer_scaled(p).to_string_with(&f.vars)).collect();
    s.push_str(&lines.join(",\n"));
    s.push('\n');
    Ok(s)
}

pub fn integer_scaled(p: &MultiPoly) -> MultiPoly {
    let l = rational::lcm_denominators(p.terms().map(|(_, c)| c));
    p.scale(&Q::from_integer(l))
}

/// Reader for the format written by [`export_solver_input`].
pub fn parse_solver_input(text: &str) -> Result<(Vec<String>, Vec<MultiPoly>), RurError> {
    let mut lines = text.lines();
    let vars: Vec<String> = lines
        .next()
        .ok_or(RurError::Parse { pos: 0, msg: "missing variables line".into() })?
        .split(',')
        .map(|v| v.trim().to_string())
        .collect();
    let ch = lines.next().ok_or(RurError::Parse { pos: text.len(), msg: "missing characteristic".into() })?;
    if ch.trim() != "0" {
        return Err(RurError::Parse { pos: 0, msg: "only characteristic 0 is supported".into() });
    }
    let body: String = lines.collect::<Vec<_>>().join("");
    let mut polys = Vec::new();
    for part in body.split(',').filter(|p| !p.trim().is_empty()) {
        polys.push(
            MultiPoly::parse(part.trim(), &vars).map_err(|e| RurError::Parse { pos: 0, msg: e.to_string() })?,
        );
    }
    Ok((vars, polys))
}

/// Run `bin -f input -o output -P 1` with a wall-clock limit.
pub fn run_solver(bin: &Path, input: &str, timeout: Duration) -> Result<String, SolverError> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let tag = format!("lmicert-{}-{}", std::process::id(), COUNTER.fetch_add(1, Ordering::Relaxed));
    let dir = std::env::temp_dir();
    let inp = dir.join(format!("{tag}.in"));
    let out = dir.join(format!("{tag}.out"));
    std::fs::File::create(&inp)?.write_all(input.as_bytes())?;
    let mut child = Command::new(bin)
        .arg("-f")
        .arg(&inp)
        .arg("-o")
        .arg(&out)
        .arg("-P")
        .arg("1")
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()?;
    let start = Instant::now();
    let status = loop {
        if let Some(s) = child.try_wait()? {
            break s;
        }
        if start.elapsed() >= timeout {
            let _ = child.kill();
            let _ = child.wait();
            let _ = std::fs::remove_file(&inp);
            return Err(SolverError::Timeout(timeout));
        }
        std::thread::sleep(Duration::from_millis(20));
    };
    let _ = std::fs::remove_file(&inp);
    if !status.success() {
        return Err(SolverError::Failed(status.code().unwrap_or(-1)));
    }
    let text = std::fs::read_to_string(&out)?;
    let _ = std::fs::remove_file(&out);
    Ok(text)
}
