//! Certificates: canonical JSON and independent replay.

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dual::{isolation_gate, DualOpts, Isolation};
use super::interval::{eval_poly, point_box, IBox, Interval};
use super::krawczyk::krawczyk_test;
use super::psd::{psd_certify, PsdVerdict};
use super::recover::check_local_cofactors;
use super::rur::{parse_rur, rur_real_points};
use crate::linalg::{tri, Matrix, RankRevealResult, SymQ};
use crate::pipeline::{build_fixed_system, kernel_entries, kernel_polys, map_polys, ChartSelection, FixedSkeleton, FixedSystem};
use crate::poly::{jacobian, lagrange_system, MultiPoly, PolySystem};
use crate::rational::{format_q, parse_q, Q};
use crate::sdp::SdpInstance;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "CERTIFIED_FEASIBLE")]
    CertifiedFeasible,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::CertifiedFeasible => "CERTIFIED_FEASIBLE",
            Status::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Exact rational zero of F, isolated.
    ExactPoint,
    /// Krawczyk on a square subsystem G, other rows in the ideal of G.
    SquareKrawczyk,
    /// Krawczyk on the Lagrange system.
    LagrangeKrawczyk,
    /// Real point of an external solver's parametrization.
    ExternalRur,
}

/// Where the exact point was shown isolated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gate {
    /// In V(F) itself.
    System,
    /// As (x, z) in V(ℒ_u).
    Lagrange,
}

impl Gate {
    pub fn describe(self) -> &'static str {
        match self {
            Gate::System => "V(F)",
            Gate::Lagrange => "the Lagrange system",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cofactors {
    pub row: usize,
    /// Multiplier s with s·f = Σ hᵢ gᵢ; absent means 1.
    pub s: Option<String>,
    pub h: Vec<String>,
}

/// Rationals are stored as "p/q" strings; keys are sorted on output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub format: u32,
    pub instance: String,
    pub n: usize,
    pub status: Status,
    pub route: Option<Route>,
    pub r: usize,
    /// 0-based, sorted.
    pub iota: Vec<usize>,
    pub j: Vec<usize>,
    pub j_prime: Vec<usize>,
    pub fixed_values: Vec<String>,
    /// Variables of the fixed system F.
    pub vars: Vec<String>,
    pub point: Option<Vec<String>>,
    #[serde(rename = "box")]
    pub bbox: Option<Vec<[String; 2]>>,
    pub square_rows: Vec<usize>,
    pub cofactors: Vec<Cofactors>,
    pub phi: Option<String>,
    pub u: Option<Vec<String>>,
    pub seed: Option<u64>,
    pub z: Option<Vec<String>>,
    pub eig_margin: Option<String>,
    pub isolation_dims: Vec<usize>,
    pub isolated_in: Option<Gate>,
    /// hvec(X) at the point or box midpoint.
    pub x_mid: Vec<String>,
    pub rur: Option<String>,
    pub rur_point: Option<usize>,
    pub narrative: Vec<String>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ReplayError {
    #[error("certificate is not CERTIFIED_FEASIBLE")]
    NotCertified,
    #[error("malformed certificate: {0}")]
    Malformed(String),
    #[error("instance mismatch: {0}")]
    Instance(String),
    #[error("check failed: {0}")]
    Check(String),
}

fn qs(v: &[Q]) -> Vec<String> {
    v.iter().map(format_q).collect()
}

fn pq(s: &str) -> Result<Q, ReplayError> {
    parse_q(s).ok_or_else(|| ReplayError::Malformed(format!("bad rational {s:?}")))
}

fn pqs(v: &[String]) -> Result<Vec<Q>, ReplayError> {
    v.iter().map(|s| pq(s)).collect()
}

fn fail(msg: impl Into<String>) -> ReplayError {
    ReplayError::Check(msg.into())
}

impl Certificate {
    pub fn new(instance: &str, n: usize) -> Self {
        Certificate {
            format: FORMAT_VERSION,
            instance: instance.to_string(),
            n,
            status: Status::Inconclusive,
            route: None,
            r: 0,
            iota: Vec::new(),
            j: Vec::new(),
            j_prime: Vec::new(),
            fixed_values: Vec::new(),
            vars: Vec::new(),
            point: None,
            bbox: None,
            square_rows: Vec::new(),
            cofactors: Vec::new(),
            phi: None,
            u: None,
            seed: None,
            z: None,
            eig_margin: None,
            isolation_dims: Vec::new(),
            isolated_in: None,
            x_mid: Vec::new(),
            rur: None,
            rur_point: None,
            narrative: Vec::new(),
        }
    }

    pub fn is_certified(&self) -> bool {
        self.status == Status::CertifiedFeasible
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.narrative.push(s.into());
    }

    pub fn set_system(&mut self, fs: &FixedSystem) {
        self.r = fs.chart.r;
        self.iota = fs.chart.iota.clone();
        self.j = fs.j.clone();
        self.j_prime = fs.j_prime.clone();
        self.fixed_values = qs(&fs.fixed_values);
        self.vars = fs.system.vars.clone();
    }

    pub fn set_box(&mut self, b: &[Interval]) {
        self.bbox = Some(b.iter().map(|i| [format_q(&i.lo), format_q(&i.hi)]).collect());
    }

    pub fn box_q(&self) -> Result<Option<IBox>, ReplayError> {
        let Some(b) = &self.bbox else { return Ok(None) };
        let mut out = Vec::with_capacity(b.len());
        for [lo, hi] in b {
            let (lo, hi) = (pq(lo)?, pq(hi)?);
            if lo > hi {
                return Err(ReplayError::Malformed("box with lo > hi".into()));
            }
            out.push(Interval::new(lo, hi));
        }
        Ok(Some(out))
    }

    pub fn margin_q(&self) -> Option<Q> {
        self.eig_margin.as_deref().and_then(parse_q)
    }

    /// X at the point or box midpoint, exactly.
    pub fn x_mid_q(&self) -> Option<SymQ> {
        let v: Option<Vec<Q>> = self.x_mid.iter().map(|s| parse_q(s)).collect();
        let v = v?;
        (v.len() == tri(self.n)).then(|| SymQ::unhvec(self.n, &v))
    }

    pub fn to_json(&self) -> String {
        // serde_json maps are ordered by key
        let v = serde_json::to_value(self).expect("certificate serializes");
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ReplayError> {
        let c: Certificate = serde_json::from_str(text).map_err(|e| ReplayError::Malformed(e.to_string()))?;
        if c.format != FORMAT_VERSION {
            return Err(ReplayError::Malformed(format!("unknown format {}", c.format)));
        }
        Ok(c)
    }

    /// Short human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = format!("instance: {}\nstatus: {}\n", self.instance, self.status);
        if let Some(r) = self.route {
            s += &format!("route: {}\n", serde_json::to_value(r).unwrap().as_str().unwrap());
        }
        s += &format!("r: {}\niota: {:?}\nJ': {:?}\n", self.r, self.iota.iter().map(|i| i + 1).collect::<Vec<_>>(), self.j_prime);
        if let Some(m) = &self.eig_margin {
            s += &format!("eig_margin: {m} (~{:.6})\n", self.margin_q().map(|q| crate::rational::to_f64(&q)).unwrap_or(f64::NAN));
        }
        for line in &self.narrative {
            s += &format!("  - {line}\n");
        }
        s
    }
}

/// p(subs) where subs[i] replaces variable i.
pub fn compose(p: &MultiPoly, subs: &[MultiPoly], nvars: usize) -> MultiPoly {
    let mut out = MultiPoly::zero(nvars);
    for (m, c) in p.terms() {
        let mut t = MultiPoly::constant(nvars, c.clone());
        for (v, &e) in m.iter().enumerate() {
            if e > 0 {
                t = t.mul(&subs[v].pow(e));
            }
        }
        out = out.add(&t);
    }
    out
}

/// Rebuild F from the certificate's chart and fixed values.
pub fn rebuild_system(cert: &Certificate, inst: &SdpInstance) -> Result<FixedSystem, ReplayError> {
    let n = inst.n;
    if cert.n != n {
        return Err(ReplayError::Instance(format!("n = {} but instance has {}", cert.n, n)));
    }
    if cert.iota.len() != cert.r || cert.iota.iter().any(|&i| i >= n) || cert.r > n {
        return Err(ReplayError::Malformed("bad chart".into()));
    }
    if cert.j_prime.len() != cert.fixed_values.len() || cert.j_prime.iter().any(|&p| p >= tri(n)) {
        return Err(ReplayError::Malformed("bad fixed variables".into()));
    }
    let chart = ChartSelection::from_iota(n, &cert.iota, Matrix::zeros(cert.r, n - cert.r));
    let skel = FixedSkeleton {
        j: cert.j.clone(),
        j_prime: cert.j_prime.clone(),
        fixed_values: pqs(&cert.fixed_values)?,
        rank_reveal: RankRevealResult {
            r: cert.r,
            cols: cert.j.clone(),
            rows: Vec::new(),
            sigma_r: f64::NAN,
            sigma_r_plus_1: f64::NAN,
            c_pq: f64::NAN,
        },
    };
    let fs = build_fixed_system(inst, &chart, &skel).map_err(|e| fail(format!("fixed system: {e}")))?;
    if fs.system.vars != cert.vars {
        return Err(fail("variable list differs from the rebuilt system"));
    }
    Ok(fs)
}

/// 𝒜(X(v)) − b vanishes identically and every kept kernel polynomial,
/// rewritten in the reduced variables, is a row of F.
pub fn check_contains_constraints(fs: &FixedSystem, inst: &SdpInstance) -> Result<(), ReplayError> {
    let k = tri(fs.n());
    let nr = fs.system.nvars();
    for (i, p) in map_polys(inst, k).iter().enumerate() {
        if !compose(p, &fs.x_expr, nr).is_zero() {
            return Err(fail(format!("map constraint {i} not satisfied identically")));
        }
    }
    let mut subs = fs.x_expr.clone();
    subs.extend(fs.y_index.iter().map(|&i| MultiPoly::var(nr, i)));
    for (p, label) in kernel_polys(&fs.chart, subs.len()) {
        let g = compose(&p, &subs, nr);
        if !g.is_zero() && !fs.system.polys.contains(&g) {
            return Err(fail(format!("kernel polynomial {label:?} missing from F")));
        }
    }
    Ok(())
}

fn x_box(fs: &FixedSystem, b: &[Interval]) -> Vec<Interval> {
    fs.x_expr.iter().map(|e| eval_poly(e, b)).collect()
}

fn check_margin(cert: &Certificate, n: usize, hv: &[Interval]) -> Result<Q, ReplayError> {
    let PsdVerdict::Certified { margin } = psd_certify(n, cert.r, hv) else {
        return Err(fail("eigenvalue margin is not positive"));
    };
    if cert.margin_q().as_ref() != Some(&margin) {
        return Err(fail("recomputed margin differs from the stored one"));
    }
    Ok(margin)
}

/// Independent re-verification; returns the recomputed margin.
pub fn replay(cert: &Certificate, inst: &SdpInstance) -> Result<Q, ReplayError> {
    if !cert.is_certified() {
        return Err(ReplayError::NotCertified);
    }
    let fs = rebuild_system(cert, inst)?;
    check_contains_constraints(&fs, inst)?;
    let f = &fs.system;
    let nr = f.nvars();
    let route = cert.route.ok_or_else(|| ReplayError::Malformed("no route".into()))?;
    match route {
        Route::ExactPoint => {
            let p = pqs(cert.point.as_ref().ok_or_else(|| ReplayError::Malformed("no point".into()))?)?;
            if p.len() != nr {
                return Err(ReplayError::Malformed("point length".into()));
            }
            if !f.eval_q(&p).unwrap().iter().all(Zero::is_zero) {
                return Err(fail("F does not vanish at the point"));
            }
            let x = fs.x_q(&p);
            if inst.apply_map(&x).map_err(|e| fail(e.to_string()))? != inst.b {
                return Err(fail("map constraints violated"));
            }
            // the full product X·K(Y), dropped rows included
            let lifted = fs.lift_q(&p);
            for (kp, label) in kernel_entries(&fs.chart, lifted.len(), true) {
                if !kp.eval_q(&lifted).unwrap().is_zero() {
                    return Err(fail(format!("kernel entry {label:?} nonzero")));
                }
            }
            let (Some(phi), Some(u), Some(z)) = (&cert.phi, &cert.u, &cert.z) else {
                return Err(ReplayError::Malformed("exact route needs phi, u and z".into()));
            };
            let phi = MultiPoly::parse(phi, &f.vars).map_err(|e| ReplayError::Malformed(e.to_string()))?;
            let (u, z) = (pqs(u)?, pqs(z)?);
            let l = lagrange_system(f, &phi, &u).map_err(|e| ReplayError::Malformed(e.to_string()))?;
            let mut pz = p.clone();
            pz.extend(z);
            if !l.eval_q(&pz).map_err(|e| ReplayError::Malformed(e.to_string()))?.iter().all(Zero::is_zero) {
                return Err(fail("stored multiplier does not solve the Lagrange system"));
            }
            let iso = match cert.isolated_in {
                Some(Gate::System) => isolation_gate(&f.polys, &p, DualOpts::default()),
                Some(Gate::Lagrange) => isolation_gate(&l.polys, &pz, DualOpts::default()),
                None => return Err(ReplayError::Malformed("no isolation gate recorded".into())),
            };
            match iso {
                Isolation::Isolated { dims } if dims == cert.isolation_dims => {}
                other => return Err(fail(format!("isolation check differs: {other:?}"))),
            }
            check_margin(cert, fs.n(), &point_box(&x.hvec()))
        }
        Route::SquareKrawczyk => {
            let b = cert.box_q()?.ok_or_else(|| ReplayError::Malformed("no box".into()))?;
            if b.len() != nr || cert.square_rows.len() != nr {
                return Err(ReplayError::Malformed("box or row count".into()));
            }
            let mut g = PolySystem::new(f.vars.clone());
            for &i in &cert.square_rows {
                let p = f.polys.get(i).ok_or_else(|| ReplayError::Malformed("row index".into()))?;
                g.push(p.clone(), f.labels[i].clone());
            }
            if !krawczyk_test(&g, &jacobian(&g), &b) {
                return Err(fail("Krawczyk contraction fails on the stored box"));
            }
            for i in (0..f.len()).filter(|i| !cert.square_rows.contains(i)) {
                let entry = cert.cofactors.iter().find(|c| c.row == i).ok_or_else(|| fail(format!("no cofactors for row {i}")))?;
                let h: Result<Vec<MultiPoly>, _> = entry.h.iter().map(|s| MultiPoly::parse(s, &f.vars)).collect();
                let h = h.map_err(|e| ReplayError::Malformed(e.to_string()))?;
                let m = match &entry.s {
                    Some(t) => MultiPoly::parse(t, &f.vars).map_err(|e| ReplayError::Malformed(e.to_string()))?,
                    None => MultiPoly::constant(nr, Q::from_integer(1.into())),
                };
                if eval_poly(&m, &b).contains_zero() {
                    return Err(fail(format!("multiplier for row {i} may vanish on the box")));
                }
                if h.len() != g.len() || !check_local_cofactors(&g.polys, &f.polys[i], &m, &h) {
                    return Err(fail(format!("row {i} is not the stated combination")));
                }
            }
            check_margin(cert, fs.n(), &x_box(&fs, &b))
        }
        Route::LagrangeKrawczyk => {
            let b = cert.box_q()?.ok_or_else(|| ReplayError::Malformed("no box".into()))?;
            let phi = cert.phi.as_ref().ok_or_else(|| ReplayError::Malformed("no phi".into()))?;
            let phi = MultiPoly::parse(phi, &f.vars).map_err(|e| ReplayError::Malformed(e.to_string()))?;
            let u = pqs(cert.u.as_ref().ok_or_else(|| ReplayError::Malformed("no u".into()))?)?;
            let l = lagrange_system(f, &phi, &u).map_err(|e| ReplayError::Malformed(e.to_string()))?;
            if b.len() != l.nvars() {
                return Err(ReplayError::Malformed("box length".into()));
            }
            if !krawczyk_test(&l, &jacobian(&l), &b) {
                return Err(fail("Krawczyk contraction fails on the stored box"));
            }
            check_margin(cert, fs.n(), &x_box(&fs, &b[..nr]))
        }
        Route::ExternalRur => {
            let text = cert.rur.as_ref().ok_or_else(|| ReplayError::Malformed("no parametrization".into()))?;
            let rur = parse_rur(text).map_err(|e| fail(e.to_string()))?;
            let b = cert.box_q()?.ok_or_else(|| ReplayError::Malformed("no box".into()))?;
            let width = b.iter().map(|i| i.width()).max().unwrap_or_default();
            let pts = rur_real_points(&rur, &width.max(Q::new(1.into(), 1_000_000_000u64.into()))).map_err(|e| fail(e.to_string()))?;
            let idx = cert.rur_point.ok_or_else(|| ReplayError::Malformed("no point index".into()))?;
            let pt = pts.points.get(idx).ok_or_else(|| fail("point index out of range"))?;
            let mut xb = vec![Interval::zero(); nr];
            for (name, iv) in rur.var_names.iter().zip(&pt.coords) {
                if let Some(i) = f.var_index(name) {
                    xb[i] = iv.clone();
                }
            }
            for p in &f.polys {
                if !eval_poly(p, &xb).contains_zero() {
                    return Err(fail("F excludes zero on the parametrized point"));
                }
            }
            check_margin(cert, fs.n(), &x_box(&fs, &xb))
        }
    }
}
