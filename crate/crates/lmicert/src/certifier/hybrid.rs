//! End-to-end certification: frontend, chart, fixed system, then the
//! certification routes in order of cost.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

use super::cert::{Certificate, Cofactors, Gate, Route, Status};
use super::dual::{isolation_gate, DualOpts, Isolation};
use super::interval::{eval_poly, point_box, IBox, Interval};
use super::krawczyk::{krawczyk_certify, DEFAULT_SCHEDULE};
use super::newton::{gauss_newton, initial_z, newton_refine};
use super::psd::{psd_certify, PsdVerdict};
use super::recover::{choose_square_rows, exact_multiplier, find_cofactors, find_local_cofactors, recover_rational};
use super::rur::{export_solver_input, parse_rur, run_solver, rur_real_points};
use crate::frontend::{find_feasible_point, FrontendError, FrontendOpts, FrontendResult};
use crate::pipeline::{run_pipeline, FixedSystem, PipelineError, DEFAULT_MAX_DEN};
use crate::poly::{lagrange_system, random_phi_u, PolySystem};
use crate::rational::{self, format_q, Q};
use crate::sdp::SdpInstance;

#[derive(Clone, Debug)]
pub struct CertifyOpts {
    pub frontend: FrontendOpts,
    /// `None` means 10³·ε₁.
    pub eps2: Option<f64>,
    pub max_den: u64,
    pub seed: u64,
    /// Fresh (φ, u) draws on the Lagrange route.
    pub retries: usize,
    pub schedule: Vec<f64>,
    pub dual: DualOpts,
    pub max_square_tries: usize,
    pub solver_bin: Option<PathBuf>,
    pub timeout: Duration,
}

impl Default for CertifyOpts {
    fn default() -> Self {
        CertifyOpts {
            frontend: FrontendOpts::default(),
            eps2: None,
            max_den: DEFAULT_MAX_DEN,
            seed: 1,
            retries: 3,
            schedule: DEFAULT_SCHEDULE.to_vec(),
            dual: DualOpts::default(),
            max_square_tries: 200,
            solver_bin: None,
            timeout: Duration::from_secs(600),
        }
    }
}

impl CertifyOpts {
    pub fn eps1(&self) -> f64 {
        self.frontend.eps1()
    }

    pub fn eps2(&self) -> f64 {
        self.eps2.unwrap_or_else(|| 1e3 * self.eps1())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CertifyError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

fn x_part(fs: &FixedSystem, b: &[Interval]) -> Vec<Interval> {
    fs.x_expr.iter().map(|e| eval_poly(e, b)).collect()
}

fn finish(cert: &mut Certificate, fs: &FixedSystem, route: Route, verdict: &PsdVerdict, x_hv: &[Interval]) -> bool {
    cert.eig_margin = verdict.margin().map(format_q);
    match verdict {
        PsdVerdict::Certified { margin } => {
            cert.route = Some(route);
            cert.status = Status::CertifiedFeasible;
            cert.x_mid = x_hv.iter().map(|i| format_q(&i.mid())).collect();
            cert.note(format!("lambda_{}(X) >= {:.6e} on the box; rank(X) <= {} from X*K(Y) = 0", fs.chart.r, rational::to_f64(margin), fs.chart.r));
            true
        }
        PsdVerdict::NotPsd => {
            cert.note("X has a provably negative eigenvalue");
            false
        }
        PsdVerdict::Inconclusive { .. } => {
            cert.note("eigenvalue margin not positive");
            false
        }
    }
}

/// Exact rational zero of F with an exact multiplier z, gated on (p, z)
/// being an isolated zero of the Lagrange system.
/// Some(true) certified, Some(false) stop with INCONCLUSIVE, None try on.
fn try_exact(cert: &mut Certificate, fs: &FixedSystem, inst: &SdpInstance, approx: &[f64], opts: &CertifyOpts) -> Option<bool> {
    let f = &fs.system;
    let p = recover_rational(fs, approx)?;
    let x = fs.x_q(&p);
    if inst.apply_map(&x).ok()? != inst.b {
        return None;
    }
    cert.note("exact rational zero of F recovered");
    let mut rejected = false;
    for k in 0..opts.retries.max(1) as u64 {
        let seed = opts.seed + k;
        let (phi, u) = random_phi_u(f.nvars(), f.len(), seed);
        let Some(z) = exact_multiplier(f, &phi, &u, &p) else {
            cert.note(format!("seed {seed}: point is not critical for phi"));
            continue;
        };
        let l = lagrange_system(f, &phi, &u).ok()?;
        let mut pz = p.clone();
        pz.extend(z.iter().cloned());
        // x-projections of Lagrange zeros lie in V(F)
        let (gate, iso) = match isolation_gate(&f.polys, &p, opts.dual) {
            iso @ Isolation::Isolated { .. } => (Gate::System, iso),
            _ => (Gate::Lagrange, isolation_gate(&l.polys, &pz, opts.dual)),
        };
        match iso {
            Isolation::Isolated { dims } => {
                cert.note(format!("seed {seed}: isolated in {}, local dual dimensions {dims:?}", gate.describe()));
                cert.isolation_dims = dims;
                cert.isolated_in = Some(gate);
                cert.phi = Some(phi.to_string_with(&f.vars));
                cert.u = Some(u.iter().map(format_q).collect());
                cert.seed = Some(seed);
                cert.z = Some(z.iter().map(format_q).collect());
                let hv = point_box(&x.hvec());
                let verdict = psd_certify(fs.n(), fs.chart.r, &hv);
                cert.point = Some(p.iter().map(format_q).collect());
                return Some(finish(cert, fs, Route::ExactPoint, &verdict, &hv));
            }
            other => {
                cert.note(format!("seed {seed}: not isolated in V(F) nor in the Lagrange system: {other:?}"));
                rejected = true;
            }
        }
    }
    rejected.then_some(false)
}

fn subsystem(f: &PolySystem, rows: &[usize]) -> PolySystem {
    let mut g = PolySystem::new(f.vars.clone());
    for &i in rows {
        g.push(f.polys[i].clone(), f.labels[i].clone());
    }
    g
}

fn try_square(cert: &mut Certificate, fs: &FixedSystem, approx: &[f64], opts: &CertifyOpts) -> bool {
    let f = &fs.system;
    if f.len() < f.nvars() {
        return false;
    }
    let mut seen = BTreeSet::new();
    for skip in 0..opts.max_square_tries.min(f.len()) {
        let Some(rows) = choose_square_rows(f, approx, skip) else { continue };
        if !seen.insert(rows.clone()) {
            continue;
        }
        let g = subsystem(f, &rows);
        let Ok(nr) = newton_refine(&g, approx, 30) else { continue };
        let Some(b) = krawczyk_certify(&g, &nr.x, &opts.schedule) else { continue };
        let mut cofs = Vec::new();
        for i in (0..f.len()).filter(|i| !rows.contains(i)) {
            if let Some(h) = find_cofactors(&g.polys, &f.polys[i], 1) {
                cofs.push(Cofactors { row: i, s: None, h: h.iter().map(|p| p.to_string_with(&f.vars)).collect() });
                continue;
            }
            match find_local_cofactors(&g.polys, &f.polys[i], 2, &nr.x) {
                Some((m, h)) if !eval_poly(&m, &b).contains_zero() => cofs.push(Cofactors {
                    row: i,
                    s: Some(m.to_string_with(&f.vars)),
                    h: h.iter().map(|p| p.to_string_with(&f.vars)).collect(),
                }),
                _ => break,
            }
        }
        if cofs.len() + rows.len() != f.len() {
            cert.note(format!("square subsystem rows {rows:?}: remaining rows not shown to vanish"));
            continue;
        }
        cert.note(format!("square subsystem rows {rows:?}: Krawczyk contraction; s*f = sum h*g for the other rows with s nonzero on the box"));
        let hv = x_part(fs, &b);
        let verdict = psd_certify(fs.n(), fs.chart.r, &hv);
        cert.square_rows = rows;
        cert.cofactors = cofs;
        cert.set_box(&b);
        return finish(cert, fs, Route::SquareKrawczyk, &verdict, &hv);
    }
    false
}

fn try_lagrange(cert: &mut Certificate, fs: &FixedSystem, approx: &[f64], opts: &CertifyOpts) -> bool {
    let f = &fs.system;
    for k in 0..opts.retries as u64 {
        let seed = opts.seed + k;
        let (phi, u) = random_phi_u(f.nvars(), f.len(), seed);
        let Ok(l) = lagrange_system(f, &phi, &u) else { continue };
        let z = match initial_z(f, &phi, &u, approx) {
            Ok((z, _)) => z,
            Err(e) => {
                cert.note(format!("seed {seed}: {e}"));
                continue;
            }
        };
        let mut x0 = approx.to_vec();
        x0.extend(z);
        let Ok(nr) = newton_refine(&l, &x0, 40) else { continue };
        let Some(b) = krawczyk_certify(&l, &nr.x, &opts.schedule) else {
            cert.note(format!("seed {seed}: Lagrange system not contracted (residual {:.2e})", nr.residual));
            continue;
        };
        cert.note(format!("seed {seed}: Krawczyk contraction on the Lagrange system"));
        let hv = x_part(fs, &b[..f.nvars()]);
        let verdict = psd_certify(fs.n(), fs.chart.r, &hv);
        cert.phi = Some(phi.to_string_with(&f.vars));
        cert.u = Some(u.iter().map(format_q).collect());
        cert.seed = Some(seed);
        cert.set_box(&b);
        if finish(cert, fs, Route::LagrangeKrawczyk, &verdict, &hv) {
            return true;
        }
    }
    false
}

fn try_external(cert: &mut Certificate, fs: &FixedSystem, opts: &CertifyOpts) -> bool {
    let Some(bin) = &opts.solver_bin else { return false };
    let f = &fs.system;
    let (phi, u) = random_phi_u(f.nvars(), f.len(), opts.seed);
    let Ok(l) = lagrange_system(f, &phi, &u) else { return false };
    let Ok(input) = export_solver_input(&l) else { return false };
    let text = match run_solver(bin, &input, opts.timeout) {
        Ok(t) => t,
        Err(e) => {
            cert.note(format!("external solver: {e}"));
            return false;
        }
    };
    let rur = match parse_rur(&text) {
        Ok(r) => r,
        Err(e) => {
            cert.note(format!("external solver output: {e}"));
            return false;
        }
    };
    let width = Q::new(1.into(), 1_000_000_000u64.into());
    let Ok(pts) = rur_real_points(&rur, &width) else { return false };
    cert.note(format!("external solver: {} real points", pts.points.len()));
    for (idx, pt) in pts.points.iter().enumerate() {
        let mut xb = vec![Interval::zero(); f.nvars()];
        for (name, iv) in rur.var_names.iter().zip(&pt.coords) {
            if let Some(i) = f.var_index(name) {
                xb[i] = iv.clone();
            }
        }
        if !f.polys.iter().all(|p| eval_poly(p, &xb).contains_zero()) {
            continue;
        }
        let hv = x_part(fs, &xb);
        let verdict = psd_certify(fs.n(), fs.chart.r, &hv);
        if let PsdVerdict::Certified { .. } = verdict {
            cert.phi = Some(phi.to_string_with(&f.vars));
            cert.u = Some(u.iter().map(format_q).collect());
            cert.seed = Some(opts.seed);
            cert.rur = Some(text.clone());
            cert.rur_point = Some(idx);
            cert.set_box(&xb);
            return finish(cert, fs, Route::ExternalRur, &verdict, &hv);
        }
    }
    false
}

/// Certify from an already computed fixed system and starting point.
pub fn certify_fixed(inst: &SdpInstance, fs: &FixedSystem, start: &[f64], opts: &CertifyOpts) -> Certificate {
    let mut cert = Certificate::new(&inst.name, inst.n);
    cert.set_system(fs);
    let f = &fs.system;
    cert.note(format!(
        "chart iota={:?} r={} J'={:?}; F has {} polynomials in {} variables",
        fs.chart.iota.iter().map(|i| i + 1).collect::<Vec<_>>(),
        fs.chart.r,
        fs.j_prime,
        f.len(),
        f.nvars()
    ));
    let gn = gauss_newton(f, start, 60);
    cert.note(format!("Gauss-Newton residual {:.2e}", gn.residual));
    match try_exact(&mut cert, fs, inst, &gn.x, opts) {
        Some(true) => return cert,
        Some(false) => {
            cert.status = Status::Inconclusive;
            return cert;
        }
        None => {}
    }
    if try_square(&mut cert, fs, &gn.x, opts) || try_lagrange(&mut cert, fs, &gn.x, opts) || try_external(&mut cert, fs, opts) {
        return cert;
    }
    cert.status = Status::Inconclusive;
    cert.note("all routes inconclusive");
    cert
}

/// Denominator bounds tried for the fixed values, largest first.
pub fn max_den_ladder(max_den: u64) -> Vec<u64> {
    let mut v = vec![max_den];
    v.extend([10_000, 1_000, 100, 10].into_iter().filter(|&d| d < max_den));
    v
}

pub fn certify_hybrid(inst: &SdpInstance, opts: &CertifyOpts) -> Result<Certificate, CertifyError> {
    let fr = find_feasible_point(inst, &opts.frontend)?;
    certify_from_frontend(inst, &fr, opts)
}

/// Everything after the numerical frontend.
pub fn certify_from_frontend(inst: &SdpInstance, fr: &FrontendResult, opts: &CertifyOpts) -> Result<Certificate, CertifyError> {
    let head = format!("frontend: residual {:.2e}, min eigenvalue {:.2e}, detected rank {}", fr.residual, fr.min_eig, fr.detected_rank);
    let mut history = vec![head];
    let mut last = None;
    for max_den in max_den_ladder(opts.max_den) {
        let fs = run_pipeline(inst, &fr.x_tilde, opts.eps1(), opts.eps2(), max_den)?;
        let mut full = fr.x_tilde.hvec();
        full.extend(fs.chart.y_flat());
        let start = fs.restrict_f64(&full);
        let mut cert = certify_fixed(inst, &fs, &start, opts);
        if max_den != opts.max_den {
            history.push(format!("retry with fixed values of denominator <= {max_den}"));
        }
        let mut narrative = history.clone();
        narrative.append(&mut cert.narrative);
        cert.narrative = narrative.clone();
        if cert.is_certified() || fs.j_prime.is_empty() {
            return Ok(cert);
        }
        history = narrative;
        last = Some(cert);
    }
    Ok(last.expect("ladder is never empty"))
}

/// Box of the certificate as f64 pairs, for reporting.
pub fn box_f64(b: &IBox) -> Vec<(f64, f64)> {
    b.iter().map(Interval::to_f64).collect()
}
