//! Exhaustive chart enumeration: every kernel profile ι of size r < n,
//! without variable fixing, stopping at the first chart with a PSD point.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::certifier::dual::DualOpts;
use crate::certifier::hybrid::{certify_fixed, CertifyOpts};
use crate::certifier::interval::{eval_poly, Interval};
use crate::certifier::psd::{psd_certify, PsdVerdict};
use crate::certifier::recover::find_cofactors;
use crate::certifier::rur::{export_solver_input, parse_rur, run_solver, rur_real_points, RurError, SolverError};
use crate::certifier::Certificate;
use crate::linalg::{tri, Matrix, RankRevealResult};
use crate::pipeline::{build_fixed_system, build_linearized, ChartSelection, FixedSkeleton, FixedSystem, PipelineError};
use crate::poly::{lagrange_system, random_phi_u, MultiPoly, PolySystem};
use crate::rational::Q;
use crate::sdp::SdpInstance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ChartOutcome {
    PsdFound,
    NoPsd,
    SolverFail,
    Timeout,
}

impl std::fmt::Display for ChartOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChartOutcome::PsdFound => "PSD_FOUND",
            ChartOutcome::NoPsd => "NO_PSD",
            ChartOutcome::SolverFail => "SOLVER_FAIL",
            ChartOutcome::Timeout => "TIMEOUT",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ChartRun {
    pub r: usize,
    /// 0-based, sorted.
    pub iota: Vec<usize>,
    /// `None` when the chart was only exported.
    pub outcome: Option<ChartOutcome>,
    pub detail: String,
    pub seconds: f64,
    pub certificate: Option<Certificate>,
}

#[derive(Clone, Debug)]
pub struct ChartEnumeration {
    pub instance: String,
    pub n: usize,
    pub charts: Vec<ChartRun>,
}

impl ChartEnumeration {
    pub fn found(&self) -> Option<&ChartRun> {
        self.charts.iter().find(|c| c.outcome == Some(ChartOutcome::PsdFound))
    }

    pub fn outcome_of(&self, iota: &[usize]) -> Option<ChartOutcome> {
        self.charts.iter().find(|c| c.iota == iota).and_then(|c| c.outcome)
    }
}

#[derive(Clone, Debug)]
pub enum BaselineMode {
    /// Certification routes of the hybrid path applied to each unfixed chart system.
    Internal,
    /// Lagrange system of each chart sent to an external solver.
    External(PathBuf),
    ExportOnly,
}

#[derive(Clone, Debug)]
pub struct BaselineOpts {
    pub mode: BaselineMode,
    pub seed: u64,
    /// Random starts per chart in internal mode.
    pub starts: usize,
    pub timeout: Duration,
    /// Largest number of cofactor coefficients for the emptiness test.
    pub nullstellensatz_budget: usize,
    pub dual: DualOpts,
}

impl Default for BaselineOpts {
    fn default() -> Self {
        BaselineOpts {
            mode: BaselineMode::Internal,
            seed: 1,
            starts: 3,
            timeout: Duration::from_secs(600),
            nullstellensatz_budget: 600,
            dual: DualOpts::default(),
        }
    }
}

/// All ι ⊆ [n] with |ι| < n, by size and then lexicographically.
pub fn enumerate_charts(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for r in 0..n {
        let mut c: Vec<usize> = (0..r).collect();
        loop {
            out.push(c.clone());
            let Some(i) = (0..r).rev().find(|&i| c[i] < n - r + i) else { break };
            c[i] += 1;
            for k in i + 1..r {
                c[k] = c[k - 1] + 1;
            }
        }
    }
    out
}

fn chart(n: usize, iota: &[usize]) -> ChartSelection {
    ChartSelection::from_iota(n, iota, Matrix::zeros(iota.len(), n - iota.len()))
}

/// 𝒜(X) = b and X·K(Y) = 0 over (hvec(X), Y), rows ι of K free.
pub fn build_chart_system(inst: &SdpInstance, iota: &[usize]) -> PolySystem {
    build_linearized(inst, &chart(inst.n, iota)).system
}

/// The chart system with the map constraints eliminated and nothing fixed.
pub fn reduced_chart_system(inst: &SdpInstance, iota: &[usize]) -> Result<FixedSystem, PipelineError> {
    let skel = FixedSkeleton {
        j: (0..tri(inst.n)).collect(),
        j_prime: Vec::new(),
        fixed_values: Vec::new(),
        rank_reveal: RankRevealResult {
            r: 0,
            cols: Vec::new(),
            rows: Vec::new(),
            sigma_r: f64::NAN,
            sigma_r_plus_1: f64::NAN,
            c_pq: f64::NAN,
        },
    };
    build_fixed_system(inst, &chart(inst.n, iota), &skel)
}

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Degree d at which 1 = Σ hᵢfᵢ was found, searching while the number of
/// unknown coefficients stays within `budget`.
pub fn nullstellensatz(polys: &[MultiPoly], budget: usize) -> Option<u32> {
    let nv = polys.first()?.nvars();
    let dg = polys.iter().map(MultiPoly::total_degree).max()?;
    let unknowns = |d: u32| -> usize {
        polys.iter().filter(|p| p.total_degree() <= d).map(|p| binom(nv + (d - p.total_degree()) as usize, nv)).sum()
    };
    let mut extra = None;
    for e in 0..=2 {
        if unknowns(dg + e) <= budget {
            extra = Some(e);
        }
    }
    let one = MultiPoly::constant(nv, Q::one());
    let h = find_cofactors(polys, &one, extra?)?;
    let d = h.iter().zip(polys).filter(|(h, _)| !h.is_zero()).map(|(h, p)| h.total_degree() + p.total_degree()).max();
    Some(d.unwrap_or(0))
}

fn internal_chart(inst: &SdpInstance, fs: &FixedSystem, opts: &BaselineOpts, seed: u64, deadline: Instant) -> (ChartOutcome, String, Option<Certificate>) {
    let f = &fs.system;
    if f.nvars() == 0 || f.is_empty() {
        let p: Vec<Q> = Vec::new();
        let x = fs.x_q(&p);
        if f.polys.iter().all(|q| q.eval_q(&p).map_or(false, |v| v == Q::default())) && crate::linalg::exact::is_psd(&x.to_rows()) {
            return (ChartOutcome::PsdFound, "unique point of the chart is PSD".into(), None);
        }
        return (ChartOutcome::NoPsd, "unique point of the chart is not PSD".into(), None);
    }
    if let Some(d) = nullstellensatz(&f.polys, opts.nullstellensatz_budget) {
        return (ChartOutcome::NoPsd, format!("no complex solutions: 1 is in the ideal (degree {d})"), None);
    }
    let copts = CertifyOpts { seed, dual: opts.dual, ..CertifyOpts::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = String::from("no start tried");
    for s in 0..opts.starts.max(1) {
        if Instant::now() >= deadline {
            return (ChartOutcome::Timeout, format!("deadline reached after {s} starts"), None);
        }
        let start: Vec<f64> = (0..f.nvars()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let cert = certify_fixed(inst, fs, &start, &copts);
        if cert.is_certified() {
            let how = cert.route.map(|r| format!("{r:?}")).unwrap_or_default();
            return (ChartOutcome::PsdFound, format!("start {s}: certified ({how})"), Some(cert));
        }
        last = format!("start {s}: {}", cert.narrative.last().cloned().unwrap_or_default());
    }
    (ChartOutcome::SolverFail, last, None)
}

fn external_chart(fs: &FixedSystem, bin: &std::path::Path, seed: u64, timeout: Duration) -> (ChartOutcome, String) {
    let f = &fs.system;
    let (phi, u) = random_phi_u(f.nvars(), f.len(), seed);
    let l = match lagrange_system(f, &phi, &u) {
        Ok(l) => l,
        Err(e) => return (ChartOutcome::SolverFail, e.to_string()),
    };
    let input = match export_solver_input(&l) {
        Ok(s) => s,
        Err(e) => return (ChartOutcome::SolverFail, e.to_string()),
    };
    let text = match run_solver(bin, &input, timeout) {
        Ok(t) => t,
        Err(SolverError::Timeout(d)) => return (ChartOutcome::Timeout, format!("solver timed out after {d:?}")),
        Err(e) => return (ChartOutcome::SolverFail, e.to_string()),
    };
    let rur = match parse_rur(&text) {
        Ok(r) => r,
        Err(RurError::PositiveDimensional) => return (ChartOutcome::SolverFail, "positive-dimensional".into()),
        Err(e) => return (ChartOutcome::SolverFail, e.to_string()),
    };
    let width = Q::new(1.into(), 1_000_000_000u64.into());
    let pts = match rur_real_points(&rur, &width) {
        Ok(p) => p,
        Err(e) => return (ChartOutcome::SolverFail, e.to_string()),
    };
    for pt in &pts.points {
        let mut b = vec![Interval::zero(); f.nvars()];
        for (name, iv) in rur.var_names.iter().zip(&pt.coords) {
            if let Some(i) = f.var_index(name) {
                b[i] = iv.clone();
            }
        }
        let hv: Vec<Interval> = fs.x_expr.iter().map(|e| eval_poly(e, &b)).collect();
        if let PsdVerdict::Certified { .. } = psd_certify(fs.n(), fs.chart.r, &hv) {
            return (ChartOutcome::PsdFound, format!("{} real points, one PSD", pts.points.len()));
        }
    }
    (ChartOutcome::NoPsd, format!("{} real points, none certified PSD", pts.points.len()))
}

pub fn run_baseline(inst: &SdpInstance, opts: &BaselineOpts) -> ChartEnumeration {
    let mut charts = Vec::new();
    for (idx, iota) in enumerate_charts(inst.n).into_iter().enumerate() {
        let t = Instant::now();
        let seed = opts.seed.wrapping_add(1000 * idx as u64);
        let mut run = ChartRun { r: iota.len(), iota: iota.clone(), outcome: None, detail: String::new(), seconds: 0.0, certificate: None };
        match reduced_chart_system(inst, &iota) {
            Err(PipelineError::Inconsistent(i)) => {
                run.outcome = Some(ChartOutcome::NoPsd);
                run.detail = format!("map constraint {i} reduces to a nonzero constant");
            }
            Err(e) => {
                run.outcome = Some(ChartOutcome::SolverFail);
                run.detail = e.to_string();
            }
            Ok(fs) => match &opts.mode {
                BaselineMode::ExportOnly => run.detail = "exported".into(),
                BaselineMode::Internal => {
                    let (o, d, c) = internal_chart(inst, &fs, opts, seed, t + opts.timeout);
                    run.outcome = Some(o);
                    run.detail = d;
                    run.certificate = c;
                }
                BaselineMode::External(bin) => {
                    let (o, d) = external_chart(&fs, bin, seed, opts.timeout);
                    run.outcome = Some(o);
                    run.detail = d;
                }
            },
        }
        run.seconds = t.elapsed().as_secs_f64();
        let stop = run.outcome == Some(ChartOutcome::PsdFound);
        charts.push(run);
        if stop {
            break;
        }
    }
    ChartEnumeration { instance: inst.name.clone(), n: inst.n, charts }
}

/// File stem for a chart, 1-based indices.
pub fn chart_stem(iota: &[usize]) -> String {
    if iota.is_empty() {
        "chart_r0".into()
    } else {
        let ix: Vec<String> = iota.iter().map(|i| (i + 1).to_string()).collect();
        format!("chart_r{}_{}", iota.len(), ix.join("-"))
    }
}

/// Solver-format chart systems, one per ι.
pub fn export_charts(inst: &SdpInstance) -> Vec<(String, String)> {
    enumerate_charts(inst.n)
        .into_iter()
        .map(|iota| {
            let sys = build_chart_system(inst, &iota);
            let body = export_solver_input(&sys).expect("chart systems are never empty");
            (format!("{}.txt", chart_stem(&iota)), body)
        })
        .collect()
}

/// Macaulay2 script computing minimal generators of the radical of a system.
pub fn radical_script(sys: &PolySystem) -> String {
    let names: Vec<String> = sys.vars.iter().map(|v| v.replace('_', "u")).collect();
    let mut s = String::new();
    s.push_str(&format!("R = QQ[{}];\n", names.join(",")));
    let polys: Vec<String> = sys.polys.iter().map(|p| p.to_string_with(&names)).collect();
    if polys.is_empty() {
        s.push_str("I = ideal(0_R);\n");
    } else {
        s.push_str(&format!("I = ideal(\n  {}\n);\n", polys.join(",\n  ")));
    }
    s.push_str("J = radical I;\n");
    s.push_str("print toString mingens J;\n");
    s
}

/// One radical script per chart, on the reduced chart systems.
pub fn export_radical_scripts(inst: &SdpInstance) -> Vec<(String, String)> {
    enumerate_charts(inst.n)
        .into_iter()
        .map(|iota| {
            let body = match reduced_chart_system(inst, &iota) {
                Ok(fs) => radical_script(&fs.system),
                Err(e) => format!("-- {e}\n"),
            };
            (format!("{}.m2", chart_stem(&iota)), body)
        })
        .collect()
}
