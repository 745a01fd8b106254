//! One PASS/FAIL line per acceptance criterion. Exits nonzero when the set of
//! failing checks differs from the documented unattainable ones.

use std::time::Instant;

use lmicert::baseline::{reduced_chart_system, run_baseline, BaselineOpts, ChartOutcome};
use lmicert::certifier::interval::{box_contains, eval_poly, Interval};
use lmicert::certifier::psd::{psd_certify, PsdVerdict};
use lmicert::certifier::recover::find_cofactors;
use lmicert::certifier::rur::{parse_rur, rur_real_points};
use lmicert::certifier::{certify_hybrid, replay, Certificate, CertifyOpts, Route, Status};
use lmicert::frontend::{find_feasible_point, FrontendOpts};
use lmicert::linalg::SymF;
use lmicert::pipeline::{run_pipeline, DEFAULT_MAX_DEN};
use lmicert::poly::{MultiPoly, PolySystem};
use lmicert::rational::{q, qf, to_f64};
use lmicert::sdp::{congruent_transform, corpus, corpus_entry, rotate_instance, RotationSpec, SdpInstance, CERTIFIABLE};
use rand::{Rng, SeedableRng};

mod common;

const DRUWO: &str = "DruWo2017-2.3.2P";
const PUBLISHED_RUR: &str = "[0, [1, [0, 2, 5, ['x22', 'x23'], [1, 0], [\
[5, [0, -4, -8, -20, -220, 27]], \
[4, [-4, -16, -60, -880, 135]], \
[[[4, [-4, -16, -76, -240, -129]], 1], [[5, [0, 4, 16, 60, 880, -135]], 1]]]]]]:\n";
const PRINTED_FLOATS: [(f64, f64); 2] = [(-10.18376, 17.84481), (-0.08682, -0.16012)];
const FIXED_SYSTEM: [&str; 3] = ["-1/2*x22+y1+1/2", "x22*y2+x23", "-1/2*x22*y1+x23*y2+1/2*y1"];
const F1: [&str; 5] = ["x12 + x11*y11", "x22 + x12*y11", "x11*y12 - 1/2*x22 + 1/2", "x23 + x12*y12", "-1/2*x22*y12 + 1/2*y12"];
const F2: [&str; 5] = ["x11 + x12*y21", "x12 + x22*y21", "x23*y21 - 1/2*x22 + 1/2", "x23 + x22*y22", "x23*y22"];

/// Checks known to fail for reasons recorded with the project notes.
const EXPECTED_FAILURES: [&str; 2] = ["3.floats", "8.f2-exact"];

struct Report {
    failed: Vec<String>,
}

impl Report {
    fn criterion(&mut self, id: usize, title: &str, checks: Vec<(&str, bool, String)>) {
        let ok = checks.iter().all(|c| c.1);
        println!("[{}] {id}. {title}", if ok { "PASS" } else { "FAIL" });
        for (name, pass, detail) in checks {
            println!("       {} {name}: {detail}", if pass { "ok  " } else { "FAIL" });
            if !pass {
                self.failed.push(format!("{id}.{name}"));
            }
        }
    }
}

fn normalized(text: &[&str], vars: &[String]) -> Vec<MultiPoly> {
    let mut v: Vec<MultiPoly> = text.iter().map(|t| MultiPoly::parse(t, vars).unwrap().monic()).collect();
    v.sort_by_key(|p| p.to_string_with(vars));
    v
}

fn normalized_system(sys: &PolySystem) -> Vec<MultiPoly> {
    let mut v: Vec<MultiPoly> = sys.polys.iter().map(MultiPoly::monic).collect();
    v.sort_by_key(|p| p.to_string_with(&sys.vars));
    v
}

fn golden_pipeline() -> Vec<(&'static str, bool, String)> {
    let e = corpus_entry(DRUWO).unwrap();
    let eps1 = 1e-9f64.sqrt();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let (mut chart_ok, mut equal, mut slowest) = (true, true, 0f64);
    for _ in 0..50 {
        let d: Vec<f64> = (0..6).map(|_| rng.gen_range(-1e-9..=1e-9)).collect();
        let x = SymF::unhvec(3, &[1.0 + d[0], d[1], d[2], 1.0 + d[3], d[4], d[5]]);
        let t = Instant::now();
        let fs = run_pipeline(&e.instance, &x, eps1, 1e3 * eps1, DEFAULT_MAX_DEN).unwrap();
        slowest = slowest.max(t.elapsed().as_secs_f64());
        chart_ok &= fs.chart.iota == [0, 1] && fs.j_prime == [0, 1];
        equal &= normalized_system(&fs.system) == normalized(&FIXED_SYSTEM, &fs.system.vars);
    }
    vec![
        ("chart", chart_ok, "iota = {1,2}, fixed X11 and X12 in 50 perturbed runs".into()),
        ("system", equal, "normalized F equals the worked example".into()),
        ("runtime", slowest < 1.0, format!("slowest {slowest:.3}s < 1s")),
    ]
}

fn druwo_certification() -> Vec<(&'static str, bool, String)> {
    let e = corpus_entry(DRUWO).unwrap();
    let t = Instant::now();
    let c = certify_hybrid(&e.instance, &CertifyOpts::default()).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let margin = c.margin_q();
    let contains = match c.route {
        Some(Route::ExactPoint) => c.point.as_ref().is_some_and(|p| p[..2] == ["1", "0"]),
        _ => c.box_q().ok().flatten().is_some_and(|b| box_contains(&b[..2], &[q(1), q(0)])),
    };
    vec![
        ("status", c.is_certified() && replay(&c, &e.instance).is_ok(), format!("{} via {:?}, replay ok", c.status, c.route)),
        ("margin", margin.as_ref().is_some_and(|m| *m >= qf(9, 10)), format!("eig_margin {:?} >= 0.9", margin.map(|m| to_f64(&m)))),
        ("contains", contains, "(X22, X23) = (1, 0) contained exactly".into()),
        ("runtime", secs < 10.0, format!("{secs:.2}s < 10s")),
    ]
}

fn rur_replay() -> Vec<(&'static str, bool, String)> {
    let rur = parse_rur(PUBLISHED_RUR).unwrap();
    let pts = rur_real_points(&rur, &qf(1, 1_000_000)).unwrap();
    let exact = pts.points.iter().filter(|p| p.exact.as_deref() == Some(&[q(1), q(0)][..])).count();
    let at_zero = rur.numerators[0].0.eval(&q(0)) / rur.denom.eval(&q(0)) == q(1) && rur.numerators[1].0.eval(&q(0)) == q(0);
    let narrow = pts.points.iter().all(|p| p.coords.iter().all(|c| c.width() < qf(1, 1_000_000)));
    // the fixed system whose Lagrange projection the parametrization describes
    let e = corpus_entry(DRUWO).unwrap();
    let x = SymF::unhvec(3, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    let fs = run_pipeline(&e.instance, &x, 1e-6, 1e-3, DEFAULT_MAX_DEN).unwrap();
    let accepted: Vec<usize> = (0..pts.points.len())
        .filter(|&i| {
            let mut b = vec![Interval::zero(); fs.system.nvars()];
            for (name, iv) in rur.var_names.iter().zip(&pts.points[i].coords) {
                b[fs.system.var_index(name).unwrap()] = iv.clone();
            }
            let hv: Vec<Interval> = fs.x_expr.iter().map(|p| eval_poly(p, &b)).collect();
            matches!(psd_certify(3, fs.chart.r, &hv), PsdVerdict::Certified { .. })
        })
        .collect();
    let only_one = accepted.len() == 1 && pts.points[accepted[0]].exact.is_some();
    let mids: Vec<(f64, f64)> = pts.points.iter().map(|p| (to_f64(&p.coords[0].mid()), to_f64(&p.coords[1].mid()))).collect();
    let floats = PRINTED_FLOATS.iter().all(|w| mids.iter().any(|m| (m.0 - w.0).abs() <= 1e-4 && (m.1 - w.1).abs() <= 1e-4));
    let shown: Vec<String> = mids.iter().map(|m| format!("({:.5}, {:.5})", m.0, m.1)).collect();
    vec![
        ("count", pts.points.len() == 3, format!("{} real points", pts.points.len())),
        ("exact", exact == 1 && at_zero && narrow, "(1,0) at t = 0 exactly, all widths < 1e-6".into()),
        ("psd-screen", only_one, format!("accepted points {accepted:?}")),
        ("floats", floats, format!("printed floats within 1e-4 of {}", shown.join(" "))),
    ]
}

fn certify_timed(inst: &SdpInstance) -> (Certificate, f64) {
    let t = Instant::now();
    let c = certify_hybrid(inst, &CertifyOpts::default()).unwrap();
    (c, t.elapsed().as_secs_f64())
}

fn hybrid_pattern(store: &mut Vec<(Certificate, SdpInstance)>) -> Vec<(&'static str, bool, String)> {
    let (mut bad, mut slowest) = (Vec::new(), 0f64);
    for name in CERTIFIABLE {
        let inst = corpus_entry(name).unwrap().instance;
        let (c, secs) = certify_timed(&inst);
        slowest = slowest.max(secs);
        if !c.is_certified() || secs >= 60.0 {
            bad.push(name);
        }
        if c.is_certified() {
            store.push((c, inst));
        }
    }
    let p4 = corpus_entry("PatakiCleanDim4P").unwrap().instance;
    let (c, _) = certify_timed(&p4);
    let p4_ok = c.status == Status::Inconclusive && replay(&c, &p4).is_err();
    vec![
        ("certified", bad.is_empty(), format!("{}/16 certified, slowest {slowest:.2}s < 60s {bad:?}", 16 - bad.len())),
        ("pataki-dim4", p4_ok, format!("{}", c.status)),
    ]
}

fn rank_detection() -> Vec<(&'static str, bool, String)> {
    let opts = FrontendOpts { tol: 1e-9, ..FrontendOpts::default() };
    let mut wrong = Vec::new();
    let mut listed = 0;
    for e in corpus() {
        let Some(rmax) = e.r_max else { continue };
        listed += 1;
        match find_feasible_point(&e.instance, &opts) {
            Ok(fr) if fr.detected_rank == rmax => {}
            other => wrong.push(format!("{}: {:?}", e.instance.name, other.map(|f| f.detected_rank))),
        }
    }
    vec![("r_max", wrong.is_empty() && listed == 16, format!("{}/{listed} rows match {wrong:?}", listed - wrong.len()))]
}

fn rotated(store: &mut Vec<(Certificate, SdpInstance)>) -> Vec<(&'static str, bool, String)> {
    let (mut bad, mut worst) = (Vec::new(), 0f64);
    for seed in [1u64, 2, 3] {
        for name in CERTIFIABLE {
            let orig = corpus_entry(name).unwrap().instance;
            let spec = RotationSpec::from_seed(orig.n, seed);
            let inst = rotate_instance(&orig, &spec).unwrap();
            let (c, _) = certify_timed(&inst);
            let res = c.x_mid_q().map(|x| orig.residual_f64(&congruent_transform(&x, &spec.t_q()).to_f64()));
            worst = worst.max(res.unwrap_or(f64::INFINITY));
            if !c.is_certified() || res.map_or(true, |r| r > 1e-6) {
                bad.push(format!("{name}@{seed}"));
            }
            if c.is_certified() {
                store.push((c, inst));
            }
        }
    }
    vec![("rotations", bad.is_empty(), format!("48 runs, worst back-transformed residual {worst:.1e} <= 1e-6 {bad:?}"))]
}

fn property_suites(store: &[(Certificate, SdpInstance)]) -> Vec<(&'static str, bool, String)> {
    let suites: [(&str, u32, Box<dyn Fn(u32) -> Result<(), String> + '_>); 9] = [
        ("weyl", 1000, Box::new(common::weyl)),
        ("singular-values", 1000, Box::new(common::singular_perturbation)),
        ("rank-reveal", 1000, Box::new(common::rank_reveal)),
        ("kernel-identity", 1000, Box::new(common::kernel_identity)),
        ("principal-block", 1500, Box::new(common::principal_block_bound)),
        ("inverse-stability", 1500, Box::new(common::inverse_stability)),
        ("hvec", 1000, Box::new(common::hvec_roundtrip)),
        ("jacobian-fd", 1000, Box::new(common::jacobian_fd)),
        ("krawczyk-replay", 1000, Box::new(|n| common::krawczyk_replay(n, store))),
    ];
    let total: u32 = suites.iter().map(|s| s.1).sum();
    let mut out: Vec<(&str, bool, String)> = suites
        .iter()
        .map(|(name, n, f)| match f(*n) {
            Ok(()) => (*name, true, format!("{n} cases")),
            Err(e) => (*name, false, e),
        })
        .collect();
    out.push(("total", total == 10_000, format!("{total} cases, {} stored certificates", store.len())));
    out
}

fn baseline_structure() -> Vec<(&'static str, bool, String)> {
    let e = corpus_entry(DRUWO).unwrap();
    let f1 = reduced_chart_system(&e.instance, &[0]).unwrap().system;
    let f2 = reduced_chart_system(&e.instance, &[1]).unwrap().system;
    let got2 = normalized_system(&f2);
    let want2 = normalized(&F2, &f2.vars);
    let same_ideal = want2.iter().all(|p| find_cofactors(&got2, p, 1).is_some()) && got2.iter().all(|p| find_cofactors(&want2, p, 1).is_some());
    let en = run_baseline(&e.instance, &BaselineOpts::default());
    let o3 = en.outcome_of(&[2]);
    vec![
        ("f1-exact", normalized_system(&f1) == normalized(&F1, &f1.vars), "chart {1} system equals F1".into()),
        ("f2-exact", got2 == want2, format!("chart {{2}} shares {}/5 polynomials with F2", want2.iter().filter(|p| got2.contains(p)).count())),
        ("f2-ideal", same_ideal, "chart {2} generates the ideal of F2".into()),
        ("chart-3", o3 == Some(ChartOutcome::NoPsd), format!("chart {{3}} reported {o3:?}")),
    ]
}

fn main() {
    let mut r = Report { failed: Vec::new() };
    let mut store = Vec::new();
    println!("acceptance: tolerances pinned (perturbation 1e-9, rank tol 1e-9, residual 1e-6, RUR width 1e-6, float 1e-4)");
    r.criterion(1, "golden pipeline", golden_pipeline());
    r.criterion(2, "worked-example certification", druwo_certification());
    r.criterion(3, "published RUR replay", rur_replay());
    r.criterion(4, "hybrid certification pattern", hybrid_pattern(&mut store));
    r.criterion(5, "rank detection", rank_detection());
    r.criterion(6, "rotated corpus", rotated(&mut store));
    r.criterion(7, "property suites", property_suites(&store));
    r.criterion(8, "baseline structure", baseline_structure());
    let unexpected: Vec<&String> = r.failed.iter().filter(|f| !EXPECTED_FAILURES.contains(&f.as_str())).collect();
    let recovered: Vec<&&str> = EXPECTED_FAILURES.iter().filter(|f| !r.failed.iter().any(|g| g == *f)).collect();
    println!("acceptance: {} failing checks, expected {EXPECTED_FAILURES:?}", r.failed.len());
    if !unexpected.is_empty() || !recovered.is_empty() {
        println!("acceptance: unexpected failures {unexpected:?}, unexpectedly passing {recovered:?}");
        std::process::exit(1);
    }
}
