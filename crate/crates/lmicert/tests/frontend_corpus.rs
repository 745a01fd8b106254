use lmicert::frontend::{find_feasible_point, polish, project_affine, FrontendOpts};
use lmicert::linalg::{rank_revealing_columns, SymF};
use lmicert::sdp::corpus;

#[test]
fn detected_rank_matches_table_where_listed() {
    let opts = FrontendOpts::default();
    for e in corpus() {
        let Some(rmax) = e.r_max else { continue };
        let r = find_feasible_point(&e.instance, &opts).unwrap();
        assert!(r.residual <= opts.tol, "{}: residual {}", e.instance.name, r.residual);
        assert!(r.min_eig >= -opts.tol, "{}: min eig {}", e.instance.name, r.min_eig);
        assert!(r.is_consistent(&e.instance));
        assert_eq!(r.detected_rank, rmax, "{}", e.instance.name);
    }
}

#[test]
fn iterates_stay_on_affine_set_after_projection() {
    for e in corpus() {
        let x = SymF::from_fn(e.instance.n, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let p = project_affine(&e.instance, &x).unwrap();
        assert!(e.instance.residual_f64(&p) <= 1e-12, "{}", e.instance.name);
    }
}

#[test]
fn averaging_does_not_lose_rank() {
    let eps1 = 1e-9f64.sqrt();
    for e in corpus() {
        let inst = &e.instance;
        let a = find_feasible_point(inst, &FrontendOpts { seed: 3, restarts: 1, ..Default::default() });
        let b = find_feasible_point(inst, &FrontendOpts { seed: 4, restarts: 1, ..Default::default() });
        let (Ok(a), Ok(b)) = (a, b) else { continue };
        let mid = a.x_tilde.add(&b.x_tilde).scale(0.5);
        let rm = rank_revealing_columns(&mid.to_dense(), eps1).r;
        assert!(rm >= a.detected_rank.max(b.detected_rank), "{}", inst.name);
    }
}

#[test]
fn polish_lands_on_nearby_feasible_point() {
    let e = lmicert::sdp::corpus_entry("Permenter2018-4.3.2D").unwrap();
    let exact = e.min_point.unwrap().to_f64();
    let start = exact.add(&SymF::from_fn(4, |i, j| 1e-3 * ((i + 2 * j) as f64).sin()));
    let p = polish(&e.instance, &start, 2, 100).unwrap();
    let d = p.sub(&exact).frobenius();
    assert!(e.instance.residual_f64(&p) < 1e-12 && d < 1e-2, "{d}");
}
