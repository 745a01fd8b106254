//! Randomized property suites, shared by the property targets and the acceptance harness.
#![allow(dead_code)]

use lmicert::certifier::cert::rebuild_system;
use lmicert::certifier::krawczyk::krawczyk_test;
use lmicert::certifier::newton::newton_refine;
use lmicert::certifier::{replay, Certificate, Route};
use lmicert::linalg::{
    exact, hvec, rank_revealing_columns, singular_values, sym_eigenvalues, unhvec, Matrix, SymF, SymQ,
};
use lmicert::pipeline::{kernel_block_exact, ChartSelection};
use lmicert::poly::{jacobian, Label, MultiPoly, PolySystem};
use lmicert::rational::{format_q, from_f64, parse_q, q, to_f64, Q};
use lmicert::sdp::SdpInstance;
use num_traits::Zero;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

type Check = Result<(), TestCaseError>;

/// Run `check` on `cases` random inputs; the error names the first shrunk failure.
pub fn run<S: Strategy>(cases: u32, strategy: S, check: impl Fn(S::Value) -> Check) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, check).map_err(|e| e.to_string())
}

fn matrix(p: usize, q: usize, vals: &[f64]) -> Matrix {
    Matrix::from_fn(p, q, |i, j| vals[(i * q + j) % vals.len()])
}

fn low_rank_plus_noise(p: usize, q: usize, r: usize, f: &[f64], noise: f64) -> Matrix {
    let b = Matrix::from_fn(p, r, |i, k| f[(i * 7 + k * 3) % f.len()]);
    let c = Matrix::from_fn(r, q, |k, j| f[(k * 11 + j * 5 + 1) % f.len()]);
    let e = Matrix::from_fn(p, q, |i, j| noise * f[(i * 13 + j * 17 + 2) % f.len()]);
    if r == 0 {
        e
    } else {
        b.mul(&c).add(&e)
    }
}

fn sym(n: usize, vals: &[f64]) -> SymF {
    SymF::from_fn(n, |i, j| vals[(i * 5 + j * 3 + i * j) % vals.len()])
}

pub fn rank_reveal(cases: u32) -> Result<(), String> {
    let s = (1usize..8, 1usize..8, 0usize..6, prop::collection::vec(-3.0f64..3.0, 64), 3i32..12);
    run(cases, s, |(p, q, r, f, noise_exp)| {
        let r = r.min(p.min(q));
        let noise = 10f64.powi(-noise_exp);
        let a = low_rank_plus_noise(p, q, r, &f, noise);
        let eps = noise * 10.0 * ((p * q) as f64).sqrt();
        let rr = rank_revealing_columns(&a, eps);
        let sv = singular_values(&a);
        let tol = 1e-12 * sv.first().copied().unwrap_or(1.0).max(1.0);
        if rr.r > 0 {
            prop_assert!(rr.sigma_r >= eps - tol, "sigma_r {} < {}", rr.sigma_r, eps);
            let s_sub = singular_values(&a.select_cols(&rr.cols))[rr.r - 1];
            prop_assert!(s_sub >= rr.sigma_r / rr.c_pq - tol, "column bound {} vs {}", s_sub, rr.sigma_r / rr.c_pq);
        }
        prop_assert!(rr.sigma_r_plus_1 <= rr.c_pq * eps + tol, "sigma_r+1 {}", rr.sigma_r_plus_1);
        prop_assert_eq!(rr.cols.len(), rr.r);
        Ok(())
    })
}

pub fn weyl(cases: u32) -> Result<(), String> {
    let s = (1usize..7, prop::collection::vec(-5.0f64..5.0, 40), prop::collection::vec(-1.0f64..1.0, 40));
    run(cases, s, |(n, a, b)| {
        let x = sym(n, &a);
        let y = x.add(&sym(n, &b));
        let (la, lb) = (sym_eigenvalues(&x), sym_eigenvalues(&y));
        let d = x.sub(&y).to_dense().norm2();
        for i in 0..n {
            prop_assert!((la[i] - lb[i]).abs() <= d + 1e-10);
        }
        Ok(())
    })
}

pub fn singular_perturbation(cases: u32) -> Result<(), String> {
    let s = (1usize..7, 1usize..7, prop::collection::vec(-5.0f64..5.0, 49), prop::collection::vec(-1.0f64..1.0, 49));
    run(cases, s, |(p, q, a, b)| {
        let x = matrix(p, q, &a);
        let y = x.add(&matrix(p, q, &b));
        let (sa, sb) = (singular_values(&x), singular_values(&y));
        let d = x.sub(&y).norm2();
        for i in 0..sa.len() {
            prop_assert!((sa[i] - sb[i]).abs() <= d + 1e-10);
        }
        Ok(())
    })
}

pub fn hvec_roundtrip(cases: u32) -> Result<(), String> {
    run(cases, (1usize..8, prop::collection::vec(-9.0f64..9.0, 36)), |(n, v)| {
        let k = n * (n + 1) / 2;
        let w: Vec<f64> = v.iter().cycle().take(k).copied().collect();
        prop_assert_eq!(hvec(&unhvec(n, &w)), w);
        let x = sym(n, &v);
        prop_assert_eq!(unhvec(n, &hvec(&x)), x);
        Ok(())
    })
}

fn gram_q(n: usize, r: usize, b: &[i64]) -> SymQ {
    SymQ::from_fn(n, |i, j| (0..r).map(|k| q(b[i * r + k] * b[j * r + k])).sum())
}

/// Greedy exact column basis.
fn independent_columns(x: &SymQ) -> Vec<usize> {
    let rows = x.to_rows();
    let mut cols: Vec<usize> = Vec::new();
    for c in 0..x.n() {
        let mut cand = cols.clone();
        cand.push(c);
        let sub: Vec<Vec<Q>> = rows.iter().map(|r| cand.iter().map(|&k| r[k].clone()).collect()).collect();
        if exact::rank(&sub) == cand.len() {
            cols = cand;
        }
    }
    cols
}

pub fn kernel_identity(cases: u32) -> Result<(), String> {
    run(cases, (1usize..6, 1usize..5, prop::collection::vec(-4i64..=4, 30)), |(n, r, b)| {
        let r = r.min(n);
        let x = gram_q(n, r, &b);
        let iota = independent_columns(&x);
        let rank = iota.len();
        prop_assert!(rank <= r);
        if rank == 0 {
            return Ok(());
        }
        let s: Vec<Vec<Q>> = iota.iter().map(|&a| iota.iter().map(|&c| x.get(a, c).clone()).collect()).collect();
        prop_assert!(!exact::det(&s).is_zero());
        prop_assert!(exact::is_psd(&s));
        let y = kernel_block_exact(&x, &iota).unwrap();
        let chart = ChartSelection::from_iota(n, &iota, Matrix::zeros(rank, n - rank));
        // X·K(Y): rows ι of K are Y, the complement rows the identity
        for l in 0..n - rank {
            for i in 0..n {
                let mut acc = x.get(i, chart.complement[l]).clone();
                for (a, &ia) in iota.iter().enumerate() {
                    acc += x.get(i, ia) * &y[a][l];
                }
                prop_assert!(acc.is_zero());
            }
        }
        Ok(())
    })
}

fn psd_from(n: usize, r: usize, f: &[f64]) -> SymF {
    let b = Matrix::from_fn(n, r, |i, k| f[(i * 5 + k * 3) % f.len()]);
    SymF::from_dense(&b.mul(&b.transpose()))
}

fn sym_noise(n: usize, f: &[f64], delta: f64) -> SymF {
    let e = SymF::from_fn(n, |i, j| f[(i * 7 + j * 11 + i * j) % f.len()]);
    let s = e.to_dense().norm2();
    if s == 0.0 {
        e
    } else {
        e.scale(delta / s)
    }
}

pub fn principal_block_bound(cases: u32) -> Result<(), String> {
    let s = (2usize..7, 1usize..6, prop::collection::vec(-2.0f64..2.0, 48), prop::collection::vec(-1.0f64..1.0, 48), 2i32..9);
    let checked = std::sync::atomic::AtomicU32::new(0);
    run(cases, s, |(n, r, f, g, dexp)| {
        let r = r.min(n);
        let xs = psd_from(n, r, &f);
        let delta = 10f64.powi(-dexp);
        let x = xs.add(&sym_noise(n, &g, delta));
        let xn = xs.to_dense().norm2();
        if xn <= 1e-6 {
            return Ok(());
        }
        let d = x.to_dense();
        let rr = rank_revealing_columns(&d, delta * 10.0);
        if rr.r == 0 {
            return Ok(());
        }
        let iota = rr.cols.clone();
        let k = iota.len();
        let tau = singular_values(&d.select_cols(&iota))[k - 1];
        if tau < delta {
            return Ok(());
        }
        let sub = SymF::from_fn(k, |a, b| d[(iota[a], iota[b])]);
        let lam = sym_eigenvalues(&sub)[k - 1];
        let bound = (tau - delta).powi(2) / (n as f64 * xn) - delta;
        prop_assert!(lam >= bound - 1e-9 * (1.0 + xn), "{} < {}", lam, bound);
        checked.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        Ok(())
    })?;
    let k = checked.into_inner();
    if 2 * k < cases {
        return Err(format!("only {k} of {cases} cases reached the inequality"));
    }
    Ok(())
}

pub fn inverse_stability(cases: u32) -> Result<(), String> {
    let s = (1usize..7, prop::collection::vec(-3.0f64..3.0, 49), prop::collection::vec(-1.0f64..1.0, 49), 0.01f64..0.95);
    run(cases, s, |(n, a, e, frac)| {
        let am = Matrix::from_fn(n, n, |i, j| a[i * 7 + j] + if i == j { 4.0 } else { 0.0 });
        let Some(ai) = am.inverse(1e-12) else { return Ok(()) };
        let ainv = ai.norm2();
        let em = Matrix::from_fn(n, n, |i, j| e[i * 7 + j]);
        let en = em.norm2();
        if en == 0.0 {
            return Ok(());
        }
        let em = em.scale(frac / (ainv * en));
        let d = em.norm2();
        let bi = am.add(&em).inverse(1e-14).expect("B is nonsingular");
        let denom = 1.0 - ainv * d;
        let slack = 1e-9 * (1.0 + ainv * ainv);
        prop_assert!(bi.norm2() <= ainv / denom + slack);
        prop_assert!(ai.sub(&bi).norm2() <= ainv * ainv * d / denom + slack);
        Ok(())
    })
}

fn random_poly(nv: usize, terms: &[(u8, u8, u8, i8)]) -> MultiPoly {
    let mut p = MultiPoly::zero(nv);
    for &(a, b, d, c) in terms {
        let mut e = vec![0u32; nv];
        e[a as usize % nv] += (d % 3) as u32;
        e[b as usize % nv] += 1;
        p.add_term(e, q(c as i64));
    }
    p
}

pub fn jacobian_fd(cases: u32) -> Result<(), String> {
    let term = (0u8..8, 0u8..8, 0u8..4, -5i8..=5);
    let s = (1usize..5, prop::collection::vec(prop::collection::vec(term, 1..6), 1..4), prop::collection::vec(-2.0f64..2.0, 5));
    run(cases, s, |(nv, terms, x)| {
        let mut sys = PolySystem::new((0..nv).map(|i| format!("v{i}")).collect());
        for (i, t) in terms.iter().enumerate() {
            sys.push(random_poly(nv, t), Label::LagrangeRow(i));
        }
        let jac = jacobian(&sys);
        let pt = &x[..nv];
        for (i, p) in sys.polys.iter().enumerate() {
            for j in 0..nv {
                let h = 1e-6 * pt[j].abs().max(1.0);
                let (mut up, mut dn) = (pt.to_vec(), pt.to_vec());
                up[j] += h;
                dn[j] -= h;
                let fd = (p.eval_f64(&up).unwrap() - p.eval_f64(&dn).unwrap()) / (2.0 * h);
                let an = jac[i][j].eval_f64(pt).unwrap();
                prop_assert!((fd - an).abs() <= 1e-5 * an.abs().max(1.0), "{} vs {}", fd, an);
            }
        }
        Ok(())
    })
}

/// Stored certificates replay; perturbed ones do not; Newton started anywhere
/// in a Krawczyk box converges to a zero inside it.
pub fn krawczyk_replay(cases: u32, store: &[(Certificate, SdpInstance)]) -> Result<(), String> {
    for (c, inst) in store {
        replay(c, inst).map_err(|e| format!("{}: stored certificate fails replay: {e}", inst.name))?;
    }
    let s = (0..store.len(), any::<prop::sample::Index>(), prop::collection::vec(0.0f64..1.0, 16), 1i64..1000);
    run(cases, s, |(k, coord, t, shift)| {
        let (c, inst) = &store[k];
        let mut bad = c.clone();
        if let Some(b) = &c.bbox {
            let i = coord.index(b.len());
            let (lo, hi) = (parse_q(&b[i][0]).unwrap(), parse_q(&b[i][1]).unwrap());
            let s = (&hi - &lo) * (q(1) + Q::new(shift.into(), 1000.into()));
            let mut nb = b.clone();
            nb[i] = [format_q(&(lo + &s)), format_q(&(hi + &s))];
            bad.bbox = Some(nb);
            if c.route == Some(Route::SquareKrawczyk) {
                let fs = rebuild_system(c, inst).unwrap();
                let mut g = PolySystem::new(fs.system.vars.clone());
                for &r in &c.square_rows {
                    g.push(fs.system.polys[r].clone(), fs.system.labels[r].clone());
                }
                let bq = c.box_q().unwrap().unwrap();
                let start: Vec<f64> =
                    bq.iter().zip(t.iter().cycle()).map(|(iv, w)| to_f64(&iv.lo) + w * to_f64(&iv.width())).collect();
                let nr = newton_refine(&g, &start, 30).unwrap();
                let inside = nr.x.iter().zip(&bq).all(|(v, iv)| {
                    let slack = 1e-14 * v.abs().max(1.0);
                    to_f64(&iv.lo) - slack <= *v && *v <= to_f64(&iv.hi) + slack
                });
                prop_assert!(inside, "Newton left the box: {:?}", nr.x);
                let shifted = bad.box_q().unwrap().unwrap();
                prop_assert!(!krawczyk_test(&g, &jacobian(&g), &shifted));
            }
        } else if let Some(p) = &c.point {
            let i = coord.index(p.len());
            let mut np = p.clone();
            np[i] = format_q(&(parse_q(&np[i]).unwrap() + Q::new(shift.into(), 1024.into()) + from_f64(t[0] * 1e-3)));
            bad.point = Some(np);
        } else {
            return Err(TestCaseError::fail("certified without a point or box"));
        }
        prop_assert!(replay(&bad, inst).is_err(), "tampered certificate replays");
        Ok(())
    })
}
