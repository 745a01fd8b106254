//! Dense linear algebra over ℚ.

use num_traits::{One, Zero};

use crate::rational::Q;

pub type QMat = Vec<Vec<Q>>;

/// Reduced row echelon form; returns the pivot columns.
pub fn rref(m: &mut QMat) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut pr = 0;
    for c in 0..cols {
        if pr == rows {
            break;
        }
        let Some(p) = (pr..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(pr, p);
        let inv = m[pr][c].recip();
        for x in m[pr].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let prow = m[pr].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == pr || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        pr += 1;
    }
    pivots
}

pub fn rank(m: &QMat) -> usize {
    let mut w = m.clone();
    rref(&mut w).len()
}

/// Right null space basis of `m` (columns count `ncols`).
pub fn nullspace(m: &QMat, ncols: usize) -> Vec<Vec<Q>> {
    let mut w = m.clone();
    let piv = rref(&mut w);
    let free: Vec<usize> = (0..ncols).filter(|c| !piv.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); ncols];
            v[f] = Q::one();
            for (r, &pc) in piv.iter().enumerate() {
                v[pc] = -w[r][f].clone();
            }
            v
        })
        .collect()
}

/// Solution set of A·x = b as (particular, null-space basis), or `None`
/// when inconsistent. Free variables are zero in the particular solution.
pub fn solve_affine(a: &QMat, b: &[Q], ncols: usize) -> Option<(Vec<Q>, Vec<Vec<Q>>)> {
    let mut aug: QMat = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let piv = rref(&mut aug);
    if piv.contains(&ncols) {
        return None;
    }
    let mut x = vec![Q::zero(); ncols];
    for (r, &pc) in piv.iter().enumerate() {
        x[pc] = aug[r][ncols].clone();
    }
    Some((x, nullspace(a, ncols)))
}

pub fn det(m: &QMat) -> Q {
    let n = m.len();
    let mut a = m.clone();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else { return Q::zero() };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        let prow = a[c].clone();
        for row in a.iter_mut().skip(c + 1) {
            if row[c].is_zero() {
                continue;
            }
            let f = &row[c] / &prow[c];
            for (x, y) in row.iter_mut().zip(&prow).skip(c) {
                *x -= &f * y;
            }
        }
    }
    d
}

pub fn inverse(m: &QMat) -> Option<QMat> {
    let n = m.len();
    let mut aug: QMat = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let piv = rref(&mut aug);
    if piv.len() < n || piv[n - 1] >= n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn mat_mul(a: &QMat, b: &QMat) -> QMat {
    let k = b.len();
    let c = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..c)
                .map(|j| {
                    let mut s = Q::zero();
                    for t in 0..k {
                        if !row[t].is_zero() && !b[t][j].is_zero() {
                            s += &row[t] * &b[t][j];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn transpose(a: &QMat) -> QMat {
    let c = a.first().map_or(0, |r| r.len());
    (0..c).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Coefficients of det(tI − M), ascending, by Faddeev–LeVerrier.
pub fn charpoly(m: &QMat) -> Vec<Q> {
    let n = m.len();
    let mut coeffs = vec![Q::zero(); n + 1];
    coeffs[n] = Q::one();
    let mut mk: QMat = vec![vec![Q::zero(); n]; n];
    for k in 1..=n {
        // M_k = M·M_{k-1} + c_{n-k+1}·I
        let mut next = mat_mul(m, &mk);
        for i in 0..n {
            next[i][i] += &coeffs[n - k + 1];
        }
        let am = mat_mul(m, &next);
        let tr: Q = (0..n).map(|i| am[i][i].clone()).fold(Q::zero(), |a, b| a + b);
        coeffs[n - k] = -tr / Q::from_integer(num_bigint::BigInt::from(k));
        mk = next;
    }
    coeffs
}

/// Exact positive-semidefiniteness of a symmetric matrix: the coefficients of
/// det(tI − M) alternate in sign.
pub fn is_psd(m: &QMat) -> bool {
    use num_traits::Signed;
    let c = charpoly(m);
    let n = m.len();
    c.iter().enumerate().all(|(k, ck)| {
        if (n - k) % 2 == 0 {
            !ck.is_negative()
        } else {
            !ck.is_positive()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    fn m(rows: &[&[i64]]) -> QMat {
        rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()
    }

    #[test]
    fn rank_det_inverse() {
        let a = m(&[&[1, 2], &[3, 4]]);
        assert_eq!(det(&a), q(-2));
        let inv = inverse(&a).unwrap();
        assert_eq!(inv, vec![vec![q(-2), q(1)], vec![qf(3, 2), qf(-1, 2)]]);
        assert_eq!(rank(&m(&[&[1, 2], &[2, 4]])), 1);
        assert!(inverse(&m(&[&[1, 2], &[2, 4]])).is_none());
    }

    #[test]
    fn affine_solution_sets() {
        let a = m(&[&[1, 1, 0]]);
        let (x, ns) = solve_affine(&a, &[q(2)], 3).unwrap();
        assert_eq!(x, vec![q(2), q(0), q(0)]);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert_eq!(&v[0] + &v[1], q(0));
        }
        assert!(solve_affine(&m(&[&[1, 1], &[1, 1]]), &[q(1), q(2)], 2).is_none());
    }

    #[test]
    fn characteristic_polynomial() {
        // det(tI - [[2,1],[1,2]]) = t^2 - 4t + 3
        assert_eq!(charpoly(&m(&[&[2, 1], &[1, 2]])), vec![q(3), q(-4), q(1)]);
        assert!(is_psd(&m(&[&[1, 1], &[1, 1]])));
        assert!(!is_psd(&m(&[&[0, 1], &[1, 0]])));
        assert!(is_psd(&m(&[&[0, 0], &[0, 0]])));
    }
}
