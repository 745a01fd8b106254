use lmicert::linalg::{rank_revealing_columns, singular_values, Matrix};

mod common;

#[test]
fn rank_reveal_guarantees() {
    common::rank_reveal(1000).unwrap();
}

#[test]
fn weyl_eigenvalue_perturbation() {
    common::weyl(1000).unwrap();
}

#[test]
fn singular_value_perturbation() {
    common::singular_perturbation(1000).unwrap();
}

#[test]
fn hvec_roundtrip() {
    common::hvec_roundtrip(1000).unwrap();
}

#[test]
fn exact_rank_two_column_bound() {
    let b = Matrix::from_rows(&[vec![1.0, 2.0], vec![-1.0, 0.0], vec![3.0, 1.0], vec![0.0, 2.0]]);
    let c = Matrix::from_rows(&[
        vec![1.0, 0.0, 2.0, -1.0, 1.0, 3.0],
        vec![0.0, 1.0, 1.0, 2.0, -2.0, 1.0],
    ]);
    let a = b.mul(&c);
    let rr = rank_revealing_columns(&a, 1e-8);
    assert_eq!(rr.r, 2);
    let s2 = singular_values(&a)[1];
    let chosen = singular_values(&a.select_cols(&rr.cols))[1];
    assert!(chosen >= s2 / rr.c_pq);
    // brute force over every 2-column subset: the bound is meaningful
    let best = (0..6)
        .flat_map(|i| (i + 1..6).map(move |j| (i, j)))
        .map(|(i, j)| singular_values(&a.select_cols(&[i, j]))[1])
        .fold(0.0, f64::max);
    assert!(chosen <= best + 1e-12);
    assert!(best >= s2 / rr.c_pq);
}
