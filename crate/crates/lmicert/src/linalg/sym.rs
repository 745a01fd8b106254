use num_traits::Zero;

use super::Matrix;
use crate::rational::{self, Q};

/// Symmetric n×n matrix stored as its lower triangle (i ≥ j), column-major.
/// The entry type is the backend: `f64` or exact `Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymMatrix<T> {
    n: usize,
    lower: Vec<T>,
}

pub type SymF = SymMatrix<f64>;
pub type SymQ = SymMatrix<Q>;

/// Number of free entries of an n×n symmetric matrix.
pub fn tri(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Position of (i,j), i ≥ j, in column-major lower-triangle order (0-based).
pub fn hvec_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    j * n - j * (j + 1) / 2 + i
}

/// Inverse of `hvec_index`: returns (i, j) with i ≥ j.
pub fn hvec_pair(n: usize, mut k: usize) -> (usize, usize) {
    for j in 0..n {
        let len = n - j;
        if k < len {
            return (j + k, j);
        }
        k -= len;
    }
    panic!("hvec position out of range");
}

impl<T: Clone + Zero> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "n must be positive");
        SymMatrix { n, lower: vec![T::zero(); tri(n)] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for j in 0..n {
            for i in j..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Inverse of `hvec`.
    pub fn unhvec(n: usize, v: &[T]) -> Self {
        assert_eq!(v.len(), tri(n), "hvec length mismatch");
        SymMatrix { n, lower: v.to_vec() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.lower[hvec_index(self.n, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let k = hvec_index(self.n, i, j);
        self.lower[k] = v;
    }

    /// Lower triangle in column-major order: (1,1),(2,1),…,(n,1),(2,2),…
    pub fn hvec(&self) -> Vec<T> {
        self.lower.clone()
    }

    pub fn hvec_ref(&self) -> &[T] {
        &self.lower
    }

    pub fn map<U: Clone + Zero>(&self, f: impl Fn(&T) -> U) -> SymMatrix<U> {
        SymMatrix { n: self.n, lower: self.lower.iter().map(f).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.lower.iter().all(|x| x.is_zero())
    }
}

impl SymMatrix<f64> {
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn to_dense(&self) -> Matrix {
        Matrix::from_fn(self.n, self.n, |i, j| *self.get(i, j))
    }

    /// Symmetric part of a square dense matrix.
    pub fn from_dense(m: &Matrix) -> Self {
        assert_eq!(m.rows(), m.cols());
        Self::from_fn(m.rows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn frobenius(&self) -> f64 {
        self.to_dense().frobenius()
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j) + o.get(i, j))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j) - o.get(i, j))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|x| x * s)
    }

    /// Frobenius inner product.
    pub fn dot(&self, o: &Self) -> f64 {
        let mut s = 0.0;
        for j in 0..self.n {
            for i in j..self.n {
                let w = if i == j { 1.0 } else { 2.0 };
                s += w * self.get(i, j) * o.get(i, j);
            }
        }
        s
    }
}

impl SymMatrix<Q> {
    pub fn identity_q(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { rational::q(1) } else { Q::zero() })
    }

    /// Round-to-nearest conversion to the float backend.
    pub fn to_f64(&self) -> SymF {
        self.map(rational::to_f64)
    }

    pub fn from_f64_exact(m: &SymF) -> Self {
        m.map(|&x| rational::from_f64(x))
    }

    pub fn dot(&self, o: &Self) -> Q {
        let mut s = Q::zero();
        for j in 0..self.n {
            for i in j..self.n {
                let p = self.get(i, j) * o.get(i, j);
                s += if i == j { p } else { &p + &p };
            }
        }
        s
    }

    pub fn to_rows(&self) -> Vec<Vec<Q>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j).clone()).collect()).collect()
    }

    /// Tᵀ·self·T for a square exact matrix T.
    pub fn congruence(&self, t: &[Vec<Q>]) -> Self {
        let n = self.n;
        assert_eq!(t.len(), n);
        let a = self.to_rows();
        // at = A·T
        let mut at = vec![vec![Q::zero(); n]; n];
        for i in 0..n {
            for k in 0..n {
                if a[i][k].is_zero() {
                    continue;
                }
                for j in 0..n {
                    if !t[k][j].is_zero() {
                        at[i][j] += &a[i][k] * &t[k][j];
                    }
                }
            }
        }
        Self::from_fn(n, |i, j| {
            let mut s = Q::zero();
            for k in 0..n {
                if !t[k][i].is_zero() && !at[k][j].is_zero() {
                    s += &t[k][i] * &at[k][j];
                }
            }
            s
        })
    }
}
