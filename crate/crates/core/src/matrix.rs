//! Dense complex matrices and the exchange-matrix algebra.

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::scalar::Scalar;

/// Row-major dense matrix over a [`Scalar`].
///
/// Zero-sized shapes are allowed; the recurrence coefficient attached to
/// `Q_{-1}` is `1 × 0`.
#[derive(Clone, PartialEq, Debug)]
pub struct CMatrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> CMatrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    /// The exchange matrix `J_n` (ones on the anti-diagonal).
    pub fn exchange(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, n - 1 - i)] = S::one();
        }
        m
    }

    /// `[I_rows | 0]` of shape `rows × cols`, `cols ≥ rows`.
    pub fn leading_identity(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows.min(cols) {
            m[(i, i)] = S::one();
        }
        m
    }

    /// # Panics
    /// If the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        CMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> CMatrix<T> {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn conj(&self) -> Self {
        self.map(Scalar::conj)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// `M^∨ = J conj(M) J`.
    pub fn vee(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            self[(self.rows - 1 - i, self.cols - 1 - j)].conj()
        })
    }

    /// # Panics
    /// On non-conformable shapes.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "non-conformable product");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a.clone() * b.clone();
                    let cur = std::mem::replace(&mut out[(i, j)], S::zero());
                    out[(i, j)] = cur + prod;
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch");
        Self::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() + rhs[(i, j)].clone()
        })
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch");
        Self::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() - rhs[(i, j)].clone()
        })
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        CMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                other[(i, j - self.cols)].clone()
            }
        })
    }

    /// Largest entry modulus; exactly `0.0` iff every entry is zero.
    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|x| if x.is_zero() { 0.0 } else { x.magnitude().max(f64::MIN_POSITIVE) })
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    /// `‖M − J conj(M) J‖_max ≤ tol`.
    pub fn is_centrohermitian(&self, tol: f64) -> bool {
        self.centrohermitian_residual() <= tol
    }

    pub fn centrohermitian_residual(&self) -> f64 {
        self.max_abs_diff(&self.vee())
    }

    pub fn to_complex(&self) -> CMatrix<Complex64> {
        self.map(Scalar::to_c64)
    }

    pub fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].to_c64())
    }
}

impl CMatrix<Complex64> {
    pub fn from_nalgebra(m: &DMatrix<Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl<S> Index<(usize, usize)> for CMatrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for CMatrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussRat;
    use proptest::prelude::*;

    type M = CMatrix<GaussRat>;

    fn g(re: i64, im: i64) -> GaussRat {
        GaussRat::int(re, im)
    }

    #[test]
    fn vee_examples() {
        assert_eq!(M::identity(3).vee(), M::identity(3));
        let c = g(2, 5);
        let m = M::from_rows(vec![vec![g(0, 0), c.clone()], vec![g(0, 0), g(0, 0)]]);
        let want = M::from_rows(vec![vec![g(0, 0), g(0, 0)], vec![c.conj(), g(0, 0)]]);
        assert_eq!(m.vee(), want);
        // J·conj·J applied explicitly
        let j2 = M::exchange(2);
        assert_eq!(m.vee(), j2.matmul(&m.conj()).matmul(&j2));
    }

    #[test]
    fn centrohermitian_examples() {
        let sym = M::from_rows(vec![
            vec![g(1, 0), g(2, 0), g(3, 0)],
            vec![g(3, 0), g(2, 0), g(1, 0)],
        ]);
        assert!(sym.is_centrohermitian(0.0));
        assert_eq!(sym.vee(), sym);
        let m = M::from_rows(vec![vec![g(1, 0), g(2, 0)], vec![g(3, 0), g(4, 0)]]);
        assert!(!m.is_centrohermitian(0.0));
        let swapped = M::from_rows(vec![vec![g(4, 0), g(3, 0)], vec![g(2, 0), g(1, 0)]]);
        assert_eq!(m.vee(), swapped);
        // [[u, v, ā], [a, conj u, conj v]]
        let (u, v, a) = (g(1, 2), g(-3, 1), g(2, -7));
        let pattern = M::from_rows(vec![
            vec![u.clone(), v.clone(), a.conj()],
            vec![a.clone(), v.conj(), u.conj()],
        ]);
        assert!(pattern.is_centrohermitian(0.0));
    }

    #[test]
    fn zero_width_shapes() {
        let g0 = M::zeros(1, 0);
        assert_eq!(g0.vee(), g0);
        assert_eq!(g0.transpose().shape(), (0, 1));
        assert_eq!(M::zeros(1, 0).matmul(&M::zeros(0, 2)), M::zeros(1, 2));
    }

    fn gauss() -> impl Strategy<Value = GaussRat> {
        (-6i64..7, -6i64..7, 1i64..4).prop_map(|(r, i, d)| GaussRat::from_ratios(r, d, i, d))
    }

    fn mat(r: usize, c: usize) -> impl Strategy<Value = M> {
        prop::collection::vec(gauss(), r * c).prop_map(move |v| {
            M::from_fn(r, c, |i, j| v[i * c + j].clone())
        })
    }

    proptest! {
        #[test]
        fn vee_involution_and_multiplicative(a in mat(3, 4), b in mat(4, 2)) {
            prop_assert_eq!(a.vee().vee(), a.clone());
            prop_assert_eq!(a.matmul(&b).vee(), a.vee().matmul(&b.vee()));
        }
    }
}
