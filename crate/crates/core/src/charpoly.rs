//! Generalized characteristic polynomials of rectangular matrix pencils.
//!
//! For an `m × (m+n)` matrix `A` the pencil is `A + z_0 I_0 + … + z_n I_n`,
//! where `I_s` is the `s`-unit matrix with ones at `(i, i+s)`. For an index
//! set `I` of `m` columns, `P_I` is the determinant of the selected columns.
//! With `n = 1` the two variables are the conjugate pair `(z, z̄)` and `P_I` is
//! a [`BivarPoly`]; for larger `n` only point evaluation is supported.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::poly::BivarPoly;
use crate::scalar::Scalar;

/// Tolerance used for the centrohermitian hypothesis in float mode.
pub const CENTRO_TOL_FLOAT: f64 = 1e-12;

/// The `s`-unit matrix `I_s` of shape `m × (m+n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnitShift {
    pub shift: usize,
    pub m: usize,
    pub n: usize,
}

impl UnitShift {
    pub fn new(shift: usize, m: usize, n: usize) -> Result<Self> {
        if shift > n {
            return Err(Error::IndexOutOfRange { index: shift, max: n });
        }
        Ok(UnitShift { shift, m, n })
    }

    /// 0-based: `(i, j)` is one iff `j = i + s`.
    pub fn entry(&self, i: usize, j: usize) -> bool {
        j == i + self.shift
    }

    pub fn to_matrix<S: Scalar>(&self) -> CMatrix<S> {
        CMatrix::from_fn(self.m, self.m + self.n, |i, j| {
            if self.entry(i, j) {
                S::one()
            } else {
                S::zero()
            }
        })
    }
}

/// Strictly increasing 0-based column indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexSet {
    cols: Vec<usize>,
}

impl IndexSet {
    /// `total` is the number of pencil columns `m + n`.
    pub fn new(cols: Vec<usize>, total: usize) -> Result<Self> {
        if cols.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::MalformedIndexSet(format!(
                "{cols:?} is not strictly increasing"
            )));
        }
        if let Some(&last) = cols.last() {
            if last >= total {
                return Err(Error::MalformedIndexSet(format!(
                    "column {last} outside 0..{total}"
                )));
            }
        }
        Ok(IndexSet { cols })
    }

    /// All of `0..total` except `col`.
    pub fn all_except(total: usize, col: usize) -> Result<Self> {
        if col >= total {
            return Err(Error::IndexOutOfRange {
                index: col,
                max: total.saturating_sub(1),
            });
        }
        Ok(IndexSet {
            cols: (0..total).filter(|&j| j != col).collect(),
        })
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    /// `Ī = {total − 1 − i}` in increasing order.
    pub fn reflected(&self, total: usize) -> IndexSet {
        let mut cols: Vec<usize> = self.cols.iter().map(|&i| total - 1 - i).collect();
        cols.reverse();
        IndexSet { cols }
    }
}

/// The pencil `A + Σ_s z_s I_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct CharPencil<S> {
    base: CMatrix<S>,
    nvars: usize,
}

impl<S: Scalar> CharPencil<S> {
    /// `base` must be `m × (m + nvars)` with `m ≥ 1`.
    pub fn new(base: CMatrix<S>, nvars: usize) -> Result<Self> {
        let (m, cols) = base.shape();
        if m == 0 || cols != m + nvars {
            return Err(Error::Dimension(format!(
                "pencil base must be m×(m+{nvars}) with m ≥ 1, got {m}×{cols}"
            )));
        }
        Ok(CharPencil { base, nvars })
    }

    /// The `m × (m+1)` pencil of the `(a, c)` family:
    ///
    /// ```text
    /// z  z̄  ā
    /// c  z  z̄  c̄
    ///    …  …  …  …
    ///       c  z  z̄  c̄
    ///          a  z  z̄
    /// ```
    pub fn aac(m: usize, a: &S, c: &S) -> Result<Self> {
        if m == 0 {
            return Err(Error::Dimension("pencil needs m ≥ 1".into()));
        }
        let mut base = CMatrix::zeros(m, m + 1);
        if m >= 2 {
            base[(0, 2)] = a.conj();
            base[(m - 1, m - 2)] = a.clone();
        }
        for i in 1..m.saturating_sub(1) {
            base[(i, i - 1)] = c.clone();
            base[(i, i + 2)] = c.conj();
        }
        CharPencil::new(base, 1)
    }

    pub fn base(&self) -> &CMatrix<S> {
        &self.base
    }

    pub fn rows(&self) -> usize {
        self.base.rows()
    }

    pub fn cols(&self) -> usize {
        self.base.cols()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    fn require_pair(&self) -> Result<()> {
        if self.nvars != 1 {
            return Err(Error::UnsupportedVariables {
                expected: 1,
                actual: self.nvars,
            });
        }
        Ok(())
    }

    fn check_index_set(&self, set: &IndexSet) -> Result<()> {
        if set.len() != self.rows() {
            return Err(Error::MalformedIndexSet(format!(
                "need {} columns, got {}",
                self.rows(),
                set.len()
            )));
        }
        if set.cols().last().is_some_and(|&c| c >= self.cols()) {
            return Err(Error::MalformedIndexSet("column out of range".into()));
        }
        Ok(())
    }

    /// Entry `(i, j)` as a polynomial in `(z, z̄)`; requires `n = 1`.
    pub fn entry_poly(&self, i: usize, j: usize) -> BivarPoly<S> {
        let mut p = BivarPoly::constant(self.base[(i, j)].clone());
        if j == i {
            p = p + BivarPoly::z();
        } else if j == i + 1 {
            p = p + BivarPoly::zbar();
        }
        p
    }

    /// Polynomial submatrix formed by the columns of `set`.
    pub fn submatrix(&self, set: &IndexSet) -> Result<Vec<Vec<BivarPoly<S>>>> {
        self.require_pair()?;
        self.check_index_set(set)?;
        Ok((0..self.rows())
            .map(|i| set.cols().iter().map(|&j| self.entry_poly(i, j)).collect())
            .collect())
    }

    /// `P_I(z, z̄) = det A_I(z, z̄)`; requires `n = 1`.
    pub fn charpoly(&self, set: &IndexSet) -> Result<BivarPoly<S>> {
        Ok(det_bareiss(self.submatrix(set)?))
    }

    /// Numeric value of `P_I(z_0, …, z_n)`.
    pub fn charpoly_at(&self, set: &IndexSet, point: &[Complex64]) -> Result<Complex64> {
        self.check_index_set(set)?;
        if point.len() != self.nvars + 1 {
            return Err(Error::Dimension(format!(
                "expected {} variable values, got {}",
                self.nvars + 1,
                point.len()
            )));
        }
        let m = self.rows();
        let sub = DMatrix::from_fn(m, m, |i, jj| {
            let j = set.cols()[jj];
            let mut v = self.base[(i, j)].to_c64();
            if j >= i && j - i <= self.nvars {
                v += point[j - i];
            }
            v
        });
        Ok(sub.determinant())
    }

    /// `max_samples |P_Ī(z) − conj(P_I(z̄_n, …, z̄_0))|` without checking the
    /// hypothesis on the base matrix.
    pub fn reflection_residual(&self, set: &IndexSet, samples: &[Vec<Complex64>]) -> Result<f64> {
        let refl = set.reflected(self.cols());
        let mut worst: f64 = 0.0;
        for pt in samples {
            let mirrored: Vec<Complex64> = pt.iter().rev().map(|v| v.conj()).collect();
            let lhs = self.charpoly_at(&refl, pt)?;
            let rhs = self.charpoly_at(set, &mirrored)?.conj();
            worst = worst.max((lhs - rhs).norm());
        }
        Ok(worst)
    }

    /// Reflection residual, refusing pencils whose base is not centrohermitian.
    pub fn check_reflection(&self, set: &IndexSet, samples: &[Vec<Complex64>]) -> Result<f64> {
        let tol = if S::EXACT { 0.0 } else { CENTRO_TOL_FLOAT };
        let residual = self.base.centrohermitian_residual();
        if residual > tol {
            return Err(Error::NotCentrohermitian { residual });
        }
        self.reflection_residual(set, samples)
    }
}

/// `Q_k^m` of the `(a, c)` family: determinant of the pencil without its
/// column `m − k` (0-based).
pub fn q_via_determinant<S: Scalar>(m: usize, k: usize, a: &S, c: &S) -> Result<BivarPoly<S>> {
    if k > m {
        return Err(Error::IndexOutOfRange { index: k, max: m });
    }
    if m == 0 {
        return Ok(BivarPoly::one());
    }
    let pencil = CharPencil::aac(m, a, c)?;
    let set = IndexSet::all_except(m + 1, m - k)?;
    pencil.charpoly(&set)
}

/// Fraction-free (Bareiss) elimination over the polynomial ring.
///
/// Falls back to cofactor expansion if a float-mode division leaves a
/// remainder that is not rounding noise.
pub fn det_bareiss<S: Scalar>(mut a: Vec<Vec<BivarPoly<S>>>) -> BivarPoly<S> {
    let n = a.len();
    if n == 0 {
        return BivarPoly::one();
    }
    let original = a.clone();
    let mut negate = false;
    let mut prev = BivarPoly::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    negate = !negate;
                }
                None => return BivarPoly::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = match num.div_exact(&prev) {
                    Some(q) => q,
                    None if S::EXACT => unreachable!("Bareiss division is exact"),
                    None => return det_cofactor(&original),
                };
            }
            a[i][k] = BivarPoly::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

/// Division-free Laplace expansion with memoised minors, `O(2^n · n)`
/// polynomial products.
///
/// # Panics
/// If `n > 20`.
pub fn det_cofactor<S: Scalar>(a: &[Vec<BivarPoly<S>>]) -> BivarPoly<S> {
    let n = a.len();
    assert!(n <= 20, "cofactor expansion limited to n ≤ 20");
    // minor(mask) = det of the last |mask| rows restricted to the columns in mask
    let mut memo: HashMap<u32, BivarPoly<S>> = HashMap::new();
    memo.insert(0, BivarPoly::one());
    for size in 1..=n {
        let row = n - size;
        let masks: Vec<u32> = (0u32..(1 << n))
            .filter(|mask| mask.count_ones() as usize == size)
            .collect();
        for mask in masks {
            let mut acc = BivarPoly::zero();
            let mut parity = false;
            for col in 0..n {
                if mask & (1 << col) == 0 {
                    continue;
                }
                let entry = &a[row][col];
                if !entry.is_zero() {
                    let term = entry * &memo[&(mask & !(1 << col))];
                    acc = if parity { &acc - &term } else { &acc + &term };
                }
                parity = !parity;
            }
            memo.insert(mask, acc);
        }
    }
    memo.remove(&((1u32 << n) - 1)).unwrap_or_else(BivarPoly::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussRat;

    type P = BivarPoly<GaussRat>;

    fn g(re: i64, im: i64) -> GaussRat {
        GaussRat::int(re, im)
    }

    #[test]
    fn unit_shift_entries() {
        let s = UnitShift::new(1, 2, 1).unwrap();
        let m: CMatrix<GaussRat> = s.to_matrix();
        assert_eq!(
            m,
            CMatrix::from_rows(vec![
                vec![g(0, 0), g(1, 0), g(0, 0)],
                vec![g(0, 0), g(0, 0), g(1, 0)],
            ])
        );
        assert!(UnitShift::new(3, 2, 2).is_err());
    }

    #[test]
    fn pencil_shapes() {
        let (a, c) = (g(2, 1), g(3, -1));
        let p1 = CharPencil::aac(1, &a, &c).unwrap();
        assert_eq!(p1.entry_poly(0, 0), P::z());
        assert_eq!(p1.entry_poly(0, 1), P::zbar());

        let p2 = CharPencil::aac(2, &a, &c).unwrap();
        let row0: Vec<P> = (0..3).map(|j| p2.entry_poly(0, j)).collect();
        let row1: Vec<P> = (0..3).map(|j| p2.entry_poly(1, j)).collect();
        assert_eq!(row0, vec![P::z(), P::zbar(), P::constant(a.conj())]);
        assert_eq!(row1, vec![P::constant(a.clone()), P::z(), P::zbar()]);

        let p4 = CharPencil::aac(4, &a, &c).unwrap();
        let row: Vec<P> = (0..5).map(|j| p4.entry_poly(1, j)).collect();
        assert_eq!(
            row,
            vec![P::constant(c.clone()), P::z(), P::zbar(), P::constant(c.conj()), P::zero()]
        );
        assert!(p4.base().is_centrohermitian(0.0));
        assert!(CharPencil::aac(0, &a, &c).is_err());
    }

    #[test]
    fn small_determinants() {
        let a = g(2, 0);
        let p = CharPencil::aac(2, &a, &g(1, 0)).unwrap();
        let d01 = p.charpoly(&IndexSet::new(vec![0, 1], 3).unwrap()).unwrap();
        assert_eq!(d01, P::z() * P::z() - P::zbar().scale(&a));
        let d02 = p.charpoly(&IndexSet::new(vec![0, 2], 3).unwrap()).unwrap();
        assert_eq!(d02, P::z() * P::zbar() - P::constant(a.clone() * a.conj()));
        let p1 = CharPencil::aac(1, &a, &g(1, 0)).unwrap();
        assert_eq!(p1.charpoly(&IndexSet::new(vec![0], 2).unwrap()).unwrap(), P::z());
    }

    #[test]
    fn q_determinant_examples() {
        let (a, c) = (g(2, 0), g(1, 0));
        assert_eq!(q_via_determinant(1, 0, &a, &c).unwrap(), P::z());
        assert_eq!(q_via_determinant(1, 1, &a, &c).unwrap(), P::zbar());
        assert_eq!(
            q_via_determinant(2, 0, &a, &c).unwrap(),
            P::z() * P::z() - P::zbar().scale(&g(2, 0))
        );
        let (a, c) = (g(1, 2), g(-3, 1));
        assert_eq!(
            q_via_determinant(2, 2, &a, &c).unwrap(),
            q_via_determinant(2, 0, &a, &c).unwrap().conj_reflect()
        );
        assert!(q_via_determinant(2, 3, &a, &c).is_err());
    }

    #[test]
    fn bareiss_matches_cofactor() {
        let (a, c) = (GaussRat::from_ratios(3, 2, 1, 3), g(1, -1));
        for m in 1..=6 {
            let pencil = CharPencil::aac(m, &a, &c).unwrap();
            for del in 0..=m {
                let sub = pencil.submatrix(&IndexSet::all_except(m + 1, del).unwrap()).unwrap();
                assert_eq!(det_bareiss(sub.clone()), det_cofactor(&sub), "m={m} del={del}");
            }
        }
    }

    #[test]
    fn bareiss_pivots_past_zero_entries() {
        // [[0, z], [z̄, 1]] → −z z̄
        let m = vec![
            vec![P::zero(), P::z()],
            vec![P::zbar(), P::one()],
        ];
        assert_eq!(det_bareiss(m), -(P::z() * P::zbar()));
    }

    #[test]
    fn index_set_validation() {
        assert!(IndexSet::new(vec![1, 1], 3).is_err());
        assert!(IndexSet::new(vec![0, 3], 3).is_err());
        let s = IndexSet::new(vec![0, 2, 3], 5).unwrap();
        assert_eq!(s.reflected(5).cols(), &[1, 2, 4]);
        let p = CharPencil::aac(3, &g(1, 0), &g(1, 0)).unwrap();
        assert!(p.charpoly(&IndexSet::new(vec![0, 1], 4).unwrap()).is_err());
    }

    #[test]
    fn reflection_hypothesis_is_checked() {
        let mut base = CharPencil::aac(3, &g(2, 1), &g(1, 1)).unwrap().base().clone();
        base[(0, 2)] = g(5, 5);
        let pencil = CharPencil::new(base, 1).unwrap();
        let set = IndexSet::new(vec![0, 1, 3], 4).unwrap();
        let pts = vec![vec![Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.7)]];
        assert!(matches!(
            pencil.check_reflection(&set, &pts),
            Err(Error::NotCentrohermitian { .. })
        ));
        assert!(pencil.reflection_residual(&set, &pts).unwrap() > 1e-3);
    }

    #[test]
    fn multivariate_needs_point_evaluation() {
        let base = CMatrix::<GaussRat>::zeros(2, 4);
        let pencil = CharPencil::new(base, 2).unwrap();
        let set = IndexSet::new(vec![0, 1], 4).unwrap();
        assert!(matches!(
            pencil.charpoly(&set),
            Err(Error::UnsupportedVariables { .. })
        ));
        // det [[z0, z1], [0, z0]] = z0²
        let v = pencil
            .charpoly_at(&set, &[Complex64::new(2.0, 1.0), Complex64::new(5.0, 0.0), Complex64::new(0.0, 0.0)])
            .unwrap();
        assert!((v - Complex64::new(3.0, 4.0)).norm() < 1e-12);
    }
}
