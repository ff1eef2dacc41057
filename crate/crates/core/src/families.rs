//! Polynomial families generated by three-term recurrences.
//!
//! `Q_k^m(a, c)` satisfies `z Q_m = [I | 0] Q_{m+1} + β_m Q_m + γ_{m-1} Q_{m-1}`
//! with sparse `β`, `γ` depending on `(a, c)`. The P-family is the special
//! case `a = c`, and the Chebyshev polynomials `U_k^n` of the deltoid are the
//! P-family rescaled by 3.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::poly::BivarPoly;
use crate::scalar::Scalar;

/// Singular values at or below this count as zero in the rank conditions.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    ChebyshevU,
    P,
    Q,
}

/// Triangular table `poly[m][k]`, `0 ≤ k ≤ m ≤ m_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyFamily<S> {
    kind: FamilyKind,
    a: S,
    c: S,
    table: Vec<Vec<BivarPoly<S>>>,
}

impl<S: Scalar> PolyFamily<S> {
    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn a(&self) -> &S {
        &self.a
    }

    pub fn c(&self) -> &S {
        &self.c
    }

    pub fn max_degree(&self) -> usize {
        self.table.len() - 1
    }

    /// # Panics
    /// If `k > m` or `m` exceeds the table.
    pub fn get(&self, m: usize, k: usize) -> &BivarPoly<S> {
        &self.table[m][k]
    }

    /// Zero outside the triangle, matching the convention `P_{-1} = 0`.
    pub fn get_or_zero(&self, m: i64, k: i64) -> BivarPoly<S> {
        if m < 0 || k < 0 || k > m || m as usize > self.max_degree() {
            BivarPoly::zero()
        } else {
            self.table[m as usize][k as usize].clone()
        }
    }

    /// The vector `(poly[m][0], …, poly[m][m])`.
    pub fn level(&self, m: usize) -> &[BivarPoly<S>] {
        &self.table[m]
    }

    pub fn to_complex(&self) -> PolyFamily<Complex64> {
        PolyFamily {
            kind: self.kind,
            a: self.a.to_c64(),
            c: self.c.to_c64(),
            table: self
                .table
                .iter()
                .map(|row| row.iter().map(BivarPoly::to_complex).collect())
                .collect(),
        }
    }

    /// Evaluates level `m` at `z` (with `z̄ = conj z`).
    pub fn eval_level(&self, m: usize, z: Complex64) -> Vec<Complex64> {
        self.table[m]
            .iter()
            .map(|p| p.to_complex().eval(&z))
            .collect()
    }

    /// `max |conj_reflect(poly[m][k]) − poly[m][m−k]|` over the table; zero in
    /// exact mode when the symmetry holds.
    pub fn symmetry_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (m, row) in self.table.iter().enumerate() {
            for (k, p) in row.iter().enumerate() {
                let diff = p.conj_reflect() - row[m - k].clone();
                if !diff.is_zero() {
                    worst = worst.max(diff.max_coeff_magnitude().max(f64::MIN_POSITIVE));
                }
            }
        }
        worst
    }
}

/// Recurrence coefficients at degree `m`:
/// `z Q_m = alpha Q_{m+1} + beta Q_m + gamma Q_{m-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThreeTermCoeffs<S> {
    pub degree: usize,
    /// `(m+1) × (m+2)`
    pub alpha: CMatrix<S>,
    /// `(m+1) × (m+1)`
    pub beta: CMatrix<S>,
    /// `(m+1) × m`
    pub gamma: CMatrix<S>,
}

impl<S: Scalar> ThreeTermCoeffs<S> {
    /// Coefficients of the `(a, c)` family at degree `m`.
    ///
    /// For `m ≥ 3`, `β` carries `c` on the superdiagonal and `c̄ − ā` at
    /// `(m, m−2)`; `γ` carries `c(c−a)` at `(0, 2)` and `|c|²` at `(i, i−1)`.
    /// Degrees 1 and 2 differ because the pencil's end rows overlap there.
    pub fn for_q(m: usize, a: &S, c: &S) -> Self {
        let alpha = CMatrix::leading_identity(m + 1, m + 2);
        let mut beta = CMatrix::zeros(m + 1, m + 1);
        let mut gamma = CMatrix::zeros(m + 1, m);
        match m {
            0 => {}
            1 => {
                beta[(0, 1)] = a.clone();
                gamma[(1, 0)] = a.norm_sqr();
            }
            _ => {
                for i in 0..m {
                    beta[(i, i + 1)] = c.clone();
                }
                beta[(m, m - 2)] = c.conj() - a.conj();
                let band = if m == 2 {
                    let d = c.clone() - a.clone();
                    c.norm_sqr() - d.norm_sqr()
                } else {
                    gamma[(0, 2)] = c.clone() * (c.clone() - a.clone());
                    c.norm_sqr()
                };
                for i in 1..=m {
                    gamma[(i, i - 1)] = band.clone();
                }
            }
        }
        ThreeTermCoeffs {
            degree: m,
            alpha,
            beta,
            gamma,
        }
    }

    /// Coefficients of the `z̄` recurrence.
    pub fn alpha_vee(&self) -> CMatrix<S> {
        self.alpha.vee()
    }

    pub fn beta_vee(&self) -> CMatrix<S> {
        self.beta.vee()
    }

    pub fn gamma_vee(&self) -> CMatrix<S> {
        self.gamma.vee()
    }

    pub fn to_complex(&self) -> ThreeTermCoeffs<Complex64> {
        ThreeTermCoeffs {
            degree: self.degree,
            alpha: self.alpha.to_complex(),
            beta: self.beta.to_complex(),
            gamma: self.gamma.to_complex(),
        }
    }

    /// Checks the rank conditions for a quasi-definite functional:
    /// `rank(α ± α^∨) = m+1`, `rank [α; α^∨] = m+2`, and for `m ≥ 1`
    /// `rank(γ ± γ^∨) = m`, `rank [γ | γ^∨] = m+1`.
    pub fn rank_conditions_hold(&self) -> bool {
        let m = self.degree;
        let (a, av) = (&self.alpha, &self.alpha_vee());
        let mut ok = numeric_rank(&a.add(av)) == m + 1
            && numeric_rank(&a.sub(av)) == m + 1
            && numeric_rank(&a.vstack(av)) == m + 2;
        if m >= 1 {
            let (g, gv) = (&self.gamma, &self.gamma_vee());
            ok &= numeric_rank(&g.add(gv)) == m
                && numeric_rank(&g.sub(gv)) == m
                && numeric_rank(&g.hstack(gv)) == m + 1;
        }
        ok
    }
}

/// Number of singular values above [`RANK_TOL`].
pub fn numeric_rank<S: Scalar>(m: &CMatrix<S>) -> usize {
    if m.rows() == 0 || m.cols() == 0 {
        return 0;
    }
    let mat: DMatrix<Complex64> = m.to_nalgebra();
    mat.svd(false, false)
        .singular_values
        .iter()
        .filter(|&&s| s > RANK_TOL)
        .count()
}

/// Recurrence coefficients for degrees `0..=m_max`.
pub fn q_coeffs<S: Scalar>(m_max: usize, a: &S, c: &S) -> Vec<ThreeTermCoeffs<S>> {
    (0..=m_max).map(|m| ThreeTermCoeffs::for_q(m, a, c)).collect()
}

fn generate<S: Scalar>(
    kind: FamilyKind,
    m_max: usize,
    a: &S,
    c: &S,
    coeffs: &[ThreeTermCoeffs<S>],
) -> PolyFamily<S> {
    let mut table: Vec<Vec<BivarPoly<S>>> = vec![vec![BivarPoly::one()]];
    for m in 0..m_max {
        let co = &coeffs[m];
        let mut next = Vec::with_capacity(m + 2);
        for k in 0..=m {
            let mut p = table[m][k].shift(1, 0);
            for j in 0..=m {
                let b = &co.beta[(k, j)];
                if !b.is_zero() {
                    p = p.add_scaled(&table[m][j], &-b.clone());
                }
            }
            for j in 0..m {
                let g = &co.gamma[(k, j)];
                if !g.is_zero() {
                    p = p.add_scaled(&table[m - 1][j], &-g.clone());
                }
            }
            next.push(p);
        }
        next.push(next[0].conj_reflect());
        table.push(next);
    }
    PolyFamily {
        kind,
        a: a.clone(),
        c: c.clone(),
        table,
    }
}

/// `Q_k^m` for `m ≤ m_max` together with the recurrence coefficients used.
pub fn gen_q<S: Scalar>(m_max: usize, a: &S, c: &S) -> (PolyFamily<S>, Vec<ThreeTermCoeffs<S>>) {
    let coeffs = q_coeffs(m_max, a, c);
    let fam = generate(FamilyKind::Q, m_max, a, c, &coeffs);
    (fam, coeffs)
}

/// The P-family at parameter `c` (the Q-family with `a = c`).
pub fn gen_p<S: Scalar>(m_max: usize, c: &S) -> PolyFamily<S> {
    let coeffs = q_coeffs(m_max, c, c);
    generate(FamilyKind::P, m_max, c, c, &coeffs)
}

/// Chebyshev polynomials of the second kind on the deltoid:
/// `U_k^{n+1} = 3z U_k^n − U_{k+1}^n − U_{k−1}^{n−1}`.
pub fn gen_chebyshev_u<S: Scalar>(n_max: usize) -> PolyFamily<S> {
    let three = S::from_i64(3);
    let mut table: Vec<Vec<BivarPoly<S>>> = vec![vec![BivarPoly::one()]];
    for n in 0..n_max {
        let mut next = Vec::with_capacity(n + 2);
        for k in 0..=n {
            let mut p = table[n][k].shift(1, 0).scale(&three);
            if k < n {
                p = p - table[n][k + 1].clone();
            }
            if k >= 1 {
                p = p - table[n - 1][k - 1].clone();
            }
            next.push(p);
        }
        next.push(next[0].conj_reflect());
        table.push(next);
    }
    PolyFamily {
        kind: FamilyKind::ChebyshevU,
        a: S::one(),
        c: S::one(),
        table,
    }
}

/// Expresses `Q_k^m(a, c)` through the P-family at parameter `c`.
///
/// `pfam` must reach degree `m`; entries outside the triangle count as zero.
pub fn expand_via_p<S: Scalar>(
    m: usize,
    k: usize,
    a: &S,
    c: &S,
    pfam: &PolyFamily<S>,
) -> Result<BivarPoly<S>> {
    if k > m {
        return Err(Error::IndexOutOfRange { index: k, max: m });
    }
    if pfam.max_degree() < m {
        return Err(Error::InsufficientDepth {
            needed: m,
            available: pfam.max_degree(),
        });
    }
    if m == 0 {
        return Ok(BivarPoly::one());
    }
    let p = |mm: usize, kk: i64, dm: i64| pfam.get_or_zero(mm as i64 - dm, kk);
    let (mi, ki) = (m as i64, k as i64);
    let amc = a.clone() - c.clone();
    let amc_bar = amc.conj();
    let cb = c.conj();
    let d = amc.clone() * amc_bar.clone();
    let c2 = c.clone() * c.clone();
    let cb2 = cb.clone() * cb.clone();

    let mut q = pfam.get(m, k).clone();
    if k == m {
        q = q.add_scaled(&p(m, mi - 2, 1), &-amc_bar.clone());
        q = q.add_scaled(&p(m, mi - 3, 3), &(cb2.clone() * amc.clone()));
        q = q.add_scaled(&p(m, mi - 5, 4), &-(cb2 * d.clone()));
        if m == 3 {
            q = q.add_scaled(&BivarPoly::one(), &(cb * d));
        }
    } else if k == 0 {
        q = q.add_scaled(&p(m, 1, 1), &-amc.clone());
        q = q.add_scaled(&p(m, 0, 3), &(c2.clone() * amc_bar));
        q = q.add_scaled(&p(m, 1, 4), &-(c2 * d.clone()));
        if m == 3 {
            q = q.add_scaled(&BivarPoly::one(), &(c.clone() * d));
        }
    } else if m == 2 {
        // k = 1
        let constant = cb * amc + c.clone() * amc_bar + d;
        q = q.add_scaled(&BivarPoly::one(), &-constant);
    } else if k == 1 {
        q = q.add_scaled(&p(m, 0, 2), &-(cb.clone() * amc));
        q = q.add_scaled(&p(m, 1, 3), &(c2.clone() * amc_bar));
        q = q.add_scaled(&p(m, 0, 5), &-(c2 * cb * d));
    } else if k == m - 1 {
        q = q.add_scaled(&p(m, mi - 2, 2), &-(c.clone() * amc_bar));
        q = q.add_scaled(&p(m, mi - 4, 3), &(cb2.clone() * amc));
        q = q.add_scaled(&p(m, mi - 5, 5), &-(cb2 * c.clone() * d));
    } else {
        q = q.add_scaled(&p(m, ki - 3, 3), &(cb2 * amc));
        q = q.add_scaled(&p(m, ki, 3), &(c2 * amc_bar));
        let c4 = c.norm_sqr() * c.norm_sqr();
        q = q.add_scaled(&p(m, ki - 3, 6), &(c4 * d));
    }
    Ok(q)
}

/// Rescales the P-family at `c = ā³/|a|²` onto the Chebyshev table:
/// `U_k^m = ā^{−(m−k)} a^{−k} P_k^m(3āz, 3az̄)`.
pub fn scale_to_chebyshev<S: Scalar>(pfam: &PolyFamily<S>, a: &S) -> Result<PolyFamily<S>> {
    let ab = a.conj();
    let (a_inv, ab_inv) = match (a.inv(), ab.inv()) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(Error::RelationViolated("a must be nonzero".into())),
    };
    let lhs = pfam.c().clone() * a.norm_sqr();
    let rhs = ab.pow(3);
    let ok = if S::EXACT {
        lhs == rhs
    } else {
        (lhs - rhs).magnitude() <= 1e-12 * a.magnitude().powi(3)
    };
    if !ok {
        return Err(Error::RelationViolated(format!(
            "c = {} is not conj(a)^3/|a|^2 for a = {}",
            pfam.c(),
            a
        )));
    }
    let three = S::from_i64(3);
    let s = three.clone() * ab.clone();
    let t = three * a.clone();
    let table = (0..=pfam.max_degree())
        .map(|m| {
            (0..=m)
                .map(|k| {
                    let factor = ab_inv.pow((m - k) as u32) * a_inv.pow(k as u32);
                    pfam.get(m, k).substitute_scaled(&s, &t).scale(&factor)
                })
                .collect()
        })
        .collect();
    Ok(PolyFamily {
        kind: FamilyKind::ChebyshevU,
        a: S::one(),
        c: S::one(),
        table,
    })
}

/// The unitary map `S_n` from the complex basis to the real one:
/// row `k < n/2` is `(e_k + e_{n−k})/√2`, row `n/2` is `e_{n/2}`, and row
/// `k > n/2` is `i(e_k − e_{n−k})/√2`.
pub fn real_basis_matrix(n: usize) -> CMatrix<Complex64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut s = CMatrix::zeros(n + 1, n + 1);
    for k in 0..=n {
        let mirror = n - k;
        if 2 * k < n {
            s[(k, k)] = Complex64::new(r, 0.0);
            s[(k, mirror)] = Complex64::new(r, 0.0);
        } else if 2 * k == n {
            s[(k, k)] = Complex64::new(1.0, 0.0);
        } else {
            s[(k, k)] = Complex64::new(0.0, r);
            s[(k, mirror)] = Complex64::new(0.0, -r);
        }
    }
    s
}

/// Applies `S_n` to a vector with `value[k] = conj(value[n−k])`.
///
/// The symmetry is checked to `1e−10` relative to the largest entry.
pub fn to_real_basis(values: &[Complex64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::Dimension("empty value vector".into()));
    }
    let n = values.len() - 1;
    let scale = values.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let residual = (0..=n)
        .map(|k| (values[k] - values[n - k].conj()).norm())
        .fold(0.0, f64::max);
    if residual > 1e-10 * scale {
        return Err(Error::SymmetryViolated { residual });
    }
    let s = real_basis_matrix(n);
    Ok((0..=n)
        .map(|k| (0..=n).map(|j| s[(k, j)] * values[j]).sum::<Complex64>().re)
        .collect())
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
    fn chebyshev_initial_values() {
        let u = gen_chebyshev_u::<GaussRat>(3);
        let three = g(3, 0);
        assert_eq!(u.get(0, 0), &P::one());
        assert_eq!(u.get(1, 0), &P::z().scale(&three));
        assert_eq!(u.get(1, 1), &P::zbar().scale(&three));
        assert_eq!(
            u.get(2, 0),
            &(P::monomial(2, 0, g(9, 0)) - P::zbar().scale(&three))
        );
        assert_eq!(u.get(2, 1), &(P::monomial(1, 1, g(9, 0)) - P::one()));
        assert_eq!(u.symmetry_residual(), 0.0);
    }

    #[test]
    fn q_small_levels() {
        let (q, _) = gen_q(2, &g(2, 0), &g(1, 0));
        assert_eq!(q.get(1, 0), &P::z());
        assert_eq!(q.get(1, 1), &P::zbar());
        assert_eq!(q.get(2, 0), &(P::monomial(2, 0, g(1, 0)) - P::zbar().scale(&g(2, 0))));
    }

    #[test]
    fn q_is_monic_of_exact_degree() {
        let a = GaussRat::from_ratios(3, 2, 1, 2);
        let (q, _) = gen_q(7, &a, &g(1, -1));
        for m in 0..=7 {
            for k in 0..=m {
                let p = q.get(m, k);
                assert_eq!(p.degree(), Some(m as u32));
                assert_eq!(p.coeff((m - k) as u32, k as u32), g(1, 0));
            }
        }
        assert_eq!(q.symmetry_residual(), 0.0);
    }

    #[test]
    fn q_at_a_equals_c_is_p() {
        let c = g(2, 1);
        let (q, coeffs) = gen_q(6, &c, &c);
        let p = gen_p(6, &c);
        for m in 0..=6 {
            assert_eq!(q.level(m), p.level(m));
        }
        // P-family coefficients: superdiagonal c, zero row over |c|² I
        let co = &coeffs[4];
        assert!(co.beta[(4, 2)].is_zero());
        assert!(co.gamma[(0, 2)].is_zero());
        for i in 0..4 {
            assert_eq!(co.beta[(i, i + 1)], c);
            assert_eq!(co.gamma[(i + 1, i)], c.norm_sqr());
        }
    }

    #[test]
    fn coefficient_shapes_and_pattern() {
        let (a, c) = (g(2, 1), g(1, 3));
        for m in 0..6 {
            let co = ThreeTermCoeffs::for_q(m, &a, &c);
            assert_eq!(co.alpha.shape(), (m + 1, m + 2));
            assert_eq!(co.beta.shape(), (m + 1, m + 1));
            assert_eq!(co.gamma.shape(), (m + 1, m));
        }
        let co = ThreeTermCoeffs::for_q(5, &a, &c);
        assert_eq!(co.beta[(5, 3)], c.conj() - a.conj());
        assert_eq!(co.gamma[(0, 2)], c.clone() * (c.clone() - a.clone()));
        assert_eq!(co.gamma[(3, 2)], c.norm_sqr());
    }

    #[test]
    fn p_expansion_small_cases() {
        let (a, c) = (g(2, 0), g(1, 0));
        let p = gen_p(6, &c);
        assert_eq!(
            expand_via_p(2, 0, &a, &c, &p).unwrap(),
            P::monomial(2, 0, g(1, 0)) - P::zbar().scale(&g(2, 0))
        );
        assert_eq!(expand_via_p(5, 2, &c, &c, &p).unwrap(), p.get(5, 2).clone());
        assert!(expand_via_p(2, 3, &a, &c, &p).is_err());
        assert!(matches!(
            expand_via_p(7, 0, &a, &c, &p),
            Err(Error::InsufficientDepth { .. })
        ));
    }

    #[test]
    fn p_expansion_matches_recurrence() {
        let (a, c) = (GaussRat::from_ratios(1, 3, -2, 1), GaussRat::from_ratios(3, 2, 1, 1));
        let p = gen_p(8, &c);
        let (q, _) = gen_q(8, &a, &c);
        for m in 0..=8 {
            for k in 0..=m {
                assert_eq!(&expand_via_p(m, k, &a, &c, &p).unwrap(), q.get(m, k), "m={m} k={k}");
            }
        }
    }

    #[test]
    fn chebyshev_scaling() {
        let u = gen_chebyshev_u::<GaussRat>(8);
        let one = g(1, 0);
        assert_eq!(scale_to_chebyshev(&gen_p(8, &one), &one).unwrap(), u);
        let a = g(1, 1);
        assert_eq!(scale_to_chebyshev(&gen_p(8, &g(-1, -1)), &a).unwrap(), u);
        assert!(matches!(
            scale_to_chebyshev(&gen_p(3, &g(2, 0)), &one),
            Err(Error::RelationViolated(_))
        ));
    }

    #[test]
    fn real_basis_examples() {
        let v = Complex64::new(0.7, -1.3);
        let out = to_real_basis(&[v, v.conj()]).unwrap();
        let r2 = std::f64::consts::SQRT_2;
        assert!((out[0] - r2 * v.re).abs() < 1e-15);
        assert!((out[1] - r2 * v.im).abs() < 1e-15);

        let w = [Complex64::new(1.0, 2.0), Complex64::new(5.0, 0.0), Complex64::new(1.0, -2.0)];
        let out = to_real_basis(&w).unwrap();
        assert_eq!(out[1], 5.0);

        assert!(matches!(
            to_real_basis(&[Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)]),
            Err(Error::SymmetryViolated { .. })
        ));
    }

    #[test]
    fn real_basis_is_unitary() {
        for n in 0..12 {
            let s = real_basis_matrix(n);
            let prod = s.matmul(&s.adjoint());
            assert!(prod.max_abs_diff(&CMatrix::identity(n + 1)) < 1e-14, "n={n}");
        }
    }

    #[test]
    fn rank_conditions() {
        for (a, c) in [(g(1, 0), g(1, 0)), (GaussRat::real(3, 2), g(1, 0)), (g(1, 1), g(-1, -1))] {
            for m in 0..=10 {
                assert!(ThreeTermCoeffs::for_q(m, &a, &c).rank_conditions_hold(), "m={m}");
            }
        }
    }
}
