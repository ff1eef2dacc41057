//! The moment functional `L` of the Q-family, its Gram matrices and the
//! classification of the parameters `(a, c)`.
//!
//! `L` is fixed by `L(1) = 1` and the orthogonality of the recurrence, so the
//! moments `L(z^j z̄^k)` are read off by applying the multiplication operators
//! for `z` and `z̄` to coefficient vectors in the Q basis.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::families::{PolyFamily, ThreeTermCoeffs};
use crate::matrix::CMatrix;
use crate::scalar::Scalar;

/// Relative pivot threshold for the positivity check.
pub const PIVOT_REL_TOL: f64 = 1e-12;
/// Relative tolerance for `c(c−a) ∈ ℝ` in float mode.
pub const REALITY_TOL: f64 = 1e-10;

/// Coefficients of a polynomial in the Q basis, one row vector per degree.
type QVector<S> = Vec<Vec<S>>;

/// `v ↦ v·(multiplication by z)`, or by `z̄` when `bar` is set. Levels above
/// `keep` are dropped.
fn apply_mult<S: Scalar>(v: &QVector<S>, coeffs: &[ThreeTermCoeffs<S>], bar: bool, keep: usize) -> QVector<S> {
    let top = (v.len()).min(keep + 1);
    let mut out: QVector<S> = (0..=top.min(keep)).map(|n| vec![S::zero(); n + 1]).collect();
    for (n, row) in v.iter().enumerate() {
        if row.iter().all(Scalar::is_zero) {
            continue;
        }
        let co = &coeffs[n];
        let (al, be, ga) = if bar {
            (co.alpha_vee(), co.beta_vee(), co.gamma_vee())
        } else {
            (co.alpha.clone(), co.beta.clone(), co.gamma.clone())
        };
        let targets: [(Option<usize>, &CMatrix<S>); 3] = [
            (Some(n + 1), &al),
            (Some(n), &be),
            (n.checked_sub(1), &ga),
        ];
        for (level, mat) in targets {
            let Some(level) = level else { continue };
            if level > keep {
                continue;
            }
            while out.len() <= level {
                let l = out.len();
                out.push(vec![S::zero(); l + 1]);
            }
            for (i, x) in row.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for j in 0..mat.cols() {
                    let e = &mat[(i, j)];
                    if !e.is_zero() {
                        let cur = std::mem::replace(&mut out[level][j], S::zero());
                        out[level][j] = cur + x.clone() * e.clone();
                    }
                }
            }
        }
    }
    out
}

/// `L(z^j z̄^k)` for `j + k ≤ max_degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable<S> {
    max_degree: usize,
    mu: Vec<Vec<S>>,
}

impl<S: Scalar> MomentTable<S> {
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn get(&self, j: usize, k: usize) -> Result<&S> {
        if j + k > self.max_degree {
            return Err(Error::InsufficientDepth {
                needed: j + k,
                available: self.max_degree,
            });
        }
        Ok(&self.mu[j][k])
    }

    /// Applies `L` to a polynomial in `(z, z̄)`.
    pub fn apply(&self, p: &crate::poly::BivarPoly<S>) -> Result<S> {
        let mut acc = S::zero();
        for (&(j, k), c) in p.terms() {
            acc = acc + c.clone() * self.get(j as usize, k as usize)?.clone();
        }
        Ok(acc)
    }

    pub fn to_complex(&self) -> MomentTable<Complex64> {
        MomentTable {
            max_degree: self.max_degree,
            mu: self
                .mu
                .iter()
                .map(|row| row.iter().map(Scalar::to_c64).collect())
                .collect(),
        }
    }

    /// `max |mu[k][j] − conj(mu[j][k])|`.
    pub fn symmetry_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..=self.max_degree {
            for k in 0..=self.max_degree - j {
                let d = self.mu[k][j].clone() - self.mu[j][k].conj();
                if !d.is_zero() {
                    worst = worst.max(d.magnitude().max(f64::MIN_POSITIVE));
                }
            }
        }
        worst
    }
}

fn check_depth<S>(needed: usize, coeffs: &[ThreeTermCoeffs<S>]) -> Result<()> {
    if coeffs.len() < needed {
        return Err(Error::InsufficientDepth {
            needed,
            available: coeffs.len(),
        });
    }
    Ok(())
}

/// `L(z^j z̄^k)`; needs coefficients for degrees `0..j+k`.
pub fn monomial_moment<S: Scalar>(j: usize, k: usize, coeffs: &[ThreeTermCoeffs<S>]) -> Result<S> {
    check_depth(j + k, coeffs)?;
    let total = j + k;
    let mut v: QVector<S> = vec![vec![S::one()]];
    for step in 0..total {
        let remaining = total - step - 1;
        v = apply_mult(&v, coeffs, step < k, remaining);
    }
    Ok(v[0][0].clone())
}

/// All moments of total degree `≤ max_degree`.
pub fn moment_table<S: Scalar>(max_degree: usize, coeffs: &[ThreeTermCoeffs<S>]) -> Result<MomentTable<S>> {
    check_depth(max_degree, coeffs)?;
    let mut mu: Vec<Vec<S>> = (0..=max_degree)
        .map(|j| vec![S::zero(); max_degree - j + 1])
        .collect();
    let mut vbar: QVector<S> = vec![vec![S::one()]];
    for k in 0..=max_degree {
        if k > 0 {
            vbar = apply_mult(&vbar, coeffs, true, max_degree - k);
        }
        let mut v = vbar.clone();
        mu[0][k] = v[0][0].clone();
        for j in 1..=max_degree - k {
            v = apply_mult(&v, coeffs, false, max_degree - k - j);
            mu[j][k] = v[0][0].clone();
        }
    }
    Ok(MomentTable { max_degree, mu })
}

/// `α = |c|² − |a−c|²`.
pub fn alpha_param<S: Scalar>(a: &S, c: &S) -> S {
    c.norm_sqr() - (c.clone() - a.clone()).norm_sqr()
}

/// `β = c(c−a)`.
pub fn beta_param<S: Scalar>(a: &S, c: &S) -> S {
    c.clone() * (c.clone() - a.clone())
}

/// Closed form of `H_n`.
///
/// `H_0 = 1`, `H_1 = |a|² I`, and for `n ≥ 2` the entry `(i, i+3t)` is
/// `α|a|² β^t |c|^{2(n−2−t)}`, its mirror `(i+3t, i)` carries `β̄^t`, and all
/// other off-diagonal entries vanish.
pub fn gram_closed<S: Scalar>(n: usize, a: &S, c: &S) -> CMatrix<S> {
    match n {
        0 => CMatrix::identity(1),
        1 => CMatrix::identity(2).scale(&a.norm_sqr()),
        _ => {
            let pre = alpha_param(a, c) * a.norm_sqr();
            let beta = beta_param(a, c);
            let c2 = c.norm_sqr();
            CMatrix::from_fn(n + 1, n + 1, |i, j| {
                let (lo, hi) = (i.min(j), i.max(j));
                let d = hi - lo;
                if d % 3 != 0 {
                    return S::zero();
                }
                let t = d / 3;
                let b = if j >= i { beta.pow(t as u32) } else { beta.conj().pow(t as u32) };
                pre.clone() * b * c2.pow((n - 2 - t) as u32)
            })
        }
    }
}

/// `(H_n)_{jk} = L(Q_j^n · conj_reflect(Q_k^n))`.
pub fn gram_from_moments<S: Scalar>(n: usize, qfam: &PolyFamily<S>, moments: &MomentTable<S>) -> Result<CMatrix<S>> {
    if qfam.max_degree() < n {
        return Err(Error::InsufficientDepth {
            needed: n,
            available: qfam.max_degree(),
        });
    }
    if moments.max_degree() < 2 * n {
        return Err(Error::InsufficientDepth {
            needed: 2 * n,
            available: moments.max_degree(),
        });
    }
    let level = qfam.level(n);
    let reflected: Vec<_> = level.iter().map(|p| p.conj_reflect()).collect();
    let mut h = CMatrix::zeros(n + 1, n + 1);
    for j in 0..=n {
        for k in 0..=n {
            h[(j, k)] = moments.apply(&(&level[j] * &reflected[k]))?;
        }
    }
    Ok(h)
}

/// `H_n` from `H_{n−1}` through the recurrence coefficients alone: the first
/// `n` rows are `J H_{n−1}^t γ^t J`, the last row follows from the
/// centrohermitian symmetry.
pub fn gram_recursive<S: Scalar>(n_max: usize, coeffs: &[ThreeTermCoeffs<S>]) -> Result<Vec<CMatrix<S>>> {
    check_depth(n_max + 1, coeffs)?;
    let mut grams = vec![CMatrix::identity(1)];
    for n in 1..=n_max {
        let prev = &grams[n - 1];
        let top = CMatrix::exchange(n)
            .matmul(&prev.transpose())
            .matmul(&coeffs[n].gamma.transpose())
            .matmul(&CMatrix::exchange(n + 1));
        let mut h = CMatrix::zeros(n + 1, n + 1);
        for i in 0..n {
            for j in 0..=n {
                h[(i, j)] = top[(i, j)].clone();
            }
        }
        for j in 0..=n {
            h[(n, j)] = top[(0, n - j)].conj();
        }
        grams.push(h);
    }
    Ok(grams)
}

/// `H_0, …, H_{n_max}` with the parameters they were built from.
#[derive(Clone, Debug, PartialEq)]
pub struct GramSequence<S> {
    pub a: S,
    pub c: S,
    pub alpha_param: S,
    pub beta_param: S,
    pub h: Vec<CMatrix<S>>,
}

impl<S: Scalar> GramSequence<S> {
    pub fn closed(n_max: usize, a: &S, c: &S) -> Self {
        GramSequence {
            a: a.clone(),
            c: c.clone(),
            alpha_param: alpha_param(a, c),
            beta_param: beta_param(a, c),
            h: (0..=n_max).map(|n| gram_closed(n, a, c)).collect(),
        }
    }

    pub fn from_moments(n_max: usize, qfam: &PolyFamily<S>, moments: &MomentTable<S>) -> Result<Self> {
        let (a, c) = (qfam.a(), qfam.c());
        Ok(GramSequence {
            a: a.clone(),
            c: c.clone(),
            alpha_param: alpha_param(a, c),
            beta_param: beta_param(a, c),
            h: (0..=n_max)
                .map(|n| gram_from_moments(n, qfam, moments))
                .collect::<Result<_>>()?,
        })
    }

    pub fn max_degree(&self) -> usize {
        self.h.len() - 1
    }

    /// First degree whose Gram matrix is not positive definite.
    pub fn first_non_posdef(&self) -> Option<usize> {
        self.h.iter().position(|h| !is_positive_definite(h))
    }
}

fn need_gram<S>(grams: &[CMatrix<S>], n: usize) -> Result<()> {
    if grams.len() <= n {
        return Err(Error::InsufficientDepth {
            needed: n,
            available: grams.len().saturating_sub(1),
        });
    }
    Ok(())
}

/// `‖γ_{n−1} H_{n−1} − J (α_{n−1} H_n)^t J‖_max`.
pub fn gamma_consistency<S: Scalar>(n: usize, coeffs: &[ThreeTermCoeffs<S>], grams: &[CMatrix<S>]) -> Result<f64> {
    if n == 0 {
        return Err(Error::Dimension("gamma consistency needs n ≥ 1".into()));
    }
    check_depth(n + 1, coeffs)?;
    need_gram(grams, n)?;
    let lhs = coeffs[n].gamma.matmul(&grams[n - 1]);
    let rhs = CMatrix::exchange(n + 1)
        .matmul(&coeffs[n - 1].alpha.matmul(&grams[n]).transpose())
        .matmul(&CMatrix::exchange(n));
    Ok(lhs.max_abs_diff(&rhs))
}

/// Residuals of `[I 0] H_n = J H_{n−1}^t γ^t J` and
/// `[0 I] H_n = J H_{n−1}^t (γ^∨)^t J`.
pub fn gram_recursion_residuals<S: Scalar>(
    n: usize,
    coeffs: &[ThreeTermCoeffs<S>],
    grams: &[CMatrix<S>],
) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Dimension("Gram recursion needs n ≥ 1".into()));
    }
    check_depth(n + 1, coeffs)?;
    need_gram(grams, n)?;
    let h = &grams[n];
    let head = CMatrix::leading_identity(n, n + 1).matmul(h);
    let trailing = CMatrix::from_fn(n, n + 1, |i, j| if j == i + 1 { S::one() } else { S::zero() });
    let tail = trailing.matmul(h);
    let core = CMatrix::exchange(n).matmul(&grams[n - 1].transpose());
    let jn1 = CMatrix::exchange(n + 1);
    let r1 = head.max_abs_diff(&core.matmul(&coeffs[n].gamma.transpose()).matmul(&jn1));
    let r2 = tail.max_abs_diff(&core.matmul(&coeffs[n].gamma_vee().transpose()).matmul(&jn1));
    Ok((r1, r2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamRegime {
    GaussianValid,
    QuasiDefiniteOnly,
    Degenerate,
}

impl fmt::Display for ParamRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParamRegime::GaussianValid => "gaussian-valid",
            ParamRegime::QuasiDefiniteOnly => "quasi-definite-only",
            ParamRegime::Degenerate => "degenerate",
        })
    }
}

/// Gaussian-valid iff `a, c ≠ 0`, `c(c−a)` real and `|c| ≥ 2|c−a|`.
///
/// `tol` is the relative tolerance on the imaginary part of `c(c−a)`; it is
/// ignored in exact mode.
pub fn param_classify<S: Scalar>(a: &S, c: &S, tol: f64) -> ParamRegime {
    if a.is_zero() || c.is_zero() {
        return ParamRegime::Degenerate;
    }
    let beta = beta_param(a, c);
    let real = if S::EXACT { beta.is_real(0.0) } else { beta.is_real(tol) };
    let lhs = c.norm_sqr();
    let rhs = (c.clone() - a.clone()).norm_sqr() * S::from_i64(4);
    if real && lhs.cmp_re(&rhs) != std::cmp::Ordering::Less {
        ParamRegime::GaussianValid
    } else {
        ParamRegime::QuasiDefiniteOnly
    }
}

/// Hermitian positivity through the pivots of `LDL*` without pivoting; a
/// pivot `≤ 1e−12·max diag` (or a non-Hermitian input) fails.
pub fn is_positive_definite<S: Scalar>(h: &CMatrix<S>) -> bool {
    let n = h.rows();
    if n != h.cols() {
        return false;
    }
    let mut m = h.to_complex();
    let scale = (0..n).map(|i| m[(i, i)].re.abs()).fold(0.0, f64::max);
    let herm = m.max_abs_diff(&m.adjoint());
    if herm > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return false;
    }
    let tol = PIVOT_REL_TOL * scale;
    for k in 0..n {
        let pivot = m[(k, k)].re;
        if !(pivot > tol) {
            return false;
        }
        for i in k + 1..n {
            let f = m[(i, k)] / pivot;
            for j in k + 1..n {
                let v = m[(i, j)] - f * m[(k, j)];
                m[(i, j)] = v;
            }
        }
    }
    true
}

/// First `n ≤ n_max` with `H_n` not positive definite.
pub fn posdef_probe<S: Scalar>(n_max: usize, a: &S, c: &S) -> Option<usize> {
    let coeffs = crate::families::q_coeffs(n_max + 1, a, c);
    let grams = gram_recursive(n_max, &coeffs).expect("coefficient depth is sufficient");
    grams.iter().position(|h| !is_positive_definite(h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{gen_q, q_coeffs};
    use crate::scalar::GaussRat;

    fn g(re: i64, im: i64) -> GaussRat {
        GaussRat::int(re, im)
    }

    fn r(n: i64, d: i64) -> GaussRat {
        GaussRat::real(n, d)
    }

    #[test]
    fn low_moments() {
        let (a, c) = (r(3, 2), g(1, 0));
        let co = q_coeffs(4, &a, &c);
        assert_eq!(monomial_moment(0, 0, &co).unwrap(), g(1, 0));
        assert_eq!(monomial_moment(1, 0, &co).unwrap(), g(0, 0));
        assert_eq!(monomial_moment(1, 1, &co).unwrap(), a.norm_sqr());
        let one = g(1, 0);
        assert_eq!(monomial_moment(1, 1, &q_coeffs(2, &one, &one)).unwrap(), one);
        assert!(matches!(
            monomial_moment(3, 3, &co),
            Err(Error::InsufficientDepth { .. })
        ));
    }

    #[test]
    fn table_matches_single_moments() {
        let (a, c) = (g(1, 1), g(-1, -1));
        let co = q_coeffs(8, &a, &c);
        let t = moment_table(8, &co).unwrap();
        for j in 0..=8 {
            for k in 0..=8 - j {
                assert_eq!(t.get(j, k).unwrap(), &monomial_moment(j, k, &co).unwrap());
            }
        }
        assert_eq!(t.symmetry_residual(), 0.0);
    }

    #[test]
    fn closed_gram_examples() {
        let (a, c) = (r(3, 2), g(1, 0));
        assert_eq!(gram_closed(0, &a, &c), CMatrix::identity(1));
        assert_eq!(gram_closed(1, &a, &c), CMatrix::identity(2).scale(&r(9, 4)));
        assert_eq!(gram_closed(2, &a, &c), CMatrix::identity(3).scale(&r(27, 16)));
        let h3 = gram_closed(3, &a, &c);
        assert_eq!(h3[(0, 3)], r(27, 16) * r(-1, 2));
        assert_eq!(h3[(3, 0)], r(27, 16) * r(-1, 2));
        assert!(h3[(0, 1)].is_zero());
    }

    #[test]
    fn closed_gram_equals_moment_gram() {
        for (a, c) in [(r(3, 2), g(1, 0)), (g(1, 1), g(-1, -1)), (GaussRat::from_ratios(2, 1, 1, 2), g(1, 1))] {
            let (q, _) = gen_q(8, &a, &c);
            let mu = moment_table(16, &q_coeffs(16, &a, &c)).unwrap();
            for n in 0..=8 {
                let h = gram_from_moments(n, &q, &mu).unwrap();
                assert_eq!(h, gram_closed(n, &a, &c), "n={n}");
                assert!(h.is_centrohermitian(0.0));
            }
        }
    }

    #[test]
    fn recursive_gram_equals_closed() {
        let (a, c) = (g(2, 1), g(1, 2));
        let co = q_coeffs(11, &a, &c);
        let grams = gram_recursive(10, &co).unwrap();
        for (n, h) in grams.iter().enumerate() {
            assert_eq!(h, &gram_closed(n, &a, &c));
        }
    }

    #[test]
    fn orthogonality_across_degrees() {
        let (a, c) = (r(1, 2), g(1, 0));
        let (q, _) = gen_q(6, &a, &c);
        let mu = moment_table(12, &q_coeffs(12, &a, &c)).unwrap();
        for m in 0..=6 {
            for mp in 0..=6 {
                if m == mp {
                    continue;
                }
                for j in 0..=m {
                    for k in 0..=mp {
                        let v = mu.apply(&(q.get(m, j) * &q.get(mp, k).conj_reflect())).unwrap();
                        assert!(v.is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn gamma_and_gram_recursions() {
        let (a, c) = (r(3, 2), g(1, 0));
        let co = q_coeffs(9, &a, &c);
        let grams: Vec<_> = (0..=8).map(|n| gram_closed(n, &a, &c)).collect();
        for n in 1..=8 {
            assert_eq!(gamma_consistency(n, &co, &grams).unwrap(), 0.0);
            assert_eq!(gram_recursion_residuals(n, &co, &grams).unwrap(), (0.0, 0.0));
        }
        let mut bad = co.clone();
        bad[4].gamma[(2, 1)] = bad[4].gamma[(2, 1)].clone() + r(1, 1000);
        let res = gamma_consistency(4, &bad, &grams).unwrap();
        assert!(res > 1e-4 && res < 1e-2, "{res}");
    }

    #[test]
    fn regimes() {
        let one = g(1, 0);
        assert_eq!(param_classify(&one, &one, REALITY_TOL), ParamRegime::GaussianValid);
        assert_eq!(param_classify(&r(1, 2), &one, REALITY_TOL), ParamRegime::GaussianValid);
        assert_eq!(param_classify(&r(3, 2), &one, REALITY_TOL), ParamRegime::GaussianValid);
        assert_eq!(param_classify(&r(5, 2), &one, REALITY_TOL), ParamRegime::QuasiDefiniteOnly);
        assert_eq!(param_classify(&g(0, 0), &one, REALITY_TOL), ParamRegime::Degenerate);
        assert_eq!(param_classify(&one, &g(0, 0), REALITY_TOL), ParamRegime::Degenerate);
        // β = c(c−a) = 1·(−i/4) not real
        assert_eq!(
            param_classify(&GaussRat::from_ratios(1, 1, 1, 4), &one, REALITY_TOL),
            ParamRegime::QuasiDefiniteOnly
        );
        let f = |x: f64| Complex64::new(x, 0.0);
        assert_eq!(param_classify(&f(1.5), &f(1.0), REALITY_TOL), ParamRegime::GaussianValid);
    }

    #[test]
    fn probe() {
        let one = g(1, 0);
        assert_eq!(posdef_probe(12, &one, &one), None);
        assert_eq!(posdef_probe(12, &r(3, 2), &one), None);
        assert_eq!(posdef_probe(12, &r(1, 2), &one), None);
        assert_eq!(posdef_probe(12, &r(5, 2), &one), Some(2));
    }

    #[test]
    fn posdef_check() {
        assert!(is_positive_definite(&CMatrix::<GaussRat>::identity(3)));
        let h = CMatrix::from_rows(vec![vec![g(1, 0), g(2, 0)], vec![g(2, 0), g(1, 0)]]);
        assert!(!is_positive_definite(&h));
        let h = CMatrix::from_rows(vec![vec![g(2, 0), g(0, 1)], vec![g(0, -1), g(2, 0)]]);
        assert!(is_positive_definite(&h));
    }
}
