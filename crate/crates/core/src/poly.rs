//! Polynomials in the conjugate pair `(z, z̄)`.
//!
//! `z` and `z̄` are independent indeterminates; they are tied together only at
//! evaluation time, where `z̄ := conj(z)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::scalar::{Scalar, FLOAT_PRUNE_REL};

/// Exponent pair `(j, k)` of the monomial `z^j z̄^k`.
pub type Exponent = (u32, u32);

/// Sparse bivariate polynomial `Σ c_{jk} z^j z̄^k`.
#[derive(Clone, PartialEq, Debug)]
pub struct BivarPoly<S> {
    terms: BTreeMap<Exponent, S>,
}

impl<S: Scalar> Default for BivarPoly<S> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<S: Scalar> BivarPoly<S> {
    pub fn zero() -> Self {
        BivarPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    pub fn constant(c: S) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(j: u32, k: u32, c: S) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((j, k), c);
        }
        BivarPoly { terms }
    }

    /// The indeterminate `z`.
    pub fn z() -> Self {
        Self::monomial(1, 0, S::one())
    }

    /// The indeterminate `z̄`.
    pub fn zbar() -> Self {
        Self::monomial(0, 1, S::one())
    }

    /// Builds from raw terms, dropping zeros.
    pub fn from_terms<I: IntoIterator<Item = (Exponent, S)>>(iter: I) -> Self {
        let mut terms: BTreeMap<Exponent, S> = BTreeMap::new();
        for (e, c) in iter {
            match terms.remove(&e) {
                Some(prev) => {
                    terms.insert(e, prev + c);
                }
                None => {
                    terms.insert(e, c);
                }
            }
        }
        let mut p = BivarPoly { terms };
        p.cleanup();
        p
    }

    /// Drops zero terms; in float mode also drops terms below
    /// `1e-14 · max|coeff|`.
    fn cleanup(&mut self) {
        if S::EXACT {
            self.terms.retain(|_, c| !c.is_zero());
        } else {
            let cutoff = FLOAT_PRUNE_REL * self.max_coeff_magnitude();
            self.terms.retain(|_, c| !c.is_zero() && c.magnitude() >= cutoff);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(j, k)| j + k).max()
    }

    pub fn coeff(&self, j: u32, k: u32) -> S {
        self.terms.get(&(j, k)).cloned().unwrap_or_else(S::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &S)> {
        self.terms.iter()
    }

    pub fn max_coeff_magnitude(&self) -> f64 {
        self.terms
            .values()
            .map(Scalar::magnitude)
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: &S) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        let mut p = BivarPoly {
            terms: self
                .terms
                .iter()
                .map(|(&e, c)| (e, c.clone() * s.clone()))
                .collect(),
        };
        p.cleanup();
        p
    }

    /// Multiplies by the monomial `z^j z̄^k`.
    pub fn shift(&self, j: u32, k: u32) -> Self {
        BivarPoly {
            terms: self
                .terms
                .iter()
                .map(|(&(a, b), c)| ((a + j, b + k), c.clone()))
                .collect(),
        }
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, other: &Self, s: &S) -> Self {
        let mut terms = self.terms.clone();
        for (&e, c) in &other.terms {
            let add = c.clone() * s.clone();
            let v = match terms.remove(&e) {
                Some(prev) => prev + add,
                None => add,
            };
            terms.insert(e, v);
        }
        let mut p = BivarPoly { terms };
        p.cleanup();
        p
    }

    /// Evaluates on the real surface `z̄ = conj(z)`.
    pub fn eval(&self, z: &S) -> S {
        let Some(deg) = self.degree() else {
            return S::zero();
        };
        let zb = z.conj();
        let mut zp = vec![S::one()];
        let mut zbp = vec![S::one()];
        for i in 0..deg as usize {
            zp.push(zp[i].clone() * z.clone());
            zbp.push(zbp[i].clone() * zb.clone());
        }
        self.terms.iter().fold(S::zero(), |acc, (&(j, k), c)| {
            acc + c.clone() * zp[j as usize].clone() * zbp[k as usize].clone()
        })
    }

    /// Evaluates with `z` and `z̄` bound to independent values.
    pub fn eval_pair(&self, z: &S, w: &S) -> S {
        self.terms.iter().fold(S::zero(), |acc, (&(j, k), c)| {
            acc + c.clone() * z.pow(j) * w.pow(k)
        })
    }

    /// Float evaluation at a real point `(x, y)`, `z = x + iy`.
    pub fn eval_xy(&self, x: f64, y: f64) -> Complex64 {
        self.to_complex().eval(&Complex64::new(x, y))
    }

    /// Conjugates coefficients and swaps exponents, so that
    /// `conj_reflect(p)(z, conj z) = conj(p(z, conj z))`.
    pub fn conj_reflect(&self) -> Self {
        BivarPoly {
            terms: self
                .terms
                .iter()
                .map(|(&(j, k), c)| ((k, j), c.conj()))
                .collect(),
        }
    }

    /// `p(s·z, t·z̄)`.
    pub fn substitute_scaled(&self, s: &S, t: &S) -> Self {
        let mut p = BivarPoly {
            terms: self
                .terms
                .iter()
                .map(|(&(j, k), c)| ((j, k), c.clone() * s.pow(j) * t.pow(k)))
                .collect(),
        };
        p.cleanup();
        p
    }

    pub fn to_complex(&self) -> BivarPoly<Complex64> {
        BivarPoly::from_terms(self.terms.iter().map(|(&e, c)| (e, c.to_c64())))
    }

    /// Leading term in graded-lex order (`z` before `z̄`).
    fn leading(&self) -> Option<(Exponent, &S)> {
        self.terms
            .iter()
            .max_by(|(a, _), (b, _)| (a.0 + a.1, a.0).cmp(&(b.0 + b.1, b.0)))
            .map(|(&e, c)| (e, c))
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    ///
    /// In float mode a remainder whose leading term cannot be cancelled is
    /// treated as rounding noise once it falls below the pruning threshold.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let ((dj, dk), dc) = d.leading()?;
        let dinv = dc.inv()?;
        let mut rem = self.clone();
        let mut quot: Vec<(Exponent, S)> = Vec::new();
        let scale = self.max_coeff_magnitude().max(f64::MIN_POSITIVE);
        while let Some(((rj, rk), rc)) = rem.leading().map(|(e, c)| (e, c.clone())) {
            if rj < dj || rk < dk {
                if !S::EXACT && rem.max_coeff_magnitude() <= 1e-9 * scale {
                    break;
                }
                return None;
            }
            let qc = rc * dinv.clone();
            let qe = (rj - dj, rk - dk);
            let step = BivarPoly::monomial(qe.0, qe.1, qc.clone());
            let before = rem.num_terms();
            rem = rem.add_scaled(&(&step * d), &-S::one());
            // drop the leading term even if rounding left a residue
            if !S::EXACT && rem.terms.contains_key(&(rj, rk)) {
                rem.terms.remove(&(rj, rk));
            }
            quot.push((qe, qc));
            if !S::EXACT && rem.num_terms() > before + d.num_terms() * 4 + 64 {
                return None;
            }
        }
        Some(BivarPoly::from_terms(quot))
    }

    /// Exact equality in exact mode; coefficientwise `tol` in float mode.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let diff = self.clone() - other.clone();
        if S::EXACT {
            diff.is_zero()
        } else {
            diff.max_coeff_magnitude() <= tol
        }
    }
}

impl<S: Scalar> Add for BivarPoly<S> {
    type Output = BivarPoly<S>;
    fn add(self, rhs: Self) -> Self {
        self.add_scaled(&rhs, &S::one())
    }
}

impl<S: Scalar> Add<&BivarPoly<S>> for &BivarPoly<S> {
    type Output = BivarPoly<S>;
    fn add(self, rhs: &BivarPoly<S>) -> BivarPoly<S> {
        self.add_scaled(rhs, &S::one())
    }
}

impl<S: Scalar> Sub for BivarPoly<S> {
    type Output = BivarPoly<S>;
    fn sub(self, rhs: Self) -> Self {
        self.add_scaled(&rhs, &-S::one())
    }
}

impl<S: Scalar> Sub<&BivarPoly<S>> for &BivarPoly<S> {
    type Output = BivarPoly<S>;
    fn sub(self, rhs: &BivarPoly<S>) -> BivarPoly<S> {
        self.add_scaled(rhs, &-S::one())
    }
}

impl<S: Scalar> Neg for BivarPoly<S> {
    type Output = BivarPoly<S>;
    fn neg(self) -> Self {
        self.scale(&-S::one())
    }
}

impl<S: Scalar> Mul<&BivarPoly<S>> for &BivarPoly<S> {
    type Output = BivarPoly<S>;
    fn mul(self, rhs: &BivarPoly<S>) -> BivarPoly<S> {
        let mut terms: BTreeMap<Exponent, S> = BTreeMap::new();
        for (&(a, b), x) in &self.terms {
            for (&(c, d), y) in &rhs.terms {
                let e = (a + c, b + d);
                let prod = x.clone() * y.clone();
                let v = match terms.remove(&e) {
                    Some(prev) => prev + prod,
                    None => prod,
                };
                terms.insert(e, v);
            }
        }
        let mut p = BivarPoly { terms };
        p.cleanup();
        p
    }
}

impl<S: Scalar> Mul for BivarPoly<S> {
    type Output = BivarPoly<S>;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl<S: Scalar> fmt::Display for BivarPoly<S> {
    /// Terms in descending graded order, e.g. `z^2 - 2*zb`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<&Exponent> = self.terms.keys().collect();
        keys.sort_by(|a, b| (b.0 + b.1, b.0).cmp(&(a.0 + a.1, a.0)));
        for (idx, &&(j, k)) in keys.iter().enumerate() {
            let c = &self.terms[&(j, k)];
            if idx > 0 {
                write!(f, " + ")?;
            }
            let mono = match (j, k) {
                (0, 0) => String::new(),
                _ => {
                    let zp = match j {
                        0 => String::new(),
                        1 => "z".into(),
                        _ => format!("z^{j}"),
                    };
                    let wp = match k {
                        0 => String::new(),
                        1 => "zb".into(),
                        _ => format!("zb^{k}"),
                    };
                    let sep = if !zp.is_empty() && !wp.is_empty() { "*" } else { "" };
                    format!("{zp}{sep}{wp}")
                }
            };
            if mono.is_empty() {
                write!(f, "({c})")?;
            } else if *c == S::one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "({c})*{mono}")?;
            }
        }
        Ok(())
    }
}
