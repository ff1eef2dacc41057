//! Scalars for polynomial and matrix arithmetic.
//!
//! Two coefficient modes are provided. [`GaussRat`] is an exact Gaussian
//! rational `re + i·im` with arbitrary-precision rational parts; it is used for
//! identity checks that must hold with zero error. [`Complex64`] is the
//! floating-point mode used for eigenvalue work. Generic code is written against
//! the [`Scalar`] trait so the same routine runs in either mode.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Relative threshold under which float coefficients are pruned.
pub const FLOAT_PRUNE_REL: f64 = 1e-14;

/// Field operations shared by the exact and the floating-point mode.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// `true` for rounding-free arithmetic.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    /// Converts an exact parameter into this mode.
    fn from_gauss(v: &GaussRat) -> Self;
    fn conj(&self) -> Self;
    /// Exact zero test (float mode compares against `0.0`).
    fn is_zero(&self) -> bool;
    fn inv(&self) -> Option<Self>;
    fn to_c64(&self) -> Complex64;
    /// `|self|²` as a scalar with zero imaginary part.
    fn norm_sqr(&self) -> Self;
    /// `|self|` as a float, used for pruning and error norms.
    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }
    /// Compares real parts.
    fn cmp_re(&self, other: &Self) -> Ordering;
    /// `true` if the imaginary part is zero (exact) or at most `rel_tol·|self|`.
    fn is_real(&self, rel_tol: f64) -> bool;

    fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc * self.clone();
        }
        acc
    }
}

/// Exact Gaussian rational `re + i·im`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    /// `(re_num/re_den) + i·(im_num/im_den)`.
    pub fn from_ratios(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Self {
        GaussRat {
            re: ratio(re_num, re_den),
            im: ratio(im_num, im_den),
        }
    }

    pub fn real(num: i64, den: i64) -> Self {
        GaussRat::from_ratios(num, den, 0, 1)
    }

    pub fn int(re: i64, im: i64) -> Self {
        GaussRat::from_ratios(re, 1, im, 1)
    }

    pub fn is_real_exact(&self) -> bool {
        self.im.is_zero()
    }
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rat_to_f64(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => r.to_f64().unwrap_or(f64::NAN),
    }
}

impl Add for GaussRat {
    type Output = GaussRat;
    fn add(self, o: GaussRat) -> GaussRat {
        GaussRat {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl Sub for GaussRat {
    type Output = GaussRat;
    fn sub(self, o: GaussRat) -> GaussRat {
        GaussRat {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl Mul for GaussRat {
    type Output = GaussRat;
    fn mul(self, o: GaussRat) -> GaussRat {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussRat {
                re: self.re * o.re,
                im: BigRational::zero(),
            };
        }
        GaussRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat {
            re: -self.re,
            im: -self.im,
        }
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRat {
    /// Prints in the literal grammar accepted by [`FromStr`]: `3/2`, `1-1/2i`, `-i`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", fmt_rat(&self.re));
        }
        let im_abs = self.im.abs();
        let im_str = if im_abs.is_one() {
            String::new()
        } else {
            fmt_rat(&im_abs)
        };
        let sign = if self.im.is_negative() { "-" } else { "+" };
        if self.re.is_zero() {
            let lead = if self.im.is_negative() { "-" } else { "" };
            write!(f, "{lead}{im_str}i")
        } else {
            write!(f, "{}{sign}{im_str}i", fmt_rat(&self.re))
        }
    }
}

/// Parses a real component: integer, decimal (`0.75`) or rational (`3/2`).
fn parse_real(s: &str) -> Result<BigRational, Error> {
    let bad = || Error::Parse(format!("malformed number `{s}`"));
    let s = s.trim();
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_real(n)?;
        let d = parse_real(d)?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(n / d);
    }
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if (int_part.is_empty() && frac_part.is_empty())
        || !int_part.chars().all(|ch| ch.is_ascii_digit())
        || !frac_part.chars().all(|ch| ch.is_ascii_digit())
    {
        return Err(bad());
    }
    let joined = format!("{int_part}{frac_part}");
    let numer: BigInt = if joined.is_empty() {
        BigInt::zero()
    } else {
        joined.parse().map_err(|_| bad())?
    };
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(numer, denom);
    Ok(if neg { -r } else { r })
}

impl FromStr for GaussRat {
    type Err = Error;

    /// Grammar: `RE`, `IMi`, `RE+IMi`, `RE-IMi`, where components are integers,
    /// decimals or rationals and a bare `i` means unit imaginary part.
    fn from_str(s: &str) -> Result<Self, Error> {
        let t: String = s.chars().filter(|ch| !ch.is_whitespace()).collect();
        if t.is_empty() {
            return Err(Error::Parse("empty complex literal".into()));
        }
        let Some(body) = t.strip_suffix('i') else {
            return Ok(GaussRat::new(parse_real(&t)?, BigRational::zero()));
        };
        // split at the last sign that is not the leading one
        let split = body
            .char_indices()
            .filter(|&(idx, ch)| idx > 0 && (ch == '+' || ch == '-'))
            .map(|(idx, _)| idx)
            .last();
        let (re_str, im_str) = match split {
            Some(idx) => (&body[..idx], &body[idx..]),
            None => ("", body),
        };
        let im = match im_str {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            other => parse_real(other)?,
        };
        let re = if re_str.is_empty() {
            BigRational::zero()
        } else {
            parse_real(re_str)?
        };
        Ok(GaussRat::new(re, im))
    }
}

impl Scalar for GaussRat {
    const EXACT: bool = true;

    fn zero() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::zero())
    }
    fn one() -> Self {
        GaussRat::new(BigRational::one(), BigRational::zero())
    }
    fn from_i64(v: i64) -> Self {
        GaussRat::int(v, 0)
    }
    fn from_gauss(v: &GaussRat) -> Self {
        v.clone()
    }
    fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), -self.im.clone())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn inv(&self) -> Option<Self> {
        if Scalar::is_zero(self) {
            return None;
        }
        let d = &self.re * &self.re + &self.im * &self.im;
        Some(GaussRat::new(&self.re / &d, -(&self.im / &d)))
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
    fn norm_sqr(&self) -> Self {
        GaussRat::new(&self.re * &self.re + &self.im * &self.im, BigRational::zero())
    }
    fn cmp_re(&self, other: &Self) -> Ordering {
        self.re.cmp(&other.re)
    }
    fn is_real(&self, _rel_tol: f64) -> bool {
        self.im.is_zero()
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn from_gauss(v: &GaussRat) -> Self {
        v.to_c64()
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn inv(&self) -> Option<Self> {
        if Scalar::is_zero(self) {
            None
        } else {
            Some(Complex64::inv(self))
        }
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn norm_sqr(&self) -> Self {
        Complex64::new(Complex64::norm_sqr(self), 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn cmp_re(&self, other: &Self) -> Ordering {
        self.re.total_cmp(&other.re)
    }
    fn is_real(&self, rel_tol: f64) -> bool {
        self.im.abs() <= rel_tol * self.norm()
    }
}

/// Float comparison with an explicit absolute tolerance.
pub fn approx_eq(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_literals() {
        let cases = [
            ("3/2", GaussRat::real(3, 2)),
            ("1", GaussRat::int(1, 0)),
            ("-1-i", GaussRat::int(-1, -1)),
            ("1+i", GaussRat::int(1, 1)),
            ("1/2+1/2i", GaussRat::from_ratios(1, 2, 1, 2)),
            ("0.75", GaussRat::real(3, 4)),
            ("-2.5i", GaussRat::from_ratios(0, 1, -5, 2)),
            ("i", GaussRat::int(0, 1)),
            ("-i", GaussRat::int(0, -1)),
            ("2-3/4i", GaussRat::from_ratios(2, 1, -3, 4)),
        ];
        for (lit, want) in cases {
            assert_eq!(lit.parse::<GaussRat>().unwrap(), want, "{lit}");
        }
        for bad in ["", "abc", "1/0", "1+", "3//2", "1.2.3"] {
            assert!(bad.parse::<GaussRat>().is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        for lit in ["3/2", "-1-i", "1/2+1/2i", "i", "-5/2i", "0"] {
            let v: GaussRat = lit.parse().unwrap();
            assert_eq!(v.to_string().parse::<GaussRat>().unwrap(), v);
        }
        assert_eq!(GaussRat::int(-1, -1).to_string(), "-1-i");
    }

    #[test]
    fn exact_field_ops() {
        let a = GaussRat::int(1, 1);
        let inv = a.inv().unwrap();
        assert_eq!(a.clone() * inv, GaussRat::one());
        assert_eq!(a.norm_sqr(), GaussRat::int(2, 0));
        assert_eq!(a.conj(), GaussRat::int(1, -1));
        assert!(GaussRat::zero().inv().is_none());
        // (1-i)^3 = -2-2i
        assert_eq!(a.conj().pow(3), GaussRat::int(-2, -2));
    }

    #[test]
    fn float_mode_agrees_with_exact() {
        let a = GaussRat::from_ratios(7, 3, -5, 11);
        let b = GaussRat::from_ratios(-2, 9, 4, 7);
        let exact = (a.clone() * b.clone() - a.clone()).to_c64();
        let float = a.to_c64() * b.to_c64() - a.to_c64();
        assert!(approx_eq(exact, float, 1e-12));
    }
}
