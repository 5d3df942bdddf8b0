//! Scalar fields the toolkit runs over.
//!
//! Everything above this module is generic over [`Real`]. Two fields are
//! provided: `f64` (float mode, every comparison carries a tolerance) and
//! [`BigRational`] (exact mode, complex entries are Gaussian rationals and
//! every comparison is an equality test).

use std::fmt::{Debug, Display};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, NumAssign, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::splitter::search::{self, WorkCap};

/// Complex entry over a real field.
pub type Cx<R> = Complex<R>;

/// Dense polar triple of one matrix block: `a = v·positive`, `v*v = support`.
#[derive(Clone, Debug)]
pub struct DensePolar<R: Real> {
    pub v: DMatrix<Cx<R>>,
    pub positive: DMatrix<Cx<R>>,
    pub support: DMatrix<Cx<R>>,
}

pub trait Real:
    Clone + Debug + Display + PartialEq + PartialOrd + Num + NumAssign + Signed + Send + Sync + 'static
{
    /// True for the exact (rational) field.
    const EXACT: bool;
    /// Name used in documents and reports.
    const MODE: &'static str;

    fn to_f64(&self) -> f64;

    fn from_ratio(numer: i64, denom: i64) -> Self;

    /// Converts a float; the exact field takes the dyadic value of `x` verbatim.
    fn from_f64(x: f64) -> Option<Self>;

    fn from_rational(q: &BigRational) -> Self;

    /// Square root when it exists in the field (always for nonnegative floats,
    /// only for perfect squares in the rationals).
    fn sqrt_exact(&self) -> Option<Self>;

    /// `self == other` in exact mode, `|self - other| <= tol` in float mode.
    fn within(&self, other: &Self, tol: f64) -> bool;

    /// `self <= other` in exact mode, `self <= other + tol` in float mode.
    fn le_within(&self, other: &Self, tol: f64) -> bool;

    /// Parses a decimal (`-0.25`, `1e-3`) or a fraction (`3/8`).
    fn parse_str(s: &str) -> Result<Self>;

    /// Canonical string form: reduced `p/q` or the shortest round-trip decimal.
    fn render(&self) -> String;

    /// Polar decomposition of a dense square block.
    fn polar_dense(a: &DMatrix<Cx<Self>>, tau_rank: f64) -> Result<DensePolar<Self>>;

    /// Eigenpairs of a Hermitian block, unsorted.
    fn hermitian_eigen(h: &DMatrix<Cx<Self>>) -> Result<Vec<(Self, DVector<Cx<Self>>)>>;

    /// Sum of singular values of a dense square block.
    fn trace_norm_dense(a: &DMatrix<Cx<Self>>) -> Result<Self>;

    /// Selection `k` (0 ≤ k_i ≤ m_i) minimizing `|2 Σ λ_i k_i − Σ λ_i m_i|`, ties
    /// broken toward mass ≤ half, then lexicographically smallest `k`.
    fn closest_split(clusters: &[(Self, usize)], cap: WorkCap) -> Result<Vec<usize>>;

    fn modulus(z: &Cx<Self>) -> Option<Self> {
        if z.im.is_zero() {
            return Some(z.re.abs());
        }
        if z.re.is_zero() {
            return Some(z.im.abs());
        }
        (z.re.clone() * z.re.clone() + z.im.clone() * z.im.clone()).sqrt_exact()
    }

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl Real for f64 {
    const EXACT: bool = false;
    const MODE: &'static str = "float";

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn from_rational(q: &BigRational) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }

    fn sqrt_exact(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.sqrt())
    }

    fn within(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }

    fn le_within(&self, other: &Self, tol: f64) -> bool {
        *self <= *other + tol
    }

    fn parse_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let value = if let Some((p, q)) = s.split_once('/') {
            let p: f64 = p.trim().parse().map_err(|_| bad_number(s))?;
            let q: f64 = q.trim().parse().map_err(|_| bad_number(s))?;
            if q == 0.0 {
                return Err(bad_number(s));
            }
            p / q
        } else {
            s.parse::<f64>().map_err(|_| bad_number(s))?
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(bad_number(s))
        }
    }

    fn render(&self) -> String {
        format!("{self:?}")
    }

    fn polar_dense(a: &DMatrix<Cx<f64>>, tau_rank: f64) -> Result<DensePolar<f64>> {
        let n = a.nrows();
        let svd = to_faer(a)
            .svd()
            .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))?;
        let (u, s, w) = (svd.U(), svd.S().column_vector(), svd.V());
        let keep: Vec<usize> = (0..n).filter(|&k| s[k].re > tau_rank).collect();
        let sum = |f: &dyn Fn(usize, usize, usize) -> Cx<f64>| {
            DMatrix::from_fn(n, n, |i, j| keep.iter().map(|&k| f(i, j, k)).sum())
        };
        Ok(DensePolar {
            v: sum(&|i, j, k| u[(i, k)] * w[(j, k)].conj()),
            positive: sum(&|i, j, k| w[(i, k)] * w[(j, k)].conj() * s[k].re),
            support: sum(&|i, j, k| w[(i, k)] * w[(j, k)].conj()),
        })
    }

    fn hermitian_eigen(h: &DMatrix<Cx<f64>>) -> Result<Vec<(f64, DVector<Cx<f64>>)>> {
        let eig = to_faer(h)
            .self_adjoint_eigen(faer::Side::Lower)
            .map_err(|e| Error::Numerical(format!("Hermitian eigensolver did not converge: {e:?}")))?;
        let (s, u) = (eig.S().column_vector(), eig.U());
        Ok((0..h.nrows())
            .map(|k| (s[k].re, DVector::from_fn(h.nrows(), |i, _| u[(i, k)])))
            .collect())
    }

    fn trace_norm_dense(a: &DMatrix<Cx<f64>>) -> Result<f64> {
        let s = to_faer(a)
            .singular_values()
            .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))?;
        Ok(s.iter().sum())
    }

    fn closest_split(clusters: &[(f64, usize)], cap: WorkCap) -> Result<Vec<usize>> {
        search::float_closest(clusters, cap)
    }
}

fn to_faer(a: &DMatrix<Cx<f64>>) -> faer::Mat<faer::c64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

impl Real for BigRational {
    const EXACT: bool = true;
    const MODE: &'static str = "exact";

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        BigRational::new(numer.into(), denom.into())
    }

    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }

    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }

    fn sqrt_exact(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = perfect_sqrt(self.numer())?;
        let d = perfect_sqrt(self.denom())?;
        Some(BigRational::new(n, d))
    }

    fn within(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn le_within(&self, other: &Self, _tol: f64) -> bool {
        self <= other
    }

    fn parse_str(s: &str) -> Result<Self> {
        parse_rational(s.trim()).ok_or_else(|| bad_number(s))
    }

    fn render(&self) -> String {
        self.to_string()
    }

    fn polar_dense(a: &DMatrix<Cx<BigRational>>, _tau_rank: f64) -> Result<DensePolar<BigRational>> {
        // Exact polar factors exist whenever a*a is diagonal with square entries;
        // functionals given in spectral form always satisfy this.
        let n = a.nrows();
        let gram = crate::matrix::dense_mul(&crate::matrix::dense_adjoint(a), a);
        for j in 0..n {
            for i in 0..n {
                if i != j && !gram[(i, j)].is_zero() {
                    return Err(Error::NotExact(
                        "|a| is not diagonal in the standard basis".into(),
                    ));
                }
            }
        }
        let zero = DMatrix::<Cx<BigRational>>::zeros(n, n);
        let (mut v, mut positive, mut support) = (zero.clone(), zero.clone(), zero);
        for j in 0..n {
            let d = &gram[(j, j)];
            if d.re.is_zero() {
                continue;
            }
            let root = d.re.sqrt_exact().ok_or_else(|| {
                Error::NotExact(format!("singular value sqrt({}) is irrational", d.re))
            })?;
            let inv = Complex::new(root.recip(), BigRational::zero());
            for i in 0..n {
                v[(i, j)] = a[(i, j)].clone() * inv.clone();
            }
            positive[(j, j)] = Complex::new(root, BigRational::zero());
            support[(j, j)] = Complex::one();
        }
        Ok(DensePolar {
            v,
            positive,
            support,
        })
    }

    fn hermitian_eigen(h: &DMatrix<Cx<BigRational>>) -> Result<Vec<(BigRational, DVector<Cx<BigRational>>)>> {
        let n = h.nrows();
        let mut pairs = Vec::with_capacity(n);
        for j in 0..n {
            for i in 0..n {
                if i != j && !h[(i, j)].is_zero() {
                    return Err(Error::NotExact(
                        "exact eigendecomposition needs a diagonal positive part".into(),
                    ));
                }
            }
            let mut e = DVector::<Cx<BigRational>>::zeros(n);
            e[j] = Complex::one();
            pairs.push((h[(j, j)].re.clone(), e));
        }
        Ok(pairs)
    }

    fn trace_norm_dense(a: &DMatrix<Cx<BigRational>>) -> Result<BigRational> {
        let polar = Self::polar_dense(a, 0.0)?;
        Ok((0..a.nrows()).fold(BigRational::zero(), |acc, j| {
            acc + polar.positive[(j, j)].re.clone()
        }))
    }

    fn closest_split(clusters: &[(BigRational, usize)], cap: WorkCap) -> Result<Vec<usize>> {
        search::exact_closest(clusters, cap)
    }
}

fn bad_number(s: &str) -> Error {
    Error::input(format!("malformed number {s:?}"))
}

fn perfect_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

fn parse_rational(s: &str) -> Option<BigRational> {
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).ok()?;
        let q = BigInt::from_str(q.trim()).ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str(&all_digits).ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    if negative {
        value = -value;
    }
    Some(value)
}

/// Exact rational from a small integer pair, for tests and generators.
pub fn q(numer: i64, denom: i64) -> BigRational {
    BigRational::new(numer.into(), denom.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(BigRational::parse_str("3/8").unwrap(), q(3, 8));
        assert_eq!(BigRational::parse_str("-0.25").unwrap(), q(-1, 4));
        assert_eq!(BigRational::parse_str("1e-3").unwrap(), q(1, 1000));
        assert_eq!(BigRational::parse_str("6/4").unwrap().render(), "3/2");
        assert!(BigRational::parse_str("1/0").is_err());
        assert!(BigRational::parse_str("abc").is_err());
        assert_eq!(f64::parse_str("1/4").unwrap(), 0.25);
        assert!(f64::parse_str("NaN").is_err());
    }

    #[test]
    fn float_render_round_trips() {
        for x in [0.1, 1.0 / 3.0, 1e-10, -2.5e300] {
            assert_eq!(f64::parse_str(&x.render()).unwrap(), x);
        }
    }

    #[test]
    fn exact_square_roots() {
        assert_eq!(q(9, 49).sqrt_exact(), Some(q(3, 7)));
        assert_eq!(q(2, 1).sqrt_exact(), None);
        assert_eq!(q(-1, 4).sqrt_exact(), None);
        let z = Complex::new(q(3, 5), q(4, 5));
        assert_eq!(BigRational::modulus(&z), Some(q(1, 1)));
    }

    #[test]
    fn float_polar_of_rank_one_block() {
        // outer product x·y* on C^16: one singular value, fifteen zeros
        let x: Vec<Cx<f64>> = (0..16).map(|i| Complex::new((i as f64).sin(), (i as f64 * 0.7).cos())).collect();
        let y: Vec<Cx<f64>> = (0..16).map(|i| Complex::new(1.0 / (i as f64 + 1.0), (i as f64).cos())).collect();
        let a = DMatrix::from_fn(16, 16, |i, j| x[i] * y[j].conj());
        let p = f64::polar_dense(&a, 1e-10).unwrap();
        assert!((&p.v * &p.positive - &a).norm() < 1e-12);
        assert!((p.v.adjoint() * &p.v - &p.support).norm() < 1e-12);
        let expected = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() * y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((f64::trace_norm_dense(&a).unwrap() - expected).abs() < 1e-12);
    }
}
