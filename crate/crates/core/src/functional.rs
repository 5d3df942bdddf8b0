//! Normal functionals under the trace pairing `φ(x) = tr(a_φ x)`.
//!
//! Under this pairing the polar decomposition `φ = v|φ|` is the left matrix
//! polar decomposition `a_φ = v·|a_φ|`, the module actions are
//! `a_{xφ} = x·a_φ`, `a_{φx} = a_φ·x`, and the norm of `φ` is the trace
//! norm of `a_φ`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraShape;
use crate::error::{Error, Result};
use crate::matrix::{is_monomial, BlockMatrix};
use crate::real::{Cx, Real};

/// Numerical cutoffs used in float mode. Exact mode ignores them, except
/// that the cluster cutoff must be zero there.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Singular values at or below this are outside the support.
    pub rank: f64,
    /// Eigenvalues of `|φ|` closer than this are one cluster.
    pub cluster: f64,
    /// Norm equalities are accepted within this.
    pub equality: f64,
    /// Matrix identities (reconstruction, projection algebra) within this.
    pub reconstruction: f64,
}

impl Tolerances {
    pub const fn float() -> Self {
        Tolerances {
            rank: 1e-10,
            cluster: 1e-10,
            equality: 1e-9,
            reconstruction: 1e-10,
        }
    }

    pub const fn exact() -> Self {
        Tolerances {
            rank: 0.0,
            cluster: 0.0,
            equality: 0.0,
            reconstruction: 0.0,
        }
    }

    pub fn for_mode<R: Real>() -> Self {
        if R::EXACT {
            Self::exact()
        } else {
            Self::float()
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::float()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Functional<R: Real> {
    a: BlockMatrix<R>,
}

/// Spectral description of one block: `a = v·diag(w)` with the weights placed
/// at `positions`, and `v*v` the diagonal projection onto those positions.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralBlock<R: Real> {
    pub v: DMatrix<Cx<R>>,
    pub weights: Vec<R>,
    pub positions: Vec<usize>,
}

impl<R: Real> Functional<R> {
    pub fn new(a: BlockMatrix<R>) -> Self {
        Functional { a }
    }

    pub fn zero(shape: Arc<AlgebraShape>) -> Self {
        Functional::new(BlockMatrix::zeros(shape))
    }

    /// Positive diagonal functional with the given weights in block order.
    pub fn diagonal(shape: Arc<AlgebraShape>, weights: &[R]) -> Result<Self> {
        let diag: Vec<Cx<R>> = weights
            .iter()
            .map(|w| Complex::new(w.clone(), R::zero()))
            .collect();
        Ok(Functional::new(BlockMatrix::from_diagonal(shape, &diag)?))
    }

    /// Builds `a = v·diag(w)` per block after checking `v*v = s`.
    pub fn from_spectral(
        shape: Arc<AlgebraShape>,
        blocks: Vec<SpectralBlock<R>>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if blocks.len() != shape.num_blocks() {
            return Err(Error::BlockMismatch {
                expected: shape.blocks().to_vec(),
                found: blocks.iter().map(|b| b.v.nrows()).collect(),
            });
        }
        let mut dense = Vec::with_capacity(blocks.len());
        for (b, blk) in blocks.into_iter().enumerate() {
            let d = shape.block_dim(b);
            if blk.v.nrows() != d || blk.v.ncols() != d {
                return Err(Error::input(format!(
                    "block {b}: v is {}x{}, expected {d}x{d}",
                    blk.v.nrows(),
                    blk.v.ncols()
                )));
            }
            if blk.weights.len() != blk.positions.len() {
                return Err(Error::input(format!(
                    "block {b}: {} weights but {} positions",
                    blk.weights.len(),
                    blk.positions.len()
                )));
            }
            let mut weight_at = vec![R::zero(); d];
            let mut seen = vec![false; d];
            for (w, &p) in blk.weights.iter().zip(&blk.positions) {
                if p >= d || seen[p] {
                    return Err(Error::input(format!(
                        "block {b}: position {p} is out of range or repeated"
                    )));
                }
                if w.is_negative() {
                    return Err(Error::input(format!("block {b}: weight {w} is negative")));
                }
                seen[p] = true;
                weight_at[p] = w.clone();
            }
            let vv = crate::matrix::dense_mul(&crate::matrix::dense_adjoint(&blk.v), &blk.v);
            let support = DMatrix::from_fn(d, d, |i, j| {
                if i == j && !weight_at[i].is_zero() {
                    Cx::<R>::one()
                } else {
                    Cx::<R>::zero()
                }
            });
            let err = max_entry_gap(&vv, &support);
            if !err.le_within(&R::zero(), tol.reconstruction) {
                return Err(Error::input(format!(
                    "block {b}: v*v differs from the support projection (gap {})",
                    err.to_f64()
                )));
            }
            let a = DMatrix::from_fn(d, d, |i, j| {
                &blk.v[(i, j)] * Complex::new(weight_at[j].clone(), R::zero())
            });
            dense.push(a);
        }
        Ok(Functional::new(BlockMatrix::from_blocks(shape, dense)?))
    }

    pub fn matrix(&self) -> &BlockMatrix<R> {
        &self.a
    }

    pub fn into_matrix(self) -> BlockMatrix<R> {
        self.a
    }

    pub fn shape(&self) -> &AlgebraShape {
        self.a.shape()
    }

    pub fn shared_shape(&self) -> &Arc<AlgebraShape> {
        self.a.shared_shape()
    }

    /// `φ(x) = tr(a_φ x)`.
    pub fn evaluate(&self, x: &BlockMatrix<R>) -> Result<Cx<R>> {
        self.a.same_shape(x)?;
        Ok(self.a.pairing(x))
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero()
    }

    pub fn trace_norm(&self) -> Result<R> {
        self.a.trace_norm()
    }

    pub fn scale(&self, c: &R) -> Self {
        Functional::new(self.a.scale_real(c))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.a.same_shape(&other.a)?;
        Ok(Functional::new(&self.a + &other.a))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.a.same_shape(&other.a)?;
        Ok(Functional::new(&self.a - &other.a))
    }

    pub fn neg(&self) -> Self {
        Functional::new(-&self.a)
    }

    pub fn to_f64(&self) -> Functional<f64> {
        Functional::new(self.a.to_f64())
    }

    /// `‖self − other‖₁` as a float (exactly zero iff equal in exact mode).
    pub fn distance(&self, other: &Self) -> f64 {
        self.a.distance(&other.a)
    }
}

fn max_entry_gap<R: Real>(a: &DMatrix<Cx<R>>, b: &DMatrix<Cx<R>>) -> R {
    a.iter().zip(b.iter()).fold(R::zero(), |acc, (x, y)| {
        let d = x - y;
        R::max_of(acc, d.re.abs() + d.im.abs())
    })
}

/// Trace norm `‖φ‖ = Σ_b ‖a_b‖₁`.
pub fn trace_norm<R: Real>(phi: &Functional<R>) -> Result<R> {
    phi.trace_norm()
}

/// The polar triple `(v, |φ|, s(|φ|))`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarForm<R: Real> {
    pub v: BlockMatrix<R>,
    pub positive: BlockMatrix<R>,
    pub support: BlockMatrix<R>,
}

impl<R: Real> PolarForm<R> {
    /// `v·|φ|`.
    pub fn reconstruct(&self) -> Functional<R> {
        Functional::new(&self.v * &self.positive)
    }

    pub fn positive_functional(&self) -> Functional<R> {
        Functional::new(self.positive.clone())
    }

    /// `|φ|(s) = ‖φ‖`.
    pub fn total_mass(&self) -> R {
        self.positive.trace().re
    }
}

/// Polar decomposition `a_φ = v|a_φ|` with `v` vanishing on `ker |a_φ|`.
///
/// Monomial blocks (at most one nonzero per row and column) are handled in
/// closed form in both modes; other blocks go through an SVD in float mode and
/// through the diagonal-Gram route in exact mode.
pub fn polar_decompose<R: Real>(phi: &Functional<R>, tau_rank: f64) -> Result<PolarForm<R>> {
    let shape = phi.shared_shape().clone();
    let mut v = BlockMatrix::zeros(shape.clone());
    let mut positive = BlockMatrix::zeros(shape.clone());
    let mut support = BlockMatrix::zeros(shape.clone());
    for b in 0..shape.num_blocks() {
        let d = shape.block_dim(b);
        let a = phi.matrix().block(b);
        if is_monomial(a, d) {
            for j in 0..d {
                for i in 0..d {
                    let z = &a[j * d + i];
                    if z.is_zero() {
                        continue;
                    }
                    let m = R::modulus(z).ok_or_else(|| {
                        Error::NotExact(format!("modulus of {} + {}i is irrational", z.re, z.im))
                    })?;
                    if !R::EXACT && m.to_f64() <= tau_rank {
                        continue;
                    }
                    v.set(b, i, j, z.unscale(m.clone()));
                    positive.set(b, j, j, Complex::new(m, R::zero()));
                    support.set(b, j, j, Cx::<R>::one());
                }
            }
        } else {
            let dense = R::polar_dense(&DMatrix::from_column_slice(d, d, a), tau_rank)?;
            v.set_block(b, &dense.v);
            positive.set_block(b, &dense.positive);
            support.set_block(b, &dense.support);
        }
    }
    Ok(PolarForm {
        v,
        positive,
        support,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// `xφ: y ↦ φ(yx)` (left, `a = x·a_φ`) or `φx: y ↦ φ(xy)` (right, `a = a_φ·x`).
pub fn act<R: Real>(x: &BlockMatrix<R>, phi: &Functional<R>, side: Side) -> Result<Functional<R>> {
    x.same_shape(phi.matrix())?;
    Ok(Functional::new(match side {
        Side::Left => x * phi.matrix(),
        Side::Right => phi.matrix() * x,
    }))
}

/// `φ*(x) = conj(φ(x*))`, represented by `a_φ*`.
pub fn adjoint<R: Real>(phi: &Functional<R>) -> Functional<R> {
    Functional::new(phi.matrix().adjoint())
}

/// Outcome of the norm-additivity check for a pair of functionals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KusudaReport {
    pub norm_additive: bool,
    /// `‖ |φ₁+φ₂| − (|φ₁|+|φ₂|) ‖₁`, when norm-additive.
    pub abs_additive_error: Option<f64>,
    /// `max_i ‖v|φ_i| − φ_i‖₁` for the polar isometry `v` of `φ₁+φ₂`, when norm-additive.
    pub shared_isometry_error: Option<f64>,
}

/// If `‖φ₁+φ₂‖ = ‖φ₁‖+‖φ₂‖`, measures how far `|φ₁+φ₂| = |φ₁|+|φ₂|` and
/// `φ_i = v|φ_i|` are from holding.
pub fn kusuda_check<R: Real>(
    phi1: &Functional<R>,
    phi2: &Functional<R>,
    tol: &Tolerances,
) -> Result<KusudaReport> {
    let sum = phi1.add(phi2)?;
    let n1 = phi1.trace_norm()?;
    let n2 = phi2.trace_norm()?;
    let ns = sum.trace_norm()?;
    let scale = (n1.to_f64() + n2.to_f64()).max(1.0);
    if !ns.within(&(n1.clone() + n2.clone()), tol.equality * scale) {
        return Ok(KusudaReport {
            norm_additive: false,
            abs_additive_error: None,
            shared_isometry_error: None,
        });
    }
    let p_sum = polar_decompose(&sum, tol.rank)?;
    let p1 = polar_decompose(phi1, tol.rank)?;
    let p2 = polar_decompose(phi2, tol.rank)?;
    let abs_err = p_sum.positive.distance(&(&p1.positive + &p2.positive));
    let iso_err = [(&p1, phi1), (&p2, phi2)]
        .iter()
        .map(|(p, phi)| (&p_sum.v * &p.positive).distance(phi.matrix()))
        .fold(0.0, f64::max);
    Ok(KusudaReport {
        norm_additive: true,
        abs_additive_error: Some(abs_err),
        shared_isometry_error: Some(iso_err),
    })
}
