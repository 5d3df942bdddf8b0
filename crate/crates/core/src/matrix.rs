//! Block-diagonal matrices over a [`Real`] field, stored as one flat
//! column-major buffer so that diagonal algebras with many atoms stay cheap.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::algebra::AlgebraShape;
use crate::error::{Error, Result};
use crate::real::{Cx, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct BlockMatrix<R: Real> {
    shape: Arc<AlgebraShape>,
    data: Vec<Cx<R>>,
}

impl<R: Real> BlockMatrix<R> {
    pub fn zeros(shape: Arc<AlgebraShape>) -> Self {
        let data = vec![Cx::<R>::zero(); shape.total_dimension()];
        BlockMatrix { shape, data }
    }

    pub fn identity(shape: Arc<AlgebraShape>) -> Self {
        let mut m = Self::zeros(shape);
        for b in 0..m.shape.num_blocks() {
            for i in 0..m.shape.block_dim(b) {
                m.set(b, i, i, Cx::<R>::one());
            }
        }
        m
    }

    pub fn from_fn(shape: Arc<AlgebraShape>, mut f: impl FnMut(usize, usize, usize) -> Cx<R>) -> Self {
        let mut data = Vec::with_capacity(shape.total_dimension());
        for (b, &d) in shape.blocks().iter().enumerate() {
            for j in 0..d {
                for i in 0..d {
                    data.push(f(b, i, j));
                }
            }
        }
        BlockMatrix { shape, data }
    }

    /// Diagonal matrix with the given entries, in block order.
    pub fn from_diagonal(shape: Arc<AlgebraShape>, diag: &[Cx<R>]) -> Result<Self> {
        let size: usize = shape.blocks().iter().sum();
        if diag.len() != size {
            return Err(Error::input(format!(
                "diagonal has {} entries, algebra acts on dimension {size}",
                diag.len()
            )));
        }
        let mut m = Self::zeros(shape);
        let mut pos = 0;
        for b in 0..m.shape.num_blocks() {
            for i in 0..m.shape.block_dim(b) {
                m.set(b, i, i, diag[pos].clone());
                pos += 1;
            }
        }
        Ok(m)
    }

    pub fn from_blocks(shape: Arc<AlgebraShape>, blocks: Vec<DMatrix<Cx<R>>>) -> Result<Self> {
        let found: Vec<usize> = blocks.iter().map(|m| m.nrows()).collect();
        if blocks.len() != shape.num_blocks()
            || blocks
                .iter()
                .zip(shape.blocks())
                .any(|(m, &d)| m.nrows() != d || m.ncols() != d)
        {
            return Err(Error::BlockMismatch {
                expected: shape.blocks().to_vec(),
                found,
            });
        }
        let mut data = Vec::with_capacity(shape.total_dimension());
        for m in blocks {
            data.extend(m.iter().cloned());
        }
        Ok(BlockMatrix { shape, data })
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn shared_shape(&self) -> &Arc<AlgebraShape> {
        &self.shape
    }

    pub fn block(&self, b: usize) -> &[Cx<R>] {
        &self.data[self.shape.block_range(b)]
    }

    pub fn block_mut(&mut self, b: usize) -> &mut [Cx<R>] {
        let range = self.shape.block_range(b);
        &mut self.data[range]
    }

    pub fn get(&self, b: usize, i: usize, j: usize) -> &Cx<R> {
        let d = self.shape.block_dim(b);
        &self.block(b)[j * d + i]
    }

    pub fn set(&mut self, b: usize, i: usize, j: usize, value: Cx<R>) {
        let d = self.shape.block_dim(b);
        self.block_mut(b)[j * d + i] = value;
    }

    pub fn block_matrix(&self, b: usize) -> DMatrix<Cx<R>> {
        let d = self.shape.block_dim(b);
        DMatrix::from_column_slice(d, d, self.block(b))
    }

    pub fn set_block(&mut self, b: usize, m: &DMatrix<Cx<R>>) {
        let dst = self.block_mut(b);
        for (slot, value) in dst.iter_mut().zip(m.iter()) {
            *slot = value.clone();
        }
    }

    pub fn entries(&self) -> &[Cx<R>] {
        &self.data
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.shape, &other.shape) || self.shape == other.shape {
            Ok(())
        } else {
            Err(Error::BlockMismatch {
                expected: self.shape.blocks().to_vec(),
                found: other.shape.blocks().to_vec(),
            })
        }
    }

    /// Conjugate transpose, blockwise.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.shape.clone());
        for (b, &d) in self.shape.blocks().iter().enumerate() {
            let src = self.block(b);
            let dst = out.block_mut(b);
            for j in 0..d {
                for i in 0..d {
                    dst[i * d + j] = src[j * d + i].conj();
                }
            }
        }
        out
    }

    pub fn scale(&self, c: &Cx<R>) -> Self {
        BlockMatrix {
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: &R) -> Self {
        self.scale(&Complex::new(c.clone(), R::zero()))
    }

    pub fn trace(&self) -> Cx<R> {
        let mut acc = Cx::<R>::zero();
        for (b, &d) in self.shape.blocks().iter().enumerate() {
            let blk = self.block(b);
            for i in 0..d {
                acc += blk[i * d + i].clone();
            }
        }
        acc
    }

    /// Trace pairing `Σ_b tr(a_b x_b)`.
    pub fn pairing(&self, x: &Self) -> Cx<R> {
        let mut acc = Cx::<R>::zero();
        for (b, &d) in self.shape.blocks().iter().enumerate() {
            let a = self.block(b);
            let xb = x.block(b);
            for i in 0..d {
                for k in 0..d {
                    let aik = &a[k * d + i];
                    if aik.is_zero() {
                        continue;
                    }
                    acc += aik * &xb[i * d + k];
                }
            }
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_diagonal(&self) -> bool {
        self.shape.blocks().iter().enumerate().all(|(b, &d)| {
            let blk = self.block(b);
            (0..d).all(|j| (0..d).all(|i| i == j || blk[j * d + i].is_zero()))
        })
    }

    pub fn to_f64(&self) -> BlockMatrix<f64> {
        BlockMatrix {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .map(|z| Complex::new(z.re.to_f64(), z.im.to_f64()))
                .collect(),
        }
    }

    /// Largest entry modulus, as a float.
    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|z| z.re.to_f64().hypot(z.im.to_f64()))
            .fold(0.0, f64::max)
    }

    /// Trace norm `Σ_b ‖a_b‖₁`.
    pub fn trace_norm(&self) -> Result<R> {
        let mut acc = R::zero();
        for (b, &d) in self.shape.blocks().iter().enumerate() {
            acc = acc + block_trace_norm(self.block(b), d)?;
        }
        Ok(acc)
    }

    /// `‖self − other‖₁` as a float; exactly zero iff the matrices agree in exact mode.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.same_shape(other).is_err() {
            return f64::INFINITY;
        }
        if R::EXACT {
            if self.data == other.data {
                return 0.0;
            }
            let diff = (self - other).to_f64();
            let norm = diff.trace_norm().unwrap_or(f64::INFINITY);
            return norm.max(f64::MIN_POSITIVE);
        }
        (self - other)
            .to_f64()
            .trace_norm()
            .unwrap_or(f64::INFINITY)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Cx<R>, &Cx<R>) -> Cx<R>) -> Self {
        self.same_shape(other).expect("block shapes must agree");
        BlockMatrix {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }
}

impl<R: Real> Add for &BlockMatrix<R> {
    type Output = BlockMatrix<R>;
    fn add(self, rhs: Self) -> BlockMatrix<R> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<R: Real> Sub for &BlockMatrix<R> {
    type Output = BlockMatrix<R>;
    fn sub(self, rhs: Self) -> BlockMatrix<R> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<R: Real> Neg for &BlockMatrix<R> {
    type Output = BlockMatrix<R>;
    fn neg(self) -> BlockMatrix<R> {
        BlockMatrix {
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| -z.clone()).collect(),
        }
    }
}

impl<R: Real> Mul for &BlockMatrix<R> {
    type Output = BlockMatrix<R>;
    fn mul(self, rhs: Self) -> BlockMatrix<R> {
        self.same_shape(rhs).expect("block shapes must agree");
        let mut out = BlockMatrix::zeros(self.shape.clone());
        for (b, &d) in self.shape.blocks().iter().enumerate() {
            let range = self.shape.block_range(b);
            block_mul(&self.data[range.clone()], &rhs.data[range.clone()], d, &mut out.data[range]);
        }
        out
    }
}

/// `out += a·b` for column-major `d×d` blocks, skipping zero entries.
fn block_mul<R: Real>(a: &[Cx<R>], b: &[Cx<R>], d: usize, out: &mut [Cx<R>]) {
    for j in 0..d {
        for k in 0..d {
            let bkj = &b[j * d + k];
            if bkj.is_zero() {
                continue;
            }
            for i in 0..d {
                let aik = &a[k * d + i];
                if aik.is_zero() {
                    continue;
                }
                out[j * d + i] += aik * bkj;
            }
        }
    }
}

/// True when every row and column holds at most one nonzero entry.
pub(crate) fn is_monomial<R: Real>(a: &[Cx<R>], d: usize) -> bool {
    let mut row_used = vec![false; d];
    for j in 0..d {
        let mut col_count = 0;
        for i in 0..d {
            if !a[j * d + i].is_zero() {
                col_count += 1;
                if col_count > 1 || row_used[i] {
                    return false;
                }
                row_used[i] = true;
            }
        }
    }
    true
}

pub(crate) fn block_trace_norm<R: Real>(a: &[Cx<R>], d: usize) -> Result<R> {
    if is_monomial(a, d) {
        let mut acc = R::zero();
        for z in a.iter().filter(|z| !z.is_zero()) {
            acc = acc
                + R::modulus(z).ok_or_else(|| {
                    Error::NotExact(format!("modulus of {} + {}i is irrational", z.re, z.im))
                })?;
        }
        return Ok(acc);
    }
    R::trace_norm_dense(&DMatrix::from_column_slice(d, d, a))
}

pub fn dense_mul<R: Real>(a: &DMatrix<Cx<R>>, b: &DMatrix<Cx<R>>) -> DMatrix<Cx<R>> {
    let (n, m, p) = (a.nrows(), a.ncols(), b.ncols());
    assert_eq!(m, b.nrows(), "inner dimensions must agree");
    let mut out = DMatrix::<Cx<R>>::zeros(n, p);
    for j in 0..p {
        for k in 0..m {
            let bkj = &b[(k, j)];
            if bkj.is_zero() {
                continue;
            }
            for i in 0..n {
                let aik = &a[(i, k)];
                if !aik.is_zero() {
                    out[(i, j)] += aik * bkj;
                }
            }
        }
    }
    out
}

pub fn dense_adjoint<R: Real>(a: &DMatrix<Cx<R>>) -> DMatrix<Cx<R>> {
    DMatrix::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)].conj())
}
