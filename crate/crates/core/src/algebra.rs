//! Finite-dimensional W*-algebras as direct sums of full matrix blocks.

use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::Functional;
use crate::matrix::BlockMatrix;
use crate::real::Real;

/// `M_{n_1} ⊕ … ⊕ M_{n_r}`, optionally flagged as the level-`n` discretization
/// of `L∞[0,1]` (then `blocks` is `n` copies of `1`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgebraShape {
    blocks: Vec<usize>,
    diffuse_resolution: Option<usize>,
    offsets: Vec<usize>,
}

impl AlgebraShape {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        Self::build(blocks, None)
    }

    /// Diagonal algebra with `resolution` atoms, flagged as a diffuse model.
    pub fn diffuse(resolution: usize) -> Result<Self> {
        Self::build(vec![1; resolution], Some(resolution))
    }

    pub fn with_diffuse_flag(blocks: Vec<usize>, resolution: Option<usize>) -> Result<Self> {
        Self::build(blocks, resolution)
    }

    fn build(blocks: Vec<usize>, diffuse_resolution: Option<usize>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::input("algebra shape needs at least one block"));
        }
        if blocks.contains(&0) {
            return Err(Error::input("block dimensions must be at least 1"));
        }
        if let Some(n) = diffuse_resolution {
            if n == 0 || blocks.len() != n || blocks.iter().any(|&d| d != 1) {
                return Err(Error::input(format!(
                    "diffuse model of resolution {n} must consist of {n} blocks of dimension 1"
                )));
            }
        }
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        let mut acc = 0;
        for &d in &blocks {
            offsets.push(acc);
            acc += d * d;
        }
        offsets.push(acc);
        Ok(AlgebraShape {
            blocks,
            diffuse_resolution,
            offsets,
        })
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_dim(&self, b: usize) -> usize {
        self.blocks[b]
    }

    pub fn diffuse_resolution(&self) -> Option<usize> {
        self.diffuse_resolution
    }

    /// Complex dimension `Σ n_i²`.
    pub fn total_dimension(&self) -> usize {
        *self.offsets.last().expect("offsets are never empty")
    }

    /// Range of block `b` inside a flat column-major buffer.
    pub(crate) fn block_range(&self, b: usize) -> Range<usize> {
        self.offsets[b]..self.offsets[b + 1]
    }

    pub fn into_shared(self) -> Arc<AlgebraShape> {
        Arc::new(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorType {
    TypeIFinite,
    DiscretizedDiffuseModel,
}

/// One summand `M z_i` of the central decomposition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summand {
    pub central_projection: usize,
    pub blocks: Range<usize>,
    pub block_dimension: usize,
    pub factor_type: FactorType,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CentralDecomposition {
    pub summands: Vec<Summand>,
}

impl CentralDecomposition {
    /// Dimension of the center `Z(M)`: one per minimal central projection.
    pub fn center_dimension(&self) -> usize {
        self.summands.iter().map(|s| s.blocks.len()).sum()
    }

    pub fn factor_count(&self) -> usize {
        self.summands
            .iter()
            .filter(|s| s.factor_type == FactorType::TypeIFinite)
            .count()
    }
}

/// Splits `M` along its minimal central projections. Each matrix block is a
/// factor; a flagged diffuse model is kept as a single summand.
pub fn central_decomposition(shape: &AlgebraShape) -> CentralDecomposition {
    if let Some(n) = shape.diffuse_resolution() {
        return CentralDecomposition {
            summands: vec![Summand {
                central_projection: 0,
                blocks: 0..n,
                block_dimension: 1,
                factor_type: FactorType::DiscretizedDiffuseModel,
            }],
        };
    }
    CentralDecomposition {
        summands: shape
            .blocks()
            .iter()
            .enumerate()
            .map(|(i, &d)| Summand {
                central_projection: i,
                blocks: i..i + 1,
                block_dimension: d,
                factor_type: FactorType::TypeIFinite,
            })
            .collect(),
    }
}

/// Restrictions `φ z_i`, each as a functional on its own summand `M z_i`.
pub fn decompose_functional<R: Real>(
    phi: &Functional<R>,
    shape: &AlgebraShape,
) -> Result<Vec<Functional<R>>> {
    if phi.shape() != shape {
        return Err(Error::BlockMismatch {
            expected: shape.blocks().to_vec(),
            found: phi.shape().blocks().to_vec(),
        });
    }
    central_decomposition(shape)
        .summands
        .iter()
        .map(|s| {
            let sub_shape = if s.factor_type == FactorType::DiscretizedDiffuseModel {
                shape.clone()
            } else {
                AlgebraShape::new(vec![s.block_dimension])?
            };
            let blocks = s
                .blocks
                .clone()
                .map(|b| phi.matrix().block_matrix(b))
                .collect();
            Ok(Functional::new(BlockMatrix::from_blocks(
                Arc::new(sub_shape),
                blocks,
            )?))
        })
        .collect()
}
