//! Centralizer `M_{|φ|}` of the positive part of a functional.
//!
//! Inside a block the centralizer of `|φ|` on its support corner is the
//! commutant of `|φ|` there, `⊕_i M_{m_i}` over the eigenvalue clusters. A
//! projection in it is described up to unitary orbit by how many dimensions
//! it takes from each cluster.

use std::cmp::Ordering;

use nalgebra::DVector;
use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{polar_decompose, Functional, PolarForm, Tolerances};
use crate::matrix::BlockMatrix;
use crate::real::{Cx, Real};

#[derive(Clone, Debug, PartialEq)]
pub enum BasisVector<R: Real> {
    /// Standard basis vector `e_i` of the block.
    Unit(usize),
    Dense(DVector<Cx<R>>),
}

/// Eigenvector of `|φ|`, living in one block.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenVector<R: Real> {
    pub block: usize,
    pub vector: BasisVector<R>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cluster<R: Real> {
    pub value: R,
    pub members: Vec<EigenVector<R>>,
}

impl<R: Real> Cluster<R> {
    pub fn multiplicity(&self) -> usize {
        self.members.len()
    }
}

/// Eigenvalue clusters of `|φ|` on its support, strictly decreasing.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralClusters<R: Real> {
    pub clusters: Vec<Cluster<R>>,
    pub support_rank: usize,
    pub warnings: Vec<String>,
}

impl<R: Real> SpectralClusters<R> {
    /// `(λ_i, m_i)` pairs.
    pub fn spectrum(&self) -> Vec<(R, usize)> {
        self.clusters
            .iter()
            .map(|c| (c.value.clone(), c.multiplicity()))
            .collect()
    }

    /// `Σ λ_i m_i = ‖φ‖`.
    pub fn total(&self) -> R {
        self.clusters.iter().fold(R::zero(), |acc, c| {
            acc + c.value.clone() * R::from_usize(c.multiplicity())
        })
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    fn check_selection(&self, k: &[usize]) -> Result<()> {
        if k.len() != self.clusters.len() {
            return Err(Error::input(format!(
                "selection has {} entries for {} clusters",
                k.len(),
                self.clusters.len()
            )));
        }
        for (i, (&ki, c)) in k.iter().zip(&self.clusters).enumerate() {
            if ki > c.multiplicity() {
                return Err(Error::input(format!(
                    "selection entry {i} is {ki}, cluster multiplicity is {}",
                    c.multiplicity()
                )));
            }
        }
        Ok(())
    }

    /// Canonical projection taking the first `k_i` eigenvectors of cluster `i`.
    pub fn projection(&self, like: &BlockMatrix<R>, k: &[usize]) -> Result<BlockMatrix<R>> {
        self.check_selection(k)?;
        let mut e = BlockMatrix::zeros(like.shared_shape().clone());
        for (c, &ki) in self.clusters.iter().zip(k) {
            for member in &c.members[..ki] {
                add_rank_one(&mut e, member);
            }
        }
        Ok(e)
    }

    /// Rank-one projections onto each eigenvector: a maximal orthogonal family
    /// of minimal projections of the centralizer.
    pub fn minimal_projections(&self, like: &BlockMatrix<R>) -> Vec<BlockMatrix<R>> {
        self.clusters
            .iter()
            .flat_map(|c| c.members.iter())
            .map(|member| {
                let mut e = BlockMatrix::zeros(like.shared_shape().clone());
                add_rank_one(&mut e, member);
                e
            })
            .collect()
    }

    /// Matrix units `x_a x_b*` for eigenvectors sharing a cluster and a block;
    /// together they span the centralizer.
    pub fn centralizer_basis(&self, like: &BlockMatrix<R>) -> Vec<BlockMatrix<R>> {
        let mut basis = Vec::new();
        for c in &self.clusters {
            for a in &c.members {
                for b in c.members.iter().filter(|b| b.block == a.block) {
                    let mut e = BlockMatrix::zeros(like.shared_shape().clone());
                    let d = like.shape().block_dim(a.block);
                    let xa = dense(&a.vector, d);
                    let xb = dense(&b.vector, d);
                    for j in 0..d {
                        for i in 0..d {
                            e.set(a.block, i, j, &xa[i] * xb[j].conj());
                        }
                    }
                    basis.push(e);
                }
            }
        }
        basis
    }
}

fn dense<R: Real>(v: &BasisVector<R>, d: usize) -> DVector<Cx<R>> {
    match v {
        BasisVector::Unit(i) => {
            let mut x = DVector::zeros(d);
            x[*i] = Cx::<R>::one();
            x
        }
        BasisVector::Dense(x) => x.clone(),
    }
}

fn add_rank_one<R: Real>(e: &mut BlockMatrix<R>, member: &EigenVector<R>) {
    let b = member.block;
    match &member.vector {
        BasisVector::Unit(i) => {
            let updated = e.get(b, *i, *i) + Cx::<R>::one();
            e.set(b, *i, *i, updated);
        }
        BasisVector::Dense(x) => {
            let d = x.len();
            for j in 0..d {
                let xj = x[j].conj();
                for i in 0..d {
                    let updated = e.get(b, i, j) + &x[i] * &xj;
                    e.set(b, i, j, updated);
                }
            }
        }
    }
}

/// Eigen-decomposes `|φ|` blockwise, keeps the support, and groups equal
/// eigenvalues (within `tol.cluster` in float mode) across blocks.
pub fn spectral_clusters<R: Real>(polar: &PolarForm<R>, tol: &Tolerances) -> Result<SpectralClusters<R>> {
    if R::EXACT && tol.cluster != 0.0 {
        return Err(Error::input("cluster tolerance must be 0 in exact mode"));
    }
    if tol.cluster < 0.0 {
        return Err(Error::input("cluster tolerance must be nonnegative"));
    }
    let positive = &polar.positive;
    let shape = positive.shape();
    let mut pairs: Vec<(R, usize, usize, BasisVector<R>)> = Vec::new();
    for b in 0..shape.num_blocks() {
        let d = shape.block_dim(b);
        let blk = positive.block(b);
        let diagonal = (0..d).all(|j| (0..d).all(|i| i == j || blk[j * d + i].is_zero()));
        if diagonal {
            for i in 0..d {
                pairs.push((blk[i * d + i].re.clone(), b, i, BasisVector::Unit(i)));
            }
        } else {
            let eig = R::hermitian_eigen(&positive.block_matrix(b))?;
            for (i, (value, x)) in eig.into_iter().enumerate() {
                pairs.push((value, b, i, BasisVector::Dense(x)));
            }
        }
    }
    pairs.retain(|(value, ..)| {
        if R::EXACT {
            value.is_positive()
        } else {
            value.to_f64() > tol.rank
        }
    });
    pairs.sort_by(|x, y| {
        y.0.partial_cmp(&x.0)
            .unwrap_or(Ordering::Equal)
            .then(x.1.cmp(&y.1))
            .then(x.2.cmp(&y.2))
    });

    let support_rank = pairs.len();
    let roundoff = 64.0 * f64::EPSILON * pairs.first().map_or(0.0, |p| p.0.to_f64());
    let mut warnings = Vec::new();
    let mut clusters: Vec<Cluster<R>> = Vec::new();
    let mut sums: Vec<R> = Vec::new();
    let mut previous: Option<R> = None;
    for (value, block, _, vector) in pairs {
        let joins = match &previous {
            Some(prev) if R::EXACT => *prev == value,
            Some(prev) => (prev.clone() - value.clone()).to_f64() <= tol.cluster,
            None => false,
        };
        if joins {
            let prev = previous.as_ref().expect("joins implies a previous value");
            let gap = (prev.clone() - value.clone()).to_f64();
            if gap > roundoff {
                warnings.push(format!(
                    "eigenvalues {} and {} merged into one cluster (gap {gap:.3e} <= {:.3e})",
                    prev.render(),
                    value.render(),
                    tol.cluster
                ));
            }
            let idx = clusters.len() - 1;
            sums[idx] += value.clone();
            clusters[idx].members.push(EigenVector { block, vector });
        } else {
            sums.push(value.clone());
            clusters.push(Cluster {
                value: value.clone(),
                members: vec![EigenVector { block, vector }],
            });
        }
        previous = Some(value);
    }
    if !R::EXACT {
        for (c, s) in clusters.iter_mut().zip(sums) {
            c.value = s / R::from_usize(c.multiplicity());
        }
    }
    Ok(SpectralClusters {
        clusters,
        support_rank,
        warnings,
    })
}

/// `|φ|(e) = Σ λ_i k_i` for a projection taking `k_i` dimensions of cluster `i`.
pub fn mass<R: Real>(clusters: &SpectralClusters<R>, k: &[usize]) -> Result<R> {
    clusters.check_selection(k)?;
    Ok(clusters
        .clusters
        .iter()
        .zip(k)
        .fold(R::zero(), |acc, (c, &ki)| acc + c.value.clone() * R::from_usize(ki)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentralizerSummand {
    pub block: usize,
    pub lambda: String,
    pub mult: usize,
}

/// Structure of `M_{|φ|} ≅ ⊕ M_{m}` over (cluster, block) pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentralizerReport {
    pub summands: Vec<CentralizerSummand>,
    /// Size of a maximal orthogonal family of minimal projections.
    pub atoms: usize,
    /// `M_{|φ|} = C·s(|φ|)`.
    pub is_trivial: bool,
    pub warnings: Vec<String>,
}

impl CentralizerReport {
    pub fn block_structure(&self) -> Vec<usize> {
        self.summands.iter().map(|s| s.mult).collect()
    }
}

pub fn centralizer_structure<R: Real>(phi: &Functional<R>, tol: &Tolerances) -> Result<CentralizerReport> {
    if phi.is_zero() {
        return Err(Error::input("centralizer of zero undefined"));
    }
    let polar = polar_decompose(phi, tol.rank)?;
    let clusters = spectral_clusters(&polar, tol)?;
    Ok(report_from_clusters(&clusters))
}

pub fn report_from_clusters<R: Real>(clusters: &SpectralClusters<R>) -> CentralizerReport {
    let mut summands = Vec::new();
    for c in &clusters.clusters {
        let mut blocks: Vec<usize> = c.members.iter().map(|m| m.block).collect();
        blocks.dedup();
        for b in blocks {
            summands.push(CentralizerSummand {
                block: b,
                lambda: c.value.render(),
                mult: c.members.iter().filter(|m| m.block == b).count(),
            });
        }
    }
    let is_trivial = summands.len() == 1 && summands[0].mult == 1;
    CentralizerReport {
        summands,
        atoms: clusters.support_rank,
        is_trivial,
        warnings: clusters.warnings.clone(),
    }
}

#[allow(dead_code)]
fn real_cx<R: Real>(r: R) -> Cx<R> {
    Complex::new(r, R::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraShape;
    use crate::real::q;
    use num_rational::BigRational;
    use std::sync::Arc;

    fn diag_exact(blocks: &[usize], w: &[BigRational]) -> Functional<BigRational> {
        let sh = Arc::new(AlgebraShape::new(blocks.to_vec()).unwrap());
        Functional::diagonal(sh, w).unwrap()
    }

    fn clusters_of<R: Real>(phi: &Functional<R>) -> SpectralClusters<R> {
        let tol = Tolerances::for_mode::<R>();
        spectral_clusters(&polar_decompose(phi, tol.rank).unwrap(), &tol).unwrap()
    }

    #[test]
    fn cluster_examples() {
        let even = clusters_of(&diag_exact(&[2], &[q(1, 2), q(1, 2)]));
        assert_eq!(even.spectrum(), vec![(q(1, 2), 2)]);
        let split = clusters_of(&diag_exact(&[2], &[q(7, 10), q(3, 10)]));
        assert_eq!(split.spectrum(), vec![(q(7, 10), 1), (q(3, 10), 1)]);
        assert_eq!(split.total(), q(1, 1));
    }

    #[test]
    fn near_degenerate_floats_merge_with_warning() {
        let sh = Arc::new(AlgebraShape::new(vec![3]).unwrap());
        let phi = Functional::diagonal(sh, &[0.5, 0.5 + 1e-13, 0.3]).unwrap();
        let c = clusters_of(&phi);
        let spectrum = c.spectrum();
        assert_eq!(spectrum.len(), 2);
        assert_eq!(spectrum[0].1, 2);
        assert!((spectrum[0].0 - 0.5).abs() < 1e-12);
        assert_eq!(spectrum[1], (0.3, 1));
        assert_eq!(c.warnings.len(), 1);
    }

    #[test]
    fn exact_mode_rejects_cluster_tolerance() {
        let phi = diag_exact(&[1], &[q(1, 1)]);
        let p = polar_decompose(&phi, 0.0).unwrap();
        assert!(spectral_clusters(&p, &Tolerances::float()).is_err());
    }

    #[test]
    fn zero_functional_has_no_clusters() {
        let c = clusters_of(&diag_exact(&[2], &[q(0, 1), q(0, 1)]));
        assert!(c.is_empty());
        assert_eq!(c.support_rank, 0);
        assert!(centralizer_structure(&diag_exact(&[2], &[q(0, 1), q(0, 1)]), &Tolerances::exact()).is_err());
    }

    #[test]
    fn centralizer_examples() {
        let tol = Tolerances::exact();
        let full = centralizer_structure(&diag_exact(&[2], &[q(1, 2), q(1, 2)]), &tol).unwrap();
        assert_eq!(full.block_structure(), vec![2]);
        assert!(!full.is_trivial);
        assert_eq!(full.atoms, 2);

        let diag = centralizer_structure(&diag_exact(&[2], &[q(7, 10), q(3, 10)]), &tol).unwrap();
        assert_eq!(diag.block_structure(), vec![1, 1]);
        assert!(!diag.is_trivial);

        // a = [[0,1],[0,0]]: |a| = diag(0,1), support corner is one-dimensional.
        let sh = Arc::new(AlgebraShape::new(vec![2]).unwrap());
        let nil = Functional::new(BlockMatrix::from_fn(sh, |_, i, j| {
            if i == 0 && j == 1 { Cx::<BigRational>::one() } else { Cx::zero() }
        }));
        let trivial = centralizer_structure(&nil, &tol).unwrap();
        assert!(trivial.is_trivial);
        assert_eq!(trivial.atoms, 1);
    }

    #[test]
    fn equal_weights_in_two_blocks_are_not_trivial() {
        let r = centralizer_structure(&diag_exact(&[1, 1], &[q(1, 2), q(1, 2)]), &Tolerances::exact()).unwrap();
        assert_eq!(r.block_structure(), vec![1, 1]);
        assert!(!r.is_trivial);
    }

    #[test]
    fn mass_examples() {
        let half = clusters_of(&diag_exact(&[2], &[q(1, 2), q(1, 2)]));
        assert_eq!(mass(&half, &[1]).unwrap(), q(1, 2));
        let split = clusters_of(&diag_exact(&[2], &[q(7, 10), q(3, 10)]));
        assert_eq!(mass(&split, &[0, 1]).unwrap(), q(3, 10));
        let quarter = clusters_of(&diag_exact(&[4], &[q(1, 4), q(1, 4), q(1, 4), q(1, 4)]));
        assert_eq!(mass(&quarter, &[2]).unwrap(), q(1, 2));
        assert!(mass(&quarter, &[5]).is_err());
        assert!(mass(&quarter, &[1, 1]).is_err());
    }
}
