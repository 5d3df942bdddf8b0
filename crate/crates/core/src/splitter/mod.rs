//! Solving `‖φ ± ψ‖ = ‖φ‖ = ‖ψ‖`.
//!
//! Solutions come from pairs of orthogonal projections `e₊ + e₋ = s(|φ|)`
//! in the centralizer of `|φ|` carrying half of its mass each; then
//! `ψ = φe₊ − φe₋`. Each selection `k` (dimensions taken from each
//! eigenvalue cluster) stands for a whole manifold of solutions, one per
//! choice of `k_i`-dimensional subspace inside each eigenspace.
//!
//! [`approx_split`] minimizes the defect over this family only; a `ψ`
//! outside the centralizer family is never considered.

pub mod search;

use num_rational::BigRational;

use crate::centralizer::{spectral_clusters, SpectralClusters};
use crate::error::{Error, Result};
use crate::functional::{act, polar_decompose, Functional, PolarForm, Side, Tolerances};
use crate::matrix::BlockMatrix;
use crate::real::Real;

pub use search::WorkCap;

/// Cluster data `(λ_i, m_i)` of `|φ|` on its support.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitInstance<R: Real> {
    clusters: Vec<(R, usize)>,
}

impl<R: Real> SplitInstance<R> {
    pub fn new(clusters: Vec<(R, usize)>) -> Result<Self> {
        if clusters.is_empty() {
            return Err(Error::input("split instance has no clusters"));
        }
        for (i, (l, m)) in clusters.iter().enumerate() {
            if !l.is_positive() {
                return Err(Error::input(format!("cluster {i} has non-positive value {}", l.render())));
            }
            if *m == 0 {
                return Err(Error::input(format!("cluster {i} has multiplicity 0")));
            }
            if i > 0 && *l >= clusters[i - 1].0 {
                return Err(Error::input("cluster values must be strictly decreasing"));
            }
        }
        Ok(SplitInstance { clusters })
    }

    pub fn from_clusters(clusters: &SpectralClusters<R>) -> Result<Self> {
        Self::new(clusters.spectrum())
    }

    pub fn clusters(&self) -> &[(R, usize)] {
        &self.clusters
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.1).collect()
    }

    pub fn total(&self) -> R {
        self.clusters
            .iter()
            .fold(R::zero(), |acc, (l, m)| acc + l.clone() * R::from_usize(*m))
    }

    pub fn mass(&self, k: &[usize]) -> Result<R> {
        if k.len() != self.clusters.len() {
            return Err(Error::input(format!(
                "selection has {} entries for {} clusters",
                k.len(),
                self.clusters.len()
            )));
        }
        let mut acc = R::zero();
        for (i, ((l, m), &ki)) in self.clusters.iter().zip(k).enumerate() {
            if ki > *m {
                return Err(Error::input(format!("selection entry {i} is {ki}, multiplicity is {m}")));
            }
            acc += l.clone() * R::from_usize(ki);
        }
        Ok(acc)
    }

    /// `|2·mass(k) − S|`.
    pub fn defect(&self, k: &[usize]) -> Result<R> {
        let m = self.mass(k)?;
        Ok((m.clone() + m - self.total()).abs())
    }

    /// Selection minimising the defect, with the crate's tie-breaking.
    pub fn closest(&self, cap: WorkCap) -> Result<Vec<usize>> {
        R::closest_split(&self.clusters, cap)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decision<R: Real> {
    pub solvable: bool,
    /// Optimal selection; a witness when `solvable`.
    pub selection: Vec<usize>,
    pub defect: R,
}

impl<R: Real> Decision<R> {
    pub fn witness(&self) -> Option<&[usize]> {
        self.solvable.then_some(self.selection.as_slice())
    }
}

/// Exact decision: solvable iff some selection carries exactly half the mass.
pub fn decide_exact(inst: &SplitInstance<BigRational>, cap: WorkCap) -> Result<Decision<BigRational>> {
    decide(inst, 0.0, cap)
}

/// Solvable iff the optimal defect is `≤ delta` (exactly zero in exact mode).
pub fn decide<R: Real>(inst: &SplitInstance<R>, delta: f64, cap: WorkCap) -> Result<Decision<R>> {
    let selection = inst.closest(cap)?;
    let defect = inst.defect(&selection)?;
    let solvable = if R::EXACT {
        defect.is_zero()
    } else {
        defect.to_f64() <= delta
    };
    Ok(Decision {
        solvable,
        selection,
        defect,
    })
}

/// Every selection with `Σ λ_i k_i = S/2`, lexicographically, at most `cap`.
pub fn enumerate_exact_solutions(inst: &SplitInstance<BigRational>, cap: usize) -> Result<Vec<Vec<usize>>> {
    if cap < 1 {
        return Err(Error::input("enumeration cap must be at least 1"));
    }
    search::exact_solutions(inst.clusters(), cap, WorkCap::from_env())
}

#[derive(Clone, Debug, PartialEq)]
pub struct AchievedNorms<R: Real> {
    pub psi: R,
    pub plus: R,
    pub minus: R,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitCertificate<R: Real> {
    pub selection: Vec<usize>,
    pub e_plus: BlockMatrix<R>,
    pub e_minus: BlockMatrix<R>,
    pub psi: Functional<R>,
    pub norms: AchievedNorms<R>,
    pub defect: R,
    pub mass: R,
    pub total: R,
}

impl<R: Real> SplitCertificate<R> {
    /// `φ + ψ` and `φ − ψ`, whose midpoint is `φ`.
    pub fn endpoints(&self, phi: &Functional<R>) -> Result<(Functional<R>, Functional<R>)> {
        Ok((phi.add(&self.psi)?, phi.sub(&self.psi)?))
    }
}

struct Prepared<R: Real> {
    polar: PolarForm<R>,
    clusters: SpectralClusters<R>,
}

fn prepare<R: Real>(phi: &Functional<R>, tol: &Tolerances) -> Result<Prepared<R>> {
    let polar = polar_decompose(phi, tol.rank)?;
    let clusters = spectral_clusters(&polar, tol)?;
    Ok(Prepared { polar, clusters })
}

/// `ψ = v(e₊ − e₋)|φ|` for the canonical projections of selection `k`.
pub fn construct_psi<R: Real>(phi: &Functional<R>, k: &[usize], tol: &Tolerances) -> Result<SplitCertificate<R>> {
    let prepared = prepare(phi, tol)?;
    certificate_from(phi, &prepared, k)
}

fn certificate_from<R: Real>(phi: &Functional<R>, p: &Prepared<R>, k: &[usize]) -> Result<SplitCertificate<R>> {
    let like = &p.polar.positive;
    let e_plus = p.clusters.projection(like, k)?;
    let all: Vec<usize> = p.clusters.clusters.iter().map(|c| c.multiplicity()).collect();
    let e_minus = &p.clusters.projection(like, &all)? - &e_plus;
    let u = &e_plus - &e_minus;
    let psi = Functional::new(&(&p.polar.v * &u) * &p.polar.positive);
    let mass = crate::centralizer::mass(&p.clusters, k)?;
    let total = p.clusters.total();
    let defect = (mass.clone() + mass.clone() - total.clone()).abs();
    let norms = AchievedNorms {
        psi: psi.trace_norm()?,
        plus: phi.add(&psi)?.trace_norm()?,
        minus: phi.sub(&psi)?.trace_norm()?,
    };
    Ok(SplitCertificate {
        selection: k.to_vec(),
        e_plus,
        e_minus,
        psi,
        norms,
        defect,
        mass,
        total,
    })
}

/// Certificate of minimal defect over all selections.
pub fn approx_split<R: Real>(phi: &Functional<R>, tol: &Tolerances, cap: WorkCap) -> Result<SplitCertificate<R>> {
    if phi.is_zero() {
        return Err(Error::input("cannot split the zero functional"));
    }
    let prepared = prepare(phi, tol)?;
    if prepared.clusters.is_empty() {
        return Err(Error::input("functional vanishes within the rank tolerance"));
    }
    let inst = SplitInstance::from_clusters(&prepared.clusters)?;
    let k = inst.closest(cap)?;
    certificate_from(phi, &prepared, &k)
}

/// Spectral instance of a nonzero functional.
pub fn instance_of<R: Real>(phi: &Functional<R>, tol: &Tolerances) -> Result<SplitInstance<R>> {
    if phi.is_zero() {
        return Err(Error::input("the zero functional has no spectrum"));
    }
    let prepared = prepare(phi, tol)?;
    SplitInstance::from_clusters(&prepared.clusters)
}

/// Violations found by recomputing a certificate from scratch.
#[derive(Clone, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CertificateCheck {
    pub projection: f64,
    pub orthogonality: f64,
    pub commutation: f64,
    pub support: f64,
    pub reconstruction: f64,
    pub norm_psi: f64,
    pub norm_plus: f64,
    pub norm_minus: f64,
    pub reported: f64,
    pub max_violation: f64,
}

/// Recomputes every certificate invariant; violations are reported, never
/// raised. Structural failures (e.g. a shape mismatch) count as infinite.
pub fn verify_certificate<R: Real>(phi: &Functional<R>, cert: &SplitCertificate<R>, tol: &Tolerances) -> CertificateCheck {
    check(phi, cert, tol).unwrap_or(CertificateCheck {
        projection: f64::INFINITY,
        orthogonality: f64::INFINITY,
        commutation: f64::INFINITY,
        support: f64::INFINITY,
        reconstruction: f64::INFINITY,
        norm_psi: f64::INFINITY,
        norm_plus: f64::INFINITY,
        norm_minus: f64::INFINITY,
        reported: f64::INFINITY,
        max_violation: f64::INFINITY,
    })
}

fn gap<R: Real>(a: &R, b: &R) -> f64 {
    let d = (a.clone() - b.clone()).abs();
    if d.is_zero() {
        0.0
    } else {
        d.to_f64().max(f64::MIN_POSITIVE)
    }
}

fn check<R: Real>(phi: &Functional<R>, cert: &SplitCertificate<R>, tol: &Tolerances) -> Result<CertificateCheck> {
    let (ep, em) = (&cert.e_plus, &cert.e_minus);
    phi.matrix().same_shape(ep)?;
    phi.matrix().same_shape(em)?;
    phi.matrix().same_shape(cert.psi.matrix())?;
    let polar = polar_decompose(phi, tol.rank)?;
    let abs = &polar.positive;

    let projection = [ep, em]
        .iter()
        .map(|e| (&(*e * *e)).distance(e).max(e.adjoint().distance(e)))
        .fold(0.0, f64::max);
    let orthogonality = (ep * em).distance(&BlockMatrix::zeros(ep.shared_shape().clone()));
    let commutation = [ep, em]
        .iter()
        .map(|e| (*e * abs).distance(&(abs * *e)))
        .fold(0.0, f64::max);
    let support = (ep + em).distance(&polar.support);
    let expected_psi = act(ep, phi, Side::Right)?.sub(&act(em, phi, Side::Right)?)?;
    let reconstruction = cert.psi.distance(&expected_psi);

    let norm = phi.trace_norm()?;
    let mass = abs.pairing(ep).re;
    let total = abs.trace().re;
    let two = R::from_usize(2);
    let norm_psi = gap(&cert.psi.trace_norm()?, &norm);
    let norm_plus = gap(&phi.add(&cert.psi)?.trace_norm()?, &(two.clone() * mass.clone()));
    let norm_minus = gap(&phi.sub(&cert.psi)?.trace_norm()?, &(two.clone() * (total.clone() - mass.clone())));
    let defect = (two * mass.clone() - total.clone()).abs();
    let reported = [
        gap(&cert.defect, &defect),
        gap(&cert.mass, &mass),
        gap(&cert.total, &total),
        gap(&cert.norms.psi, &norm),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let max_violation = [
        projection,
        orthogonality,
        commutation,
        support,
        reconstruction,
        norm_psi,
        norm_plus,
        norm_minus,
        reported,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(CertificateCheck {
        projection,
        orthogonality,
        commutation,
        support,
        reconstruction,
        norm_psi,
        norm_plus,
        norm_minus,
        reported,
        max_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraShape;
    use crate::real::{q, Cx};
    use num_traits::{One, Zero};
    use std::sync::Arc;

    fn inst(c: &[(i64, i64, usize)]) -> SplitInstance<BigRational> {
        SplitInstance::new(c.iter().map(|&(n, d, m)| (q(n, d), m)).collect()).unwrap()
    }

    fn diag(blocks: &[usize], w: &[BigRational]) -> Functional<BigRational> {
        Functional::diagonal(Arc::new(AlgebraShape::new(blocks.to_vec()).unwrap()), w).unwrap()
    }

    #[test]
    fn decide_examples() {
        let cap = WorkCap::default();
        let d = decide_exact(&inst(&[(1, 2, 2)]), cap).unwrap();
        assert_eq!(d.witness(), Some(&[1usize][..]));
        assert!(!decide_exact(&inst(&[(7, 10, 1), (3, 10, 1)]), cap).unwrap().solvable);
        assert_eq!(decide_exact(&inst(&[(1, 4, 4)]), cap).unwrap().witness(), Some(&[2usize][..]));
        let w = decide_exact(&inst(&[(1, 2, 1), (3, 10, 1), (1, 5, 1)]), cap).unwrap();
        assert!(w.solvable);
        let witness = w.witness().unwrap().to_vec();
        assert!(witness == vec![1, 0, 0] || witness == vec![0, 1, 1]);
    }

    #[test]
    fn rank_one_is_unsolvable() {
        assert!(!decide_exact(&inst(&[(3, 1, 1)]), WorkCap::default()).unwrap().solvable);
    }

    #[test]
    fn invalid_instances() {
        assert!(SplitInstance::<BigRational>::new(vec![]).is_err());
        assert!(SplitInstance::new(vec![(q(1, 2), 1), (q(1, 2), 1)]).is_err());
        assert!(SplitInstance::new(vec![(q(-1, 2), 1)]).is_err());
        assert!(SplitInstance::new(vec![(q(1, 2), 0)]).is_err());
        assert!(enumerate_exact_solutions(&inst(&[(1, 2, 2)]), 0).is_err());
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(enumerate_exact_solutions(&inst(&[(1, 2, 2)]), 10).unwrap(), vec![vec![1]]);
        assert!(enumerate_exact_solutions(&inst(&[(7, 10, 1), (3, 10, 1)]), 10).unwrap().is_empty());
        assert_eq!(
            enumerate_exact_solutions(&inst(&[(1, 4, 2), (1, 8, 4)]), 10).unwrap(),
            vec![vec![0, 4], vec![1, 2], vec![2, 0]]
        );
    }

    #[test]
    fn construct_psi_examples() {
        let tol = Tolerances::exact();
        let phi = diag(&[2], &[q(1, 2), q(1, 2)]);
        let cert = construct_psi(&phi, &[1], &tol).unwrap();
        assert_eq!(cert.psi, diag(&[2], &[q(1, 2), q(-1, 2)]));
        assert_eq!(cert.norms, AchievedNorms { psi: q(1, 1), plus: q(1, 1), minus: q(1, 1) });
        assert_eq!(verify_certificate(&phi, &cert, &tol).max_violation, 0.0);

        let sh = Arc::new(AlgebraShape::new(vec![2]).unwrap());
        let half = Cx::new(q(1, 2), q(0, 1));
        let swap = Functional::new(BlockMatrix::from_fn(sh.clone(), |_, i, j| {
            if i != j { half.clone() } else { Cx::zero() }
        }));
        let cert = construct_psi(&swap, &[1], &tol).unwrap();
        let expected = BlockMatrix::from_fn(sh, |_, i, j| match (i, j) {
            (0, 1) => -half.clone(),
            (1, 0) => half.clone(),
            _ => Cx::zero(),
        });
        assert_eq!(cert.psi.matrix(), &expected);
        assert_eq!(cert.norms.plus, q(1, 1));
        assert_eq!(cert.norms.minus, q(1, 1));
        let (x1, x2) = cert.endpoints(&swap).unwrap();
        assert_eq!(x1.matrix().get(0, 1, 0), &Cx::<BigRational>::one());
        assert_eq!(x2.matrix().get(0, 0, 1), &Cx::<BigRational>::one());

        let uneven = diag(&[2], &[q(7, 10), q(3, 10)]);
        let cert = construct_psi(&uneven, &[0, 1], &tol).unwrap();
        assert_eq!(cert.norms, AchievedNorms { psi: q(1, 1), plus: q(3, 5), minus: q(7, 5) });
        assert_eq!(cert.defect, q(2, 5));
        assert!(construct_psi(&uneven, &[0, 2], &tol).is_err());
    }

    #[test]
    fn approx_examples() {
        let tol = Tolerances::exact();
        let cap = WorkCap::default();
        let cert = approx_split(&diag(&[2], &[q(7, 10), q(3, 10)]), &tol, cap).unwrap();
        assert_eq!(cert.defect, q(2, 5));
        assert_eq!((cert.norms.plus.clone(), cert.norms.minus.clone()), (q(3, 5), q(7, 5)));
        for n in [4usize, 5, 7, 8] {
            let phi = diag(&vec![1; n], &vec![q(1, n as i64); n]);
            let cert = approx_split(&phi, &tol, cap).unwrap();
            let expected = if n % 2 == 0 { q(0, 1) } else { q(1, n as i64) };
            assert_eq!(cert.defect, expected);
        }
        assert!(approx_split(&diag(&[2], &[q(0, 1), q(0, 1)]), &tol, cap).is_err());
    }

    #[test]
    fn tampered_certificate_is_flagged() {
        let tol = Tolerances::exact();
        let phi = diag(&[2], &[q(7, 10), q(3, 10)]);
        let mut cert = construct_psi(&phi, &[1, 0], &tol).unwrap();
        assert_eq!(verify_certificate(&phi, &cert, &tol).max_violation, 0.0);
        let h = Cx::new(q(1, 2), q(0, 1));
        cert.e_plus = BlockMatrix::from_fn(phi.shared_shape().clone(), |_, _, _| h.clone());
        let report = verify_certificate(&phi, &cert, &tol);
        assert!(report.commutation > 0.0);
        assert!(report.max_violation > 0.0);
    }

    #[test]
    fn float_decision_uses_delta() {
        let i = SplitInstance::new(vec![(0.5 + 1e-12, 1), (0.5 - 1e-12, 1)]).unwrap();
        assert!(decide(&i, 1e-9, WorkCap::default()).unwrap().solvable);
        assert!(!decide(&i, 1e-13, WorkCap::default()).unwrap().solvable);
    }
}
