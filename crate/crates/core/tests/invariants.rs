mod common;

use std::sync::Arc;

use common::{exact_functional, q, BruteForce};
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use predual::daugavet::{atom_bound, operator_norm};
use predual::generate::rng;
use predual::girth::{build_girth_polyline_with_cap, grid_perturbation};
use predual::splitter::instance_of;
use predual::{
    approx_split, construct_psi, decide_exact, decompose_functional, id_plus_t_norm, verify_polyline, AlgebraShape,
    BlockMatrix, Functional, RankOneOp, SplitInstance, Tolerances, WeightedL1, WorkCap,
};
use proptest::prelude::*;
use rand::Rng;

type Q = BigRational;

fn clusters_strategy() -> impl Strategy<Value = Vec<(Q, usize)>> {
    prop::collection::btree_map((1i64..=24, 1i64..=8), 1usize..=3, 1..=5).prop_map(|m| {
        let mut by_value: Vec<(Q, usize)> = Vec::new();
        for ((n, d), mult) in m {
            let v = q(n, d);
            match by_value.iter_mut().find(|(x, _)| *x == v) {
                Some(entry) => entry.1 += mult,
                None => by_value.push((v, mult)),
            }
        }
        by_value.sort_by(|a, b| b.0.cmp(&a.0));
        by_value
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solution_segment_has_full_length(clusters in clusters_strategy(), seed in 0u64..1000) {
        let oracle = BruteForce::new(&clusters);
        prop_assume!(oracle.solvable());
        let mut r = rng(seed);
        let phi = exact_functional(&mut r, &clusters);
        let k = oracle.solutions().remove(0);
        let cert = construct_psi(&phi, &k, &Tolerances::exact()).unwrap();
        let (plus, minus) = cert.endpoints(&phi).unwrap();
        let norm = phi.trace_norm().unwrap();
        // φ is the midpoint of a segment of length 2‖φ‖ on the sphere of radius ‖φ‖
        prop_assert_eq!(plus.sub(&minus).unwrap().trace_norm().unwrap(), &norm + &norm);
        prop_assert_eq!(plus.add(&minus).unwrap(), phi.scale(&q(2, 1)));
        prop_assert_eq!(plus.trace_norm().unwrap(), norm.clone());
        prop_assert_eq!(minus.trace_norm().unwrap(), norm);
    }

    #[test]
    fn defect_bounds_cross_norms(clusters in clusters_strategy(), seed in 0u64..1000) {
        let mut r = rng(seed);
        let phi = exact_functional(&mut r, &clusters);
        let cert = approx_split(&phi, &Tolerances::exact(), WorkCap::default()).unwrap();
        let norm = phi.trace_norm().unwrap();
        prop_assert_eq!(cert.norms.psi.clone(), norm.clone());
        for v in [&cert.norms.plus, &cert.norms.minus] {
            prop_assert!((v - &norm).abs() <= cert.defect);
        }
    }

    #[test]
    fn solvable_summands_give_solvable_whole(a in clusters_strategy(), b in clusters_strategy(), seed in 0u64..1000) {
        let mut r = rng(seed);
        let (pa, pb) = (exact_functional(&mut r, &a), exact_functional(&mut r, &b));
        let blocks: Vec<usize> = pa.shape().blocks().iter().chain(pb.shape().blocks()).copied().collect();
        let shape = AlgebraShape::new(blocks).unwrap();
        let dense = (0..pa.shape().num_blocks())
            .map(|i| pa.matrix().block_matrix(i))
            .chain((0..pb.shape().num_blocks()).map(|i| pb.matrix().block_matrix(i)))
            .collect();
        let phi = Functional::new(BlockMatrix::from_blocks(Arc::new(shape.clone()), dense).unwrap());
        let tol = Tolerances::exact();
        let solvable = |f: &Functional<Q>| decide_exact(&instance_of(f, &tol).unwrap(), WorkCap::default()).unwrap().solvable;
        let parts: Vec<bool> = decompose_functional(&phi, &shape)
            .unwrap()
            .iter()
            .filter(|f| !f.is_zero())
            .map(solvable)
            .collect();
        if parts.iter().all(|&s| s) {
            prop_assert!(solvable(&phi));
        }
    }

    #[test]
    fn daugavet_defect_is_bounded(
        g in prop::collection::vec((-9i64..=9, 1i64..=5), 1..12),
        h in prop::collection::vec((-9i64..=9, 1i64..=5), 1..12),
        raw_w in prop::collection::vec(1i64..=9, 1..12),
    ) {
        let n = g.len().min(h.len()).min(raw_w.len());
        let total: i64 = raw_w[..n].iter().sum();
        let w: Vec<Q> = raw_w[..n].iter().map(|&x| q(x, total)).collect();
        let space = WeightedL1::new(w).unwrap();
        let t = RankOneOp::new(
            g[..n].iter().map(|&(a, b)| q(a, b)).collect(),
            h[..n].iter().map(|&(a, b)| q(a, b)).collect(),
        )
        .unwrap();
        let defect = q(1, 1) + operator_norm(&space, &t).unwrap() - id_plus_t_norm(&space, &t).unwrap();
        prop_assert!(!defect.is_negative());
        prop_assert!(defect <= atom_bound(&space, &t).unwrap());
    }
}

#[test]
fn solvable_whole_with_unsolvable_summands() {
    // two rank-one summands of equal weight: neither splits alone, the sum does
    let shape = AlgebraShape::new(vec![1, 1]).unwrap();
    let phi = Functional::diagonal(Arc::new(shape.clone()), &[q(1, 2), q(1, 2)]).unwrap();
    let tol = Tolerances::exact();
    for part in decompose_functional(&phi, &shape).unwrap() {
        let d = decide_exact(&instance_of(&part, &tol).unwrap(), WorkCap::default()).unwrap();
        assert!(!d.solvable);
    }
    let d = decide_exact(&instance_of(&phi, &tol).unwrap(), WorkCap::default()).unwrap();
    assert!(d.solvable);
}

#[test]
fn spectral_instances_survive_unitary_mixing() {
    let clusters = vec![(q(1, 2), 1), (q(3, 10), 1), (q(1, 5), 1)];
    let mut r = rng(11);
    for _ in 0..10 {
        let phi = exact_functional(&mut r, &clusters);
        let inst = instance_of(&phi, &Tolerances::exact()).unwrap();
        assert_eq!(inst, SplitInstance::new(clusters.clone()).unwrap());
        let d = decide_exact(&inst, WorkCap::default()).unwrap();
        assert_eq!(d.selection, vec![0, 1, 1]);
    }
}

#[test]
fn grid_perturbation_yields_girth_polylines() {
    let n = 1 << 10;
    let pitch = 1.0 / n as f64;
    let mut r = rng(5);
    for parts in [2usize, 4, 8] {
        let raw: Vec<f64> = (0..n).map(|_| r.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let entries: Vec<Complex<f64>> = raw
            .iter()
            .map(|x| Complex::from_polar(x / total, r.random_range(0.0..std::f64::consts::TAU)))
            .collect();
        let shape = Arc::new(AlgebraShape::diffuse(n).unwrap());
        let phi = Functional::new(BlockMatrix::from_diagonal(shape, &entries).unwrap());
        let (moved, change) = grid_perturbation(&phi, pitch, parts).unwrap();
        assert!(change <= pitch, "change {change} exceeds pitch");
        let tol = Tolerances::float();
        let p = build_girth_polyline_with_cap(&moved, parts, &tol, WorkCap::default()).unwrap();
        let check = verify_polyline(&p);
        assert!(check.max_violation() <= 1e-9, "{check:?}");
        assert_eq!(check.pairs_checked, (parts + 1) * parts / 2);
    }
}

#[test]
fn uniform_defects_alternate() {
    let tol = Tolerances::exact();
    for n in 1..=40usize {
        let shape = Arc::new(AlgebraShape::diffuse(n).unwrap());
        let phi = Functional::diagonal(shape, &vec![q(1, n as i64); n]).unwrap();
        let cert = approx_split(&phi, &tol, WorkCap::default()).unwrap();
        let expected = if n % 2 == 0 { Q::zero() } else { q(1, n as i64) };
        assert_eq!(cert.defect, expected);
    }
}
