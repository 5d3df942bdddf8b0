//! Seeded random instance generators.

use nalgebra::DMatrix;
use num_complex::Complex;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::daugavet::FunctionSpec;
use crate::error::{Error, Result};
use crate::io::{
    render_entry, AlgebraDoc, DiffuseModel, FunctionalDoc, InstanceDocument, Mode, Origin, RankOneDoc,
    SpectralBlockDoc, SCHEMA_VERSION,
};
use crate::real::{Cx, Real};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<Complex<f64>> {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Haar-distributed unitary from the QR factorization of a Gaussian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<Complex<f64>> {
    let qr = gaussian_matrix(rng, d, d).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for j in 0..d {
        let phase = r[(j, j)] / Complex::new(r[(j, j)].norm(), 0.0);
        for i in 0..d {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// `a = u·p` with `p` a random density matrix of rank `rank` and `u` a
/// random unitary, so `‖φ‖ = tr p = 1`.
pub fn random_density_block(rng: &mut ChaCha8Rng, d: usize, rank: usize) -> DMatrix<Complex<f64>> {
    let g = gaussian_matrix(rng, d, rank.clamp(1, d));
    let p = &g * g.adjoint();
    let trace: f64 = (0..d).map(|i| p[(i, i)].re).sum();
    let p = p.map(|z| z / trace);
    random_unitary(rng, d) * p
}

/// Float functional on one `dim × dim` block with trace norm 1.
pub fn density(dim: usize, seed: u64) -> Result<InstanceDocument> {
    if dim == 0 {
        return Err(Error::input("dim must be at least 1"));
    }
    let mut r = rng(seed);
    let a = random_density_block(&mut r, dim, dim);
    let rows = (0..dim)
        .map(|i| (0..dim).map(|j| render_entry::<f64>(&a[(i, j)])).collect())
        .collect();
    Ok(InstanceDocument {
        schema_version: SCHEMA_VERSION,
        algebra: AlgebraDoc {
            blocks: vec![dim],
            diffuse_model: None,
        },
        mode: Mode::Float,
        functional: Some(FunctionalDoc::Matrix { blocks: vec![rows] }),
        rank_one: None,
        tolerances: None,
        origin: Some(Origin {
            kind: "density".into(),
            seed,
        }),
    })
}

/// `(3/5, 4/5)`, `(5/13, 12/13)`, `(8/17, 15/17)`: rational points on the circle.
const PYTHAGOREAN: [(i64, i64, i64); 3] = [(3, 4, 5), (5, 12, 13), (8, 15, 17)];

/// Gaussian-rational unitary: a phase permutation times a Pythagorean
/// rotation in a random coordinate plane.
pub fn rational_unitary(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<Cx<BigRational>> {
    let zero = || Complex::new(BigRational::from_integer(0.into()), BigRational::from_integer(0.into()));
    let mut perm: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let mut u = DMatrix::from_fn(d, d, |_, _| zero());
    for (j, &i) in perm.iter().enumerate() {
        let one = BigRational::from_integer(1.into());
        let nil = BigRational::from_integer(0.into());
        u[(i, j)] = match rng.random_range(0..4) {
            0 => Complex::new(one, nil),
            1 => Complex::new(nil, one),
            2 => Complex::new(-one, nil),
            _ => Complex::new(nil, -one),
        };
    }
    if d >= 2 {
        let (a, b, c) = PYTHAGOREAN[rng.random_range(0..PYTHAGOREAN.len())];
        let p = rng.random_range(0..d);
        let mut q = rng.random_range(0..d - 1);
        if q >= p {
            q += 1;
        }
        let cos = BigRational::new(a.into(), c.into());
        let sin = BigRational::new(b.into(), c.into());
        let mut rot = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex::new(BigRational::from_integer(1.into()), BigRational::from_integer(0.into()))
            } else {
                zero()
            }
        });
        let nil = BigRational::from_integer(0.into());
        rot[(p, p)] = Complex::new(cos.clone(), nil.clone());
        rot[(q, q)] = Complex::new(cos, nil.clone());
        rot[(p, q)] = Complex::new(-sin.clone(), nil.clone());
        rot[(q, p)] = Complex::new(sin, nil);
        u = crate::matrix::dense_mul(&rot, &u);
    }
    u
}

/// Exact spectral instance on one block of size `atoms`, weights drawn from
/// `{grid, 2·grid, …, 1}`.
pub fn spectral(atoms: usize, grid: &BigRational, seed: u64) -> Result<InstanceDocument> {
    if atoms == 0 {
        return Err(Error::input("atoms must be at least 1"));
    }
    let zero = BigRational::from_integer(0.into());
    let one = BigRational::from_integer(1.into());
    if *grid <= zero || *grid > one {
        return Err(Error::input("grid must lie in (0, 1]"));
    }
    let steps = (one / grid).floor().to_integer();
    let steps: i64 = steps
        .try_into()
        .map_err(|_| Error::input("grid is too fine"))?;
    let mut r = rng(seed);
    let weights = (0..atoms)
        .map(|_| (grid * BigRational::from_integer(r.random_range(1..=steps).into())).render())
        .collect();
    let v = rational_unitary(&mut r, atoms);
    let rows = (0..atoms)
        .map(|i| (0..atoms).map(|j| render_entry(&v[(i, j)])).collect())
        .collect();
    Ok(InstanceDocument {
        schema_version: SCHEMA_VERSION,
        algebra: AlgebraDoc {
            blocks: vec![atoms],
            diffuse_model: None,
        },
        mode: Mode::Exact,
        functional: Some(FunctionalDoc::Spectral {
            blocks: vec![SpectralBlockDoc {
                weights,
                positions: None,
                v: Some(rows),
            }],
        }),
        rank_one: None,
        tolerances: None,
        origin: Some(Origin {
            kind: "spectral".into(),
            seed,
        }),
    })
}

/// Uniform weighted `ℓ1` of resolution `n` with `g`, `h` sampled at midpoints.
pub fn rank_one(g: &FunctionSpec, h: &FunctionSpec, n: usize, seed: u64) -> Result<InstanceDocument> {
    if n == 0 {
        return Err(Error::input("resolution must be at least 1"));
    }
    let exact = !matches!(g, FunctionSpec::Sine { .. }) && !matches!(h, FunctionSpec::Sine { .. });
    let render = |spec: &FunctionSpec| -> Result<Vec<String>> {
        Ok(if exact {
            spec.sample::<BigRational>(n)?.iter().map(Real::render).collect()
        } else {
            spec.sample::<f64>(n)?.iter().map(Real::render).collect()
        })
    };
    Ok(InstanceDocument {
        schema_version: SCHEMA_VERSION,
        algebra: AlgebraDoc {
            blocks: vec![1; n],
            diffuse_model: Some(DiffuseModel { resolution: n }),
        },
        mode: if exact { Mode::Exact } else { Mode::Float },
        functional: None,
        rank_one: Some(RankOneDoc {
            weights: None,
            g: render(g)?,
            h: render(h)?,
        }),
        tolerances: None,
        origin: Some(Origin {
            kind: "rank-one".into(),
            seed,
        }),
    })
}
