//! Girth polylines: samples of a path `t ↦ φ_t`, `t ∈ [0, 2]`, from `φ` to
//! `−φ` with `‖φ_s − φ_t‖ = ‖φ‖·|s − t|`.
//!
//! `φ_t = v(s(|φ|) − 2e_t)|φ|` where `e_t` is an increasing family of
//! projections in the centralizer of `|φ|` with `|φ|(e_t) = t‖φ‖/2`. At
//! sample times the family is a chain of cluster selections.

use std::io::Write;

use num_complex::Complex;
use serde::Serialize;

use crate::centralizer::spectral_clusters;
use crate::error::{Error, Result};
use crate::functional::{polar_decompose, Functional, Tolerances};
use crate::real::Real;
use crate::splitter::WorkCap;

#[derive(Clone, Debug, PartialEq)]
pub struct GirthPolyline<R: Real> {
    pub times: Vec<R>,
    pub samples: Vec<Functional<R>>,
    pub base_norm: R,
    /// Cluster selection behind each sample.
    pub selections: Vec<Vec<usize>>,
}

impl<R: Real> GirthPolyline<R> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Rows `(t_j, φ_{t_j} as JSON, ‖φ_{t_j} − φ₀‖)`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io_err = |e: csv::Error| Error::Input(format!("csv output failed: {e}"));
        w.write_record(["t", "functional", "distance_from_start"]).map_err(io_err)?;
        for (t, sample) in self.times.iter().zip(&self.samples) {
            let dist = sample.sub(&self.samples[0])?.trace_norm()?;
            w.write_record([
                t.render(),
                crate::io::functional_json(sample)?,
                dist.render(),
            ])
            .map_err(io_err)?;
        }
        w.flush().map_err(|e| Error::Input(format!("csv output failed: {e}")))?;
        Ok(())
    }
}

/// Searches a chain `0 = k⁰ ≤ k¹ ≤ … ≤ k^N = m` whose masses step by `S/N`.
/// Increments are tried largest eigenvalue first, with backtracking.
pub fn find_chain<R: Real>(
    clusters: &[(R, usize)],
    parts: usize,
    tol: f64,
    cap: WorkCap,
) -> Result<Option<Vec<Vec<usize>>>> {
    if parts == 0 {
        return Err(Error::input("sample count must be at least 1"));
    }
    let total = clusters
        .iter()
        .fold(R::zero(), |acc, (l, m)| acc + l.clone() * R::from_usize(*m));
    let mut search = ChainSearch {
        values: clusters.iter().map(|c| c.0.clone()).collect(),
        mults: clusters.iter().map(|c| c.1).collect(),
        target: total.clone() / R::from_usize(parts),
        parts,
        tol: tol * total.to_f64().max(1.0),
        work: 0,
        cap,
        k: vec![0; clusters.len()],
        chain: vec![vec![0; clusters.len()]],
    };
    Ok(search.step(1)?.then_some(search.chain))
}

struct ChainSearch<R: Real> {
    values: Vec<R>,
    mults: Vec<usize>,
    target: R,
    parts: usize,
    tol: f64,
    work: u128,
    cap: WorkCap,
    k: Vec<usize>,
    chain: Vec<Vec<usize>>,
}

impl<R: Real> ChainSearch<R> {
    fn step(&mut self, j: usize) -> Result<bool> {
        if j == self.parts {
            let rest = self
                .values
                .iter()
                .zip(self.mults.iter().zip(&self.k))
                .fold(R::zero(), |acc, (l, (m, k))| acc + l.clone() * R::from_usize(m - k));
            if !rest.within(&self.target, self.tol) {
                return Ok(false);
            }
            self.chain.push(self.mults.clone());
            return Ok(true);
        }
        let mut available = vec![R::zero(); self.values.len() + 1];
        for i in (0..self.values.len()).rev() {
            available[i] = available[i + 1].clone()
                + self.values[i].clone() * R::from_usize(self.mults[i] - self.k[i]);
        }
        let mut d = vec![0; self.values.len()];
        self.increments(j, 0, self.target.clone(), &mut d, &available)
    }

    fn increments(&mut self, j: usize, i: usize, rest: R, d: &mut Vec<usize>, available: &[R]) -> Result<bool> {
        self.work += 1;
        self.cap.check(self.work)?;
        if rest.within(&R::zero(), self.tol) {
            for (k, di) in self.k.iter_mut().zip(d.iter()) {
                *k += di;
            }
            self.chain.push(self.k.clone());
            if self.step(j + 1)? {
                return Ok(true);
            }
            self.chain.pop();
            for (k, di) in self.k.iter_mut().zip(d.iter()) {
                *k -= di;
            }
            return Ok(false);
        }
        if i == self.values.len() || !rest.le_within(&available[i], self.tol) {
            return Ok(false);
        }
        let lambda = self.values[i].clone();
        let remaining = self.mults[i] - self.k[i];
        let estimate = (rest.to_f64() / lambda.to_f64()).floor().max(0.0);
        let mut top = if estimate >= remaining as f64 { remaining } else { estimate as usize };
        while top < remaining && (lambda.clone() * R::from_usize(top + 1)).le_within(&rest, self.tol) {
            top += 1;
        }
        while top > 0 && !(lambda.clone() * R::from_usize(top)).le_within(&rest, self.tol) {
            top -= 1;
        }
        for di in (0..=top).rev() {
            d[i] = di;
            let next = rest.clone() - lambda.clone() * R::from_usize(di);
            if self.increments(j, i + 1, next, d, available)? {
                return Ok(true);
            }
        }
        d[i] = 0;
        Ok(false)
    }
}

/// Samples `φ_{2j/N}`, `j = 0..=N`.
pub fn build_girth_polyline<R: Real>(phi: &Functional<R>, parts: usize, tol: &Tolerances) -> Result<GirthPolyline<R>> {
    build_girth_polyline_with_cap(phi, parts, tol, WorkCap::from_env())
}

pub fn build_girth_polyline_with_cap<R: Real>(
    phi: &Functional<R>,
    parts: usize,
    tol: &Tolerances,
    cap: WorkCap,
) -> Result<GirthPolyline<R>> {
    if parts == 0 {
        return Err(Error::input("sample count must be at least 1"));
    }
    if phi.is_zero() {
        return Err(Error::input("girth curve of the zero functional is degenerate"));
    }
    let polar = polar_decompose(phi, tol.rank)?;
    let clusters = spectral_clusters(&polar, tol)?;
    let chain = find_chain(&clusters.spectrum(), parts, tol.equality, cap)?.ok_or_else(|| {
        Error::NoChain(format!(
            "no chain of selections splits the spectrum into {parts} steps of equal mass"
        ))
    })?;
    let support = &polar.support;
    let two = Complex::new(R::from_usize(2), R::zero());
    let mut samples = Vec::with_capacity(parts + 1);
    for k in &chain {
        let e = clusters.projection(support, k)?;
        let u = support - &e.scale(&two);
        samples.push(Functional::new(&(&polar.v * &u) * &polar.positive));
    }
    let times = (0..=parts)
        .map(|j| R::from_usize(2 * j) / R::from_usize(parts))
        .collect();
    Ok(GirthPolyline {
        times,
        samples,
        base_norm: phi.trace_norm()?,
        selections: chain,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolylineCheck {
    pub max_pairwise_violation: f64,
    pub norm_violation: f64,
    pub endpoint_violation: f64,
    pub total_length: String,
    pub length_violation: f64,
    pub times_increasing: bool,
    pub pairs_checked: usize,
}

impl PolylineCheck {
    pub fn max_violation(&self) -> f64 {
        [
            self.max_pairwise_violation,
            self.norm_violation,
            self.endpoint_violation,
            self.length_violation,
        ]
        .into_iter()
        .fold(if self.times_increasing { 0.0 } else { f64::INFINITY }, f64::max)
    }
}

fn gap<R: Real>(a: &R, b: &R) -> f64 {
    let d = (a.clone() - b.clone()).abs();
    if d.is_zero() {
        0.0
    } else {
        d.to_f64().max(f64::MIN_POSITIVE)
    }
}

/// Recomputes every pairwise distance, the sample norms, the endpoint
/// `samples[N] = −samples[0]` and the total length `Σ ‖φ_{j+1} − φ_j‖`.
pub fn verify_polyline<R: Real>(p: &GirthPolyline<R>) -> PolylineCheck {
    let n = p.samples.len();
    let norm_of = |f: Result<Functional<R>>| f.and_then(|f| f.trace_norm()).ok();
    let mut max_pairwise = 0.0f64;
    let mut pairs = 0;
    let mut length = R::zero();
    let mut length_ok = true;
    for i in 0..n {
        for j in i + 1..n {
            pairs += 1;
            let expected = p.base_norm.clone() * (p.times[j].clone() - p.times[i].clone());
            match norm_of(p.samples[j].sub(&p.samples[i])) {
                Some(d) => {
                    max_pairwise = max_pairwise.max(gap(&d, &expected));
                    if j == i + 1 {
                        length += d;
                    }
                }
                None => {
                    max_pairwise = f64::INFINITY;
                    length_ok = false;
                }
            }
        }
    }
    let norm_violation = p
        .samples
        .iter()
        .map(|s| s.trace_norm().map_or(f64::INFINITY, |v| gap(&v, &p.base_norm)))
        .fold(0.0, f64::max);
    let endpoint_violation = match (p.samples.first(), p.samples.last()) {
        (Some(first), Some(last)) => first.neg().distance(last),
        _ => f64::INFINITY,
    };
    let expected_length = p.base_norm.clone()
        * (p.times.last().cloned().unwrap_or_else(R::zero) - p.times.first().cloned().unwrap_or_else(R::zero));
    let times_increasing = p.times.len() == n
        && p.times.windows(2).all(|w| w[0] < w[1])
        && p.times.first().is_some_and(|t| t.is_zero())
        && p.times.last().is_some_and(|t| *t == R::from_usize(2));
    PolylineCheck {
        max_pairwise_violation: max_pairwise,
        norm_violation,
        endpoint_violation,
        length_violation: if length_ok { gap(&length, &expected_length) } else { f64::INFINITY },
        total_length: length.render(),
        times_increasing,
        pairs_checked: pairs,
    }
}

/// Moves a functional on a diagonal algebra with `n` atoms onto the grid of
/// moduli `pitch/n · ℤ`, keeping phases, with total mass divisible by
/// `parts` grid units. The trace-norm change is at most `pitch`.
pub fn grid_perturbation(phi: &Functional<f64>, pitch: f64, parts: usize) -> Result<(Functional<f64>, f64)> {
    let shape = phi.shape();
    if shape.blocks().iter().any(|&d| d != 1) {
        return Err(Error::input("grid perturbation needs a diagonal algebra"));
    }
    let n = shape.num_blocks();
    if parts == 0 || parts > n {
        return Err(Error::input("parts must lie between 1 and the number of atoms"));
    }
    if !(pitch > 0.0) {
        return Err(Error::input("pitch must be positive"));
    }
    let unit = pitch / n as f64;
    let entries: Vec<Complex<f64>> = (0..n).map(|b| *phi.matrix().get(b, 0, 0)).collect();
    let mut units: Vec<i64> = entries.iter().map(|z| (z.norm() / unit).round() as i64).collect();
    let total: i64 = units.iter().sum();
    let excess = total.rem_euclid(parts as i64);
    let shift = if 2 * excess <= parts as i64 { -excess } else { parts as i64 - excess };
    let largest = (0..n).max_by_key(|&i| units[i]).expect("at least one atom");
    if units[largest] + shift < 0 {
        return Err(Error::input("functional too small for the requested grid"));
    }
    units[largest] += shift;
    let grid: Vec<Complex<f64>> = entries
        .iter()
        .zip(&units)
        .map(|(z, &u)| {
            let modulus = u as f64 * unit;
            if z.norm() > 0.0 {
                z * (modulus / z.norm())
            } else {
                Complex::new(modulus, 0.0)
            }
        })
        .collect();
    let moved = Functional::new(crate::matrix::BlockMatrix::from_diagonal(phi.shared_shape().clone(), &grid)?);
    let change = moved.distance(phi);
    Ok((moved, change))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraShape;
    use crate::real::q;
    use num_rational::BigRational;
    use std::sync::Arc;

    fn uniform(n: usize) -> Functional<BigRational> {
        let sh = Arc::new(AlgebraShape::diffuse(n).unwrap());
        Functional::diagonal(sh, &vec![q(1, n as i64); n]).unwrap()
    }

    #[test]
    fn four_atoms_flip_one_per_step() {
        let phi = uniform(4);
        let p = build_girth_polyline(&phi, 4, &Tolerances::exact()).unwrap();
        assert_eq!(p.samples.len(), 5);
        assert_eq!(p.samples[0], phi);
        assert_eq!(p.samples[4], phi.neg());
        let expected = Functional::diagonal(phi.shared_shape().clone(), &[q(-1, 4), q(1, 4), q(1, 4), q(1, 4)]).unwrap();
        assert_eq!(p.samples[1], expected);
        for i in 0..5 {
            for j in i..5 {
                let d = p.samples[j].sub(&p.samples[i]).unwrap().trace_norm().unwrap();
                assert_eq!(d, q((j - i) as i64, 2));
            }
        }
        let check = verify_polyline(&p);
        assert_eq!(check.max_violation(), 0.0);
        assert_eq!(check.total_length, "2");
        assert_eq!(check.pairs_checked, 10);
    }

    #[test]
    fn atomic_spectrum_has_no_chain() {
        let sh = Arc::new(AlgebraShape::new(vec![2]).unwrap());
        let phi = Functional::diagonal(sh, &[q(7, 10), q(3, 10)]).unwrap();
        assert!(matches!(build_girth_polyline(&phi, 2, &Tolerances::exact()), Err(Error::NoChain(_))));
        let p = build_girth_polyline(&phi, 1, &Tolerances::exact()).unwrap();
        assert_eq!(p.samples[1], phi.neg());
    }

    #[test]
    fn scaled_sample_is_flagged() {
        let mut p = build_girth_polyline(&uniform(4), 4, &Tolerances::exact()).unwrap();
        p.samples[2] = p.samples[2].scale(&q(101, 100));
        assert!(verify_polyline(&p).max_pairwise_violation > 0.0);
    }

    #[test]
    fn midpoint_solves_the_norm_equation() {
        let phi = uniform(6);
        let p = build_girth_polyline(&phi, 2, &Tolerances::exact()).unwrap();
        let psi = &p.samples[1];
        assert_eq!(psi.trace_norm().unwrap(), q(1, 1));
        assert_eq!(phi.add(psi).unwrap().trace_norm().unwrap(), q(1, 1));
        assert_eq!(phi.sub(psi).unwrap().trace_norm().unwrap(), q(1, 1));
    }

    #[test]
    fn csv_rows() {
        let p = build_girth_polyline(&uniform(2), 2, &Tolerances::exact()).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("t,functional,distance_from_start"));
        assert!(lines[3].starts_with("2,"));
        assert!(lines[3].ends_with(",2"));
    }
}
