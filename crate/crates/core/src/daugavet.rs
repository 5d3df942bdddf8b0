//! Daugavet defect `1 + ‖T‖ − ‖Id + T‖` of rank-one operators on weighted
//! `ℓ1`, the discretizations of `L1(μ)`.

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::real::Real;

/// `ℓ1` with atom masses `w_j > 0`: `‖f‖ = Σ w_j |f_j|`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedL1<R: Real> {
    weights: Vec<R>,
}

impl<R: Real> WeightedL1<R> {
    pub fn new(weights: Vec<R>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::input("weighted l1 space needs at least one atom"));
        }
        if let Some(j) = weights.iter().position(|w| !w.is_positive()) {
            return Err(Error::input(format!("weight {j} is not positive")));
        }
        Ok(WeightedL1 { weights })
    }

    /// `n` atoms of mass `1/n`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("resolution must be at least 1"));
        }
        Self::new(vec![R::one() / R::from_usize(n); n])
    }

    pub fn weights(&self) -> &[R] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn norm(&self, f: &[R]) -> Result<R> {
        self.check(f.len())?;
        Ok(self
            .weights
            .iter()
            .zip(f)
            .fold(R::zero(), |acc, (w, x)| acc + w.clone() * x.abs()))
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::input(format!(
                "vector of length {len} on a space with {} atoms",
                self.dim()
            )));
        }
        Ok(())
    }
}

/// `Tf = (Σ_j w_j g_j f_j)·h`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOneOp<R: Real> {
    pub g: Vec<R>,
    pub h: Vec<R>,
}

impl<R: Real> RankOneOp<R> {
    pub fn new(g: Vec<R>, h: Vec<R>) -> Result<Self> {
        if g.len() != h.len() {
            return Err(Error::input(format!(
                "g has {} samples but h has {}",
                g.len(),
                h.len()
            )));
        }
        Ok(RankOneOp { g, h })
    }

    pub fn scale(&self, c: &R) -> Self {
        RankOneOp {
            g: self.g.iter().map(|x| x.clone() * c.clone()).collect(),
            h: self.h.clone(),
        }
    }

    pub fn apply(&self, space: &WeightedL1<R>, f: &[R]) -> Result<Vec<R>> {
        self.check(space)?;
        space.check(f.len())?;
        let pairing = space
            .weights
            .iter()
            .zip(&self.g)
            .zip(f)
            .fold(R::zero(), |acc, ((w, g), x)| acc + w.clone() * g.clone() * x.clone());
        Ok(self.h.iter().map(|h| h.clone() * pairing.clone()).collect())
    }

    fn check(&self, space: &WeightedL1<R>) -> Result<()> {
        if self.g.len() != space.dim() || self.h.len() != space.dim() {
            return Err(Error::input(format!(
                "operator of size {} on a space with {} atoms",
                self.g.len(),
                space.dim()
            )));
        }
        Ok(())
    }
}

fn max_abs<R: Real>(v: &[R]) -> R {
    v.iter().fold(R::zero(), |acc, x| R::max_of(acc, x.abs()))
}

/// `‖T‖ = max_j |g_j| · Σ_i w_i |h_i|`.
pub fn operator_norm<R: Real>(space: &WeightedL1<R>, t: &RankOneOp<R>) -> Result<R> {
    t.check(space)?;
    Ok(max_abs(&t.g) * space.norm(&t.h)?)
}

/// Exact norm of `Id + T`, maximised over the extreme points `e_j / w_j`.
pub fn id_plus_t_norm<R: Real>(space: &WeightedL1<R>, t: &RankOneOp<R>) -> Result<R> {
    t.check(space)?;
    let h_norm = space.norm(&t.h)?;
    let mut best: Option<R> = None;
    for ((w, g), h) in space.weights.iter().zip(&t.g).zip(&t.h) {
        let diagonal = (R::one() + w.clone() * g.clone() * h.clone()).abs();
        let off = g.abs() * (h_norm.clone() - w.clone() * h.abs());
        let column = diagonal + off;
        best = Some(match best {
            Some(b) => R::max_of(b, column),
            None => column,
        });
    }
    Ok(best.expect("space has at least one atom"))
}

/// `1 + ‖T‖ − ‖Id + T‖ ≥ 0`.
pub fn daugavet_defect<R: Real>(space: &WeightedL1<R>, t: &RankOneOp<R>) -> Result<R> {
    Ok(R::one() + operator_norm(space, t)? - id_plus_t_norm(space, t)?)
}

/// `2 · max_j w_j |g_j h_j|`, an upper bound for the defect.
pub fn atom_bound<R: Real>(space: &WeightedL1<R>, t: &RankOneOp<R>) -> Result<R> {
    t.check(space)?;
    let m = space
        .weights
        .iter()
        .zip(&t.g)
        .zip(&t.h)
        .fold(R::zero(), |acc, ((w, g), h)| R::max_of(acc, w.clone() * (g.clone() * h.clone()).abs()));
    Ok(R::from_usize(2) * m)
}

/// A bounded function on `[0, 1]`, sampled at midpoints.
#[derive(Clone, Debug, PartialEq)]
pub enum FunctionSpec {
    Constant(BigRational),
    /// `amplitude · sin(2π · frequency · t)`; float mode only.
    Sine { amplitude: f64, frequency: f64 },
    /// Step function with equal-width steps.
    Samples(Vec<BigRational>),
}

impl FunctionSpec {
    /// Parses `const:<c>`, `sine[:<amp>[:<freq>]]`, `samples:<v1,v2,…>` or
    /// `file:<path>` (values separated by whitespace or commas).
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
        match kind {
            "const" | "constant" => Ok(FunctionSpec::Constant(<BigRational as Real>::parse_str(rest)?)),
            "sine" | "sin" => {
                let mut parts = rest.split(':').filter(|s| !s.is_empty());
                let parse = |s: Option<&str>, default: f64| -> Result<f64> {
                    s.map_or(Ok(default), |s| <f64 as Real>::parse_str(s))
                };
                let amplitude = parse(parts.next(), 1.0)?;
                let frequency = parse(parts.next(), 1.0)?;
                Ok(FunctionSpec::Sine { amplitude, frequency })
            }
            "samples" => Self::from_values(rest),
            "file" => {
                let text = std::fs::read_to_string(rest)
                    .map_err(|e| Error::input(format!("cannot read samples from {rest}: {e}")))?;
                Self::from_values(&text)
            }
            _ => Err(Error::input(format!("unknown function spec '{spec}'"))),
        }
    }

    fn from_values(text: &str) -> Result<Self> {
        let values = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(<BigRational as Real>::parse_str)
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(Error::input("sampled function has no values"));
        }
        Ok(FunctionSpec::Samples(values))
    }

    /// Values at the midpoints `(j + ½)/n`.
    pub fn sample<R: Real>(&self, n: usize) -> Result<Vec<R>> {
        match self {
            FunctionSpec::Constant(c) => Ok(vec![R::from_rational(c); n]),
            FunctionSpec::Sine { amplitude, frequency } => {
                if R::EXACT {
                    return Err(Error::NotExact("sine samples are irrational".into()));
                }
                (0..n)
                    .map(|j| {
                        let t = (j as f64 + 0.5) / n as f64;
                        let v = amplitude * (2.0 * std::f64::consts::PI * frequency * t).sin();
                        R::from_f64(v).ok_or_else(|| Error::Numerical("non-finite sample".into()))
                    })
                    .collect()
            }
            FunctionSpec::Samples(values) => Ok((0..n)
                .map(|j| {
                    let idx = ((2 * j + 1) * values.len()) / (2 * n);
                    R::from_rational(&values[idx.min(values.len() - 1)])
                })
                .collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow<R: Real> {
    pub n: usize,
    pub norm_t: R,
    pub norm_id_plus_t: R,
    pub defect: R,
    /// `2 · max|g| · max|h| / n`.
    pub bound: R,
    pub within_bound: bool,
}

/// Defects on uniform discretizations at each resolution.
pub fn defect_sweep<R: Real>(g: &FunctionSpec, h: &FunctionSpec, resolutions: &[usize]) -> Result<Vec<SweepRow<R>>> {
    if resolutions.contains(&0) {
        return Err(Error::input("resolutions must be positive"));
    }
    if resolutions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::input("resolutions must be strictly increasing"));
    }
    resolutions
        .iter()
        .map(|&n| {
            let space = WeightedL1::<R>::uniform(n)?;
            let t = RankOneOp::new(g.sample(n)?, h.sample(n)?)?;
            let norm_t = operator_norm(&space, &t)?;
            let norm_id_plus_t = id_plus_t_norm(&space, &t)?;
            let defect = R::one() + norm_t.clone() - norm_id_plus_t.clone();
            let bound = R::from_usize(2) * max_abs(&t.g) * max_abs(&t.h) / R::from_usize(n);
            let slack = if R::EXACT { 0.0 } else { 1e-12 };
            let within_bound = defect.le_within(&bound, slack);
            Ok(SweepRow {
                n,
                norm_t,
                norm_id_plus_t,
                defect,
                bound,
                within_bound,
            })
        })
        .collect()
}
