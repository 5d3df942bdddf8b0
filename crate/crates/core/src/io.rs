//! JSON instance documents and certificate serialization.
//!
//! Every number is written as a string (`"p/q"`, a decimal, or a float in
//! shortest round-trip form), and complex entries as `[re, im]` pairs; real
//! entries may be given as a bare string.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraShape;
use crate::daugavet::{RankOneOp, WeightedL1};
use crate::error::{Error, Result};
use crate::functional::{Functional, SpectralBlock, Tolerances};
use crate::matrix::BlockMatrix;
use crate::real::{Cx, Real};
use crate::splitter::{CertificateCheck, SplitCertificate};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    Float,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "rational" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            _ => Err(Error::input(format!("unknown mode '{s}', expected exact or float"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(String),
    Complex([String; 2]),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffuseModel {
    pub resolution: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraDoc {
    pub blocks: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffuse_model: Option<DiffuseModel>,
}

/// One block `a = v·diag(w)`. Without `positions` the weights fill the
/// first slots; without `v` the isometry is the identity on the support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralBlockDoc {
    pub weights: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<Vec<Entry>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionalDoc {
    Spectral { blocks: Vec<SpectralBlockDoc> },
    /// Row-major matrices `a_φ`, one per block.
    Matrix { blocks: Vec<Vec<Vec<Entry>>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankOneDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<String>>,
    pub g: Vec<String>,
    pub h: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesDoc {
    pub rank: String,
    pub cluster: String,
    pub equality: String,
    pub reconstruction: String,
}

/// Generator and seed behind a generated document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Origin {
    pub kind: String,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub schema_version: u32,
    pub algebra: AlgebraDoc,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<FunctionalDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_one: Option<RankOneDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<TolerancesDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Origin>,
}

fn parse_num<R: Real>(s: &str, field: &str) -> Result<R> {
    R::parse_str(s).map_err(|e| Error::input(format!("{field}: {e}")))
}

fn parse_entry<R: Real>(e: &Entry, field: &str) -> Result<Cx<R>> {
    match e {
        Entry::Real(s) => Ok(Complex::new(parse_num(s, field)?, R::zero())),
        Entry::Complex([re, im]) => Ok(Complex::new(parse_num(re, field)?, parse_num(im, field)?)),
    }
}

pub fn render_entry<R: Real>(z: &Cx<R>) -> Entry {
    if z.im.is_zero() {
        Entry::Real(z.re.render())
    } else {
        Entry::Complex([z.re.render(), z.im.render()])
    }
}

fn parse_square<R: Real>(rows: &[Vec<Entry>], d: usize, field: &str) -> Result<DMatrix<Cx<R>>> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::input(format!("{field}: expected a {d}x{d} matrix")));
    }
    let mut m = DMatrix::from_element(d, d, Cx::<R>::zero());
    for (i, row) in rows.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            m[(i, j)] = parse_entry(e, &format!("{field}[{i}][{j}]"))?;
        }
    }
    Ok(m)
}

fn render_square<R: Real>(m: &DMatrix<Cx<R>>) -> Vec<Vec<Entry>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| render_entry(&m[(i, j)])).collect())
        .collect()
}

/// Matrix-form description of a functional.
pub fn functional_doc<R: Real>(phi: &Functional<R>) -> FunctionalDoc {
    matrix_doc(phi.matrix())
}

pub fn matrix_doc<R: Real>(m: &BlockMatrix<R>) -> FunctionalDoc {
    FunctionalDoc::Matrix {
        blocks: (0..m.shape().num_blocks())
            .map(|b| render_square(&m.block_matrix(b)))
            .collect(),
    }
}

/// Compact JSON of the matrix form.
pub fn functional_json<R: Real>(phi: &Functional<R>) -> Result<String> {
    serde_json::to_string(&functional_doc(phi)).map_err(|e| Error::input(format!("serialization failed: {e}")))
}

impl InstanceDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDocument =
            serde_json::from_str(text).map_err(|e| Error::input(format!("malformed instance document: {e}")))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::input(format!("serialization failed: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::input(format!(
                "schema_version: expected {SCHEMA_VERSION}, found {}",
                self.schema_version
            )));
        }
        self.shape()?;
        if self.functional.is_none() && self.rank_one.is_none() {
            return Err(Error::input("functional: document has neither a functional nor a rank_one section"));
        }
        if self.mode == Mode::Exact && matches!(self.functional, Some(FunctionalDoc::Matrix { .. })) {
            return Err(Error::input("functional: exact mode requires the spectral form"));
        }
        Ok(())
    }

    pub fn shape(&self) -> Result<AlgebraShape> {
        AlgebraShape::with_diffuse_flag(
            self.algebra.blocks.clone(),
            self.algebra.diffuse_model.as_ref().map(|d| d.resolution),
        )
        .map_err(|e| Error::input(format!("algebra: {e}")))
    }

    pub fn tolerances<R: Real>(&self) -> Result<Tolerances> {
        match &self.tolerances {
            None => Ok(Tolerances::for_mode::<R>()),
            Some(t) if R::EXACT => {
                let all = [&t.rank, &t.cluster, &t.equality, &t.reconstruction];
                for s in all {
                    if parse_num::<f64>(s, "tolerances")? != 0.0 {
                        return Err(Error::input("tolerances: exact mode requires zero tolerances"));
                    }
                }
                Ok(Tolerances::exact())
            }
            Some(t) => {
                let tol = Tolerances {
                    rank: parse_num(&t.rank, "tolerances.rank")?,
                    cluster: parse_num(&t.cluster, "tolerances.cluster")?,
                    equality: parse_num(&t.equality, "tolerances.equality")?,
                    reconstruction: parse_num(&t.reconstruction, "tolerances.reconstruction")?,
                };
                if [tol.rank, tol.cluster, tol.equality, tol.reconstruction].iter().any(|x| *x < 0.0) {
                    return Err(Error::input("tolerances: values must be nonnegative"));
                }
                Ok(tol)
            }
        }
    }

    /// The functional in the requested number mode. Exact mode accepts only
    /// the spectral form. A functional that vanishes is rejected.
    pub fn functional<R: Real>(&self) -> Result<Functional<R>> {
        let doc = self
            .functional
            .as_ref()
            .ok_or_else(|| Error::input("functional: missing"))?;
        let shape = Arc::new(self.shape()?);
        let phi = match doc {
            FunctionalDoc::Matrix { blocks } => {
                if R::EXACT {
                    return Err(Error::input("functional: exact mode requires the spectral form"));
                }
                check_block_count(&shape, blocks.len())?;
                let dense = blocks
                    .iter()
                    .enumerate()
                    .map(|(b, rows)| parse_square(rows, shape.block_dim(b), &format!("functional.blocks[{b}]")))
                    .collect::<Result<Vec<_>>>()?;
                Functional::new(BlockMatrix::from_blocks(shape, dense)?)
            }
            FunctionalDoc::Spectral { blocks } => {
                check_block_count(&shape, blocks.len())?;
                let mut spectral = Vec::with_capacity(blocks.len());
                for (b, blk) in blocks.iter().enumerate() {
                    let field = format!("functional.blocks[{b}]");
                    let d = shape.block_dim(b);
                    let weights = blk
                        .weights
                        .iter()
                        .map(|w| parse_num::<R>(w, &format!("{field}.weights")))
                        .collect::<Result<Vec<_>>>()?;
                    let positions = blk.positions.clone().unwrap_or_else(|| (0..weights.len()).collect());
                    let v = match &blk.v {
                        Some(rows) => parse_square(rows, d, &format!("{field}.v"))?,
                        None => {
                            let mut v = DMatrix::from_element(d, d, Cx::<R>::zero());
                            for (w, &p) in weights.iter().zip(&positions) {
                                if p < d && !w.is_zero() {
                                    v[(p, p)] = Cx::<R>::one();
                                }
                            }
                            v
                        }
                    };
                    spectral.push(SpectralBlock { v, weights, positions });
                }
                Functional::from_spectral(shape, spectral, &self.tolerances::<R>()?)
                    .map_err(|e| Error::input(format!("functional: {e}")))?
            }
        };
        if phi.is_zero() {
            return Err(Error::input("functional: weights sum to zero, the functional vanishes"));
        }
        Ok(phi)
    }

    pub fn rank_one<R: Real>(&self) -> Result<(WeightedL1<R>, RankOneOp<R>)> {
        let doc = self
            .rank_one
            .as_ref()
            .ok_or_else(|| Error::input("rank_one: missing"))?;
        let parse_all = |v: &[String], field: &str| -> Result<Vec<R>> {
            v.iter().map(|s| parse_num::<R>(s, field)).collect()
        };
        let g = parse_all(&doc.g, "rank_one.g")?;
        let h = parse_all(&doc.h, "rank_one.h")?;
        let space = match &doc.weights {
            Some(w) => WeightedL1::new(parse_all(w, "rank_one.weights")?),
            None => WeightedL1::uniform(g.len()),
        }
        .map_err(|e| Error::input(format!("rank_one: {e}")))?;
        let op = RankOneOp::new(g, h).map_err(|e| Error::input(format!("rank_one: {e}")))?;
        if op.g.len() != space.dim() {
            return Err(Error::input("rank_one: weights and samples differ in length"));
        }
        Ok((space, op))
    }

    /// Rewrites every number in canonical form for the document's mode.
    pub fn canonical(&self) -> Result<InstanceDocument> {
        match self.mode {
            Mode::Exact => self.canonical_in::<num_rational::BigRational>(),
            Mode::Float => self.canonical_in::<f64>(),
        }
    }

    fn canonical_in<R: Real>(&self) -> Result<InstanceDocument> {
        let num = |s: &String| -> Result<String> { Ok(parse_num::<R>(s, "number")?.render()) };
        let nums = |v: &[String]| -> Result<Vec<String>> { v.iter().map(num).collect() };
        let entries = |rows: &[Vec<Entry>]| -> Result<Vec<Vec<Entry>>> {
            rows.iter()
                .map(|r| r.iter().map(|e| Ok(render_entry(&parse_entry::<R>(e, "entry")?))).collect())
                .collect()
        };
        let functional = match &self.functional {
            None => None,
            Some(FunctionalDoc::Matrix { blocks }) => Some(FunctionalDoc::Matrix {
                blocks: blocks.iter().map(|b| entries(b)).collect::<Result<_>>()?,
            }),
            Some(FunctionalDoc::Spectral { blocks }) => Some(FunctionalDoc::Spectral {
                blocks: blocks
                    .iter()
                    .map(|b| {
                        Ok(SpectralBlockDoc {
                            weights: nums(&b.weights)?,
                            positions: b.positions.clone(),
                            v: b.v.as_ref().map(|v| entries(v)).transpose()?,
                        })
                    })
                    .collect::<Result<_>>()?,
            }),
        };
        let rank_one = self
            .rank_one
            .as_ref()
            .map(|r| -> Result<RankOneDoc> {
                Ok(RankOneDoc {
                    weights: r.weights.as_ref().map(|w| nums(w)).transpose()?,
                    g: nums(&r.g)?,
                    h: nums(&r.h)?,
                })
            })
            .transpose()?;
        let float = |s: &String| -> Result<String> { Ok(parse_num::<f64>(s, "tolerances")?.render()) };
        let tolerances = self
            .tolerances
            .as_ref()
            .map(|t| -> Result<TolerancesDoc> {
                Ok(TolerancesDoc {
                    rank: float(&t.rank)?,
                    cluster: float(&t.cluster)?,
                    equality: float(&t.equality)?,
                    reconstruction: float(&t.reconstruction)?,
                })
            })
            .transpose()?;
        Ok(InstanceDocument {
            schema_version: self.schema_version,
            algebra: self.algebra.clone(),
            mode: self.mode,
            functional,
            rank_one,
            tolerances,
            origin: self.origin.clone(),
        })
    }
}

fn check_block_count(shape: &AlgebraShape, found: usize) -> Result<()> {
    if found != shape.num_blocks() {
        return Err(Error::input(format!(
            "functional.blocks: {found} blocks for an algebra with {}",
            shape.num_blocks()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormsDoc {
    pub psi: String,
    pub plus: String,
    pub minus: String,
}

/// Serialized certificate; norms and scalars are strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub solvable: bool,
    pub mode: Mode,
    pub selection: Vec<usize>,
    pub norm: String,
    pub mass: String,
    pub defect: String,
    pub norms: NormsDoc,
    pub psi: FunctionalDoc,
    pub e_plus: FunctionalDoc,
    pub e_minus: FunctionalDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<CertificateCheck>,
}

impl CertificateDoc {
    pub fn new<R: Real>(cert: &SplitCertificate<R>, solvable: bool, verification: Option<CertificateCheck>) -> Self {
        CertificateDoc {
            solvable,
            mode: if R::EXACT { Mode::Exact } else { Mode::Float },
            selection: cert.selection.clone(),
            norm: cert.total.render(),
            mass: cert.mass.render(),
            defect: cert.defect.render(),
            norms: NormsDoc {
                psi: cert.norms.psi.render(),
                plus: cert.norms.plus.render(),
                minus: cert.norms.minus.render(),
            },
            psi: functional_doc(&cert.psi),
            e_plus: matrix_doc(&cert.e_plus),
            e_minus: matrix_doc(&cert.e_minus),
            verification,
        }
    }

    /// Rebuilds the certificate on `like`'s algebra.
    pub fn to_certificate<R: Real>(&self, phi: &Functional<R>) -> Result<SplitCertificate<R>> {
        let shape = phi.shared_shape().clone();
        let matrix = |doc: &FunctionalDoc, field: &str| -> Result<BlockMatrix<R>> {
            match doc {
                FunctionalDoc::Matrix { blocks } => {
                    check_block_count(&shape, blocks.len())?;
                    let dense = blocks
                        .iter()
                        .enumerate()
                        .map(|(b, rows)| parse_square(rows, shape.block_dim(b), &format!("{field}[{b}]")))
                        .collect::<Result<Vec<_>>>()?;
                    BlockMatrix::from_blocks(shape.clone(), dense)
                }
                FunctionalDoc::Spectral { .. } => Err(Error::input(format!("{field}: expected matrix form"))),
            }
        };
        Ok(SplitCertificate {
            selection: self.selection.clone(),
            e_plus: matrix(&self.e_plus, "e_plus")?,
            e_minus: matrix(&self.e_minus, "e_minus")?,
            psi: Functional::new(matrix(&self.psi, "psi")?),
            norms: crate::splitter::AchievedNorms {
                psi: parse_num(&self.norms.psi, "norms.psi")?,
                plus: parse_num(&self.norms.plus, "norms.plus")?,
                minus: parse_num(&self.norms.minus, "norms.minus")?,
            },
            defect: parse_num(&self.defect, "defect")?,
            mass: parse_num(&self.mass, "mass")?,
            total: parse_num(&self.norm, "norm")?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::q;
    use num_rational::BigRational;

    const HALF_HALF: &str = r#"{
        "schema_version": 1,
        "algebra": {"blocks": [2]},
        "mode": "exact",
        "functional": {"form": "spectral", "blocks": [{"weights": ["1/2", "0.5"]}]}
    }"#;

    #[test]
    fn parses_spectral_documents() {
        let doc = InstanceDocument::from_json(HALF_HALF).unwrap();
        let phi = doc.functional::<BigRational>().unwrap();
        assert_eq!(phi.trace_norm().unwrap(), q(1, 1));
        let float = doc.functional::<f64>().unwrap();
        assert_eq!(float.trace_norm().unwrap(), 1.0);
    }

    #[test]
    fn canonical_round_trip_is_byte_identical() {
        let doc = InstanceDocument::from_json(HALF_HALF).unwrap().canonical().unwrap();
        let text = doc.to_json().unwrap();
        assert!(text.contains("\"1/2\""));
        let again = InstanceDocument::from_json(&text).unwrap().canonical().unwrap().to_json().unwrap();
        assert_eq!(text, again);
    }

    #[test]
    fn rejects_bad_documents() {
        let zero = HALF_HALF.replace("\"1/2\", \"0.5\"", "\"0\", \"0\"");
        let err = InstanceDocument::from_json(&zero).unwrap().functional::<BigRational>().unwrap_err();
        assert!(err.to_string().contains("zero"));
        let missing = r#"{"schema_version": 1, "mode": "exact", "functional": null}"#;
        assert!(InstanceDocument::from_json(missing).unwrap_err().to_string().contains("algebra"));
        let matrix = r#"{"schema_version": 1, "algebra": {"blocks": [1]}, "mode": "exact",
            "functional": {"form": "matrix", "blocks": [[["1"]]]}}"#;
        assert!(InstanceDocument::from_json(matrix).is_err());
        let unknown = HALF_HALF.replace("\"mode\"", "\"colour\": 1, \"mode\"");
        assert!(InstanceDocument::from_json(&unknown).unwrap_err().to_string().contains("colour"));
    }

    #[test]
    fn certificate_doc_round_trip() {
        let doc = InstanceDocument::from_json(HALF_HALF).unwrap();
        let phi = doc.functional::<BigRational>().unwrap();
        let cert = crate::splitter::construct_psi(&phi, &[1], &Tolerances::exact()).unwrap();
        let cd = CertificateDoc::new(&cert, true, None);
        let json = serde_json::to_string(&cd).unwrap();
        let back: CertificateDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_certificate(&phi).unwrap(), cert);
        assert_eq!(cd.norms.plus, "1");
    }

    #[test]
    fn complex_entries() {
        let text = r#"{"schema_version": 1, "algebra": {"blocks": [1]}, "mode": "float",
            "functional": {"form": "matrix", "blocks": [[[["0.6", "0.8"]]]]}}"#;
        let phi = InstanceDocument::from_json(text).unwrap().functional::<f64>().unwrap();
        assert!((phi.trace_norm().unwrap() - 1.0).abs() < 1e-15);
        let json = functional_json(&phi).unwrap();
        assert_eq!(json, r#"{"form":"matrix","blocks":[[[["0.6","0.8"]]]]}"#);
    }
}
