//! Preduals of finite-dimensional W*-algebras: trace-norm geometry, the
//! norm equation `‖φ ± ψ‖ = ‖φ‖ = ‖ψ‖`, girth curves, the Daugavet defect on
//! weighted `L1`, and ultraproduct-style limit certificates.
//!
//! Every numeric routine is generic over [`Real`], implemented for `f64`
//! (tolerance-based) and `BigRational` (exact, Gaussian-rational entries).

pub mod algebra;
pub mod centralizer;
pub mod daugavet;
pub mod error;
pub mod functional;
pub mod generate;
pub mod girth;
pub mod io;
pub mod matrix;
pub mod real;
pub mod splitter;
pub mod ultra;

pub use algebra::{central_decomposition, decompose_functional, AlgebraShape, CentralDecomposition, FactorType, Summand};
pub use centralizer::{centralizer_structure, mass, spectral_clusters, CentralizerReport, SpectralClusters};
pub use daugavet::{daugavet_defect, defect_sweep, id_plus_t_norm, FunctionSpec, RankOneOp, WeightedL1};
pub use error::{Error, Result};
pub use functional::{
    act, adjoint, kusuda_check, polar_decompose, trace_norm, Functional, KusudaReport, PolarForm, Side,
    SpectralBlock, Tolerances,
};
pub use girth::{build_girth_polyline, verify_polyline, GirthPolyline};
pub use io::{InstanceDocument, Mode};
pub use matrix::BlockMatrix;
pub use real::{Cx, Real};
pub use splitter::{
    approx_split, construct_psi, decide, decide_exact, enumerate_exact_solutions, verify_certificate,
    SplitCertificate, SplitInstance, WorkCap,
};
pub use ultra::{certify_limit, run_sequence, FunctionalSequence, Generator, UltraReport, Verdict};
