//! Rounding almost-orthogonal POVMs to PVMs in finite-dimensional block
//! algebras `M_{d_1} (+) ... (+) M_{d_K}`.
//!
//! The crate is generic over the real scalar type through [`Real`]; the
//! `*64` / `*32` aliases below fix the precision.

pub mod algebra;
pub mod commute;
pub mod error;
pub mod fourier;
pub mod gen;
pub mod linalg;
pub mod majorant;
pub mod orthogonalizer;
pub mod scalar;
pub mod symmetry;
pub mod tol;

pub use algebra::{
    center_valued_trace, commutator_phi_norm_sq, defect, phi_norm_sq, spectral_clusters, validate_povm,
    BlockAlgebra, CenterValue, Cluster, Element, Povm, PovmDiagnostics, Pvm, SpectralClusters, State,
};
pub use commute::{commutation_defect, compress_povm, repair, CommutantAlgebra, CompressedPovm, RepairReport};
pub use error::{Error, Result};
pub use fourier::{pvm_to_unitary, repair_unitary_pair, unitary_to_pvm, UnitaryRepair};
pub use majorant::{
    commuting_majorant_oracle, minimal_majorant, verify_majorant_certificate, CertificateDiagnostics, Check,
    FunctionalFamily, MajorantSolution,
};
pub use orthogonalizer::{orthogonalize, select_projections, OrthCertificates, OrthReport, SelectionResult};
pub use scalar::{CMat, CVec, Real, C};
pub use symmetry::{decompose_generated_algebra, orthogonalize_symmetry_preserving, GeneratedAlgebra, SymmetricReport};
pub use tol::{BarrierParams, Tolerances};

pub type Element64 = Element<f64>;
pub type State64 = State<f64>;
pub type Povm64 = Povm<f64>;
pub type Pvm64 = Pvm<f64>;
pub type Element32 = Element<f32>;
pub type State32 = State<f32>;
pub type Povm32 = Povm<f32>;
pub type Pvm32 = Pvm<f32>;
pub type FunctionalFamily64 = FunctionalFamily<f64>;
pub type MajorantSolution64 = MajorantSolution<f64>;
pub type FunctionalFamily32 = FunctionalFamily<f32>;
pub type MajorantSolution32 = MajorantSolution<f32>;
