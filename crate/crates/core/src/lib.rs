//! Optimal insulation of a Robin boundary: for a planar domain `Ω`, find the
//! nonnegative boundary profile `h` of fixed mass `m` that minimizes the first
//! eigenvalue of `−Δu = λu`, `∂u/∂ν + βu/(1+βh) = 0`.
//!
//! Everything is generic over the scalar type ([`scalar::Real`], implemented
//! for `f32` and `f64`); the aliases below fix it to `f64` or `f32`.
// `!(x > 0)` is how NaN gets rejected; index loops mirror the linear algebra.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod eigen;
pub mod error;
pub mod factor;
pub mod fem;
pub mod insulation;
pub mod layered;
pub mod mesh;
pub mod quad;
pub mod scalar;
pub mod spectra;

pub use error::{Error, Result};
pub use fem::SparseSymMatrix;
pub use scalar::Real;

pub type TriMesh64 = mesh::TriMesh<f64>;
pub type DomainSpec64 = mesh::DomainSpec<f64>;
pub type Discretization64 = fem::Discretization<f64>;
pub type BoundaryField64 = fem::BoundaryField<f64>;
pub type NodalField64 = fem::NodalField<f64>;
pub type EigenPair64 = eigen::EigenPair<f64>;
pub type SolveResult64 = insulation::SolveResult<f64>;
pub type InsulationOptions64 = insulation::InsulationOptions<f64>;

pub type TriMeshF32 = mesh::TriMesh<f32>;
pub type DomainSpecF32 = mesh::DomainSpec<f32>;
pub type DiscretizationF32 = fem::Discretization<f32>;
pub type BoundaryFieldF32 = fem::BoundaryField<f32>;
pub type NodalFieldF32 = fem::NodalField<f32>;
pub type EigenPairF32 = eigen::EigenPair<f32>;
pub type SolveResultF32 = insulation::SolveResult<f32>;
pub type InsulationOptionsF32 = insulation::InsulationOptions<f32>;
