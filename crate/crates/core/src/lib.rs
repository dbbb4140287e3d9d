//! Linear P1 finite elements for 2D elasticity with immersed circular
//! inclusions.
//!
//! Each inclusion is coupled to the surrounding solid through a handful of
//! Fourier-mode Lagrange multipliers living on its boundary circle. The
//! resulting saddle-point system is solved by conjugate gradients on the
//! multiplier Schur complement, backed by a sparse LDLᵀ factorization of the
//! elasticity operator.
//!
//! Every numerical type is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below name the usual double-precision instantiations.

pub mod coupling;
pub mod error;
pub mod fem;
pub mod linalg;
pub mod mesh;
pub mod postprocess;
pub mod saddle;
pub mod scalar;

pub use coupling::{
    assemble_coupling, assemble_reduced_rhs, assemble_reduced_rhs_with, circle_quadrature, fourier_mode, reconstruct_traction,
    validate_inclusions, CouplingBlock, Inclusion, Quadrature,
};
pub use error::{Error, Result};
pub use fem::{assemble_load, assemble_stiffness, error_norms, evaluate_field, FeSpace, Field};
pub use linalg::{SparseRows, SymSparseMatrix};
pub use mesh::{generate_disc_mesh, generate_rect_mesh, BoundaryEdge, Domain, Mesh, Side};
pub use postprocess::{
    boundary_stress_integral, effective_bulk, effective_shear, eoc, mode_report, AnalyticAxisym, ConvergenceRecord, EffectiveModuli,
    ModeReport, SideForces,
};
pub use saddle::{factor_primal, PrimalFactor, SaddleSolution, SaddleSystem, SolveOptions, SolveReport};
pub use scalar::{Point, Scalar};

pub type Mesh64 = Mesh<f64>;
pub type Mesh32 = Mesh<f32>;
pub type Field64 = Field<f64>;
pub type Inclusion64 = Inclusion<f64>;
pub type SaddleSystem64 = SaddleSystem<f64>;
pub type Analytic64 = AnalyticAxisym<f64>;
