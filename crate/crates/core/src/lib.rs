//! Additive multilevel preconditioners for the discrete fractional
//! Laplacian `A^s`, `s ∈ [-1, 1]`, on nested uniform P1 meshes of the unit
//! interval.
//!
//! The pieces, bottom up:
//!
//! - [`mesh`]: nested bisected meshes and prolongation matrices.
//! - [`fem`]: P1 stiffness and mass matrices (Dirichlet dofs eliminated).
//! - [`spectral`]: generalized eigendecomposition of the stiffness/mass
//!   pencil and the fractional matrices `A^s`, `(A^s)⁻¹` built from it.
//! - [`multilevel`]: the additive preconditioner `B^s` for `s ∈ [0, 1]` and
//!   the sandwich `B^{(1+s)/2} A B^{(1+s)/2}` for `s ∈ [-1, 0]`.
//! - [`krylov`]: PCG with a CG-Lanczos condition estimate and a dense
//!   condition-number oracle.
//! - [`theory`]: dense checks of the operator inequalities behind the
//!   convergence theory.
//! - [`bench`]: experiment grids, reference tables and regression diffs.
//!
//! ```
//! use fracmg::{krylov, mesh::MeshHierarchy, multilevel::MultilevelPreconditioner, spectral::FractionalOperator};
//!
//! let hierarchy = MeshHierarchy::build(64, 4).unwrap();
//! let system = FractionalOperator::on_level(hierarchy.finest(), 0.5).unwrap();
//! let precond = MultilevelPreconditioner::build(&hierarchy, 0.5).unwrap();
//! let rhs = vec![0.0; 63];
//! let (_, report) = krylov::pcg_random_start(
//!     &system, &precond, &rhs, &Default::default(), 0, Default::default(),
//! ).unwrap();
//! assert!(report.converged && report.condition_estimate < 4.0);
//! ```

pub mod bench;
pub mod dense;
pub mod error;
pub mod fem;
pub mod krylov;
pub mod mesh;
pub mod multilevel;
pub mod operator;
pub mod parallel;
pub mod sparse;
pub mod spectral;
pub mod theory;

pub use error::{Error, Result};
pub use parallel::Execution;
