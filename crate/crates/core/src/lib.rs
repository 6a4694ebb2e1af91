//! Adaptive P1 finite elements for steady convection-diffusion-reaction
//! problems
//!
//! ```text
//! -eps Δu + b·∇u + c u = f   in Ω,    u = u_D on Γ_D,    eps ∇u·n = g on Γ_N
//! ```
//!
//! discretized with the symmetric monotone upwind-type algebraic
//! stabilization (SMUAS). A residual-based a posteriori estimator in the
//! energy norm drives red-green adaptive refinement.
//!
//! The pipeline is `solve -> estimate -> mark -> refine`:
//!
//! * [`mesh`]: conforming triangulations, uniform and red-green refinement
//! * [`assembly`]: stiffness matrix, load vector, energy norms
//! * [`stabilization`]: limiters and the stabilization matrix `B(u)`
//! * [`solver`]: fixed-point iteration with dynamic damping
//! * [`estimator`]: the residual estimator and its per-cell indicators
//! * [`adapt`]: maximum marking and the adaptive loop
//!
//! See the `examples/` directory of the crate for runnable entry points.

pub mod adapt;
pub mod assembly;
pub mod config;
pub mod dmp;
pub mod error;
pub mod estimator;
pub mod mesh;
pub mod output;
pub mod problem;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod stabilization;
pub mod vtk;

pub use adapt::{adaptive_loop, adaptive_loop_with, mark_maximum, RunRecord, StepRecord};
pub use assembly::{assemble, AssembledSystem};
pub use config::RunConfig;
pub use error::{Error, Result};
pub use estimator::{compute_eta, EstimatorConfig, EstimatorReport};
pub use mesh::{BoundaryKind, Mesh};
pub use problem::Problem;
pub use solver::{solve_nonlinear, SolveStats, SolverOptions};
pub use sparse::CsrMatrix;
