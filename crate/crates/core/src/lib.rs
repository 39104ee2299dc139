//! Piecewise linear finite elements for the obstacle problem of the integral
//! fractional Laplacian on convex polygons and graded meshes of the unit disk.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled.
//! File formats, timing and the command line live in the companion `fracfem`
//! crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod assembly;
pub mod dense;
pub mod geometry;
pub mod interp;
pub mod mesh;
pub mod oracle;
pub mod quadrature;
pub mod solver;
pub mod special;

pub use assembly::{
    assemble_load, assemble_stiffness, complement_weight, normalization_constant, pair_integral,
    AssemblyError, FractionalSystem,
};
pub use dense::{Cholesky, LinalgError, SymMatrix};
pub use interp::{ball_average, interpolate, InterpError, NodalField};
pub use mesh::{
    build_graded_mesh, maximal_ball, mesh_stats, Domain, Grading, MeshError, MeshStats, StarIndex,
    TriangleMesh,
};
pub use oracle::{
    energy_error, energy_norm_sq_exact, exact_rhs_linear, exact_solution, jacobi_p2,
    ExplicitSolution, OracleError,
};
pub use quadrature::QuadratureRules;
pub use solver::{
    discrete_contact_set, solve_linear, solve_obstacle, ContactSet, ObstacleProblem, SolveReport,
    SolverError,
};
