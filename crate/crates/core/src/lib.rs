//! Discrete Laplace operators on simplicial meshes and the edge-based mean
//! curvatures built from them.
//!
//! The crate covers four families of edge weights (triangle cotangent,
//! tetrahedral primal, tetrahedral dual and the associated ansatz of order
//! `n`), vertex and edge mean curvatures, a truncated power-series toolkit
//! used to study how the curvature candidates behave near a zero dihedral
//! angle, and the experiment drivers that check the convergence and
//! inequality statements numerically.
//!
//! Heavy per-edge and Monte Carlo loops run on rayon when the `parallel`
//! feature is enabled (the default). Every parallel loop collects in input
//! order, so results are bitwise identical to the sequential path.

pub mod analysis;
pub mod cli;
pub mod curvature;
pub mod hodge;
pub mod laplacian;
pub mod mesh;
pub mod par;
pub mod series;

pub use curvature::ExtReal;
pub use mesh::{EdgeKey, TetMesh, TriMesh, Vec3};
pub use par::Execution;
