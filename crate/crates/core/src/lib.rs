//! Linear PDEs on metric networks.
//!
//! A metric network is a graph whose edges carry real intervals `[0, l]`
//! and whose nodes carry coupling conditions (Kirchhoff or Dirichlet). This
//! crate finds the spectrum of the generalized Laplacian from the coupling
//! matrix `T(k)`, discretizes the same operator with finite differences, and
//! solves Poisson, heat and wave problems with either route. Weyl-law
//! bounds and symmetric-group character theory provide independent checks
//! on the computed spectra.

pub mod bench;
pub mod coupling;
pub mod error;
pub mod fd;
pub mod graph;
pub mod linalg;
pub mod poisson;
pub mod registry;
pub mod sources;
pub mod spectral;
pub mod symmetry;

pub use error::{Error, Result};
pub use graph::function::{inner_product, EdgeFunction, EdgeProfile, NetworkFunction};
pub use graph::{BoundaryCondition, Edge, MetricNetwork, Node};
