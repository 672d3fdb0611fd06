//! Best approximation in Orlicz spaces `L^Φ([a, b])` over finite-dimensional
//! subspaces: modular minimization, optimality certificates and uniqueness
//! experiments on quadrature grids.

pub mod certify;
pub mod cli;
pub mod error;
pub mod grid;
pub mod phi;
pub mod solver;
pub mod subspace;
pub mod uniqueness;

pub use error::{Error, Result};
