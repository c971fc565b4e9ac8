//! Two-domain compressible Navier-Stokes solver with rigid-lid interface
//! coupling and partitioned IMEX Runge-Kutta time integration.

pub mod boundary;
pub mod cases;
pub mod config;
pub mod convergence;
pub mod coupling;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod krylov;
pub mod linop;
pub mod numflux;
pub mod output;
pub mod residual;
pub mod run;
pub mod state;
pub mod tableau;

pub use error::{Error, Result};
