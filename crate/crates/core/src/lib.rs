//! Numerical toolkit for the curvature algebra, second-variation machinery and
//! graph-hypersurface identities behind nonexistence results for stable
//! hypersurfaces with constant scalar curvature in Euclidean space.
//!
//! * [`curvalg`]: symmetric functions of principal curvatures, Newton
//!   transformations, trace identities and Maclaurin-type audits.
//! * [`tensorid`]: pointwise third-order tensor identities (the
//!   `|∇A|² − |∇|A||²` decomposition and its equality case).
//! * [`graphgeo`]: geometry engine for graphs and analytic charts on uniform
//!   lattices, including the divergence-form operator `L₁`, the Jacobi
//!   operator and PDE identity residuals.
//! * [`stability`]: second-variation assembly, index estimation, cutoff
//!   profiles and growth functionals.
//! * [`cli`]: JSON scenario runner used by the `hyperstab` binary.

pub mod cli;
pub mod convergence;
pub mod curvalg;
pub mod error;
pub mod graphgeo;
pub mod stability;
pub mod tensorid;

pub use error::{Error, Result};
