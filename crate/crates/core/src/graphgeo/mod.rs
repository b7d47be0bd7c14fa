//! Geometry of graphs and analytic charts sampled on uniform lattices.

pub mod covariant;
pub mod distance;
pub mod field;
pub mod grid;
pub mod jet;
pub mod ops;
pub mod patch;

pub use covariant::{
    covariant_at, covariant_da, eqn16_residual, l1s1_identity_residual, CovariantPoint,
    IdentityResidual,
};
pub use distance::geodesic_distance;
pub use field::{point_geometry, PointGeometry, ScalarField, ShapeField};
pub use grid::Grid;
pub use ops::{
    gradient, intrinsic_div, jacobi_apply, l1_apply, reilly_residual, s1_divform, ReillyReport,
    VectorField,
};
pub use patch::{
    builder_catalog, DerivativeOracle, Domain, PatchDescriptor, PatchKind, Profile, SurfacePatch,
};
