//! Second variation of `∫S₁`, index estimation, cutoff profiles and growth
//! functionals over lattice geodesic balls.

pub mod assembly;
pub mod cutoff;
pub mod eigen;
pub mod growth;
pub mod sparse;

pub use assembly::{
    index_estimate, q1_value, AssemblySummary, BoundaryMode, IndexOptions, StabilityAssembly,
};
pub use cutoff::{cutoff_eval, CutoffProfile};
pub use eigen::{EigenOptions, PencilSpectrum, SolverKind};
pub use growth::{
    graph_growth_bound_check, growth_scan, lemma32_certificate, GrowthBoundReport, GrowthReport,
    Lemma32Report,
};
