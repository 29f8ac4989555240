//! Triangle-free pseudorandom graphs from random bipartitions of the line
//! cliques of the symplectic generalized quadrangle W(q).
//!
//! The pipeline is `Quadrangle -> CliqueCover (G1) -> SignAssignment -> G`,
//! with certificates, spectra and discrepancy audits on top.

pub mod audit;
pub mod bipartition;
pub mod certify;
pub mod cover;
pub mod error;
pub mod field;
pub mod geometry;
pub mod graph;
mod incidence;
pub mod io;
pub mod spectral;

pub use audit::{audit, hw_monte_carlo, sample_families, theory_params, DiscrepancyReport, Family, TheoryParams};
pub use bipartition::{assign_signs, build_g, subset_stats, SignAssignment, SubsetStats};
pub use certify::{check_structural, check_triangle_free, girth, Certificate, Girth, Verdict, Witness};
pub use cover::{build_g1, build_incidence_graph, CliqueCover};
pub use error::{Error, Result};
pub use field::{FieldElement, FieldSpec};
pub use geometry::{certify_gq, GqCheck, Quadrangle};
pub use graph::{GraphKind, GraphMeta, SparseGraph, VertexSet};
pub use spectral::{dense_spectrum, extreme_eigs, mixing_check, verify_ndl, SpectralReport};
