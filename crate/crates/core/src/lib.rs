//! Spectral mass near the top of the spectrum of bounded-degree graphs.
//!
//! The crate builds weighted graphs, computes their spectra, selects nets and
//! separated sets (centrally and by local randomized rules), evaluates the
//! quantitative bounds relating spectral radius drops to eigenvalue
//! multiplicity, and computes random-walk return probabilities together with
//! the Kesten–McKay reference measure.

// `!(x > 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod graph;
pub mod local;
pub mod nets;
pub mod numeric;
pub mod rng;
pub mod spectral;
pub mod walks;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use graph::{build_graph, generate, Family, FamilySpec, VertexSet, WeightedGraph};
pub use spectral::{SpectralInterval, Spectrum};
pub use bounds::{BoundParams, BoundReport, TheoremReport, TheoremVariant};
pub use local::LocalLabels;
pub use nets::{NetMethod, NetResult};
pub use walks::{KestenRef, ReturnSeries};
