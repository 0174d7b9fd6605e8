//! Combinatorial calculus for contractive regular direct systems of digraph
//! spaces.
//!
//! - [`digraph`]: reflexive digraphs, diagonal projections, irreducibility.
//! - [`regular`]: regular bimodule maps, the compression-type decision with
//!   cycle witnesses, composition and ampliation.
//! - [`numeric`]: dense complex matrices and operator norms used to check the
//!   symbolic side.
//! - [`system`]: direct systems, telescoping and realization of Bratteli
//!   patterns by triangular systems.
//! - [`bratteli`]: connecting multiplicities and Bratteli diagrams.
//! - [`envelope`]: maximal summands, the Silov ideal and the envelope diagram.
//! - [`sample`]: seeded random maps and patterns for tests and benchmarks.

pub mod bratteli;
pub mod digraph;
pub mod envelope;
pub mod numeric;
pub mod regular;
pub mod sample;
pub mod system;

pub use digraph::{Digraph, DigraphError, MatrixUnit, SpaceElement, VertexSet};
pub use regular::{
    assemble, compose, decide_compression_type, CompressionTypeDecomposition, CycleObstruction, Decision,
    ElementaryCompressionMap, MapError, RegularMap, Summand, SummandStructure,
};
pub use bratteli::{bratteli, connecting_matrix, is_essentially_unital, BratteliDiagram, ConnectingMatrix, Node};
pub use envelope::{
    classify_uhf, envelope_diagram, mark_maximal, silov_generators, EnvelopeError, EnvelopeResult, SilovGenerators,
    UhfDescriptor,
};
pub use system::{telescope, triangular_system_from_bratteli, DirectSystem, SystemError, TailMode, TelescopedSystem};
