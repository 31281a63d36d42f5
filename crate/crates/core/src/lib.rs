//! Coincidence-similarity analysis of weighted bipartite networks.
//!
//! * [`similarity`]: Jaccard, interiority and coincidence indices over
//!   non-negative vectors, plus parallel pairwise matrices.
//! * [`bipartite`]: the network model, direct/reverse feature matrices,
//!   coincidence-similarity networks and projections.
//! * [`generator`]: seeded modular networks with planted groups and
//!   degree-preserving scrambling.
//! * [`evaluation`]: thresholding, between/within-group error rates, sweeps
//!   and multi-realization ensembles.
//! * [`io`]: CSV, edge-list, GraphML and DOT readers and writers, and run
//!   metadata.

pub mod bipartite;
pub mod evaluation;
pub mod generator;
pub mod io;
pub mod similarity;

pub use bipartite::{
    BipartiteNetwork, IsolatedNodes, Orientation, ProjectedNetwork, Side, SimilarityNetwork,
};
pub use evaluation::{
    ensemble, error_sweep, group_errors, threshold_graph, EnsembleSummary, ErrorCurve, ErrorPair,
};
pub use generator::{generate, reference_model, rewire, GeneratorConfig, GroundTruth, Partition};
pub use similarity::{coincidence, interiority, jaccard, pairwise_similarity, SimilarityTriple};
