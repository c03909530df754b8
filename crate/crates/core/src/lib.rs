//! Union-Find decoding of surface-code matching graphs with soft outputs
//! that estimate how close a sample came to a logical failure.
//!
//! The pipeline is: build or load a [`DecodingGraph`], draw an
//! [`ErrorPattern`] and its [`Syndrome`], grow clusters with [`decode`], then
//! evaluate one of the gap estimators in [`softout`] on the resulting
//! [`ClusterState`]. [`harness`] runs this over many samples.

pub mod decoder;
pub mod fit;
pub mod graph;
pub mod harness;
pub mod sampler;
pub mod softout;

pub use decoder::{decode, peel, ClusterState, Correction, DecodeError};
pub use fit::{fit, FitError, FitModel, FitResult};
pub use graph::{
    build_phenomenological, build_phenomenological_multi, db_to_nat, load_graph, nat_to_db, save_graph,
    weight_from_prob, DecodingGraph, Edge, GraphError, NodeId, Weight,
};
pub use sampler::{sample_errors, syndrome_of, ErrorPattern, SampleError, SeedSpec, Syndrome};
pub use softout::{
    bounded_cluster_gap, cluster_gap, extra_cluster_gap, extra_cluster_gap_cg, multi_boundary_extra_gap,
    ContractedView, GapKind, GapResult,
};
