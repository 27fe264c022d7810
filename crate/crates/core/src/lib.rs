//! Similarity of attributed graphs through continuous-time quantum walks.
//!
//! Two graphs are joined into a merged graph, two walks with opposite-sign
//! and same-sign degree-weighted start states evolve on it, and the quantum
//! Jensen-Shannon divergence between their time-averaged density operators
//! scores how alike the graphs are. Isomorphic graphs reach the maximum of 1.
//!
//! On top of that sit node-pair divergence tables with Hungarian matching,
//! and a k-nearest-neighbour classifier over an XOR edge distance.
//!
//! The `parallel` feature (on by default) runs batch loops on rayon; see
//! [`par::Execution`].

// `!(x > 0.0)` is used on purpose so NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod ctqw;
pub mod error;
pub mod graph;
pub mod io;
pub mod matching;
pub mod par;
pub mod qjsd;
pub mod rng;
pub mod spectral;

pub use classify::{evaluate, knn_classify, xor_distance, xor_mismatch, Dataset, EvaluationReport, Metric, XorMode};
pub use ctqw::{
    avg_density_finite, avg_density_infinite, avg_density_quadrature, evolve, initial_states, DensityMatrix,
    Hamiltonian, Horizon, WalkState,
};
pub use error::{Error, Result};
pub use graph::{
    inter_edge_weight, merge_graphs, perturb, synth_prototype, Graph, InterEdges, InterWeight, MergePolicy,
    MergedGraph,
};
pub use io::{load_attributes, load_graph, GraphFormat};
pub use matching::{hungarian, optimal_node_matching, Assignment, CostTransform, NodeMatching};
pub use par::Execution;
pub use qjsd::{
    graph_qjsd, node_pair_qjsd, qjsd, von_neumann_entropy, DivergenceReport, PairTopology, WalkConfig, WalkPair,
};
pub use spectral::{eig_sym, group_degenerate, Spectrum};
