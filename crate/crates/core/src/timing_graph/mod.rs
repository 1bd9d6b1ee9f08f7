//! Timing graphs: ingestion, path enumeration, shared-edge path
//! correlations and the composed delay analysis.

pub mod analysis;
pub mod covariance;
pub mod graph;
pub mod paths;

pub use analysis::{graph_delay_analysis, GraphAnalysis};
pub use covariance::{
    accumulated_delay_params, path_covariance, sampled_path_correlation, PathCovariance,
};
pub use graph::{
    diamond_cascade, normalize_source_sink, parse_graph, parse_graph_auto, parse_graph_json, Edge,
    EdgeSpec, TimingGraph,
};
pub use paths::{enumerate_paths, PathSet, DEFAULT_PATH_CAP};
