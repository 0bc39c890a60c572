use thiserror::Error;

use crate::topology::{EdgeId, NodeId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid device parameters: {0}")]
    InvalidParams(String),

    #[error("invalid grid dimensions {rows}x{cols} (both must be at least 2)")]
    InvalidDimensions { rows: usize, cols: usize },

    #[error("node sampling failed after {rejections} consecutive rejections ({placed} of {target} nodes placed)")]
    SamplingFailed {
        placed: usize,
        target: usize,
        rejections: usize,
    },

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),

    #[error("edge {0} listed more than once")]
    DuplicateEdge(EdgeId),

    #[error("edge set is empty")]
    EmptyEdgeSet,

    #[error("nodes {0} and {1} are not connected")]
    Disconnected(NodeId, NodeId),

    #[error("singular circuit: node {0} is not connected to any fixed-potential node")]
    FloatingNode(NodeId),

    #[error("non-finite conductance on edge {0}")]
    NonFiniteConductance(EdgeId),

    #[error("source specification needs at least {needed} fixed nodes, got {got}")]
    TooFewSources { needed: usize, got: usize },

    #[error("linear solver did not reach the residual target after {iterations} iterations (residual {residual:e} A)")]
    SolverStalled { iterations: usize, residual: f64 },

    #[error("simulation did not reach steady state within {steps} steps")]
    NotConverged { steps: usize },

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("no current flows through the measured edges")]
    NoCurrent,

    #[error("no ON path joins {input} and {output} ({} ON units)", on_edges.len())]
    NoOnPath {
        input: NodeId,
        output: NodeId,
        on_edges: Vec<EdgeId>,
    },

    #[error("at least {needed} cities are required, got {got}")]
    TooFewCities { needed: usize, got: usize },

    #[error("instance size {0} outside the exact solver range 3..=15")]
    TspSizeOutOfRange(usize),

    #[error("network is not a regular grid")]
    NotAGrid,

    #[error("column {column} is not strictly between the terminal columns")]
    InvalidColumn { column: usize },

    #[error("cut does not separate {0} from {1}")]
    CutDoesNotSeparate(NodeId, NodeId),

    #[error("network has {0} nodes, above the dense solver limit")]
    TooLarge(usize),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}
