use thiserror::Error;

/// Errors raised by graph construction, the spectral routines and the
/// theorem checkers. Every variant names the violated hypothesis or invariant.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate edge {u}-{v}")]
    DuplicateEdge { u: usize, v: usize },

    #[error("asymmetric edge {u}-{v}: weight {forward} one way, {backward} the other")]
    AsymmetricEdge {
        u: usize,
        v: usize,
        forward: f64,
        backward: f64,
    },

    #[error("edge {u}-{v} has nonpositive or non-finite weight {w}")]
    NonPositiveWeight { u: usize, v: usize, w: f64 },

    #[error("declared weight bounds [{w_min}, {w_max}] do not contain the edge weights")]
    WeightBounds { w_min: f64, w_max: f64 },

    #[error("declared max degree {declared} below actual max degree {actual}")]
    DegreeBound { declared: usize, actual: usize },

    #[error("inadmissible family parameters: {0}")]
    InadmissibleFamily(String),

    #[error("random regular generation failed after {0} attempts")]
    RetryBudgetExhausted(usize),

    #[error("graph is not connected ({components} components)")]
    Disconnected { components: usize },

    #[error("graph has an isolated vertex {0}")]
    IsolatedVertex(usize),

    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("graph has no edges")]
    NoEdges,

    #[error("graph is not unit-weighted (edge {u}-{v} has weight {w})")]
    NotUnitWeighted { u: usize, v: usize, w: f64 },

    #[error("graph is not regular (vertex {vertex} has degree {degree}, expected {expected})")]
    NotRegular {
        vertex: usize,
        degree: usize,
        expected: usize,
    },

    #[error("exact expansion check requires n <= {max}, got n = {n}")]
    ExactTooLarge { n: usize, max: usize },

    #[error("eigensolver cap exceeded: n = {n} > cap = {cap}")]
    SolverCap { n: usize, cap: usize },

    #[error("eigensolver did not converge for eigenvalue {index} after {iterations} iterations")]
    NonConvergence { index: usize, iterations: usize },

    #[error("power of the trace must be even and at most {max}, got {k}")]
    InvalidPower { k: usize, max: usize },

    #[error("vertex set is not an {r}-net of the graph")]
    NotANet { r: usize },

    #[error("net is unverified or has radius {actual}, expected {expected}")]
    NetMismatch { expected: usize, actual: usize },

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("negative transport value {value} at ({from}, {to})")]
    NegativeTransport { from: usize, to: usize, value: f64 },

    #[error("fit window too short: {points} points, need at least {min}")]
    WindowTooShort { points: usize, min: usize },

    #[error("cell of captain {captain} is not connected")]
    DisconnectedCell { captain: usize },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
