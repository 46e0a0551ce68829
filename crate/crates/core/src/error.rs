use thiserror::Error;

/// Invalid model constants.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("shortcut range empty: local radius {local_radius} >= shortcut range {shortcut_range}")]
    ShortcutRangeEmpty { local_radius: f64, shortcut_range: f64 },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl ModelError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Self::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// A graph that breaks one of the structural invariants.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("node {0} is out of range")]
    NodeOutOfRange(u32),
    #[error("self-loop at node {0}")]
    SelfLoop(u32),
    #[error("duplicate {kind} edge ({u}, {v})")]
    DuplicateEdge { kind: &'static str, u: u32, v: u32 },
    #[error("{kind} edge ({u}, {v}) is listed by {u} but not by {v}")]
    Asymmetric { kind: &'static str, u: u32, v: u32 },
    #[error("{kind} edge ({u}, {v}) has length {length}, violating the local radius {local_radius}")]
    EdgeLength {
        kind: &'static str,
        u: u32,
        v: u32,
        length: f64,
        local_radius: f64,
    },
    #[error("node {id} at ({x}, {y}) lies outside the torus")]
    PositionOutOfRange { id: u32, x: f64, y: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Failure while reading the versioned graph text format.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid graph: {0}")]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FormatError {
    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        Self::Syntax {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("no eligible sample nodes")]
    NoEligibleSamples,
    #[error("graph has no shortcuts")]
    NoShortcuts,
    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),
}

/// Contract violations of the routing entry points.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RouteError {
    #[error("node {id} is out of range for a graph of {len} nodes")]
    InvalidNode { id: u32, len: usize },
    #[error("hop budget must be at least 1")]
    ZeroBudget,
    #[error("node {id} lies at distance {distance} from the target, inside the local radius {local_radius}")]
    TooCloseToTarget { id: u32, distance: f64, local_radius: f64 },
}
