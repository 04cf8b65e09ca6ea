use thiserror::Error;

/// Structural problems with an environment, problem, or controller.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate {kind} identifier `{name}`")]
    DuplicateIdentifier { kind: &'static str, name: String },
    #[error("unknown {kind} `{name}`")]
    DanglingIdentifier { kind: &'static str, name: String },
    #[error("state `{0}` has no observation")]
    MissingObservation(String),
    #[error("state `{0}` has more than one observation")]
    DuplicateObservation(String),
    #[error("distribution for ({state}, {action}) sums to {sum}, expected 1")]
    ProbabilitySum { state: String, action: String, sum: String },
    #[error("negative probability in distribution for ({state}, {action})")]
    NegativeProbability { state: String, action: String },
    #[error("transition ({state}, {action}) declared twice")]
    DuplicateTransition { state: String, action: String },
    #[error("`stop` is reserved and cannot name an action")]
    ReservedAction,
    #[error("{0} set is empty")]
    Empty(&'static str),
    #[error("controller state {q} out of range (controller has {n} states)")]
    ControllerStateOutOfRange { q: usize, n: usize },
    #[error("parameter `{name}` out of range: {reason}")]
    ParameterOutOfRange { name: String, reason: String },
    #[error("unknown domain `{0}`")]
    UnknownDomain(String),
    #[error("unknown parameter `{param}` for domain `{domain}`")]
    UnknownParameter { domain: String, param: String },
}

/// A text-format error with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unknown directive `{0}`")]
    UnknownDirective(String),
    #[error("{0}")]
    Syntax(String),
    #[error("invalid probability `{0}`")]
    BadProbability(String),
    #[error("invalid integer `{0}`")]
    BadInteger(String),
    #[error("missing `{0}` declaration")]
    Missing(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
}
