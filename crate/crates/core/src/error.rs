use thiserror::Error;

/// Errors raised while reading secondary structures or tree text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: unbalanced brackets at column {column}")]
    UnbalancedBrackets { line: usize, column: usize },
    #[error("line {line}: structure has {structure} columns but the sequence has {sequence}")]
    LengthMismatch {
        line: usize,
        sequence: usize,
        structure: usize,
    },
    #[error("line {line}: illegal character {ch:?} at column {column}")]
    IllegalCharacter { line: usize, column: usize, ch: char },
    #[error("non-canonical pair {left}-{right} between bases {i} and {j}")]
    NonCanonicalPair {
        i: usize,
        j: usize,
        left: char,
        right: char,
    },
    #[error("line {line}: base {i} points to {j} but base {j} does not point back")]
    NonReciprocalPair { line: usize, i: usize, j: usize },
    #[error("pseudoknot: pairs ({i},{j}) and ({k},{l}) interleave")]
    PseudoknotDetected { i: usize, j: usize, k: usize, l: usize },
    #[error("header announces {expected} records but {found} were read")]
    BadRecordCount { expected: usize, found: usize },
    #[error("line {line}: {message}")]
    BadRecord { line: usize, message: String },
    #[error("missing {0}")]
    Missing(&'static str),
    #[error("tree text, offset {offset}: {message}")]
    TreeSyntax { offset: usize, message: String },
}

/// Errors raised by the distance computations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistanceError {
    #[error("malformed index: {0}")]
    MalformedIndex(String),
    #[error("fusion bound l = {0} exceeds the supported maximum of 3")]
    FusionBoundTooLarge(usize),
    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("color assignments come from different coarse passes")]
    ColorSetMismatch,
}

/// Cost model configuration problems.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("t must be ≥ 0 (got {0})")]
    InvalidT(f64),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}")]
    InvalidValue { key: String, value: String },
}
