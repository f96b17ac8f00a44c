use thiserror::Error;

/// Library-wide error type.
///
/// Variants are grouped by who is at fault: `Parse`/`Format`/`Empty`/`Input`/
/// `IllFormed`/`Degenerate`/`Duplicate`/`Containment` describe bad input data,
/// `Argument`/`Config`/`Unsupported` describe bad call parameters, and
/// `Contract` flags a broken internal invariant (a bug in the caller or in
/// this crate, never in the data).
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("ill-formed input: {0}")]
    IllFormed(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("duplicate input: {0}")]
    Duplicate(String),

    #[error("containment error: {0}")]
    Containment(String),

    #[error("bad argument: {0}")]
    Argument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
