//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph too large: {what} = {got}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        got: usize,
        cap: usize,
    },
    #[error("vertex sets overlap")]
    OverlappingSets,
    #[error("ambient degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: i64, right: i64 },
    #[error("edge set does not leave the graph connected")]
    DisconnectedSubgraph,
    #[error("morphism does not preserve the genus (b1 {from} -> {to})")]
    GenusDropping { from: usize, to: usize },
    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),
    #[error("stability condition is structurally malformed: {0}")]
    StructuralStability(String),
    #[error("stability condition violates its axioms ({0} violations)")]
    InvalidStability(usize),
    #[error("polarization is not general: {0}")]
    NotGeneral(String),
    #[error("polarization has non-integer total degree")]
    NonIntegerDegree,
    #[error("tree function is not of numerical N-type")]
    NotNumericalN,
    #[error("adapted spanning trees disagree on subset {0}; input is not of numerical N-type")]
    AdaptedTreeDisagreement(String),
    #[error("set is not an upper set")]
    NotUpperSet,
    #[error("not a spanning tree of the graph")]
    NotSpanningTree,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
