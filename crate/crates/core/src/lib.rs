//! Exact-arithmetic toolkit for stability conditions and generalized
//! break divisors on finite multigraphs.
//!
//! The crate models dual graphs of nodal curves: multigraphs with loops
//! and parallel edges, divisors and their Picard classes, the poset of
//! divisors on spanning subgraphs, general V-stability conditions,
//! tree functions with their BD-sets, and the stratification invariants
//! of the associated fine compactified Jacobians. All arithmetic is
//! exact: integers, big integers, and big rationals.

pub mod bdset;
pub mod corpus;
pub mod divisor;
pub mod error;
pub mod multigraph;
pub mod orbit;
pub mod ratlp;
pub mod set;
pub mod spanning;
pub mod strata;
pub mod textio;
pub mod vstability;

pub use error::{Error, Result};
