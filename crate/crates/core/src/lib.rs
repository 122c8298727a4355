//! Detection of planted subgraphs in semi-random Erdős–Rényi graphs.
//!
//! The crate is organised around the pipeline of one experiment:
//! sample a graph ([`random`]), let a monotone adversary delete edges
//! ([`adversary`]), run a detector ([`detectors`], backed by the convex
//! programs in [`solver`]) and estimate risks over many trials ([`lab`]).
//! [`graph`], [`family`], [`copies`], [`density`], [`search`] and
//! [`spectral`] hold the exact combinatorial and spectral quantities.

pub mod adversary;
pub mod copies;
pub mod density;
pub mod detectors;
pub mod error;
pub mod family;
pub mod graph;
pub mod lab;
pub mod random;
pub mod search;
pub mod solver;
pub mod spectral;

pub use error::{LabError, Result};
pub use family::{make_family, FamilySpec};
pub use graph::{build_graph, Edge, Graph};
