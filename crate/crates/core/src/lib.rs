//! Constructive machinery for powers of Hamiltonian cycles in dense
//! multipartite graphs.
//!
//! The crate is organised by stage: the host [`graph`] model and its
//! reductions, the [`paths`] formalism, the partition-and-sequence planner
//! in [`sequencing`], absorber gadgets in [`absorber`], exact connecting-walk
//! counting in [`connect`], fractional clique tilings and path covers in
//! [`tiling`], brute-force decision procedures in [`oracle`], and the
//! end-to-end [`pipeline`] plus the threshold [`scan`].

pub mod absorber;
pub mod config;
pub mod connect;
pub mod error;
pub mod graph;
pub mod oracle;
pub mod paths;
pub mod pipeline;
pub mod ratio;
pub(crate) mod rng;
pub mod scan;
pub mod sequencing;
pub mod tiling;

pub use config::Config;
pub use error::{Error, Result};
pub use graph::MultipartiteGraph;
pub use ratio::Ratio;
