//! Couplings between the random u-graph process and the random F-graph
//! process for nice patterns `F`.
//!
//! The crate covers the whole pipeline used by the experiment harness:
//!
//! * [`hypergraph`]: u-graphs, r-uniform multi-hypergraphs and F-graphs,
//! * [`pattern`]: analysis of the fixed pattern (densities, connectivity,
//!   automorphisms, niceness) and copy enumeration inside host graphs,
//! * [`params`]: the critical-window probabilities and related formulas,
//! * [`bad_events`]: detectors for the five bad events,
//! * [`coupling`]: the sequential static coupling with exact conditional
//!   probabilities,
//! * [`process`]: the random processes, hitting times and process couplings,
//! * [`factor`]: F-factor and perfect-matching search via exact cover.
//!
//! Probability-valued code is generic over [`Probability`], so the same
//! routines run in `f64` for simulation and in exact rationals for checks.

pub mod bad_events;
pub mod combinatorics;
pub mod coupling;
pub mod error;
pub mod factor;
pub mod hypergraph;
pub mod params;
pub mod pattern;
pub mod process;
pub mod scalar;

pub use error::{Error, Result};
pub use hypergraph::{FCopy, FGraph, RMultiHypergraph, UEdge, UGraph, VertexId};
pub use pattern::Pattern;
pub use scalar::Probability;

/// Floating-point probabilities used by the simulations.
pub type Prob = f64;

/// Exact rational probabilities used by oracle checks.
pub type ExactProb = num::BigRational;

/// Parameter set evaluated in double precision.
pub type ParamSet64 = params::ParamSet<f64>;

/// Conditional-probability engine running in double precision.
pub type Engine64 = coupling::prob::ConditionalEngine<f64>;

/// Conditional-probability engine running in exact rational arithmetic.
pub type ExactEngine = coupling::prob::ConditionalEngine<num::BigRational>;
