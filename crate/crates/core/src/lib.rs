//! Simulation laboratory for the contact process on random d-regular graphs.
//!
//! The crate is organized around six pieces:
//!
//! - [`graph`]: uniform random d-regular graphs (rejection-sampled pairing
//!   model) plus structural queries: balls, tree-likeness, diameter, edge
//!   expansion.
//! - [`structure`]: combinatorial constructions used by the extinction-time
//!   analysis: black/white coloring of vertex sets by free branches, grey
//!   closures, severed trees, vertex-disjoint short path systems.
//! - [`engine`]: the contact process itself, in two law-equivalent modes:
//!   an active-clock event loop for long extinction runs, and a materialized
//!   mark/arrow field supporting coupling and the dual process.
//! - [`oracle`]: exact answers on small graphs (expected extinction time by
//!   linear solve over the full state space, transient probabilities by
//!   uniformization) used to validate the engine.
//! - [`experiments`]: the metastability harness: growth-rate and survival
//!   estimation on trees, good-vertex scans, extinction-time ensembles with
//!   the exponential-limit test, spread probabilities, coupling deficiency,
//!   and the regrowth (bootstrap) step.
//! - [`stats`]: the small statistical toolkit the harness relies on
//!   (Kolmogorov-Smirnov machinery, bootstrap p-values, chi-square, least
//!   squares).
//!
//! All stochastic entry points take an explicit 64-bit seed and derive
//! per-replica substreams from it (see [`rng`]), so results are reproducible
//! bit-for-bit and independent of worker scheduling.

pub mod engine;
pub mod experiments;
pub mod graph;
pub mod numfmt;
pub mod oracle;
pub mod rng;
pub mod stats;
pub mod structure;
