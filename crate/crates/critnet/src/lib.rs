//! Critical scale-free random networks.
//!
//! Sublinear preferential attachment and Norros–Reittu graphs whose degree
//! tails sit exactly at exponent τ = 3 with a (log k)^{2α} correction, plus the
//! tools to measure their typical distances and check their analytic
//! structure at desk scale.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod error;
pub mod experiments;
pub mod exploration;
pub mod graph;
pub mod nr_gen;
pub mod pa_gen;
pub mod rng;
pub mod rules;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use graph::Graph;
pub use rules::AttachmentRule;
