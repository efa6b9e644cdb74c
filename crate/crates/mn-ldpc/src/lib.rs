//! MacKay-Neal LDPC codes over GF(2^m) with belief-propagation decoding.
//!
//! The crate implements the full simulation pipeline for MN codes: a source
//! vector `s` of N symbols is encoded as `t = B^-1 A s` over GF(q) using two
//! sparse matrices, transmitted bitwise over a noisy channel, and recovered
//! from the syndrome `z = B r = [A B] [s; n] = H x` by belief propagation.
//! Two message-passing schedules are provided:
//!
//! * **PUS** (parallel updating scheme): classic flooding, a full
//!   horizontal pass over all checks followed by a full vertical pass over
//!   all variables.
//! * **SUS** (sequential updating scheme): a per-column sweep in which each
//!   variable's incident check messages are refreshed and consumed
//!   immediately, so later columns see fresh information within the same
//!   iteration.
//!
//! Correlated sources are modelled as Markov chains; their statistics enter
//! the decoder both as initial priors and as per-iteration dynamic prior
//! re-estimation through the transition matrix.
//!
//! The [`harness`] module drives seeded Monte-Carlo experiments comparing
//! the two schedules (iteration counts, bit error rates, per-iteration
//! correction gain curves) and writes deterministic CSV reports.

pub mod channel;
pub mod code;
pub mod decoder;
mod error;
pub mod gf;
pub mod harness;
pub mod selftest;
pub mod source;
pub mod sparse;

pub use error::{Error, Result};
