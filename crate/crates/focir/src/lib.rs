//! Time-domain analysis of fractional-order battery equivalent-circuit models.
//!
//! The crate is organized around the pipeline
//!
//! ```text
//! circuit parameters θ ──► state-space / transfer function ──► coefficient vector
//!                                                                      │
//!        recovered parameters + identifiability class ◄── inversion ◄──┘
//! ```
//!
//! - [`frac_core`]: generalized binomial coefficients, Grünwald-Letnikov
//!   weights, and the ratio recursion behind the `a_{i,j}` sequences.
//! - [`ss_sim`]: the discrete-time non-Markov state-space model, where every
//!   new state depends on the whole state history.
//! - [`tf_builder`]: dense polynomial arithmetic and assembly of the monic
//!   rational transfer function and its coefficient vector.
//! - [`ecm_models`]: Randles and n-CPE circuit definitions and their forward
//!   parameter maps.
//! - [`ident_engine`]: inversion of coefficient maps and classification of
//!   structural identifiability.

pub mod ecm_models;
pub mod error;
pub mod frac_core;
pub mod ident_engine;
pub mod ss_sim;
pub mod tf_builder;

pub use error::{Error, Result};
