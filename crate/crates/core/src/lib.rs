//! Graphon-valued stochastic processes driven by vertex-type fluctuations.
//!
//! The crate is organised around the objects of the model:
//!
//! - [`graphon`]: step-function graphons, labelled graphs with incremental
//!   triangle counts, cut norms/distances and homomorphism densities.
//! - [`driving`]: Poisson clock schedules, vertex ages and types, empirical
//!   and limiting type distributions with their generalised inverses.
//! - [`dynamics`]: event-driven simulators for the illustrative, mean-field
//!   and frozen-uniform graph processes, dynamic relabelling and path
//!   statistics.
//! - [`fluid`]: closed-form edge probabilities, induced reference graphons
//!   and the characteristic integrator for the fluid-limit equation.
//! - [`ldp`]: Bernoulli relative entropy, the static graphon rate, the
//!   age-process transition kernel and the path rate of the driving process.
//! - [`varopt`]: entropy minimisation under an edge-density constraint
//!   (lower and upper tails) and rate curves.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod driving;
pub mod dynamics;
pub mod error;
pub mod fluid;
pub mod graphon;
pub mod ldp;
pub mod rng;
pub mod stats;
pub mod varopt;

pub use error::{Error, Result};
