//! The autonomous vertex-type process.
//!
//! Every vertex carries a Poisson clock of rate `gamma`. The age of a vertex
//! is the time since its last ring (or since time 0), and its type is a
//! transform of the age. The empirical distribution of types is the driving
//! path of the graph dynamics; as `n` grows it concentrates on the limit
//! distribution exposed by [`LimitCdf`].

mod cdf;
mod clocks;

pub use cdf::{generalized_inverse, limit_cdf, Cdf, EmpiricalCdf, LimitCdf, UniformCdf};
pub use clocks::{sample_clocks, ClockSchedule, TypeState, TypeTransform};
