//! Outage probability of a CoMP cellular downlink under stochastic geometry.
//!
//! The decision variable is Ω = θY − X, where X is the aggregate signal power
//! from the cooperation annulus and Y the interference power; outage is
//! P(Ω > 0) (SIR) or P(Ω > −θσ²) (SINR). Four routes compute it:
//! [`gilpelaez`] inversion, [`spa`] saddle point approximations, [`charlier`] orthogonal-polynomial
//! expansions from cumulants, and [`mc`] simulation.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cgf;
pub mod charlier;
pub mod cli;
pub mod cumulants;
pub mod error;
pub mod gilpelaez;
pub mod mc;
pub mod quad;
pub mod result;
pub mod spa;
pub mod specfun;

pub use error::{Error, Result};
pub use result::{BaseKind, CharlierBase, Method, OutageResult};
