//! Heavy-tailed survival functions: exact representation, convolution tails, single-big-jump
//! probabilities, tail-class diagnostics and a seeded Monte Carlo oracle.

pub mod error;
pub mod logmath;
pub mod mc;
pub mod quad;
pub mod catalog;
pub mod classify;
pub mod cli;
pub mod convolution;
pub mod tailfn;
pub mod transform;

pub use error::{Error, Result};
pub use tailfn::{Segment, SegmentForm, TailFunction};
