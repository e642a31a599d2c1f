//! Affine automorphisms of decreasing polar codes and their interaction with
//! successive-cancellation decoding.

pub mod automorphism;
pub mod cli;
pub mod error;
pub mod gf2;
pub mod invariance;
pub mod monomial;
pub mod sim;
pub mod sc;

pub use error::{Error, Result};
