//! Sharp identification regions for discrete choice with incomplete
//! (interval-order or Knightian) preferences.

pub mod artstein;
pub mod binary;
pub mod choice;
pub mod dist;
pub mod elections;
pub mod error;
pub mod exec;
pub mod knightian;
pub mod parametric;
pub mod polytope;
pub mod rational;
pub mod sim;
pub mod svg;

pub use error::{Error, Result};
pub use rational::Rational;
