//! Exact rational arithmetic and eventually periodic base-4 expansions.
//!
//! Every classifier works on these types; floating point appears only in
//! the simulation harness.

mod base4;
mod rational;

pub use base4::{digit_half_weight, half_weight_of_digits, to_base4, Base4Expansion, HalfWeight};
pub use rational::Rational;
