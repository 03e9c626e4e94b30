//! Probability measures on the integers with their potential and barycenter
//! functions.

mod barycenter;
mod measure;
mod potential;

pub use barycenter::{barycenter, BarycenterFunction};
pub use measure::IntegerMeasure;
pub(crate) use potential::chord_in_place;
pub use potential::{measure_from_potential, potential, PotentialFunction};
