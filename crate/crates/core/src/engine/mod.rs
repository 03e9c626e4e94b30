//! Executable stopping rules compiled from classifier certificates.

mod compile;
mod path;
mod rank;
mod rule;
mod tracker;

pub use compile::{compile, matrix_law, Certificate};
pub use path::WalkPath;
pub use rank::alive_class_rank;
pub use rule::{Decision, RuleFile, StoppingRule};
pub use tracker::Tracker;
