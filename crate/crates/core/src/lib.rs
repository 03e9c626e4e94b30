//! Exact tools for embedding integer-valued laws in a simple symmetric random
//! walk. Classifiers return certificates; certificates compile into stopping
//! rules that can be simulated or evaluated exactly.

pub mod classic;
pub mod engine;
pub mod error;
pub mod measures;
pub mod numerics;
pub mod par;
pub mod sim;
pub mod ui;

pub use error::{Error, Result};
pub use measures::IntegerMeasure;
pub use numerics::Rational;
