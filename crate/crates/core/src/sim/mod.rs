//! Monte Carlo simulation of stopping rules and exact evaluation of their
//! stopped laws on small horizons.

mod exact;
mod rng;
mod simulate;

pub use exact::{exact_law, ExactLaw, MAX_EXACT_STAGE};
pub use rng::RngStream;
pub use simulate::{atom_tolerance, simulate, AtomCheck, SimOptions, SimReport, DEFAULT_STAGE_CAP};
