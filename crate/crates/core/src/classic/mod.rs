//! Classical embeddings built from first exits, plus the embedder for
//! arbitrary laws on the integers.

mod azema_yor;
mod chacon_walsh;
mod hall;
mod minimal;

pub(crate) use azema_yor::site_keys;
pub use azema_yor::{azema_yor_check, AzemaYorVerdict, ThresholdTable};
pub use chacon_walsh::{
    chip_apply, chw_search, ChipSequence, ChipStep, ChwSearchOptions, ChwVerdict,
};
pub use hall::{hall_rule, PairWeight, RandomizedRule};
pub use minimal::{minimal_embed_rule, AtomSource, GeometricAtoms, MinimalRule, RankedAtoms};
