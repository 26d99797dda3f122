//! Alphabets, words, subshifts of finite type, the shift metric, growth
//! templates, and closed-form index sets.

mod index_set;
mod sft;
mod template;
mod word;

pub use index_set::{IndexSet, PatternAtom};
pub use sft::{SftDescr, LANGUAGE_CAP};
pub use template::{RatioLimit, Template};
pub use word::{shift_distance, EvPeriodic, ShiftDistance, Symbol, Word};
