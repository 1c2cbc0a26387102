//! Deterministic virtual-time simulator of a language-model server running
//! speculative decoding over toy draft/target models.

mod gap;
mod generate;
mod ngram;
mod planted;
mod scenario;

pub use gap::{answer_with_gap, question_gap_presets, ScriptedGapResponder};
pub use generate::{
    baseline_generate, span_ns, speculative_generate, EventKind, GenEvent, SpeculativeConfig,
};
pub use ngram::{train_ngram, NgramModel, TokenId, Vocab};
pub use planted::{planted_generate, PlantedRounds};
pub use scenario::{Predicate, Scenario};
