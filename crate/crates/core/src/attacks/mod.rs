//! Adversary procedures: passive A/B GMM testing with PR sweeps,
//! multi-class sequence classification, boosting 1-of-N recovery, the
//! second-token accept/reject oracle, digit-by-digit secret extraction,
//! black-box suffix search, and the white-box difficulty scorer with
//! greedy discrete optimization.
//!
//! Everything here consumes `Trace` / `TokenTimingSignature` values only;
//! those types carry no token content, so the metadata firewall is a type
//! boundary, not a convention.

mod ab;
mod boost;
mod convnet;
mod extract;
mod features;
mod model_io;
mod multiclass;
mod prcurve;
mod second_token;
mod suffix;
mod whitebox;

pub use ab::{fit_ab, score_ab, AbConfig, SignatureGmmPair};
pub use boost::{
    boost_fit, boost_fit_features, boost_infer, boost_infer_features, BoostConfig, BoostEnsemble,
};
pub use convnet::{train_convnet, ConvNetClassifier, ConvNetConfig};
pub use extract::{
    extract_secret, extract_secret_with, ExtractionConfig, ExtractionResult, PositionVote,
};
pub use features::{featurize_delays, featurize_signature, featurize_trace, FeatureSpec};
pub use model_io::{load_model, save_model, ModelFile, ModelKind, MODEL_FORMAT_VERSION};
pub use multiclass::{
    fit_multiclass, multi_turn_accuracy, Arch, GmmMulticlass, MulticlassConfig,
    SignatureClassifier,
};
pub use prcurve::{pr_sweep, PrCurve, PrPoint};
pub use second_token::{second_token_delay, FirstRound, SecondTokenOracle};
pub use suffix::{suffix_search, PlantedRephraser, Rephraser, SearchOutcome, Template};
pub use whitebox::{
    difficulty, greedy_coordinate_search, rollout_difficulty, DifficultyScorer, GcsConfig,
    GcsOutcome,
};
