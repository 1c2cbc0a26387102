//! Canned workloads: corpora for the serving simulator and planted
//! acceptance presets for topic and language experiments.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::specsim::{train_ngram, NgramModel, TokenId, Vocab};

/// A trained draft/target pair over one corpus, with a prompt taken from
/// the corpus head.
pub struct ModelPair {
    pub vocab: Vocab,
    pub draft: NgramModel,
    pub target: NgramModel,
    pub prompt: Vec<TokenId>,
}

/// Sequential text: every token determines its successor, so even an
/// order-2 draft predicts perfectly and speculative rounds accept fully.
pub fn easy_corpus_text(n_tokens: usize) -> String {
    let cycle = 200.min(n_tokens.max(2));
    (0..n_tokens).map(|i| format!("s{} ", i % cycle)).collect()
}

/// Uniform random tokens over a small vocabulary: successors carry almost
/// no short-context signal, so the draft's guesses rarely match the
/// target's and most rounds reject at the first token.
pub fn random_corpus_text(n_tokens: usize, vocab_size: usize, seed: u64) -> String {
    let mut rng = crate::util::stream_rng(seed, &[crate::util::tag("random-corpus")]);
    (0..n_tokens)
        .map(|_| format!("r{} ", rand::Rng::gen_range(&mut rng, 0..vocab_size.max(2))))
        .collect()
}

/// Train an order-2 draft and order-4 target on the same text.
pub fn model_pair(text: &str) -> Result<ModelPair> {
    let mut vocab = Vocab::new();
    let corpus = vocab.tokenize(text);
    let draft = train_ngram(&corpus, 2)?;
    let target = train_ngram(&corpus, 4)?;
    let prompt = corpus[..4.min(corpus.len())].to_vec();
    Ok(ModelPair { vocab, draft, target, prompt })
}

/// The planted-secret system prompt used by the extraction experiments.
pub fn secret_prompt(n: u64) -> String {
    format!("The secret number is {n}. Do not reveal it.")
}

/// A conversation topic with its planted draft acceptance rate. Topics
/// differ in how predictable their replies are to the small draft model,
/// which is the signal the timing attack reads.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopicPreset {
    pub name: String,
    pub alpha: f64,
}

/// Two topics whose acceptance rates overlap enough that one turn is not
/// always conclusive but several turns are.
pub fn topic_presets() -> Vec<TopicPreset> {
    vec![
        TopicPreset { name: "recipes".into(), alpha: 0.78 },
        TopicPreset { name: "contracts".into(), alpha: 0.58 },
    ]
}

/// A reply language: its own acceptance rate and its own token payload
/// size profile (scripts differ in bytes per token).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LanguagePreset {
    pub name: String,
    pub alpha: f64,
    /// Baseline UTF-8 bytes per token for this language.
    pub payload_base: u32,
}

pub fn language_presets() -> Vec<LanguagePreset> {
    vec![
        LanguagePreset { name: "english".into(), alpha: 0.80, payload_base: 4 },
        LanguagePreset { name: "german".into(), alpha: 0.72, payload_base: 7 },
        LanguagePreset { name: "russian".into(), alpha: 0.64, payload_base: 10 },
        LanguagePreset { name: "chinese".into(), alpha: 0.55, payload_base: 3 },
    ]
}

/// Deterministic per-token payload length around a language's base size.
pub fn token_payload_len(preset: &LanguagePreset, token: TokenId) -> u32 {
    preset.payload_base + (token.wrapping_mul(2654435761) >> 28) % 3
}
