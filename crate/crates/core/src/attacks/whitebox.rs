//! White-box prompt crafting. With both serving models in hand, the
//! per-token difficulty score Pr_target[y|x] - Pr_draft[y|x] predicts
//! draft rejections: large positive scores are tokens the target will
//! produce but the draft will not propose. A rollout averages that score
//! over the target's own greedy continuation, and a greedy coordinate
//! search edits a prompt token-by-token to push the rollout score in
//! either direction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specsim::{NgramModel, TokenId};

/// Paired draft/target view of next-token probabilities.
pub struct DifficultyScorer<'a> {
    pub draft: &'a NgramModel,
    pub target: &'a NgramModel,
}

/// How much more the target likes `y` after `context` than the draft does.
pub fn difficulty(scorer: &DifficultyScorer, context: &[TokenId], y: TokenId) -> f64 {
    scorer.target.prob(context, y) - scorer.draft.prob(context, y)
}

/// Mean difficulty along the target's greedy continuation of `prompt`.
pub fn rollout_difficulty(scorer: &DifficultyScorer, prompt: &[TokenId], horizon: usize) -> f64 {
    if horizon == 0 {
        return 0.0;
    }
    let mut seq = prompt.to_vec();
    let mut total = 0.0;
    for _ in 0..horizon {
        let y = scorer.target.greedy(&seq);
        total += difficulty(scorer, &seq, y);
        seq.push(y);
    }
    total / horizon as f64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GcsConfig {
    /// Full passes over the prompt positions.
    pub sweeps: usize,
    /// Rollout length used to score each candidate edit.
    pub horizon: usize,
    /// True: maximize difficulty (provoke rejections). False: minimize.
    pub maximize: bool,
}

impl Default for GcsConfig {
    fn default() -> Self {
        Self { sweeps: 3, horizon: 20, maximize: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GcsOutcome {
    pub tokens: Vec<TokenId>,
    pub score: f64,
    /// Objective after the initial evaluation and after each sweep;
    /// non-decreasing (non-increasing when minimizing) by construction.
    pub history: Vec<f64>,
    pub evaluations: u64,
}

/// Coordinate-wise greedy edit search: for each prompt position in turn,
/// try every candidate token and keep the best-scoring replacement.
pub fn greedy_coordinate_search(
    scorer: &DifficultyScorer,
    prompt: &[TokenId],
    candidates: &[TokenId],
    cfg: &GcsConfig,
) -> Result<GcsOutcome> {
    if prompt.is_empty() {
        return Err(Error::EmptyPrompt);
    }
    if candidates.is_empty() || cfg.sweeps == 0 || cfg.horizon == 0 {
        return Err(Error::BadConfig("need candidates, sweeps, and a horizon".into()));
    }
    let sign = if cfg.maximize { 1.0 } else { -1.0 };
    let mut tokens = prompt.to_vec();
    let mut evaluations = 1u64;
    let mut best = sign * rollout_difficulty(scorer, &tokens, cfg.horizon);
    let mut history = vec![sign * best];
    for _ in 0..cfg.sweeps {
        for pos in 0..tokens.len() {
            let original = tokens[pos];
            let mut best_tok = original;
            for &c in candidates {
                if c == best_tok && c == tokens[pos] {
                    continue;
                }
                tokens[pos] = c;
                evaluations += 1;
                let s = sign * rollout_difficulty(scorer, &tokens, cfg.horizon);
                if s > best {
                    best = s;
                    best_tok = c;
                }
            }
            tokens[pos] = best_tok;
        }
        history.push(sign * best);
    }
    Ok(GcsOutcome { tokens, score: sign * best, history, evaluations })
}
