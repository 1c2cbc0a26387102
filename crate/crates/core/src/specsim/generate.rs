use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specsim::ngram::{NgramModel, TokenId};
use crate::util::{lognormal_factor, ms_to_ns, scale_ns, stream_rng};
use crate::Nanos;

/// Timing parameters for the speculative/baseline generation loops.
///
/// Costs in the JSON config are fractional milliseconds; in memory they are
/// integer nanoseconds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpeculativeConfig {
    /// Draft tokens proposed per round.
    pub k: usize,
    pub draft_step_cost_ns: Nanos,
    pub verify_cost_ns: Nanos,
    pub base_autoregressive_cost_ns: Nanos,
    /// Multiplicative lognormal sigma on round durations (mean-one).
    pub jitter_sigma: f64,
    pub seed: u64,
    /// Emit an extra target token after a fully accepted round. Off by
    /// default; the round then emits exactly k tokens.
    pub bonus_token: bool,
}

impl Default for SpeculativeConfig {
    fn default() -> Self {
        Self {
            k: 5,
            draft_step_cost_ns: ms_to_ns(2.0),
            verify_cost_ns: ms_to_ns(14.0),
            base_autoregressive_cost_ns: ms_to_ns(14.0),
            jitter_sigma: 0.02,
            seed: 0,
            bonus_token: false,
        }
    }
}

impl SpeculativeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::BadConfig("k must be >= 1".into()));
        }
        if self.draft_step_cost_ns == 0
            || self.verify_cost_ns == 0
            || self.base_autoregressive_cost_ns == 0
        {
            return Err(Error::BadConfig("all costs must be > 0".into()));
        }
        if self.jitter_sigma < 0.0 {
            return Err(Error::BadConfig("jitter_sigma must be >= 0".into()));
        }
        Ok(())
    }

    /// Cost of one speculative round: k draft steps plus one verify pass.
    pub fn round_cost_ns(&self) -> Nanos {
        self.k as Nanos * self.draft_step_cost_ns + self.verify_cost_ns
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut c = self.clone();
        c.seed = seed;
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    AcceptedDraft,
    Correction,
    Baseline,
}

/// One token emission with virtual timestamp and round provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenEvent {
    pub token: TokenId,
    pub t_emit: Nanos,
    pub round: u32,
    pub kind: EventKind,
}

/// Speculative decoding with greedy-match acceptance.
///
/// Per round the draft proposes k tokens, the target verifies them in one
/// pass, the agreeing prefix is accepted and the first disagreement is
/// replaced by the target's token. All emissions of a round share the
/// round-end timestamp (burst emission). The emitted text equals the
/// target's own greedy decoding by construction.
pub fn speculative_generate(
    prompt: &[TokenId],
    draft: &NgramModel,
    target: &NgramModel,
    cfg: &SpeculativeConfig,
    max_tokens: usize,
) -> Result<Vec<GenEvent>> {
    cfg.validate()?;
    if prompt.is_empty() {
        return Err(Error::EmptyPrompt);
    }
    if max_tokens == 0 {
        return Err(Error::ZeroTokens);
    }
    if draft.order() > target.order() {
        return Err(Error::BadConfig("draft order must not exceed target order".into()));
    }

    let mut rng = stream_rng(cfg.seed, &[crate::util::tag("specgen")]);
    let mut ctx: Vec<TokenId> = prompt.to_vec();
    let mut events = Vec::with_capacity(max_tokens);
    let mut t: Nanos = 0;
    let mut round: u32 = 0;

    while events.len() < max_tokens {
        // Draft proposes k tokens greedily.
        let mut proposal = Vec::with_capacity(cfg.k);
        {
            let mut dctx = ctx.clone();
            for _ in 0..cfg.k {
                let tok = draft.greedy(&dctx);
                dctx.push(tok);
                proposal.push(tok);
            }
        }
        // Target verifies in one pass; accept prefix, correct first mismatch.
        let mut emitted = Vec::with_capacity(cfg.k + 1);
        let mut vctx = ctx.clone();
        let mut rejected = false;
        for &p in &proposal {
            let want = target.greedy(&vctx);
            if want == p {
                emitted.push((p, EventKind::AcceptedDraft));
                vctx.push(p);
            } else {
                emitted.push((want, EventKind::Correction));
                rejected = true;
                break;
            }
        }
        if !rejected && cfg.bonus_token {
            emitted.push((target.greedy(&vctx), EventKind::Correction));
        }

        let dur = scale_ns(cfg.round_cost_ns(), lognormal_factor(&mut rng, cfg.jitter_sigma));
        t += dur;
        for (tok, kind) in emitted {
            if events.len() >= max_tokens {
                break;
            }
            ctx.push(tok);
            events.push(GenEvent { token: tok, t_emit: t, round, kind });
        }
        round += 1;
    }
    Ok(events)
}

/// One token per autoregressive step, no speculation.
pub fn baseline_generate(
    prompt: &[TokenId],
    target: &NgramModel,
    cfg: &SpeculativeConfig,
    max_tokens: usize,
) -> Result<Vec<GenEvent>> {
    cfg.validate()?;
    if prompt.is_empty() {
        return Err(Error::EmptyPrompt);
    }
    if max_tokens == 0 {
        return Err(Error::ZeroTokens);
    }
    let mut rng = stream_rng(cfg.seed, &[crate::util::tag("basegen")]);
    let mut ctx: Vec<TokenId> = prompt.to_vec();
    let mut events = Vec::with_capacity(max_tokens);
    let mut t: Nanos = 0;
    for i in 0..max_tokens {
        let dur = scale_ns(
            cfg.base_autoregressive_cost_ns,
            lognormal_factor(&mut rng, cfg.jitter_sigma),
        );
        t += dur;
        let tok = target.greedy(&ctx);
        ctx.push(tok);
        events.push(GenEvent { token: tok, t_emit: t, round: i as u32, kind: EventKind::Baseline });
    }
    Ok(events)
}

/// Final timestamp of an event stream, 0 when empty.
pub fn span_ns(events: &[GenEvent]) -> Nanos {
    events.last().map(|e| e.t_emit).unwrap_or(0)
}
