use crate::error::{Error, Result};
use crate::specsim::generate::{EventKind, GenEvent, SpeculativeConfig};
use crate::specsim::ngram::TokenId;
use crate::util::{lognormal_factor, scale_ns, stream_rng, tag};
use crate::Nanos;

/// Round-shape preset: a source of per-position accept flags.
///
/// This is how workloads plant an acceptance rate without training models,
/// and how efficient-inference methods other than speculative decoding are
/// represented (as accept-run-length distributions).
#[derive(Debug, Clone)]
pub enum PlantedRounds {
    /// Accept each drafted token independently with probability `alpha`,
    /// with the flag sequence drawn deterministically from `pattern_seed`.
    /// The pattern is independent of the trial seed, so jitter 0 gives
    /// bit-identical reruns.
    Bernoulli { alpha: f64, pattern_seed: u64 },
    /// Explicit accept flags, consumed in order and repeated if exhausted.
    Flags(Vec<bool>),
}

impl PlantedRounds {
    fn flags(&self, n: usize) -> Vec<bool> {
        match self {
            PlantedRounds::Bernoulli { alpha, pattern_seed } => {
                let mut rng = stream_rng(*pattern_seed, &[tag("planted-flags")]);
                (0..n).map(|_| rand::Rng::gen_bool(&mut rng, alpha.clamp(0.0, 1.0))).collect()
            }
            PlantedRounds::Flags(f) => {
                (0..n).map(|i| f[i % f.len()]).collect()
            }
        }
    }
}

/// Generate `tokens` with the speculative round accounting but a planted
/// accept pattern instead of real draft/target models.
///
/// Each round drafts k tokens; the accepted prefix is the leading run of
/// `true` flags (capped at k); anything short of k adds one correction
/// token. Round cost and burst emission follow `speculative_generate`.
pub fn planted_generate(
    tokens: &[TokenId],
    rounds: &PlantedRounds,
    cfg: &SpeculativeConfig,
) -> Result<Vec<GenEvent>> {
    cfg.validate()?;
    if tokens.is_empty() {
        return Err(Error::ZeroTokens);
    }
    let flags = rounds.flags(tokens.len());
    let mut rng = stream_rng(cfg.seed, &[tag("planted-jitter")]);
    let mut events = Vec::with_capacity(tokens.len());
    let mut t: Nanos = 0;
    let mut pos = 0;
    let mut round: u32 = 0;
    while pos < tokens.len() {
        let mut accepted = 0;
        while accepted < cfg.k && pos + accepted < tokens.len() && flags[pos + accepted] {
            accepted += 1;
        }
        let full = accepted == cfg.k;
        let emit = if full { accepted } else { accepted + 1 };
        let emit = emit.min(tokens.len() - pos);
        let dur = scale_ns(cfg.round_cost_ns(), lognormal_factor(&mut rng, cfg.jitter_sigma));
        t += dur;
        for i in 0..emit {
            let kind = if full || i < accepted {
                EventKind::AcceptedDraft
            } else {
                EventKind::Correction
            };
            events.push(GenEvent { token: tokens[pos + i], t_emit: t, round, kind });
        }
        pos += emit;
        round += 1;
    }
    Ok(events)
}
