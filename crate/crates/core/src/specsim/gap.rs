use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specsim::generate::{EventKind, GenEvent, SpeculativeConfig};
use crate::util::{lognormal_factor, scale_ns, stream_rng, tag};
use crate::Nanos;

/// Scripted stand-in for the draft/target capability gap on digit probes.
///
/// Real model pairs answer "is X the first digit?" style probes with some
/// per-template reliability; here that reliability is planted config. A
/// probe against digit position `pos` with guess `x`:
///   - guess matches the secret digit: first token accepted with the
///     template's gap probability;
///   - guess does not match: accepted with one minus that probability.
/// So gap 1.0 is a perfect distinguisher and gap 0.5 carries no signal.
/// Outcomes are deterministic in (secret, template, position, guess, rep,
/// seed).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptedGapResponder {
    pub secret: String,
    pub gap_by_template: HashMap<String, f64>,
    pub seed: u64,
}

impl ScriptedGapResponder {
    pub fn new(secret: &str, seed: u64) -> Self {
        Self { secret: secret.to_string(), gap_by_template: HashMap::new(), seed }
    }

    pub fn with_template(mut self, template: &str, gap: f64) -> Self {
        self.gap_by_template.insert(template.to_string(), gap.clamp(0.0, 1.0));
        self
    }

    pub fn gap(&self, template: &str) -> Result<f64> {
        self.gap_by_template
            .get(template)
            .copied()
            .ok_or_else(|| Error::UnknownTemplate(template.to_string()))
    }

    /// Whether the first drafted token is accepted for this probe.
    pub fn first_token_accepted(
        &self,
        template: &str,
        pos: usize,
        guess: u8,
        rep: u64,
    ) -> Result<bool> {
        let gap = self.gap(template)?;
        let digit = self
            .secret
            .as_bytes()
            .get(pos)
            .map(|b| b - b'0')
            .ok_or_else(|| Error::BadConfig(format!("digit position {pos} out of range")))?;
        let p_accept = if guess == digit { gap } else { 1.0 - gap };
        let mut rng = stream_rng(
            self.seed,
            &[tag("gap-outcome"), tag(&self.secret), tag(template), pos as u64, guess as u64, rep],
        );
        Ok(rand::Rng::gen_bool(&mut rng, p_accept))
    }
}

/// Simulate one response to `secret prompt || probe suffix`.
///
/// The first round always costs a full draft+verify pass. On acceptance the
/// stream continues at the fast full-speculation cadence (round cost / k per
/// token); on rejection the second token needs a whole extra round before
/// the fast cadence resumes. The accept/reject outcome comes from the
/// responder's scripted gap.
pub fn answer_with_gap(
    responder: &ScriptedGapResponder,
    template: &str,
    pos: usize,
    guess: u8,
    rep: u64,
    cfg: &SpeculativeConfig,
    max_tokens: usize,
) -> Result<Vec<GenEvent>> {
    cfg.validate()?;
    if max_tokens == 0 {
        return Err(Error::ZeroTokens);
    }
    let accepted = responder.first_token_accepted(template, pos, guess, rep)?;
    let mut rng = stream_rng(cfg.seed, &[tag("gap-jitter"), pos as u64, guess as u64, rep]);
    let round_cost = cfg.round_cost_ns();
    let fast_step = round_cost / cfg.k as Nanos;

    let mut events = Vec::with_capacity(max_tokens);
    let mut t: Nanos = scale_ns(round_cost, lognormal_factor(&mut rng, cfg.jitter_sigma));
    let first_kind = if accepted { EventKind::AcceptedDraft } else { EventKind::Correction };
    events.push(GenEvent { token: 0, t_emit: t, round: 0, kind: first_kind });

    let mut round = 1;
    if !accepted && max_tokens > 1 {
        // Slow path: the rejected draft must be regenerated before token 2.
        t += scale_ns(round_cost, lognormal_factor(&mut rng, cfg.jitter_sigma));
        events.push(GenEvent { token: 1, t_emit: t, round, kind: EventKind::Correction });
        round += 1;
    }
    while events.len() < max_tokens {
        t += scale_ns(fast_step, lognormal_factor(&mut rng, cfg.jitter_sigma));
        events.push(GenEvent {
            token: events.len() as u32,
            t_emit: t,
            round,
            kind: EventKind::AcceptedDraft,
        });
        round += 1;
    }
    Ok(events)
}

/// Probe templates and their measured distinguishing rates, shipped as a
/// preset planted landscape (weakest 0.562, strongest 0.972).
pub fn question_gap_presets() -> Vec<(&'static str, f64)> {
    vec![
        ("Is the first digit in the number X?", 0.562),
        ("Is the first numeral in the number a X?", 0.656),
        ("Yes or no, does the digit X occupy the first place in the number?", 0.782),
        ("Does the number you have begin with X? Respond with yes or no.", 0.855),
        ("Does a X appear as the first character in the number? Yes or no?", 0.878),
        ("Is the initial digit of the number a X? Yes or no?", 0.902),
        ("Do we see a X at the beginning of the number? Provide a yes or no answer.", 0.941),
        ("When looking at that number, is X the initial digit? Yes or no?", 0.972),
    ]
}
