//! Digit-by-digit secret extraction. For each position the attacker asks
//! the same yes/no probe about every candidate digit many times, reads the
//! accept/reject bit off the second-token delay, and majority-votes. The
//! planted capability gap makes the correct digit's accept rate differ
//! from the rest.

use serde::{Deserialize, Serialize};

use crate::attacks::second_token::{FirstRound, SecondTokenOracle};
use crate::error::{Error, Result};
use crate::specsim::{answer_with_gap, ScriptedGapResponder, SpeculativeConfig};
use crate::Nanos;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractionConfig {
    pub template: String,
    /// Number of digit positions to recover.
    pub positions: usize,
    /// Repeated probes per (position, digit) pair.
    pub reps: u64,
    pub spec: SpeculativeConfig,
}

impl ExtractionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.positions == 0 || self.reps == 0 {
            return Err(Error::BadConfig("positions and reps must be positive".into()));
        }
        self.spec.validate()
    }
}

/// Vote tally for one digit position.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositionVote {
    pub counts: Vec<u64>,
    pub winner: u8,
    /// True when the tally does not clearly single out one digit: the
    /// winner leads the runner-up by fewer than 2 votes, or the runner-up
    /// itself reached a majority of the repetitions.
    pub ambiguous: bool,
}

fn tally(counts: Vec<u64>, reps: u64) -> PositionVote {
    let winner = counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i as u8)
        .unwrap();
    let best = counts[winner as usize];
    let second = counts
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != winner as usize)
        .map(|(_, &c)| c)
        .max()
        .unwrap_or(0);
    let majority = reps.div_ceil(2);
    let ambiguous = best.saturating_sub(second) < 2 || second >= majority;
    PositionVote { counts, winner, ambiguous }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub digits: String,
    pub votes: Vec<PositionVote>,
    pub queries: u64,
}

impl ExtractionResult {
    pub fn any_ambiguous(&self) -> bool {
        self.votes.iter().any(|v| v.ambiguous)
    }
}

/// Extraction driven by an arbitrary probe: `probe(pos, guess, rep)` must
/// return the attacker-observed delay before the second response token.
pub fn extract_secret_with(
    cfg: &ExtractionConfig,
    oracle: &SecondTokenOracle,
    probe: &mut dyn FnMut(usize, u8, u64) -> Result<Nanos>,
) -> Result<ExtractionResult> {
    cfg.validate()?;
    let mut votes = Vec::with_capacity(cfg.positions);
    let mut queries = 0u64;
    for pos in 0..cfg.positions {
        let mut counts = vec![0u64; 10];
        for guess in 0u8..10 {
            for rep in 0..cfg.reps {
                let delay = probe(pos, guess, rep)?;
                queries += 1;
                if oracle.classify(delay) == FirstRound::Accepted {
                    counts[guess as usize] += 1;
                }
            }
        }
        votes.push(tally(counts, cfg.reps));
    }
    let digits: String = votes.iter().map(|v| char::from(b'0' + v.winner)).collect();
    Ok(ExtractionResult { digits, votes, queries })
}

/// End-to-end extraction against a scripted responder, reading the delay
/// straight from the emission stream.
pub fn extract_secret(
    responder: &ScriptedGapResponder,
    cfg: &ExtractionConfig,
) -> Result<ExtractionResult> {
    let oracle = SecondTokenOracle::from_round_costs(
        cfg.spec.round_cost_ns() / cfg.spec.k as Nanos,
        cfg.spec.round_cost_ns(),
    );
    let spec = cfg.spec.clone();
    let template = cfg.template.clone();
    extract_secret_with(cfg, &oracle, &mut |pos, guess, rep| {
        let probe_cfg = SpeculativeConfig {
            seed: spec.seed ^ (pos as u64) << 32 ^ (guess as u64) << 16 ^ rep,
            ..spec.clone()
        };
        let events = answer_with_gap(responder, &template, pos, guess, rep, &probe_cfg, 2)?;
        Ok(events[1].t_emit - events[0].t_emit)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(template: &str, reps: u64) -> ExtractionConfig {
        ExtractionConfig {
            template: template.to_string(),
            positions: 3,
            reps,
            spec: SpeculativeConfig::default(),
        }
    }

    #[test]
    fn strong_gap_recovers_secret() {
        let r = ScriptedGapResponder::new("527", 1).with_template("t", 0.972);
        let out = extract_secret(&r, &cfg("t", 25)).unwrap();
        assert_eq!(out.digits, "527");
        assert!(!out.any_ambiguous());
        assert_eq!(out.queries, 3 * 10 * 25);
    }

    #[test]
    fn no_signal_gap_is_ambiguous() {
        let r = ScriptedGapResponder::new("527", 2).with_template("t", 0.5);
        let out = extract_secret(&r, &cfg("t", 25)).unwrap();
        assert!(out.votes.iter().all(|v| v.ambiguous));
    }

    #[test]
    fn weak_gap_needs_more_reps() {
        // Binomial oracle: at gap 0.562 the correct digit accepts at 0.562
        // and the other nine at 0.438; with 200 reps the expected margin is
        // ~25 votes, far above the noise, so the vote must resolve.
        let r = ScriptedGapResponder::new("904", 3).with_template("t", 0.562);
        let out = extract_secret(&r, &cfg("t", 200)).unwrap();
        assert_eq!(out.digits, "904");
    }

    #[test]
    fn ambiguity_rule_margins() {
        let v = tally(vec![0, 0, 10, 9, 0, 0, 0, 0, 0, 0], 20);
        assert!(v.ambiguous, "margin 1 must be ambiguous");
        let v = tally(vec![0, 0, 15, 10, 0, 0, 0, 0, 0, 0], 20);
        assert!(v.ambiguous, "runner-up at majority must be ambiguous");
        let v = tally(vec![3, 1, 18, 4, 2, 0, 1, 3, 2, 1], 20);
        assert!(!v.ambiguous);
        assert_eq!(v.winner, 2);
    }

    #[test]
    fn zero_reps_rejected() {
        let r = ScriptedGapResponder::new("1", 0).with_template("t", 0.9);
        assert!(extract_secret(&r, &cfg("t", 0)).is_err());
    }
}
