//! The second-token oracle: whether the first response token was drafted
//! successfully shows up in the delay before the second token (fast
//! within-round cadence vs. an extra full verification round). A single
//! threshold on that delay reads the accept/reject bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Nanos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FirstRound {
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SecondTokenOracle {
    pub threshold_ns: Nanos,
    pub mean_accepted_ns: f64,
    pub mean_rejected_ns: f64,
}

impl SecondTokenOracle {
    /// Calibrate from delays observed under known accept/reject outcomes.
    /// The threshold is the midpoint between the two class means.
    pub fn calibrate(accepted: &[Nanos], rejected: &[Nanos]) -> Result<Self> {
        if accepted.is_empty() || rejected.is_empty() {
            return Err(Error::EmptyClass);
        }
        let ma = accepted.iter().map(|&d| d as f64).sum::<f64>() / accepted.len() as f64;
        let mr = rejected.iter().map(|&d| d as f64).sum::<f64>() / rejected.len() as f64;
        if ma >= mr {
            return Err(Error::BadConfig(
                "accepted delays not faster than rejected delays".into(),
            ));
        }
        Ok(Self {
            threshold_ns: ((ma + mr) / 2.0).round() as Nanos,
            mean_accepted_ns: ma,
            mean_rejected_ns: mr,
        })
    }

    /// Fixed-parameter oracle from the serving model's known round costs.
    pub fn from_round_costs(fast_ns: Nanos, slow_ns: Nanos) -> Self {
        Self {
            threshold_ns: (fast_ns + slow_ns) / 2,
            mean_accepted_ns: fast_ns as f64,
            mean_rejected_ns: slow_ns as f64,
        }
    }

    pub fn classify(&self, second_token_delay_ns: Nanos) -> FirstRound {
        if second_token_delay_ns < self.threshold_ns {
            FirstRound::Accepted
        } else {
            FirstRound::Rejected
        }
    }
}

/// Delay between the first two tokens of a reconstructed timing signature.
pub fn second_token_delay(inter_token_delays: &[Nanos]) -> Result<Nanos> {
    inter_token_delays.first().copied().ok_or(Error::TraceTooShort)
}
