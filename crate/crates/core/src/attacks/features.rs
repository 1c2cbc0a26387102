use serde::{Deserialize, Serialize};

use crate::capture::{ipd, Trace, TokenTimingSignature};
use crate::error::Result;
use crate::Nanos;

/// Fixed-length feature window over a timing signal: the first K delays in
/// seconds, truncated or padded, optionally followed by the first K packet
/// sizes (scaled to KB) as a second channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub k: usize,
    pub pad: f64,
    pub include_sizes: bool,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        Self { k: 50, pad: 0.0, include_sizes: false }
    }
}

impl FeatureSpec {
    pub fn with_k(k: usize) -> Self {
        Self { k, ..Default::default() }
    }

    pub fn dim(&self) -> usize {
        if self.include_sizes {
            self.k * 2
        } else {
            self.k
        }
    }
}

/// First K delays as seconds, truncate/pad to exactly K.
pub fn featurize_delays(delays: &[Nanos], spec: &FeatureSpec) -> Vec<f64> {
    let mut v: Vec<f64> =
        delays.iter().take(spec.k).map(|&d| d as f64 / 1e9).collect();
    v.resize(spec.k, spec.pad);
    v
}

pub fn featurize_trace(trace: &Trace, spec: &FeatureSpec) -> Result<Vec<f64>> {
    let delays = ipd(trace)?;
    let mut v = featurize_delays(&delays, spec);
    if spec.include_sizes {
        let mut sizes: Vec<f64> =
            trace.s2c().iter().take(spec.k).map(|r| r.size_bytes as f64 / 1000.0).collect();
        sizes.resize(spec.k, spec.pad);
        v.extend(sizes);
    }
    Ok(v)
}

pub fn featurize_signature(sig: &TokenTimingSignature, spec: &FeatureSpec) -> Vec<f64> {
    featurize_delays(&sig.inter_token_delays, spec)
}
