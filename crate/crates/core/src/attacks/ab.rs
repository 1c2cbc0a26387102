use serde::{Deserialize, Serialize};

use crate::attacks::features::{featurize_trace, FeatureSpec};
use crate::capture::Trace;
use crate::error::{Error, Result};
use crate::gmm::{fit_diag_gmm, DiagGmm, EmOptions};

/// A/B hypothesis-test configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AbConfig {
    pub feature: FeatureSpec,
    pub components: usize,
    pub em: EmOptions,
}

impl Default for AbConfig {
    fn default() -> Self {
        Self {
            feature: FeatureSpec::default(),
            components: 3,
            // Feature units are seconds; the floor must sit well below the
            // jitter scale (~1e-3 s).
            em: EmOptions { var_floor: 1e-8, ..Default::default() },
        }
    }
}

/// Per-class GMMs over the timing feature window. The classifier score is
/// logL_B - logL_A: negative means class A, positive class B.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignatureGmmPair {
    pub gmm_a: DiagGmm,
    pub gmm_b: DiagGmm,
    pub feature: FeatureSpec,
    pub warnings: Vec<String>,
}

/// Fit the A/B signature pair from labeled traces.
pub fn fit_ab(traces_a: &[Trace], traces_b: &[Trace], cfg: &AbConfig) -> Result<SignatureGmmPair> {
    if traces_a.is_empty() || traces_b.is_empty() {
        return Err(Error::EmptyClass);
    }
    let mut warnings = Vec::new();
    let (na, nb) = (traces_a.len(), traces_b.len());
    if na > nb * 10 || nb > na * 10 {
        warnings.push(format!("class imbalance {na}:{nb} exceeds 10:1"));
    }
    let fa: Vec<Vec<f64>> =
        traces_a.iter().map(|t| featurize_trace(t, &cfg.feature)).collect::<Result<_>>()?;
    let fb: Vec<Vec<f64>> =
        traces_b.iter().map(|t| featurize_trace(t, &cfg.feature)).collect::<Result<_>>()?;
    let gmm_a = fit_diag_gmm(&fa, cfg.components, &cfg.em)?;
    let gmm_b = fit_diag_gmm(&fb, cfg.components, &cfg.em)?;
    Ok(SignatureGmmPair { gmm_a, gmm_b, feature: cfg.feature.clone(), warnings })
}

/// Goodness-of-fit score for one observed trace; sign picks the class.
pub fn score_ab(trace: &Trace, pair: &SignatureGmmPair) -> Result<f64> {
    let f = featurize_trace(trace, &pair.feature)?;
    Ok(pair.gmm_b.log_density(&f) - pair.gmm_a.log_density(&f))
}
