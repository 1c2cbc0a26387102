//! Large-N identification by score boosting: each candidate gets a cheap
//! per-class model (a single diagonal Gaussian over a short feature
//! window), and repeated observations of the same unknown are combined by
//! summing log-likelihoods before taking the argmax. Individual
//! observations can be ambiguous while the boosted decision is not.

use serde::{Deserialize, Serialize};

use crate::attacks::features::{featurize_trace, FeatureSpec};
use crate::capture::Trace;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoostConfig {
    pub feature: FeatureSpec,
    /// Variance floor in feature units squared (seconds^2).
    pub var_floor: f64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self { feature: FeatureSpec::with_k(20), var_floor: 1e-10 }
    }
}

/// One diagonal Gaussian per candidate class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoostEnsemble {
    pub classes: Vec<String>,
    pub means: Vec<Vec<f64>>,
    pub vars: Vec<Vec<f64>>,
    pub feature: FeatureSpec,
}

impl BoostEnsemble {
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn log_density(&self, class: usize, feat: &[f64]) -> f64 {
        let (m, v) = (&self.means[class], &self.vars[class]);
        feat.iter()
            .zip(m.iter().zip(v))
            .map(|(x, (mu, var))| {
                let d = x - mu;
                -0.5 * (d * d / var + var.ln() + (2.0 * std::f64::consts::PI).ln())
            })
            .sum()
    }
}

/// Fit the ensemble from already-featurized per-class samples.
pub fn boost_fit_features(
    classes: &[(String, Vec<Vec<f64>>)],
    cfg: &BoostConfig,
) -> Result<BoostEnsemble> {
    if classes.len() < 2 {
        return Err(Error::BadConfig("need at least two candidates".into()));
    }
    let dim = cfg.feature.dim();
    let mut names = Vec::with_capacity(classes.len());
    let mut means = Vec::with_capacity(classes.len());
    let mut vars = Vec::with_capacity(classes.len());
    for (name, feats) in classes {
        if feats.is_empty() {
            return Err(Error::EmptyClass);
        }
        if feats.iter().any(|f| f.len() != dim) {
            return Err(Error::BadConfig("feature length mismatch".into()));
        }
        let n = feats.len() as f64;
        let mut mu = vec![0.0; dim];
        for f in feats {
            for (m, x) in mu.iter_mut().zip(f) {
                *m += x / n;
            }
        }
        let mut va = vec![0.0; dim];
        for f in feats {
            for ((v, x), m) in va.iter_mut().zip(f).zip(&mu) {
                *v += (x - m) * (x - m) / n;
            }
        }
        for v in &mut va {
            *v = v.max(cfg.var_floor);
        }
        names.push(name.clone());
        means.push(mu);
        vars.push(va);
    }
    Ok(BoostEnsemble { classes: names, means, vars, feature: cfg.feature.clone() })
}

/// Fit the ensemble from labeled traces.
pub fn boost_fit(classes: &[(String, Vec<Trace>)], cfg: &BoostConfig) -> Result<BoostEnsemble> {
    let feats: Vec<(String, Vec<Vec<f64>>)> = classes
        .iter()
        .map(|(name, traces)| {
            let fs = traces
                .iter()
                .map(|t| featurize_trace(t, &cfg.feature))
                .collect::<Result<Vec<_>>>()?;
            Ok((name.clone(), fs))
        })
        .collect::<Result<_>>()?;
    boost_fit_features(&feats, cfg)
}

/// Identify the class from repeated featurized observations of one
/// unknown. Returns (winner index, per-class boosted scores).
pub fn boost_infer_features(ens: &BoostEnsemble, obs: &[Vec<f64>]) -> Result<(usize, Vec<f64>)> {
    if obs.is_empty() {
        return Err(Error::NoMetrics);
    }
    let mut scores = vec![0.0; ens.n_classes()];
    for f in obs {
        for (c, s) in scores.iter_mut().enumerate() {
            *s += ens.log_density(c, f);
        }
    }
    let winner = scores
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    Ok((winner, scores))
}

pub fn boost_infer(ens: &BoostEnsemble, obs: &[Trace]) -> Result<(usize, Vec<f64>)> {
    let feats: Vec<Vec<f64>> =
        obs.iter().map(|t| featurize_trace(t, &ens.feature)).collect::<Result<_>>()?;
    boost_infer_features(ens, &feats)
}
