//! Multi-class trace classification: one generative model per class
//! (diagonal GMM) or a shared discriminative convnet, plus multi-turn
//! aggregation by summed log-scores.

use serde::{Deserialize, Serialize};

use crate::attacks::convnet::{train_convnet, ConvNetClassifier, ConvNetConfig};
use crate::attacks::features::{featurize_trace, FeatureSpec};
use crate::capture::Trace;
use crate::error::{Error, Result};
use crate::gmm::{fit_diag_gmm, DiagGmm, EmOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arch {
    Gmm,
    Convnet,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MulticlassConfig {
    pub arch: Arch,
    pub feature: FeatureSpec,
    /// GMM components per class.
    pub components: usize,
    pub em: EmOptions,
    pub convnet_epochs: usize,
    pub convnet_lr: f64,
    pub seed: u64,
}

impl Default for MulticlassConfig {
    fn default() -> Self {
        Self {
            arch: Arch::Gmm,
            feature: FeatureSpec::default(),
            components: 3,
            em: EmOptions { var_floor: 1e-8, ..Default::default() },
            convnet_epochs: 40,
            convnet_lr: 0.05,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GmmMulticlass {
    pub classes: Vec<String>,
    pub gmms: Vec<DiagGmm>,
    pub feature: FeatureSpec,
}

/// Fitted classifier of either architecture; scores are per-class
/// log-likelihoods (GMM) or log-softmax (convnet), so in both cases
/// "bigger is more likely" and sums aggregate independent turns.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "arch", rename_all = "kebab-case")]
pub enum SignatureClassifier {
    Gmm(GmmMulticlass),
    Convnet {
        classes: Vec<String>,
        feature: FeatureSpec,
        net: ConvNetClassifier,
    },
}

impl SignatureClassifier {
    pub fn classes(&self) -> &[String] {
        match self {
            SignatureClassifier::Gmm(m) => &m.classes,
            SignatureClassifier::Convnet { classes, .. } => classes,
        }
    }

    pub fn log_scores(&self, trace: &Trace) -> Result<Vec<f64>> {
        match self {
            SignatureClassifier::Gmm(m) => {
                let f = featurize_trace(trace, &m.feature)?;
                Ok(m.gmms.iter().map(|g| g.log_density(&f)).collect())
            }
            SignatureClassifier::Convnet { feature, net, .. } => {
                let f = featurize_trace(trace, feature)?;
                Ok(net.log_scores(&f))
            }
        }
    }

    pub fn predict(&self, trace: &Trace) -> Result<usize> {
        let s = self.log_scores(trace)?;
        Ok(argmax(&s))
    }

    /// Classify a session of independent turns by summing per-turn scores.
    pub fn predict_turns(&self, turns: &[Trace]) -> Result<usize> {
        let n = self.classes().len();
        let mut total = vec![0.0; n];
        for t in turns {
            for (acc, s) in total.iter_mut().zip(self.log_scores(t)?) {
                *acc += s;
            }
        }
        Ok(argmax(&total))
    }
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap()
}

/// Fit a multi-class signature classifier from per-class trace sets.
pub fn fit_multiclass(
    classes: &[(String, Vec<Trace>)],
    cfg: &MulticlassConfig,
) -> Result<SignatureClassifier> {
    if classes.len() < 2 {
        return Err(Error::BadConfig("need at least two classes".into()));
    }
    if classes.iter().any(|(_, ts)| ts.is_empty()) {
        return Err(Error::EmptyClass);
    }
    let names: Vec<String> = classes.iter().map(|(n, _)| n.clone()).collect();
    match cfg.arch {
        Arch::Gmm => {
            let gmms = classes
                .iter()
                .map(|(_, traces)| {
                    let feats: Vec<Vec<f64>> = traces
                        .iter()
                        .map(|t| featurize_trace(t, &cfg.feature))
                        .collect::<Result<_>>()?;
                    fit_diag_gmm(&feats, cfg.components, &cfg.em)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SignatureClassifier::Gmm(GmmMulticlass {
                classes: names,
                gmms,
                feature: cfg.feature.clone(),
            }))
        }
        Arch::Convnet => {
            let mut data = Vec::new();
            for (label, (_, traces)) in classes.iter().enumerate() {
                for t in traces {
                    data.push((featurize_trace(t, &cfg.feature)?, label));
                }
            }
            let channels = if cfg.feature.include_sizes { 2 } else { 1 };
            let net_cfg = ConvNetConfig {
                lr: cfg.convnet_lr,
                epochs: cfg.convnet_epochs,
                seed: cfg.seed,
                ..ConvNetConfig::for_task(channels, cfg.feature.k, classes.len())
            };
            let net = train_convnet(&data, &net_cfg)?;
            Ok(SignatureClassifier::Convnet {
                classes: names,
                feature: cfg.feature.clone(),
                net,
            })
        }
    }
}

/// Accuracy when the attacker observes `turns` exchanges per trial.
/// `trials` pairs each session (a slice of per-turn traces) with its true
/// class index.
pub fn multi_turn_accuracy(
    clf: &SignatureClassifier,
    trials: &[(Vec<Trace>, usize)],
) -> Result<f64> {
    if trials.is_empty() {
        return Err(Error::NoMetrics);
    }
    let mut correct = 0usize;
    for (turns, label) in trials {
        if clf.predict_turns(turns)? == *label {
            correct += 1;
        }
    }
    Ok(correct as f64 / trials.len() as f64)
}
