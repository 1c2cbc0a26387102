//! Expectation-maximization for 1-D and diagonal-covariance Gaussian
//! mixtures, written from scratch so the log-likelihood trajectory is
//! available and checkable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::logsumexp;

const LN_2PI: f64 = 1.837877066409345;

/// EM stopping and conditioning parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// Lower bound applied to every variance.
    pub var_floor: f64,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iters: 500, var_floor: 0.25 }
    }
}

/// 1-D Gaussian mixture with components kept sorted by mean.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Gmm1d {
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub vars: Vec<f64>,
    /// Per-iteration total log-likelihood of the fit.
    pub loglik_history: Vec<f64>,
}

impl Gmm1d {
    pub fn n_components(&self) -> usize {
        self.means.len()
    }

    pub fn log_density(&self, x: f64) -> f64 {
        let terms: Vec<f64> = (0..self.n_components())
            .map(|i| self.weights[i].ln() + log_normal(x, self.means[i], self.vars[i]))
            .collect();
        logsumexp(&terms)
    }

    pub fn component_log_density(&self, i: usize, x: f64) -> f64 {
        log_normal(x, self.means[i], self.vars[i])
    }
}

fn log_normal(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (LN_2PI + var.ln() + (x - mean) * (x - mean) / var)
}

/// Fit a B-component 1-D mixture by EM with means initialized at quantiles.
pub fn fit_gmm_1d(data: &[f64], b: usize, opts: &EmOptions) -> Result<Gmm1d> {
    if data.is_empty() || b == 0 {
        return Err(Error::BadConfig("gmm needs data and >= 1 component".into()));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, c| a.partial_cmp(c).unwrap());
    if b > 1 && sorted.first() == sorted.last() {
        return Err(Error::DegenerateClusters);
    }

    // Quantile initialization over distinct values: on discrete data a
    // dominant mode would otherwise pin two components to the same start,
    // and symmetric components can never separate.
    let mut uniq = sorted.clone();
    uniq.dedup();
    let init_src = if uniq.len() >= b { &uniq } else { &sorted };
    let mut means: Vec<f64> = (0..b)
        .map(|i| init_src[((i as f64 + 0.5) / b as f64 * init_src.len() as f64) as usize])
        .collect();
    let global_var = crate::util::variance(data).max(opts.var_floor);
    let mut vars = vec![global_var; b];
    let mut weights = vec![1.0 / b as f64; b];
    let mut history = Vec::new();

    let n = data.len();
    let mut resp = vec![0.0; n * b];
    let mut prev_ll = f64::NEG_INFINITY;
    for _ in 0..opts.max_iters {
        // E step.
        let mut ll = 0.0;
        for (j, &x) in data.iter().enumerate() {
            let terms: Vec<f64> =
                (0..b).map(|i| weights[i].ln() + log_normal(x, means[i], vars[i])).collect();
            let lse = logsumexp(&terms);
            ll += lse;
            for i in 0..b {
                resp[j * b + i] = (terms[i] - lse).exp();
            }
        }
        history.push(ll);
        if (ll - prev_ll).abs() < opts.tol {
            break;
        }
        prev_ll = ll;
        // M step.
        for i in 0..b {
            let nk: f64 = (0..n).map(|j| resp[j * b + i]).sum();
            if nk <= f64::EPSILON {
                continue;
            }
            let mu: f64 = (0..n).map(|j| resp[j * b + i] * data[j]).sum::<f64>() / nk;
            let var: f64 = (0..n)
                .map(|j| resp[j * b + i] * (data[j] - mu) * (data[j] - mu))
                .sum::<f64>()
                / nk;
            means[i] = mu;
            vars[i] = var.max(opts.var_floor);
            weights[i] = nk / n as f64;
        }
    }

    // Keep components ascending by mean.
    let mut order: Vec<usize> = (0..b).collect();
    order.sort_by(|&i, &j| means[i].partial_cmp(&means[j]).unwrap());
    let gmm = Gmm1d {
        weights: order.iter().map(|&i| weights[i]).collect(),
        means: order.iter().map(|&i| means[i]).collect(),
        vars: order.iter().map(|&i| vars[i]).collect(),
        loglik_history: history,
    };
    Ok(gmm)
}

/// Check that a log-likelihood trajectory never decreases beyond `slack`.
pub fn is_monotone(history: &[f64], slack: f64) -> bool {
    history.windows(2).all(|w| w[1] >= w[0] - slack)
}

/// Diagonal-covariance Gaussian mixture over fixed-length feature vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagGmm {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub vars: Vec<Vec<f64>>,
    pub loglik_history: Vec<f64>,
}

impl DiagGmm {
    pub fn dim(&self) -> usize {
        self.means.first().map(|m| m.len()).unwrap_or(0)
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        let terms: Vec<f64> = (0..self.weights.len())
            .map(|i| self.weights[i].ln() + log_diag_normal(x, &self.means[i], &self.vars[i]))
            .collect();
        logsumexp(&terms)
    }
}

fn log_diag_normal(x: &[f64], mean: &[f64], var: &[f64]) -> f64 {
    let mut s = 0.0;
    for d in 0..x.len() {
        s += LN_2PI + var[d].ln() + (x[d] - mean[d]) * (x[d] - mean[d]) / var[d];
    }
    -0.5 * s
}

/// Fit a diagonal GMM by EM. Means initialize at evenly spaced data points
/// in a deterministic norm ordering, so the fit is reproducible without an
/// RNG.
pub fn fit_diag_gmm(data: &[Vec<f64>], comps: usize, opts: &EmOptions) -> Result<DiagGmm> {
    if data.is_empty() || comps == 0 {
        return Err(Error::EmptyClass);
    }
    let comps = comps.min(data.len());
    let dim = data[0].len();
    if data.iter().any(|x| x.len() != dim) {
        return Err(Error::BadConfig("inconsistent feature dimensions".into()));
    }
    let n = data.len();

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = data.iter().map(|x| x.iter().map(|v| v * v).sum::<f64>()).collect();
    order.sort_by(|&i, &j| norms[i].partial_cmp(&norms[j]).unwrap());
    let mut means: Vec<Vec<f64>> = (0..comps)
        .map(|i| data[order[((i as f64 + 0.5) / comps as f64 * n as f64) as usize]].clone())
        .collect();
    let mut global_var = vec![0.0; dim];
    for d in 0..dim {
        let col: Vec<f64> = data.iter().map(|x| x[d]).collect();
        global_var[d] = crate::util::variance(&col).max(opts.var_floor);
    }
    let mut vars = vec![global_var; comps];
    let mut weights = vec![1.0 / comps as f64; comps];
    let mut history = Vec::new();
    let mut resp = vec![0.0; n * comps];
    let mut prev_ll = f64::NEG_INFINITY;

    for _ in 0..opts.max_iters {
        let mut ll = 0.0;
        for (j, x) in data.iter().enumerate() {
            let terms: Vec<f64> = (0..comps)
                .map(|i| weights[i].ln() + log_diag_normal(x, &means[i], &vars[i]))
                .collect();
            let lse = logsumexp(&terms);
            ll += lse;
            for i in 0..comps {
                resp[j * comps + i] = (terms[i] - lse).exp();
            }
        }
        history.push(ll);
        if (ll - prev_ll).abs() < opts.tol * (1.0 + ll.abs()) {
            break;
        }
        prev_ll = ll;
        for i in 0..comps {
            let nk: f64 = (0..n).map(|j| resp[j * comps + i]).sum();
            if nk <= f64::EPSILON {
                continue;
            }
            for d in 0..dim {
                let mu =
                    (0..n).map(|j| resp[j * comps + i] * data[j][d]).sum::<f64>() / nk;
                let var = (0..n)
                    .map(|j| resp[j * comps + i] * (data[j][d] - mu) * (data[j][d] - mu))
                    .sum::<f64>()
                    / nk;
                means[i][d] = mu;
                vars[i][d] = var.max(opts.var_floor);
            }
            weights[i] = nk / n as f64;
        }
    }

    Ok(DiagGmm { weights, means, vars, loglik_history: history })
}
