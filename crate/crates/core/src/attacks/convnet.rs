//! Small 1-D convolutional classifier with hand-rolled backprop: two
//! convolution layers, global average pooling, and one fully connected
//! layer to class logits. f64 throughout so gradients can be checked
//! against finite differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::stream_rng;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvNetConfig {
    pub input_channels: usize,
    pub input_len: usize,
    pub channels1: usize,
    pub channels2: usize,
    pub kernel: usize,
    pub n_classes: usize,
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
    /// Full-batch gradient descent with backtracking, which makes the
    /// epoch loss non-increasing. Minibatch SGD otherwise.
    pub full_batch: bool,
}

impl ConvNetConfig {
    pub fn for_task(input_channels: usize, input_len: usize, n_classes: usize) -> Self {
        Self {
            input_channels,
            input_len,
            channels1: 8,
            channels2: 16,
            kernel: 5,
            n_classes,
            lr: 0.05,
            epochs: 60,
            batch: 16,
            seed: 0,
            full_batch: false,
        }
    }
}

/// Fitted network. Parameters live in one flat vector; layer views are
/// computed from the config's offsets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvNetClassifier {
    pub cfg: ConvNetConfig,
    pub params: Vec<f64>,
    /// Per-coordinate input standardization fitted on the training set.
    pub input_mean: Vec<f64>,
    pub input_sd: Vec<f64>,
    pub epoch_losses: Vec<f64>,
}

struct Offsets {
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
    wd: usize,
    bd: usize,
    total: usize,
}

fn offsets(c: &ConvNetConfig) -> Offsets {
    let w1 = 0;
    let b1 = w1 + c.channels1 * c.input_channels * c.kernel;
    let w2 = b1 + c.channels1;
    let b2 = w2 + c.channels2 * c.channels1 * c.kernel;
    let wd = b2 + c.channels2;
    let bd = wd + c.n_classes * c.channels2;
    let total = bd + c.n_classes;
    Offsets { w1, b1, w2, b2, wd, bd, total }
}

struct Cache {
    x: Vec<f64>,    // standardized input, c_in * len
    a1: Vec<f64>,   // post-relu conv1, ch1 * len1
    a2: Vec<f64>,   // post-relu conv2, ch2 * len2
    pool: Vec<f64>, // ch2
    logits: Vec<f64>,
}

impl ConvNetClassifier {
    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, v)| (v - self.input_mean[i]) / self.input_sd[i])
            .collect()
    }

    fn forward(&self, raw: &[f64]) -> Cache {
        let c = &self.cfg;
        let o = offsets(c);
        let x = self.standardize(raw);
        let len1 = c.input_len - c.kernel + 1;
        let len2 = len1 - c.kernel + 1;

        let mut a1 = vec![0.0; c.channels1 * len1];
        for ch in 0..c.channels1 {
            for p in 0..len1 {
                let mut s = self.params[o.b1 + ch];
                for ci in 0..c.input_channels {
                    for k in 0..c.kernel {
                        s += self.params[o.w1 + (ch * c.input_channels + ci) * c.kernel + k]
                            * x[ci * c.input_len + p + k];
                    }
                }
                a1[ch * len1 + p] = s.max(0.0);
            }
        }
        let mut a2 = vec![0.0; c.channels2 * len2];
        for ch in 0..c.channels2 {
            for p in 0..len2 {
                let mut s = self.params[o.b2 + ch];
                for ci in 0..c.channels1 {
                    for k in 0..c.kernel {
                        s += self.params[o.w2 + (ch * c.channels1 + ci) * c.kernel + k]
                            * a1[ci * len1 + p + k];
                    }
                }
                a2[ch * len2 + p] = s.max(0.0);
            }
        }
        let pool: Vec<f64> = (0..c.channels2)
            .map(|ch| a2[ch * len2..(ch + 1) * len2].iter().sum::<f64>() / len2 as f64)
            .collect();
        let logits: Vec<f64> = (0..c.n_classes)
            .map(|cl| {
                self.params[o.bd + cl]
                    + (0..c.channels2)
                        .map(|ch| self.params[o.wd + cl * c.channels2 + ch] * pool[ch])
                        .sum::<f64>()
            })
            .collect();
        Cache { x, a1, a2, pool, logits }
    }

    /// Log-softmax class scores.
    pub fn log_scores(&self, raw: &[f64]) -> Vec<f64> {
        let logits = self.forward(raw).logits;
        let lse = crate::util::logsumexp(&logits);
        logits.iter().map(|l| l - lse).collect()
    }

    pub fn predict(&self, raw: &[f64]) -> usize {
        let s = self.log_scores(raw);
        s.iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap()
    }

    /// Softmax probabilities (sum to one within 1e-6 by construction).
    pub fn probs(&self, raw: &[f64]) -> Vec<f64> {
        self.log_scores(raw).iter().map(|l| l.exp()).collect()
    }

    /// Cross-entropy loss of one sample and the flat parameter gradient,
    /// accumulated into `grad`.
    fn backward(&self, raw: &[f64], label: usize, grad: &mut [f64]) -> f64 {
        let c = &self.cfg;
        let o = offsets(c);
        let cache = self.forward(raw);
        let len1 = c.input_len - c.kernel + 1;
        let len2 = len1 - c.kernel + 1;

        let lse = crate::util::logsumexp(&cache.logits);
        let loss = lse - cache.logits[label];
        // dL/dlogit = softmax - onehot
        let dlogits: Vec<f64> = (0..c.n_classes)
            .map(|cl| (cache.logits[cl] - lse).exp() - if cl == label { 1.0 } else { 0.0 })
            .collect();

        let mut dpool = vec![0.0; c.channels2];
        for cl in 0..c.n_classes {
            grad[o.bd + cl] += dlogits[cl];
            for ch in 0..c.channels2 {
                grad[o.wd + cl * c.channels2 + ch] += dlogits[cl] * cache.pool[ch];
                dpool[ch] += dlogits[cl] * self.params[o.wd + cl * c.channels2 + ch];
            }
        }
        // Through GAP and conv2 relu.
        let mut da1 = vec![0.0; c.channels1 * len1];
        for ch in 0..c.channels2 {
            let d = dpool[ch] / len2 as f64;
            for p in 0..len2 {
                if cache.a2[ch * len2 + p] <= 0.0 {
                    continue;
                }
                grad[o.b2 + ch] += d;
                for ci in 0..c.channels1 {
                    for k in 0..c.kernel {
                        grad[o.w2 + (ch * c.channels1 + ci) * c.kernel + k] +=
                            d * cache.a1[ci * len1 + p + k];
                        da1[ci * len1 + p + k] +=
                            d * self.params[o.w2 + (ch * c.channels1 + ci) * c.kernel + k];
                    }
                }
            }
        }
        // Through conv1 relu.
        for ch in 0..c.channels1 {
            for p in 0..len1 {
                if cache.a1[ch * len1 + p] <= 0.0 {
                    continue;
                }
                let d = da1[ch * len1 + p];
                grad[o.b1 + ch] += d;
                for ci in 0..c.input_channels {
                    for k in 0..c.kernel {
                        grad[o.w1 + (ch * c.input_channels + ci) * c.kernel + k] +=
                            d * cache.x[ci * c.input_len + p + k];
                    }
                }
            }
        }
        loss
    }

    /// Mean loss and mean gradient over a set of samples.
    pub fn loss_and_grad(&self, data: &[(Vec<f64>, usize)]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        for (x, y) in data {
            loss += self.backward(x, *y, &mut grad);
        }
        let n = data.len() as f64;
        for g in &mut grad {
            *g /= n;
        }
        (loss / n, grad)
    }

    pub fn mean_loss(&self, data: &[(Vec<f64>, usize)]) -> f64 {
        data.iter()
            .map(|(x, y)| {
                let c = self.forward(x);
                crate::util::logsumexp(&c.logits) - c.logits[*y]
            })
            .sum::<f64>()
            / data.len() as f64
    }
}

/// Initialize and train a convnet on labeled feature vectors.
pub fn train_convnet(data: &[(Vec<f64>, usize)], cfg: &ConvNetConfig) -> Result<ConvNetClassifier> {
    if data.is_empty() {
        return Err(Error::EmptyClass);
    }
    if cfg.input_len < 2 * cfg.kernel {
        return Err(Error::BadConfig("input_len too small for two conv layers".into()));
    }
    let dim = cfg.input_channels * cfg.input_len;
    if data.iter().any(|(x, _)| x.len() != dim) {
        return Err(Error::BadConfig("feature length does not match net input".into()));
    }

    let mut rng = stream_rng(cfg.seed, &[crate::util::tag("convnet-init")]);
    let o = offsets(cfg);
    let mut params = vec![0.0; o.total];
    let fan1 = (cfg.input_channels * cfg.kernel) as f64;
    let fan2 = (cfg.channels1 * cfg.kernel) as f64;
    let fand = cfg.channels2 as f64;
    for i in o.w1..o.b1 {
        params[i] = rand::Rng::gen_range(&mut rng, -1.0..1.0) / fan1.sqrt();
    }
    for i in o.w2..o.b2 {
        params[i] = rand::Rng::gen_range(&mut rng, -1.0..1.0) / fan2.sqrt();
    }
    for i in o.wd..o.bd {
        params[i] = rand::Rng::gen_range(&mut rng, -1.0..1.0) / fand.sqrt();
    }

    let mut mean = vec![0.0; dim];
    let mut sd = vec![0.0; dim];
    for d in 0..dim {
        let col: Vec<f64> = data.iter().map(|(x, _)| x[d]).collect();
        mean[d] = crate::util::mean(&col);
        sd[d] = crate::util::variance(&col).sqrt().max(1e-6);
    }

    let mut net = ConvNetClassifier {
        cfg: cfg.clone(),
        params,
        input_mean: mean,
        input_sd: sd,
        epoch_losses: Vec::new(),
    };

    if cfg.full_batch {
        let mut lr = cfg.lr;
        let mut loss = net.mean_loss(data);
        net.epoch_losses.push(loss);
        for _ in 0..cfg.epochs {
            let (_, grad) = net.loss_and_grad(data);
            // Backtracking line search keeps the trajectory monotone.
            loop {
                let trial: Vec<f64> =
                    net.params.iter().zip(&grad).map(|(p, g)| p - lr * g).collect();
                let saved = std::mem::replace(&mut net.params, trial);
                let new_loss = net.mean_loss(data);
                if new_loss <= loss || lr < 1e-12 {
                    loss = new_loss.min(loss);
                    if new_loss > loss {
                        net.params = saved;
                    }
                    break;
                }
                net.params = saved;
                lr *= 0.5;
            }
            net.epoch_losses.push(loss);
        }
    } else {
        let mut order: Vec<usize> = (0..data.len()).collect();
        for _ in 0..cfg.epochs {
            rand::seq::SliceRandom::shuffle(&mut order[..], &mut rng);
            for chunk in order.chunks(cfg.batch.max(1)) {
                let batch: Vec<(Vec<f64>, usize)> =
                    chunk.iter().map(|&i| data[i].clone()).collect();
                let (_, grad) = net.loss_and_grad(&batch);
                for (p, g) in net.params.iter_mut().zip(&grad) {
                    *p -= cfg.lr * g;
                }
            }
            net.epoch_losses.push(net.mean_loss(data));
        }
    }
    Ok(net)
}
