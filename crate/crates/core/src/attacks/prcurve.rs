use serde::{Deserialize, Serialize};

/// One operating point of the threshold sweep. Positive = label true
/// (class B); a sample is predicted positive when score >= tau.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PrPoint {
    pub tau: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
    pub auc: f64,
}

impl PrCurve {
    /// Best recall among points with precision >= `precision`.
    pub fn recall_at_precision(&self, precision: f64) -> f64 {
        self.points
            .iter()
            .filter(|p| p.precision >= precision)
            .map(|p| p.recall)
            .fold(0.0, f64::max)
    }
}

/// Sweep a decision threshold over classifier scores and integrate the
/// precision-recall curve (trapezoid over recall).
pub fn pr_sweep(scores: &[f64], labels: &[bool]) -> PrCurve {
    assert_eq!(scores.len(), labels.len());
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&i, &j| scores[j].partial_cmp(&scores[i]).unwrap());
    let total_pos = labels.iter().filter(|&&l| l).count() as f64;

    let mut points = Vec::new();
    let mut tp = 0.0;
    let mut fp = 0.0;
    let mut i = 0;
    while i < idx.len() {
        // Consume ties together so every point is an achievable threshold.
        let tau = scores[idx[i]];
        while i < idx.len() && scores[idx[i]] == tau {
            if labels[idx[i]] {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            i += 1;
        }
        if total_pos > 0.0 {
            points.push(PrPoint {
                tau,
                precision: tp / (tp + fp),
                recall: tp / total_pos,
            });
        }
    }
    let mut auc = 0.0;
    let mut prev_recall = 0.0;
    let mut prev_prec = 1.0;
    for p in &points {
        auc += (p.recall - prev_recall) * (p.precision + prev_prec) / 2.0;
        prev_recall = p.recall;
        prev_prec = p.precision;
    }
    PrCurve { points, auc }
}
