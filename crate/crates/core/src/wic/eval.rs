use serde::{Deserialize, Serialize};

use super::WicError;

pub const HISTOGRAM_BINS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

/// Counts of predicted probabilities in 20 equal-width bins over [0, 1],
/// split by gold label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbHistogram {
    #[serde(rename = "T")]
    pub positive: [usize; HISTOGRAM_BINS],
    #[serde(rename = "F")]
    pub negative: [usize; HISTOGRAM_BINS],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub confusion: Confusion,
    pub false_positive_rate: f64,
    pub false_negative_rate: f64,
    /// `[fpr, tpr, threshold]`, thresholds descending.
    pub roc: Vec<[f64; 3]>,
    pub auc: f64,
    pub prob_hist: ProbHistogram,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn bin(p: f64) -> usize {
    ((p * HISTOGRAM_BINS as f64).floor().max(0.0) as usize).min(HISTOGRAM_BINS - 1)
}

/// Scores `(probability, predicted label)` pairs against gold labels.
pub fn evaluate(predictions: &[(f64, bool)], gold: &[bool]) -> Result<EvalReport, WicError> {
    if predictions.len() != gold.len() {
        return Err(WicError::LengthMismatch {
            features: predictions.len(),
            labels: gold.len(),
        });
    }
    if gold.is_empty() {
        return Err(WicError::EmptyInput);
    }
    if predictions.iter().any(|(p, _)| !p.is_finite()) {
        return Err(WicError::NonFinite);
    }

    let mut c = Confusion::default();
    let mut hist = ProbHistogram {
        positive: [0; HISTOGRAM_BINS],
        negative: [0; HISTOGRAM_BINS],
    };
    for (&(p, label), &g) in predictions.iter().zip(gold) {
        match (label, g) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
        if g {
            hist.positive[bin(p)] += 1;
        } else {
            hist.negative[bin(p)] += 1;
        }
    }
    let n = gold.len();
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    let (roc, auc) = roc_curve(predictions, gold);
    Ok(EvalReport {
        n,
        accuracy: ratio(c.tp + c.tn, n),
        precision,
        recall,
        f1,
        confusion: c,
        false_positive_rate: ratio(c.fp, c.fp + c.tn),
        false_negative_rate: ratio(c.fn_, c.fn_ + c.tp),
        roc,
        auc,
        prob_hist: hist,
    })
}

/// One point per distinct probability, predicting positive at `p >= t`.
/// The first point sits above every score, at `(0, 0)`.
fn roc_curve(predictions: &[(f64, bool)], gold: &[bool]) -> (Vec<[f64; 3]>, f64) {
    let mut scored: Vec<(f64, bool)> = predictions
        .iter()
        .zip(gold)
        .map(|(&(p, _), &g)| (p, g))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let pos = gold.iter().filter(|&&g| g).count();
    let neg = gold.len() - pos;

    let mut roc = vec![[0.0, 0.0, scored[0].0 + 1.0]];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < scored.len() {
        let t = scored[i].0;
        while i < scored.len() && scored[i].0 == t {
            if scored[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        roc.push([ratio(fp, neg), ratio(tp, pos), t]);
    }
    let auc = roc
        .windows(2)
        .map(|w| (w[1][0] - w[0][0]) * (w[1][1] + w[0][1]) / 2.0)
        .sum();
    (roc, auc)
}
