//! Binary L2-regularized logistic regression.
//!
//! Minimizes `(1/n) Σ [log(1 + e^z) - y z] + (λ / 2n) ‖w‖²` with
//! `z = w·x + b`. The bias is not penalized, so `λ = 1` matches an inverse
//! regularization strength of 1 on the summed loss.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{SimilarityFeatures, WicError};

/// A non-empty, strictly increasing subset of the similarity features 1..=4.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct FeatureSet(Vec<usize>);

impl FeatureSet {
    pub fn new(mut features: Vec<usize>) -> Result<FeatureSet, WicError> {
        let original = format!("{features:?}");
        features.sort_unstable();
        features.dedup();
        if features.is_empty() || features.iter().any(|&f| !(1..=4).contains(&f)) {
            return Err(WicError::BadFeatureSet(original));
        }
        Ok(FeatureSet(features))
    }

    pub fn all() -> FeatureSet {
        FeatureSet(vec![1, 2, 3, 4])
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Selects this set's similarities from `f`, in set order.
    pub fn extract(&self, f: &SimilarityFeatures) -> Result<Vec<f64>, WicError> {
        self.0
            .iter()
            .map(|&i| f.sim(i).ok_or(WicError::MissingFeature(i)))
            .collect()
    }
}

impl TryFrom<Vec<usize>> for FeatureSet {
    type Error = WicError;

    fn try_from(v: Vec<usize>) -> Result<Self, Self::Error> {
        FeatureSet::new(v)
    }
}

impl From<FeatureSet> for Vec<usize> {
    fn from(f: FeatureSet) -> Self {
        f.0
    }
}

impl FromStr for FeatureSet {
    type Err = WicError;

    /// Accepts `"1,2"`, `"{1,2}"` or `"1 2"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || WicError::BadFeatureSet(s.to_string());
        let inner = s.trim().trim_start_matches('{').trim_end_matches('}');
        let v = inner
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|p| !p.is_empty())
            .map(|p| p.parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        FeatureSet::new(v).map_err(|_| bad())
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lambda: f64,
    /// Stop once the largest gradient component falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda: 1.0,
            tol: 1e-6,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub examples: usize,
    pub iterations: usize,
    pub loss: f64,
    pub grad_norm: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub feature_set: FeatureSet,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
    pub training_meta: TrainingMeta,
}

impl LogRegModel {
    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(linear(&self.weights, self.bias, x))
    }

    pub fn save<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut writer, self)?;
        writer.write_all(b"\n")?;
        writer.flush()
    }

    pub fn load<R: Read>(reader: R) -> Result<LogRegModel, WicError> {
        let m: LogRegModel = serde_json::from_reader(reader)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        if m.weights.len() != m.feature_set.len() {
            return Err(WicError::BadModel {
                weights: m.weights.len(),
                features: m.feature_set.len(),
            });
        }
        if !m.bias.is_finite() || m.weights.iter().any(|w| !w.is_finite()) {
            return Err(WicError::NonFinite);
        }
        Ok(m)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn linear(w: &[f64], b: f64, x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + b
}

/// The training objective at `(w, b)`.
pub fn objective(x: &[Vec<f64>], y: &[bool], w: &[f64], b: f64, lambda: f64) -> f64 {
    let n = x.len() as f64;
    let data: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, &yi)| {
            let z = linear(w, b, xi);
            softplus(z) - if yi { z } else { 0.0 }
        })
        .sum();
    let reg: f64 = w.iter().map(|w| w * w).sum();
    data / n + lambda / (2.0 * n) * reg
}

/// Objective and gradient, with the bias gradient last.
fn objective_grad(x: &[Vec<f64>], y: &[bool], theta: &[f64], lambda: f64) -> (f64, Vec<f64>) {
    let d = theta.len() - 1;
    let (w, b) = (&theta[..d], theta[d]);
    let n = x.len() as f64;
    let mut grad = vec![0.0; d + 1];
    let mut data = 0.0;
    for (xi, &yi) in x.iter().zip(y) {
        let z = linear(w, b, xi);
        let t = if yi { 1.0 } else { 0.0 };
        data += softplus(z) - t * z;
        let r = sigmoid(z) - t;
        for (g, v) in grad.iter_mut().zip(xi) {
            *g += r * v;
        }
        grad[d] += r;
    }
    let mut reg = 0.0;
    for j in 0..d {
        grad[j] = grad[j] / n + lambda / n * w[j];
        reg += w[j] * w[j];
    }
    grad[d] /= n;
    (data / n + lambda / (2.0 * n) * reg, grad)
}

/// Gradient descent with backtracking line search from `init`, or from
/// zero. Returns weights, bias and run statistics.
pub fn train_matrix(
    x: &[Vec<f64>],
    y: &[bool],
    config: &TrainConfig,
    init: Option<(&[f64], f64)>,
) -> Result<(Vec<f64>, f64, TrainingMeta), WicError> {
    if x.len() != y.len() {
        return Err(WicError::LengthMismatch {
            features: x.len(),
            labels: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(WicError::TooFewExamples);
    }
    if y.iter().all(|&v| v) || y.iter().all(|&v| !v) {
        return Err(WicError::DegenerateLabels);
    }
    let d = x[0].len();
    if x.iter().any(|r| r.len() != d) {
        return Err(WicError::BadModel {
            weights: d,
            features: x.iter().map(|r| r.len()).find(|&l| l != d).unwrap_or(d),
        });
    }
    if x.iter().flatten().any(|v| !v.is_finite()) || !config.lambda.is_finite() {
        return Err(WicError::NonFinite);
    }

    let mut theta = vec![0.0; d + 1];
    if let Some((w, b)) = init {
        if w.len() != d {
            return Err(WicError::BadModel {
                weights: w.len(),
                features: d,
            });
        }
        theta[..d].copy_from_slice(w);
        theta[d] = b;
    }
    let lambda = config.lambda;
    let (mut loss, mut grad) = objective_grad(x, y, &theta, lambda);
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    let mut cand = vec![0.0; d + 1];
    loop {
        let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if !loss.is_finite() || !gmax.is_finite() {
            return Err(WicError::NonFinite);
        }
        if gmax < config.tol {
            converged = true;
            break;
        }
        if iterations >= config.max_iter {
            break;
        }
        let g2: f64 = grad.iter().map(|g| g * g).sum();
        let slack = 1e-14 * loss.abs().max(1.0);
        let accepted = loop {
            for ((c, t), g) in cand.iter_mut().zip(&theta).zip(&grad) {
                *c = t - step * g;
            }
            let (l, g) = objective_grad(x, y, &cand, lambda);
            if l.is_finite() && l <= loss - 0.5 * step * g2 + slack {
                break Some((l, g));
            }
            step *= 0.5;
            if step < 1e-30 {
                break None;
            }
        };
        let Some((l, g)) = accepted else { break };
        std::mem::swap(&mut theta, &mut cand);
        loss = l;
        grad = g;
        iterations += 1;
        step = (step * 2.0).min(1e6);
    }
    let grad_norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    if !converged {
        log::warn!(
            "logistic regression stopped after {iterations} iterations with gradient {grad_norm:e}"
        );
    }
    let bias = theta.pop().unwrap_or(0.0);
    Ok((
        theta,
        bias,
        TrainingMeta {
            examples: x.len(),
            iterations,
            loss,
            grad_norm,
            converged,
        },
    ))
}

pub fn train_logreg(
    features: &[SimilarityFeatures],
    labels: &[bool],
    feature_set: &FeatureSet,
    config: &TrainConfig,
) -> Result<LogRegModel, WicError> {
    if features.len() != labels.len() {
        return Err(WicError::LengthMismatch {
            features: features.len(),
            labels: labels.len(),
        });
    }
    let x = features
        .iter()
        .map(|f| feature_set.extract(f))
        .collect::<Result<Vec<_>, _>>()?;
    let (weights, bias, training_meta) = train_matrix(&x, labels, config, None)?;
    Ok(LogRegModel {
        feature_set: feature_set.clone(),
        weights,
        bias,
        lambda: config.lambda,
        training_meta,
    })
}

/// Probability of "same meaning" and the thresholded label.
pub fn predict(model: &LogRegModel, features: &SimilarityFeatures) -> Result<(f64, bool), WicError> {
    let x = model.feature_set.extract(features)?;
    let p = model.probability(&x);
    Ok((p, p >= 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inventory::SenseKey;

    fn feats(sims: [Option<f64>; 4]) -> SimilarityFeatures {
        let k: SenseKey = "bank%1:17:01::".parse().unwrap();
        SimilarityFeatures {
            sims,
            sense1: k.clone(),
            sense2: k,
        }
    }

    #[test]
    fn feature_set_parsing() {
        assert_eq!("1,2".parse::<FeatureSet>().unwrap().indices(), &[1, 2]);
        assert_eq!("{3, 1}".parse::<FeatureSet>().unwrap().indices(), &[1, 3]);
        assert_eq!("4 4 2".parse::<FeatureSet>().unwrap().to_string(), "2,4");
        for bad in ["", "0", "5", "1,x", "{}"] {
            assert!(bad.parse::<FeatureSet>().is_err(), "{bad}");
        }
        let json = serde_json::to_string(&FeatureSet::all()).unwrap();
        assert_eq!(json, "[1,2,3,4]");
        assert!(serde_json::from_str::<FeatureSet>("[0]").is_err());
    }

    #[test]
    fn objective_values() {
        let x = vec![vec![1.0], vec![-1.0]];
        let y = vec![true, false];
        let ln2 = std::f64::consts::LN_2;
        assert!((objective(&x, &y, &[0.0], 0.0, 1.0) - ln2).abs() < 1e-15);
        let expect = (1.0 + (-2.0f64).exp()).ln() + 4.0 / 4.0;
        assert!((objective(&x, &y, &[2.0], 0.0, 1.0) - expect).abs() < 1e-12);
    }

    #[test]
    fn zero_model_is_half() {
        let m = LogRegModel {
            feature_set: "1,2".parse().unwrap(),
            weights: vec![0.0, 0.0],
            bias: 0.0,
            lambda: 1.0,
            training_meta: TrainingMeta {
                examples: 0,
                iterations: 0,
                loss: 0.0,
                grad_norm: 0.0,
                converged: true,
            },
        };
        let (p, label) = predict(&m, &feats([Some(0.9), Some(-0.3), None, None])).unwrap();
        assert_eq!(p, 0.5);
        assert!(label);
        assert!(matches!(
            predict(&m, &feats([Some(0.9), None, None, None])),
            Err(WicError::MissingFeature(2))
        ));
    }

    #[test]
    fn training_errors() {
        let cfg = TrainConfig::default();
        let x = vec![vec![0.1], vec![0.2]];
        assert!(matches!(
            train_matrix(&x, &[true, true], &cfg, None),
            Err(WicError::DegenerateLabels)
        ));
        assert!(matches!(
            train_matrix(&x[..1], &[true], &cfg, None),
            Err(WicError::TooFewExamples)
        ));
        assert!(matches!(
            train_matrix(&x, &[true], &cfg, None),
            Err(WicError::LengthMismatch { .. })
        ));
        let nan = vec![vec![f64::NAN], vec![0.2]];
        assert!(matches!(
            train_matrix(&nan, &[true, false], &cfg, None),
            Err(WicError::NonFinite)
        ));
    }

    #[test]
    fn converges_on_simple_data() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![(i as f64 - 19.5) / 20.0]).collect();
        let y: Vec<bool> = (0..40).map(|i| i % 3 != 0 && i > 10).collect();
        let (w, b, meta) = train_matrix(&x, &y, &TrainConfig::default(), None).unwrap();
        assert!(meta.converged);
        assert!(meta.grad_norm < 1e-6);
        assert!(w[0] > 0.0);
        let f0 = objective(&x, &y, &w, b, 1.0);
        for (dw, db) in [(1e-3, 0.0), (-1e-3, 0.0), (0.0, 1e-3), (0.0, -1e-3)] {
            assert!(objective(&x, &y, &[w[0] + dw], b + db, 1.0) >= f0);
        }
    }

    #[test]
    fn model_json_round_trip() {
        let x = [vec![0.9, 0.1], vec![0.2, 0.8], vec![0.7, 0.3], vec![0.1, 0.6]];
        let y = vec![true, false, true, false];
        let f: Vec<SimilarityFeatures> = x
            .iter()
            .map(|r| feats([Some(r[0]), Some(r[1]), None, None]))
            .collect();
        let m = train_logreg(&f, &y, &"1,2".parse().unwrap(), &TrainConfig::default()).unwrap();
        let mut buf = Vec::new();
        m.save(&mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        for k in ["feature_set", "weights", "bias", "lambda", "training_meta"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert_eq!(LogRegModel::load(buf.as_slice()).unwrap(), m);
        let broken = r#"{"feature_set":[1,2],"weights":[1.0],"bias":0.0,"lambda":1.0,
            "training_meta":{"examples":1,"iterations":1,"loss":0.0,"grad_norm":0.0,"converged":true}}"#;
        assert!(matches!(
            LogRegModel::load(broken.as_bytes()),
            Err(WicError::BadModel { weights: 1, features: 2 })
        ));
    }
}
