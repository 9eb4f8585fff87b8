//! One-feature logistic regression fitted by plain gradient descent.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogisticModel {
    pub weight: f64,
    pub bias: f64,
    pub threshold: f64,
}

impl LogisticModel {
    pub fn probability(&self, x: f64) -> f64 {
        sigmoid(self.weight * x + self.bias)
    }

    pub fn predict(&self, x: f64) -> bool {
        self.probability(x) >= self.threshold
    }

    /// Fraction of points whose prediction matches the label.
    pub fn accuracy(&self, features: &[f64], labels: &[bool]) -> f64 {
        let hits = features
            .iter()
            .zip(labels)
            .filter(|(&x, &y)| self.predict(x) == y)
            .count();
        hits as f64 / features.len() as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            learning_rate: 0.1,
            max_iterations: 10_000,
            tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LogisticFit {
    pub model: LogisticModel,
    pub iterations: usize,
    pub converged: bool,
    /// Mean log-loss before each update and after the last one.
    pub loss_history: Vec<f64>,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean negative log-likelihood of `sigmoid(w x + b)`.
pub fn log_loss(weight: f64, bias: f64, features: &[f64], labels: &[bool]) -> f64 {
    let n = features.len() as f64;
    features
        .iter()
        .zip(labels)
        .map(|(&x, &y)| {
            let z = weight * x + bias;
            // log(1 + e^z) - y z, computed stably
            let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
            softplus - if y { z } else { 0.0 }
        })
        .sum::<f64>()
        / n
}

/// Analytic gradient of [`log_loss`] with respect to (weight, bias).
pub fn log_loss_gradient(weight: f64, bias: f64, features: &[f64], labels: &[bool]) -> (f64, f64) {
    let n = features.len() as f64;
    let (mut gw, mut gb) = (0.0, 0.0);
    for (&x, &y) in features.iter().zip(labels) {
        let r = sigmoid(weight * x + bias) - if y { 1.0 } else { 0.0 };
        gw += r * x;
        gb += r;
    }
    (gw / n, gb / n)
}

pub fn fit_logistic_1d(features: &[f64], labels: &[bool], cfg: &LogisticConfig) -> Result<LogisticFit> {
    if features.len() != labels.len() {
        return Err(Error::Argument(format!(
            "{} features for {} labels",
            features.len(),
            labels.len()
        )));
    }
    let positives = labels.iter().filter(|&&y| y).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::Argument("logistic fit needs both classes".into()));
    }
    if features.iter().any(|x| !x.is_finite()) {
        return Err(Error::Argument("non-finite feature".into()));
    }

    let (mut w, mut b) = (0.0, 0.0);
    let mut loss_history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        loss_history.push(log_loss(w, b, features, labels));
        let (gw, gb) = log_loss_gradient(w, b, features, labels);
        if gw.hypot(gb) < cfg.tolerance {
            converged = true;
            break;
        }
        w -= cfg.learning_rate * gw;
        b -= cfg.learning_rate * gb;
        iterations += 1;
    }
    if !converged {
        loss_history.push(log_loss(w, b, features, labels));
    }
    Ok(LogisticFit {
        model: LogisticModel {
            weight: w,
            bias: b,
            threshold: 0.5,
        },
        iterations,
        converged,
        loss_history,
    })
}
