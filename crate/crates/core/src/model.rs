//! Linear softmax model, data shards, prior, and their gradients.
//!
//! Parameters are a flat vector of length `num_classes * (feature_dim + 1)`:
//! for each class, `feature_dim` weights followed by one bias.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSpec {
    pub num_classes: usize,
    pub feature_dim: usize,
}

impl ModelSpec {
    pub fn new(num_classes: usize, feature_dim: usize) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::invalid("num_classes must be >= 2"));
        }
        if feature_dim < 1 {
            return Err(Error::invalid("feature_dim must be >= 1"));
        }
        Ok(ModelSpec {
            num_classes,
            feature_dim,
        })
    }

    /// Flattened parameter count d = num_classes * (feature_dim + 1).
    pub fn param_dim(&self) -> usize {
        self.num_classes * (self.feature_dim + 1)
    }

    /// Class logits w_c . x + b_c for a single example.
    pub fn logits(&self, params: &[f64], x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(params.len(), self.param_dim());
        debug_assert_eq!(x.len(), self.feature_dim);
        let stride = self.feature_dim + 1;
        (0..self.num_classes)
            .map(|c| {
                let w = &params[c * stride..(c + 1) * stride];
                let mut z = w[self.feature_dim]; // bias
                for (wj, xj) in w[..self.feature_dim].iter().zip(x) {
                    z += wj * xj;
                }
                z
            })
            .collect()
    }
}

/// Isotropic Gaussian prior over the flattened parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec {
    pub variance: f64,
}

impl PriorSpec {
    pub fn new(variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::invalid("prior variance must be positive and finite"));
        }
        Ok(PriorSpec { variance })
    }
}

/// One agent's local dataset: feature rows and class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentShard {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
}

impl AgentShard {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>, model: &ModelSpec) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::invalid("shard must contain at least one example"));
        }
        if features.len() != labels.len() {
            return Err(Error::invalid("feature/label count mismatch"));
        }
        for (i, f) in features.iter().enumerate() {
            if f.len() != model.feature_dim {
                return Err(Error::invalid(format!(
                    "example {i} has {} features, expected {}",
                    f.len(),
                    model.feature_dim
                )));
            }
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("feature vector of example {i}")));
            }
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= model.num_classes) {
            return Err(Error::invalid(format!(
                "label {l} out of range for {} classes",
                model.num_classes
            )));
        }
        Ok(AgentShard { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn examples(&self) -> impl Iterator<Item = (&[f64], usize)> {
        self.features
            .iter()
            .map(|f| f.as_slice())
            .zip(self.labels.iter().copied())
    }

    /// Concatenate several shards into one (used for centralized test sets).
    pub fn concat(shards: &[AgentShard], model: &ModelSpec) -> Result<AgentShard> {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for s in shards {
            features.extend(s.features.iter().cloned());
            labels.extend(s.labels.iter().copied());
        }
        AgentShard::new(features, labels, model)
    }
}

/// Numerically stable softmax (max-shifted).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - m).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

fn check_finite(params: &[f64]) -> Result<()> {
    if params.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("model parameters".into()));
    }
    Ok(())
}

/// Average cross-entropy loss over the shard and its exact gradient.
pub fn loss_and_grad(
    params: &[f64],
    shard: &AgentShard,
    model: &ModelSpec,
) -> Result<(f64, Vec<f64>)> {
    check_finite(params)?;
    if params.len() != model.param_dim() {
        return Err(Error::invalid("parameter dimension mismatch"));
    }
    let n = shard.len() as f64;
    let stride = model.feature_dim + 1;
    let mut loss = 0.0;
    let mut grad = vec![0.0; model.param_dim()];
    for (x, y) in shard.examples() {
        let probs = softmax(&model.logits(params, x));
        loss -= probs[y].ln();
        for (c, &p) in probs.iter().enumerate() {
            let coeff = (p - if c == y { 1.0 } else { 0.0 }) / n;
            let g = &mut grad[c * stride..(c + 1) * stride];
            for (gj, xj) in g[..model.feature_dim].iter_mut().zip(x) {
                *gj += coeff * xj;
            }
            g[model.feature_dim] += coeff;
        }
    }
    Ok((loss / n, grad))
}

/// Score of the isotropic Gaussian prior: -params / variance.
pub fn log_prior_grad(params: &[f64], prior: &PriorSpec) -> Result<Vec<f64>> {
    check_finite(params)?;
    Ok(params.iter().map(|p| -p / prior.variance).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn toy_model() -> ModelSpec {
        ModelSpec::new(2, 2).unwrap()
    }

    fn toy_shard(model: &ModelSpec) -> AgentShard {
        AgentShard::new(
            vec![vec![1.0, -0.5], vec![0.3, 2.0], vec![-1.2, 0.4]],
            vec![0, 1, 0],
            model,
        )
        .unwrap()
    }

    #[test]
    fn zero_params_uniform_softmax_loss() {
        let model = toy_model();
        let shard = toy_shard(&model);
        let (loss, _) = loss_and_grad(&vec![0.0; model.param_dim()], &shard, &model).unwrap();
        assert!((loss - 2.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn grad_matches_finite_differences() {
        let model = ModelSpec::new(3, 2).unwrap();
        let shard = AgentShard::new(
            vec![vec![0.7, -1.1], vec![0.2, 0.9], vec![-0.4, 0.3], vec![1.5, -0.2]],
            vec![0, 1, 2, 1],
            &model,
        )
        .unwrap();
        let mut rng = SeededRng::new(42);
        let d = model.param_dim();
        let params: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        let (_, grad) = loss_and_grad(&params, &shard, &model).unwrap();
        let h = 1e-6;
        for i in 0..d {
            let mut p = params.clone();
            p[i] += h;
            let (lp, _) = loss_and_grad(&p, &shard, &model).unwrap();
            p[i] -= 2.0 * h;
            let (lm, _) = loss_and_grad(&p, &shard, &model).unwrap();
            let fd = (lp - lm) / (2.0 * h);
            let denom = grad[i].abs().max(1e-8);
            assert!(
                (grad[i] - fd).abs() / denom < 1e-5,
                "coord {i}: grad {} vs fd {}",
                grad[i],
                fd
            );
        }
    }

    #[test]
    fn duplicating_examples_is_invariant() {
        let model = toy_model();
        let shard = toy_shard(&model);
        let doubled = AgentShard::concat(&[shard.clone(), shard.clone()], &model).unwrap();
        let mut rng = SeededRng::new(3);
        let params: Vec<f64> = (0..model.param_dim()).map(|_| rng.normal()).collect();
        let (l1, g1) = loss_and_grad(&params, &shard, &model).unwrap();
        let (l2, g2) = loss_and_grad(&params, &doubled, &model).unwrap();
        assert!((l1 - l2).abs() < 1e-12);
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_finite_params() {
        let model = toy_model();
        let shard = toy_shard(&model);
        let mut params = vec![0.0; model.param_dim()];
        params[1] = f64::NAN;
        assert!(loss_and_grad(&params, &shard, &model).is_err());
    }

    #[test]
    fn prior_grad_closed_form() {
        let prior = PriorSpec::new(1.0).unwrap();
        assert_eq!(log_prior_grad(&[0.0, 0.0], &prior).unwrap(), vec![0.0, 0.0]);
        assert_eq!(
            log_prior_grad(&[2.0, -1.0], &prior).unwrap(),
            vec![-2.0, 1.0]
        );
    }

    #[test]
    fn prior_grad_matches_finite_differences() {
        // log density up to constant: -||p||^2 / (2 var)
        let prior = PriorSpec::new(0.7).unwrap();
        let params = [0.4, -1.3, 2.2];
        let logp = |p: &[f64]| -p.iter().map(|v| v * v).sum::<f64>() / (2.0 * prior.variance);
        let grad = log_prior_grad(&params, &prior).unwrap();
        let h = 1e-6;
        for i in 0..params.len() {
            let mut p = params.to_vec();
            p[i] += h;
            let up = logp(&p);
            p[i] -= 2.0 * h;
            let dn = logp(&p);
            assert!((grad[i] - (up - dn) / (2.0 * h)).abs() < 1e-6);
        }
    }

    #[test]
    fn softmax_is_probability_vector() {
        let mut rng = SeededRng::new(9);
        for _ in 0..50 {
            let logits: Vec<f64> = (0..5).map(|_| rng.normal() * 100.0).collect();
            let p = softmax(&logits);
            assert!(p.iter().all(|&v| v >= 0.0));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn shard_rejects_bad_labels() {
        let model = toy_model();
        assert!(AgentShard::new(vec![vec![0.0, 0.0]], vec![2], &model).is_err());
    }
}
