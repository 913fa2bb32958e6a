//! Test accuracy and expected calibration error over a particle ensemble.
//!
//! Predictions use the Bayesian model average: softmax probabilities are
//! averaged across particles, and the prediction is the argmax of the
//! averaged vector (ties broken by lowest class index).

use crate::error::{Error, Result};
use crate::model::{softmax, AgentShard, ModelSpec};
use crate::svgd::ParticleSet;

#[derive(Debug, Clone, PartialEq)]
pub struct BinStat {
    pub count: usize,
    pub accuracy: f64,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EceReport {
    pub bins: Vec<BinStat>,
    pub ece: f64,
}

/// Particle-averaged class probabilities for one example.
pub fn averaged_probs(particles: &ParticleSet, x: &[f64], model: &ModelSpec) -> Vec<f64> {
    let n = particles.n_particles() as f64;
    let mut avg = vec![0.0; model.num_classes];
    for row in particles.rows() {
        for (a, p) in avg.iter_mut().zip(softmax(&model.logits(row, x))) {
            *a += p / n;
        }
    }
    avg
}

fn argmax_lowest(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

fn check_inputs(particles: &ParticleSet, test: &AgentShard, model: &ModelSpec) -> Result<()> {
    if test.is_empty() {
        return Err(Error::invalid("test set must be non-empty"));
    }
    if particles.dim() != model.param_dim() {
        return Err(Error::invalid("particle dimension does not match model"));
    }
    Ok(())
}

/// Fraction of test examples whose ensemble prediction matches the label.
pub fn test_accuracy(particles: &ParticleSet, test: &AgentShard, model: &ModelSpec) -> Result<f64> {
    check_inputs(particles, test, model)?;
    let correct = test
        .examples()
        .filter(|(x, y)| argmax_lowest(&averaged_probs(particles, x, model)) == *y)
        .count();
    Ok(correct as f64 / test.len() as f64)
}

/// Per-class accuracy vector; classes absent from the test set report 0.
pub fn per_class_accuracy(
    particles: &ParticleSet,
    test: &AgentShard,
    model: &ModelSpec,
) -> Result<Vec<f64>> {
    check_inputs(particles, test, model)?;
    let mut correct = vec![0usize; model.num_classes];
    let mut total = vec![0usize; model.num_classes];
    for (x, y) in test.examples() {
        total[y] += 1;
        if argmax_lowest(&averaged_probs(particles, x, model)) == y {
            correct[y] += 1;
        }
    }
    Ok(correct
        .iter()
        .zip(&total)
        .map(|(&c, &t)| if t == 0 { 0.0 } else { c as f64 / t as f64 })
        .collect())
}

/// Bin index for a confidence in (0, 1] over M right-closed equal-width bins.
fn bin_index(conf: f64, m: usize) -> usize {
    let idx = (conf * m as f64).ceil() as usize;
    idx.clamp(1, m) - 1
}

/// ECE over (confidence, correctness) pairs; shared by the public entry point
/// and usable on raw predictions.
pub fn ece_from_predictions(preds: &[(f64, bool)], m: usize) -> Result<EceReport> {
    if m < 1 {
        return Err(Error::invalid("number of ECE bins must be >= 1"));
    }
    if preds.is_empty() {
        return Err(Error::invalid("test set must be non-empty"));
    }
    let n = preds.len() as f64;
    let mut count = vec![0usize; m];
    let mut acc_sum = vec![0.0; m];
    let mut conf_sum = vec![0.0; m];
    for &(conf, correct) in preds {
        let b = bin_index(conf, m);
        count[b] += 1;
        conf_sum[b] += conf;
        if correct {
            acc_sum[b] += 1.0;
        }
    }
    let mut ece = 0.0;
    let bins = (0..m)
        .map(|b| {
            if count[b] == 0 {
                BinStat {
                    count: 0,
                    accuracy: 0.0,
                    confidence: 0.0,
                }
            } else {
                let c = count[b] as f64;
                let acc = acc_sum[b] / c;
                let conf = conf_sum[b] / c;
                ece += (c / n) * (acc - conf).abs();
                BinStat {
                    count: count[b],
                    accuracy: acc,
                    confidence: conf,
                }
            }
        })
        .collect();
    Ok(EceReport { bins, ece })
}

/// Expected calibration error with M equal-width bins over (0, 1].
pub fn expected_calibration_error(
    particles: &ParticleSet,
    test: &AgentShard,
    model: &ModelSpec,
    m: usize,
) -> Result<EceReport> {
    check_inputs(particles, test, model)?;
    let preds: Vec<(f64, bool)> = test
        .examples()
        .map(|(x, y)| {
            let probs = averaged_probs(particles, x, model);
            let pred = argmax_lowest(&probs);
            (probs[pred], pred == y)
        })
        .collect();
    ece_from_predictions(&preds, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn confident_correct_particle_full_accuracy() {
        let model = ModelSpec::new(2, 1).unwrap();
        // class 1 weight large positive: x>0 -> class 1, x<0 -> class 0
        let particles = ParticleSet::from_rows(vec![vec![0.0, 0.0, 100.0, 0.0]]).unwrap();
        let test = AgentShard::new(vec![vec![-1.0], vec![2.0]], vec![0, 1], &model).unwrap();
        assert_eq!(test_accuracy(&particles, &test, &model).unwrap(), 1.0);
        let report = expected_calibration_error(&particles, &test, &model, 10).unwrap();
        assert!(report.ece < 1e-12);
    }

    #[test]
    fn averaged_probability_decides() {
        let model = ModelSpec::new(2, 1).unwrap();
        // particle A predicts class 1 on x=1 with logit diff 3,
        // particle B predicts class 0 with logit diff 1: average favors class 1.
        let particles =
            ParticleSet::from_rows(vec![vec![0.0, 0.0, 3.0, 0.0], vec![1.0, 0.0, 0.0, 0.0]])
                .unwrap();
        let test = AgentShard::new(vec![vec![1.0], vec![1.0]], vec![1, 0], &model).unwrap();
        let probs = averaged_probs(&particles, &[1.0], &model);
        assert!(probs[1] > probs[0]);
        assert!((test_accuracy(&particles, &test, &model).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn accuracy_invariant_under_particle_reordering() {
        let model = ModelSpec::new(3, 2).unwrap();
        let mut rng = SeededRng::new(5);
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..model.param_dim()).map(|_| rng.normal()).collect())
            .collect();
        let test = AgentShard::new(
            (0..20)
                .map(|_| vec![rng.normal(), rng.normal()])
                .collect(),
            (0..20).map(|i| i % 3).collect(),
            &model,
        )
        .unwrap();
        let a = ParticleSet::from_rows(rows.clone()).unwrap();
        let mut rev = rows;
        rev.reverse();
        let b = ParticleSet::from_rows(rev).unwrap();
        assert_eq!(
            test_accuracy(&a, &test, &model).unwrap(),
            test_accuracy(&b, &test, &model).unwrap()
        );
    }

    #[test]
    fn ece_hand_computed_example() {
        // bin (0.7, 0.8]: 3 examples, acc 2/3, conf 0.8
        // bin (0.8, 0.9]: 1 example, acc 1, conf 0.9
        let preds = vec![(0.8, true), (0.8, true), (0.8, false), (0.9, true)];
        let report = ece_from_predictions(&preds, 10).unwrap();
        assert!((report.ece - 0.125).abs() < 1e-12);
        assert_eq!(report.bins[7].count, 3);
        assert_eq!(report.bins[8].count, 1);
        assert_eq!(report.bins.iter().map(|b| b.count).sum::<usize>(), 4);
    }

    #[test]
    fn ece_bounded_for_random_predictions() {
        for seed in 0..100 {
            let mut rng = SeededRng::new(seed);
            let preds: Vec<(f64, bool)> = (0..30)
                .map(|_| (0.5 + 0.5 * rng.uniform(), rng.uniform() < 0.5))
                .collect();
            let e = ece_from_predictions(&preds, 10).unwrap().ece;
            assert!((0.0..=1.0).contains(&e));
        }
    }

    #[test]
    fn ece_permutation_invariant() {
        let mut rng = SeededRng::new(11);
        let mut preds: Vec<(f64, bool)> = (0..50)
            .map(|_| (0.4 + 0.6 * rng.uniform(), rng.uniform() < 0.7))
            .collect();
        let a = ece_from_predictions(&preds, 10).unwrap().ece;
        preds.reverse();
        let b = ece_from_predictions(&preds, 10).unwrap().ece;
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn empty_test_set_rejected() {
        assert!(ece_from_predictions(&[], 10).is_err());
    }

    #[test]
    fn argmax_ties_break_low() {
        assert_eq!(argmax_lowest(&[0.4, 0.4, 0.2]), 0);
    }
}
