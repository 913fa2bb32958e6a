//! Seeded synthetic dataset generators and CSV (de)serialization.
//!
//! Two generators are shipped: `blobs` draws Gaussian class clusters split
//! i.i.d. across agents; `two-class-per-agent` assigns each agent examples
//! from a small fixed subset of classes (non-iid), either by a configured
//! per-agent class list or by consecutive assignment.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{AgentShard, ModelSpec};
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    Blobs,
    TwoClassPerAgent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub generator: GeneratorKind,
    pub num_classes: usize,
    pub feature_dim: usize,
    /// Examples per agent shard.
    pub agent_examples: usize,
    /// Examples in the centralized test set.
    pub test_examples: usize,
    /// Distance scale of the class means.
    pub class_separation: f64,
    /// Standard deviation of the within-class noise.
    pub noise: f64,
    /// Classes held by each agent under the non-iid generator.
    pub classes_per_agent: usize,
    /// Explicit per-agent class lists; overrides consecutive assignment.
    pub agent_classes: Option<Vec<Vec<usize>>>,
}

impl DatasetSpec {
    pub fn model(&self) -> Result<ModelSpec> {
        ModelSpec::new(self.num_classes, self.feature_dim)
    }

    pub fn validate(&self, n_agents: usize) -> Result<()> {
        self.model()?;
        if self.agent_examples == 0 || self.test_examples == 0 {
            return Err(Error::invalid("agent_examples and test_examples must be >= 1"));
        }
        if !(self.class_separation > 0.0) || !(self.noise > 0.0) {
            return Err(Error::invalid("class_separation and noise must be positive"));
        }
        if self.generator == GeneratorKind::TwoClassPerAgent {
            if self.classes_per_agent == 0 || self.classes_per_agent > self.num_classes {
                return Err(Error::invalid("classes_per_agent out of range"));
            }
            if let Some(ac) = &self.agent_classes {
                if ac.len() != n_agents {
                    return Err(Error::invalid("agent_classes must list every agent"));
                }
                for (k, cls) in ac.iter().enumerate() {
                    if cls.is_empty() || cls.iter().any(|&c| c >= self.num_classes) {
                        return Err(Error::invalid(format!(
                            "agent_classes[{k}] has an invalid class"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Deterministic class mean: classes placed on a circle in the first two
    /// feature dimensions (on a line when feature_dim = 1).
    pub fn class_mean(&self, class: usize) -> Vec<f64> {
        let mut mean = vec![0.0; self.feature_dim];
        if self.feature_dim == 1 {
            mean[0] = self.class_separation * (class as f64 - (self.num_classes as f64 - 1.0) / 2.0);
        } else {
            let angle = 2.0 * std::f64::consts::PI * class as f64 / self.num_classes as f64;
            mean[0] = self.class_separation * angle.cos();
            mean[1] = self.class_separation * angle.sin();
        }
        mean
    }

    fn sample_example(&self, class: usize, rng: &mut SeededRng) -> Vec<f64> {
        self.class_mean(class)
            .into_iter()
            .map(|m| m + self.noise * rng.normal())
            .collect()
    }

    /// Classes available to agent k.
    pub fn classes_of_agent(&self, agent: usize) -> Vec<usize> {
        match self.generator {
            GeneratorKind::Blobs => (0..self.num_classes).collect(),
            GeneratorKind::TwoClassPerAgent => {
                if let Some(ac) = &self.agent_classes {
                    ac[agent].clone()
                } else {
                    (0..self.classes_per_agent)
                        .map(|i| (agent + i) % self.num_classes)
                        .collect()
                }
            }
        }
    }

    /// Generate one shard per agent from the substream labelled by agent id.
    pub fn generate_shards(&self, n_agents: usize, rng: &SeededRng) -> Result<Vec<AgentShard>> {
        self.validate(n_agents)?;
        let model = self.model()?;
        (0..n_agents)
            .map(|agent| {
                let mut r = rng.derive(&[0x5a_da, agent as u64]);
                let classes = self.classes_of_agent(agent);
                let mut features = Vec::with_capacity(self.agent_examples);
                let mut labels = Vec::with_capacity(self.agent_examples);
                for _ in 0..self.agent_examples {
                    let label = classes[r.below(classes.len())];
                    features.push(self.sample_example(label, &mut r));
                    labels.push(label);
                }
                AgentShard::new(features, labels, &model)
            })
            .collect()
    }

    /// Centralized test set cycling through all classes.
    pub fn generate_test_set(&self, rng: &SeededRng) -> Result<AgentShard> {
        let model = self.model()?;
        let mut r = rng.derive(&[0x7e_57]);
        let mut features = Vec::with_capacity(self.test_examples);
        let mut labels = Vec::with_capacity(self.test_examples);
        for i in 0..self.test_examples {
            let label = i % self.num_classes;
            features.push(self.sample_example(label, &mut r));
            labels.push(label);
        }
        AgentShard::new(features, labels, &model)
    }
}

/// Write a shard as CSV: feature columns then the integer label.
pub fn write_shard_csv(path: &Path, shard: &AgentShard, model: &ModelSpec) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header: Vec<String> = (0..model.feature_dim)
        .map(|j| format!("f{j}"))
        .chain(std::iter::once("label".to_string()))
        .collect();
    writeln!(file, "{}", header.join(","))?;
    for (x, y) in shard.examples() {
        let row: Vec<String> = x.iter().map(|v| v.to_string()).collect();
        writeln!(file, "{},{y}", row.join(","))?;
    }
    Ok(())
}

pub fn read_shard_csv(path: &Path, model: &ModelSpec) -> Result<AgentShard> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in file.lines().enumerate() {
        let line = line?;
        if i == 0 {
            continue; // header
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != model.feature_dim + 1 {
            return Err(Error::invalid(format!("csv line {} has wrong arity", i + 1)));
        }
        let feats = fields[..model.feature_dim]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| Error::invalid(format!("csv line {}: {e}", i + 1))))
            .collect::<Result<Vec<f64>>>()?;
        let label = fields[model.feature_dim]
            .parse::<usize>()
            .map_err(|e| Error::invalid(format!("csv line {}: {e}", i + 1)))?;
        features.push(feats);
        labels.push(label);
    }
    AgentShard::new(features, labels, model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> DatasetSpec {
        DatasetSpec {
            generator: GeneratorKind::Blobs,
            num_classes: 3,
            feature_dim: 2,
            agent_examples: 50,
            test_examples: 30,
            class_separation: 3.0,
            noise: 1.0,
            classes_per_agent: 2,
            agent_classes: None,
        }
    }

    #[test]
    fn deterministic_generation() {
        let s = spec();
        let rng = SeededRng::new(42);
        let a = s.generate_shards(3, &rng).unwrap();
        let b = s.generate_shards(3, &rng).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            s.generate_test_set(&rng).unwrap(),
            s.generate_test_set(&rng).unwrap()
        );
    }

    #[test]
    fn non_iid_classes_respected() {
        let mut s = spec();
        s.generator = GeneratorKind::TwoClassPerAgent;
        let rng = SeededRng::new(1);
        let shards = s.generate_shards(4, &rng).unwrap();
        for (agent, shard) in shards.iter().enumerate() {
            let allowed = s.classes_of_agent(agent);
            for (_, y) in shard.examples() {
                assert!(allowed.contains(&y));
            }
        }
    }

    #[test]
    fn explicit_assignment_used() {
        let mut s = spec();
        s.generator = GeneratorKind::TwoClassPerAgent;
        s.agent_classes = Some(vec![vec![0], vec![1, 2]]);
        let rng = SeededRng::new(2);
        let shards = s.generate_shards(2, &rng).unwrap();
        assert!(shards[0].examples().all(|(_, y)| y == 0));
        assert!(shards[1].examples().all(|(_, y)| y == 1 || y == 2));
    }

    #[test]
    fn csv_round_trip() {
        let s = spec();
        let model = s.model().unwrap();
        let rng = SeededRng::new(3);
        let test = s.generate_test_set(&rng).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("test.csv");
        write_shard_csv(&path, &test, &model).unwrap();
        let back = read_shard_csv(&path, &model).unwrap();
        assert_eq!(back, test);
    }

    #[test]
    fn test_set_covers_all_classes() {
        let s = spec();
        let rng = SeededRng::new(4);
        let test = s.generate_test_set(&rng).unwrap();
        for c in 0..3 {
            assert!(test.examples().any(|(_, y)| y == c));
        }
    }
}
