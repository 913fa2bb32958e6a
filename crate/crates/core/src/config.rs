//! Experiment configuration: TOML schema, defaults, validation, and
//! conversion into the typed specs used by the simulator.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codec::{AmaxPolicy, CompressionConfig, Scheme, SizeSpec};
use crate::dataset::{DatasetSpec, GeneratorKind};
use crate::error::{Error, Result};
use crate::model::PriorSpec;
use crate::protocol::{FederationConfig, SchedulePolicy, UnlearnRequest};
use crate::svgd::{BandwidthPolicy, KernelConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSection,
    pub federation: FederationSection,
    pub compression: CompressionSection,
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    /// "blobs" or "two-class-per-agent".
    pub generator: String,
    pub classes: usize,
    pub feature_dim: usize,
    #[serde(default = "default_agent_examples")]
    pub agent_examples: usize,
    #[serde(default = "default_test_examples")]
    pub test_examples: usize,
    #[serde(default = "default_class_separation")]
    pub class_separation: f64,
    #[serde(default = "default_noise")]
    pub noise: f64,
    #[serde(default = "default_classes_per_agent")]
    pub classes_per_agent: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent_classes: Option<Vec<Vec<usize>>>,
}

fn default_agent_examples() -> usize {
    100
}
fn default_test_examples() -> usize {
    500
}
fn default_class_separation() -> f64 {
    3.0
}
fn default_noise() -> f64 {
    1.0
}
fn default_classes_per_agent() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FederationSection {
    pub agents: usize,
    pub particles: usize,
    #[serde(default = "default_local_steps")]
    pub local_steps: usize,
    /// Defaults to `local_steps` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_distill_steps: Option<usize>,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    /// Temperature applied during unlearning rounds; defaults to `temperature`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forget_temperature: Option<f64>,
    #[serde(default = "default_prior_variance")]
    pub prior_variance: f64,
    #[serde(default = "default_base_rate")]
    pub base_rate: f64,
    #[serde(default = "default_kde_bandwidth")]
    pub kde_bandwidth: f64,
    #[serde(default = "default_bandwidth_floor")]
    pub bandwidth_floor: f64,
    /// Fixed SVGD kernel bandwidth; absent means the median heuristic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svgd_bandwidth_fixed: Option<f64>,
    /// "round-robin" (default) or "random".
    #[serde(default = "default_schedule")]
    pub schedule: String,
    #[serde(default)]
    pub weight_loss_by_size: bool,
}

fn default_local_steps() -> usize {
    5
}
fn default_temperature() -> f64 {
    1.0
}
fn default_prior_variance() -> f64 {
    1.0
}
fn default_base_rate() -> f64 {
    0.1
}
fn default_kde_bandwidth() -> f64 {
    0.55
}
fn default_bandwidth_floor() -> f64 {
    1e-6
}
fn default_schedule() -> String {
    "round-robin".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompressionSection {
    /// "per-particle", "shared", or "alpha-shared".
    pub scheme: String,
    /// 1/alpha_s for the alpha-shared scheme.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_groups: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bit_budget: Option<f64>,
    #[serde(default = "default_quant_bits")]
    pub quant_bits: u32,
    /// Fixed dynamic range; absent means per-message a_max headers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amax_fixed: Option<f64>,
    /// Optional full override applied during the unlearning phase, so the
    /// forget rounds can run under a different uplink constraint than the
    /// learning phase.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forget: Option<Box<CompressionSection>>,
}

fn default_quant_bits() -> u32 {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// "dsvgd", "forget", "fedavg", or "scratch".
    pub mode: String,
    pub rounds: usize,
    #[serde(default = "default_eval_every")]
    pub eval_every: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_ece_bins")]
    pub ece_bins: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forget_agents: Vec<usize>,
    #[serde(default)]
    pub forget_rounds: usize,
}

fn default_eval_every() -> usize {
    10
}
fn default_ece_bins() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub dir: String,
    #[serde(default = "default_prefix")]
    pub prefix: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_out_dir(),
            prefix: default_prefix(),
        }
    }
}

fn default_out_dir() -> String {
    "out".to_string()
}
fn default_prefix() -> String {
    "run".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// One of: N_p, R_u, alpha_s, N_b, r.
    pub axis: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Dsvgd,
    Forget,
    FedAvg,
    Scratch,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = toml::from_str(text)
            .map_err(|e| Error::config("<toml>", e.to_string()))?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn mode(&self) -> Result<RunMode> {
        match self.run.mode.as_str() {
            "dsvgd" => Ok(RunMode::Dsvgd),
            "forget" => Ok(RunMode::Forget),
            "fedavg" => Ok(RunMode::FedAvg),
            "scratch" => Ok(RunMode::Scratch),
            other => Err(Error::config(
                "run.mode",
                format!("unknown mode `{other}` (expected dsvgd|forget|fedavg|scratch)"),
            )),
        }
    }

    pub fn dataset_spec(&self) -> Result<DatasetSpec> {
        let generator = match self.dataset.generator.as_str() {
            "blobs" => GeneratorKind::Blobs,
            "two-class-per-agent" => GeneratorKind::TwoClassPerAgent,
            other => {
                return Err(Error::config(
                    "dataset.generator",
                    format!("unknown generator `{other}`"),
                ))
            }
        };
        Ok(DatasetSpec {
            generator,
            num_classes: self.dataset.classes,
            feature_dim: self.dataset.feature_dim,
            agent_examples: self.dataset.agent_examples,
            test_examples: self.dataset.test_examples,
            class_separation: self.dataset.class_separation,
            noise: self.dataset.noise,
            classes_per_agent: self.dataset.classes_per_agent,
            agent_classes: self.dataset.agent_classes.clone(),
        })
    }

    pub fn federation_config(&self) -> Result<FederationConfig> {
        let schedule = match self.federation.schedule.as_str() {
            "round-robin" => SchedulePolicy::RoundRobin,
            "random" => SchedulePolicy::UniformRandom,
            other => {
                return Err(Error::config(
                    "federation.schedule",
                    format!("unknown schedule `{other}`"),
                ))
            }
        };
        let particles = match self.mode()? {
            RunMode::FedAvg => 1,
            _ => self.federation.particles,
        };
        Ok(FederationConfig {
            n_particles: particles,
            local_steps: self.federation.local_steps,
            local_distill_steps: self
                .federation
                .local_distill_steps
                .unwrap_or(self.federation.local_steps),
            temperature: self.federation.temperature,
            forget_temperature: self
                .federation
                .forget_temperature
                .unwrap_or(self.federation.temperature),
            prior: PriorSpec::new(self.federation.prior_variance)
                .map_err(|e| Error::config("federation.prior_variance", e.to_string()))?,
            kernels: KernelConfig {
                svgd_bandwidth: match self.federation.svgd_bandwidth_fixed {
                    Some(h) => BandwidthPolicy::Fixed(h),
                    None => BandwidthPolicy::Median,
                },
                kde_bandwidth: self.federation.kde_bandwidth,
                bandwidth_floor: self.federation.bandwidth_floor,
            },
            base_rate: self.federation.base_rate,
            schedule,
            weight_loss_by_size: self.federation.weight_loss_by_size,
        })
    }

    pub fn compression_config(&self) -> Result<CompressionConfig> {
        section_to_compression(&self.compression, self.mode()? == RunMode::FedAvg)
    }

    /// Compression used during forget rounds: the `[compression.forget]`
    /// override when present, the base config otherwise.
    pub fn forget_compression_config(&self) -> Result<CompressionConfig> {
        match &self.compression.forget {
            Some(sec) => section_to_compression(sec, false),
            None => self.compression_config(),
        }
    }

    pub fn unlearn_request(&self) -> Result<UnlearnRequest> {
        UnlearnRequest::new(self.run.forget_agents.clone(), self.federation.agents)
            .map_err(|e| Error::config("run.forget_agents", e.to_string()))
    }

    /// Full cross-field validation; every violated invariant names its field.
    pub fn validate(&self) -> Result<()> {
        let mode = self.mode()?;
        let ds = self.dataset_spec()?;
        ds.validate(self.federation.agents)
            .map_err(|e| Error::config("dataset", e.to_string()))?;
        if self.federation.agents == 0 {
            return Err(Error::config("federation.agents", "must be >= 1"));
        }
        let fed = self.federation_config()?;
        fed.validate()
            .map_err(|e| Error::config("federation", e.to_string()))?;
        let comp = self.compression_config()?;
        let d = ds.model()?.param_dim();
        comp.validate_for(fed.n_particles, d)
            .map_err(|e| Error::config("compression", e.to_string()))?;
        if self.run.rounds == 0 && self.run.forget_rounds == 0 && self.sweep.is_none() {
            // zero-round runs are allowed (they emit an empty trace), so no
            // error here; nothing else to check on counts
        }
        if self.run.eval_every == 0 {
            return Err(Error::config("run.eval_every", "must be >= 1"));
        }
        if self.run.ece_bins == 0 {
            return Err(Error::config("run.ece_bins", "must be >= 1"));
        }
        if let Some(sec) = &self.compression.forget {
            if mode != RunMode::Forget {
                return Err(Error::config(
                    "compression.forget",
                    "only valid in forget mode",
                ));
            }
            if sec.forget.is_some() {
                return Err(Error::config(
                    "compression.forget.forget",
                    "override cannot nest another override",
                ));
            }
            self.forget_compression_config()?
                .validate_for(fed.n_particles, d)
                .map_err(|e| Error::config("compression.forget", e.to_string()))?;
        }
        match mode {
            RunMode::Forget | RunMode::Scratch => {
                self.unlearn_request()?;
                if mode == RunMode::Forget && self.run.forget_rounds == 0 {
                    return Err(Error::config(
                        "run.forget_rounds",
                        "must be >= 1 in forget mode",
                    ));
                }
            }
            _ => {
                if !self.run.forget_agents.is_empty() {
                    return Err(Error::config(
                        "run.forget_agents",
                        "only valid in forget or scratch mode",
                    ));
                }
            }
        }
        if let Some(sweep) = &self.sweep {
            validate_axis(&sweep.axis)?;
        }
        Ok(())
    }
}

fn section_to_compression(sec: &CompressionSection, fedavg: bool) -> Result<CompressionConfig> {
    let scheme = if fedavg {
        // FedAvg uploads a single parameter vector through the
        // single-particle codec path.
        Scheme::PerParticle
    } else {
        match sec.scheme.as_str() {
            "per-particle" => Scheme::PerParticle,
            "shared" => Scheme::Shared,
            "alpha-shared" => {
                let groups = sec.alpha_groups.ok_or_else(|| {
                    Error::config(
                        "compression.alpha_groups",
                        "required for the alpha-shared scheme",
                    )
                })?;
                Scheme::AlphaShared { num_groups: groups }
            }
            other => {
                return Err(Error::config(
                    "compression.scheme",
                    format!("unknown scheme `{other}`"),
                ))
            }
        }
    };
    let size = match (sec.ratio, sec.bit_budget) {
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "compression.ratio",
                "ratio and bit_budget are mutually exclusive",
            ))
        }
        (Some(r), None) => SizeSpec::Ratio(r),
        (None, Some(b)) => SizeSpec::Budget(b),
        (None, None) => {
            return Err(Error::config(
                "compression.ratio",
                "exactly one of ratio or bit_budget must be set",
            ))
        }
    };
    let amax = match sec.amax_fixed {
        Some(a) => AmaxPolicy::Fixed(a),
        None => AmaxPolicy::PerMessage,
    };
    Ok(CompressionConfig {
        scheme,
        size,
        n_bits: sec.quant_bits,
        amax,
    })
}

pub const SWEEP_AXES: &[&str] = &["N_p", "R_u", "alpha_s", "N_b", "r"];

fn validate_axis(axis: &str) -> Result<()> {
    if SWEEP_AXES.contains(&axis) {
        Ok(())
    } else {
        Err(Error::config(
            "sweep.axis",
            format!("unknown axis `{axis}` (expected one of {SWEEP_AXES:?})"),
        ))
    }
}

/// Apply one sweep-cell value to a copy of the config.
pub fn apply_axis(cfg: &ExperimentConfig, axis: &str, value: f64) -> Result<ExperimentConfig> {
    let mut out = cfg.clone();
    match axis {
        "N_p" => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(Error::config("sweep.values", "N_p must be a positive integer"));
            }
            out.federation.particles = value as usize;
        }
        "R_u" => {
            out.compression.ratio = None;
            out.compression.bit_budget = Some(value);
        }
        "alpha_s" => {
            if !(value > 0.0 && value <= 1.0) {
                return Err(Error::config("sweep.values", "alpha_s must be in (0, 1]"));
            }
            let groups = 1.0 / value;
            if (groups - groups.round()).abs() > 1e-9 {
                return Err(Error::config("sweep.values", "1/alpha_s must be an integer"));
            }
            out.compression.scheme = "alpha-shared".to_string();
            out.compression.alpha_groups = Some(groups.round() as usize);
        }
        "N_b" => {
            if value < 2.0 || value.fract() != 0.0 {
                return Err(Error::config("sweep.values", "N_b must be an integer >= 2"));
            }
            out.compression.quant_bits = value as u32;
        }
        "r" => {
            out.compression.bit_budget = None;
            out.compression.ratio = Some(value);
        }
        other => return Err(Error::config("sweep.axis", format!("unknown axis `{other}`"))),
    }
    Ok(out)
}

/// Parse and validate a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let cfg = ExperimentConfig::from_toml_str(&text)?;
    cfg.validate()?;
    Ok(cfg)
}
