//! Round-based parameter-server simulation: particle-based Bayesian
//! federated learning, unlearning, and the compressed FedAvg baseline.
//!
//! One agent is scheduled per round. The downlink is noiseless; the uplink
//! carries exactly one serialized compressed update, and the server state is
//! reconstructed from those bytes alone.

use crate::codec::{encode_delta, CompressedDelta, CompressionConfig, DeltaMatrix};
use crate::error::{Error, Result};
use crate::model::{loss_and_grad, AgentShard, ModelSpec, PriorSpec};
use crate::rng::SeededRng;
use crate::svgd::{
    kde_log_density_grad, svgd_step, AdaGradState, Direction, KernelConfig, ParticleSet,
    TiltedTarget,
};

// rng substream labels
const SUB_GLOBAL_INIT: u64 = 1;
const SUB_LOCAL_INIT: u64 = 2;
const SUB_SCHEDULE: u64 = 3;
const SUB_QUANTIZE: u64 = 4;
const SUB_UNLEARN_INIT: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulePolicy {
    RoundRobin,
    UniformRandom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FederationConfig {
    pub n_particles: usize,
    /// SVGD steps per scheduled round.
    pub local_steps: usize,
    /// Distillation steps refreshing the scheduled agent's local particles.
    pub local_distill_steps: usize,
    pub temperature: f64,
    /// Temperature used during unlearning rounds; trades forgetting strength
    /// against retention of the remaining agents' knowledge.
    pub forget_temperature: f64,
    pub prior: PriorSpec,
    pub kernels: KernelConfig,
    pub base_rate: f64,
    pub schedule: SchedulePolicy,
    pub weight_loss_by_size: bool,
}

impl FederationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 1 {
            return Err(Error::invalid("N_p must be >= 1"));
        }
        if self.local_steps < 1 {
            return Err(Error::invalid("local_steps must be >= 1"));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::invalid("temperature must be positive"));
        }
        if !(self.forget_temperature > 0.0) {
            return Err(Error::invalid("forget_temperature must be positive"));
        }
        if !(self.base_rate > 0.0) {
            return Err(Error::invalid("base_rate must be positive"));
        }
        self.kernels.validate()
    }
}

#[derive(Debug, Clone)]
pub struct AgentState {
    pub shard: AgentShard,
    pub local_particles: ParticleSet,
    ada_update: AdaGradState,
    ada_distill: AdaGradState,
}

/// Agents requesting erasure. Must be a nonempty proper subset of all agents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnlearnRequest {
    agents: Vec<usize>,
}

impl UnlearnRequest {
    pub fn new(mut agents: Vec<usize>, n_agents: usize) -> Result<Self> {
        agents.sort_unstable();
        agents.dedup();
        if agents.is_empty() {
            return Err(Error::invalid("forget set must be nonempty"));
        }
        if agents.iter().any(|&a| a >= n_agents) {
            return Err(Error::invalid("forget set references unknown agent"));
        }
        if agents.len() >= n_agents {
            return Err(Error::invalid("forget set must be a proper subset of agents"));
        }
        Ok(UnlearnRequest { agents })
    }

    pub fn agents(&self) -> &[usize] {
        &self.agents
    }
}

/// What one protocol round consumed and touched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundOutcome {
    pub round: usize,
    pub agent: usize,
    pub uplink_bits: u64,
}

#[derive(Debug, Clone)]
pub struct FederationState {
    pub model: ModelSpec,
    pub fed: FederationConfig,
    pub compression: CompressionConfig,
    pub global_particles: ParticleSet,
    pub agents: Vec<AgentState>,
    pub round: usize,
    pub cumulative_bits: u64,
    rng: SeededRng,
}

impl FederationState {
    /// Draw global and per-agent local particles from the prior.
    pub fn init_learning(
        model: ModelSpec,
        fed: FederationConfig,
        compression: CompressionConfig,
        shards: Vec<AgentShard>,
        rng: SeededRng,
    ) -> Result<Self> {
        fed.validate()?;
        if shards.is_empty() {
            return Err(Error::invalid("at least one agent required"));
        }
        let d = model.param_dim();
        compression.validate_for(fed.n_particles, d)?;

        let mut global_rng = rng.derive(&[SUB_GLOBAL_INIT]);
        let global_particles =
            ParticleSet::from_prior(fed.n_particles, d, &fed.prior, &mut global_rng)?;

        let agents = shards
            .into_iter()
            .enumerate()
            .map(|(idx, shard)| {
                let mut r = rng.derive(&[SUB_LOCAL_INIT, idx as u64]);
                Ok(AgentState {
                    shard,
                    local_particles: ParticleSet::from_prior(fed.n_particles, d, &fed.prior, &mut r)?,
                    ada_update: AdaGradState::new(fed.base_rate, fed.n_particles, d),
                    ada_distill: AdaGradState::new(fed.base_rate, fed.n_particles, d),
                })
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(FederationState {
            model,
            fed,
            compression,
            global_particles,
            agents,
            round: 0,
            cumulative_bits: 0,
            rng,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    fn schedule(&self, eligible: &[usize]) -> usize {
        match self.fed.schedule {
            SchedulePolicy::RoundRobin => eligible[self.round % eligible.len()],
            SchedulePolicy::UniformRandom => {
                let mut r = self.rng.derive(&[SUB_SCHEDULE, self.round as u64]);
                eligible[r.below(eligible.len())]
            }
        }
    }

    /// Encode the update, then rebuild it exclusively from the serialized
    /// bytes, exactly as the server would. Returns the applied (lossy) delta
    /// and the message cost.
    fn transmit(&self, updated: &ParticleSet, downloaded: &ParticleSet) -> Result<(Vec<f64>, u64)> {
        let delta = DeltaMatrix::new(
            updated.delta_from(downloaded)?,
            updated.n_particles(),
            updated.dim(),
        )?;
        let mut qrng = self.rng.derive(&[SUB_QUANTIZE, self.round as u64]);
        let encoded = encode_delta(&delta, &self.compression, &mut qrng)?;
        let bytes = encoded.to_bytes();
        let received = CompressedDelta::from_bytes(&bytes)?;
        Ok((received.decode().data, received.bit_count))
    }

    /// One compressed learning (or unlearning) round over `eligible` agents.
    fn run_round(&mut self, eligible: &[usize], direction: Direction) -> Result<RoundOutcome> {
        let agent_idx = self.schedule(eligible);
        let downloaded = self.global_particles.clone();
        let agent = &self.agents[agent_idx];

        // SVGD against the tilted target, synchronously over L local steps.
        let mut working = downloaded.clone();
        let mut ada = agent.ada_update.clone();
        {
            let target = TiltedTarget {
                global_particles: &downloaded,
                local_particles: &agent.local_particles,
                shard: &agent.shard,
                temperature: match direction {
                    Direction::Learn => self.fed.temperature,
                    Direction::Unlearn => self.fed.forget_temperature,
                },
                direction,
                weight_loss_by_size: self.fed.weight_loss_by_size,
            };
            for _ in 0..self.fed.local_steps {
                working = svgd_step(
                    &working,
                    |x| crate::svgd::tilted_score(x, &target, &self.fed.kernels, &self.model),
                    &self.fed.kernels,
                    &mut ada,
                )?;
            }
        }

        // Uplink: the server and the agent both apply the decoded delta, so
        // their views of the global particles agree bitwise.
        let (applied, bits) = self.transmit(&working, &downloaded)?;
        let new_global = downloaded.plus_delta(&applied)?;

        // Distillation refresh of the scheduled agent's local particles
        // toward t_k^(i) ~ (q^(i) / q^(i-1)) t_k^(i-1).
        let lambda = self.fed.kernels.kde_bandwidth;
        let t_prev = agent.local_particles.clone();
        let mut local = agent.local_particles.clone();
        let mut ada_distill = agent.ada_distill.clone();
        for _ in 0..self.fed.local_distill_steps {
            local = svgd_step(
                &local,
                |x| {
                    let q_new = kde_log_density_grad(x, &new_global, lambda);
                    let q_old = kde_log_density_grad(x, &downloaded, lambda);
                    let t_old = kde_log_density_grad(x, &t_prev, lambda);
                    Ok(q_new
                        .iter()
                        .zip(&q_old)
                        .zip(&t_old)
                        .map(|((n, o), t)| n - o + t)
                        .collect())
                },
                &self.fed.kernels,
                &mut ada_distill,
            )?;
        }

        self.global_particles = new_global;
        let agent = &mut self.agents[agent_idx];
        agent.local_particles = local;
        agent.ada_update = ada;
        agent.ada_distill = ada_distill;
        self.round += 1;
        self.cumulative_bits += bits;
        Ok(RoundOutcome {
            round: self.round,
            agent: agent_idx,
            uplink_bits: bits,
        })
    }

    pub fn run_learning_round(&mut self) -> Result<RoundOutcome> {
        let eligible: Vec<usize> = (0..self.n_agents()).collect();
        self.run_round(&eligible, Direction::Learn)
    }

    /// Re-draw the local particles of forgetting agents from the prior and
    /// reset their optimizer state. Call once before the unlearning phase.
    pub fn prepare_unlearning(&mut self, request: &UnlearnRequest) -> Result<()> {
        UnlearnRequest::new(request.agents.clone(), self.n_agents())?;
        let d = self.model.param_dim();
        for &idx in request.agents() {
            let mut r = self.rng.derive(&[SUB_UNLEARN_INIT, idx as u64]);
            let agent = &mut self.agents[idx];
            agent.local_particles =
                ParticleSet::from_prior(self.fed.n_particles, d, &self.fed.prior, &mut r)?;
            agent.ada_update = AdaGradState::new(self.fed.base_rate, self.fed.n_particles, d);
            agent.ada_distill = AdaGradState::new(self.fed.base_rate, self.fed.n_particles, d);
        }
        Ok(())
    }

    /// One Forget round: same flow as learning, scheduled within the forget
    /// set, with the data-loss term reversed.
    pub fn run_unlearning_round(&mut self, request: &UnlearnRequest) -> Result<RoundOutcome> {
        UnlearnRequest::new(request.agents.clone(), self.n_agents())?;
        self.run_round(request.agents(), Direction::Unlearn)
    }

    /// One compressed FedAvg round: the scheduled agent runs L AdaGrad
    /// gradient-descent steps on its loss and uploads the compressed
    /// parameter delta (single-particle codec path).
    pub fn run_fedavg_round(&mut self) -> Result<RoundOutcome> {
        if self.fed.n_particles != 1 {
            return Err(Error::invalid("FedAvg mode requires N_p = 1"));
        }
        let eligible: Vec<usize> = (0..self.n_agents()).collect();
        let agent_idx = self.schedule(&eligible);
        let downloaded = self.global_particles.clone();
        let agent = &self.agents[agent_idx];

        let mut params = downloaded.row(0).to_vec();
        let mut ada = agent.ada_update.clone();
        for _ in 0..self.fed.local_steps {
            let (_, grad) = loss_and_grad(&params, &agent.shard, &self.model)?;
            let phi: Vec<f64> = grad.iter().map(|g| -g).collect();
            let rates = ada.step_rates(&phi);
            for ((p, f), r) in params.iter_mut().zip(&phi).zip(&rates) {
                *p += r * f;
            }
        }
        let updated = ParticleSet::new(params, 1, self.model.param_dim())?;

        let (applied, bits) = self.transmit(&updated, &downloaded)?;
        self.global_particles = downloaded.plus_delta(&applied)?;
        let agent = &mut self.agents[agent_idx];
        agent.ada_update = ada;
        self.round += 1;
        self.cumulative_bits += bits;
        Ok(RoundOutcome {
            round: self.round,
            agent: agent_idx,
            uplink_bits: bits,
        })
    }
}
