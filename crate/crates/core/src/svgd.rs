//! SVGD particle updates against tilted targets, for both learning and
//! unlearning, plus the RBF kernel, KDE scores, and the AdaGrad schedule.

use crate::error::{Error, Result};
use crate::model::{loss_and_grad, AgentShard, ModelSpec, PriorSpec};
use crate::rng::SeededRng;

/// N_p particles of dimension d, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    data: Vec<f64>,
    n_particles: usize,
    dim: usize,
}

impl ParticleSet {
    pub fn new(data: Vec<f64>, n_particles: usize, dim: usize) -> Result<Self> {
        if n_particles < 1 || dim < 1 {
            return Err(Error::invalid("particle set must have N_p >= 1 and d >= 1"));
        }
        if data.len() != n_particles * dim {
            return Err(Error::invalid("particle buffer size mismatch"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("particle set".into()));
        }
        Ok(ParticleSet {
            data,
            n_particles,
            dim,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("particle set must be non-empty"));
        }
        let d = rows[0].len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("ragged particle rows"));
        }
        ParticleSet::new(rows.into_iter().flatten().collect(), n, d)
    }

    /// Draw N_p particles i.i.d. from the isotropic Gaussian prior.
    pub fn from_prior(n_particles: usize, dim: usize, prior: &PriorSpec, rng: &mut SeededRng) -> Result<Self> {
        let sd = prior.variance.sqrt();
        let data = (0..n_particles * dim).map(|_| sd * rng.normal()).collect();
        ParticleSet::new(data, n_particles, dim)
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.data[n * self.dim..(n + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Entrywise difference self - other, as a flat row-major buffer.
    pub fn delta_from(&self, other: &ParticleSet) -> Result<Vec<f64>> {
        if self.n_particles != other.n_particles || self.dim != other.dim {
            return Err(Error::invalid("particle set shape mismatch"));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect())
    }

    /// New set with the flat delta added entrywise.
    pub fn plus_delta(&self, delta: &[f64]) -> Result<ParticleSet> {
        if delta.len() != self.data.len() {
            return Err(Error::invalid("delta size mismatch"));
        }
        let data = self.data.iter().zip(delta).map(|(a, b)| a + b).collect();
        ParticleSet::new(data, self.n_particles, self.dim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthPolicy {
    /// h = med^2 / ln(N_p) recomputed every step.
    Median,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    pub svgd_bandwidth: BandwidthPolicy,
    /// KDE bandwidth lambda for the global/local particle density estimates.
    pub kde_bandwidth: f64,
    pub bandwidth_floor: f64,
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kde_bandwidth > 0.0) {
            return Err(Error::invalid("kde_bandwidth must be positive"));
        }
        if !(self.bandwidth_floor > 0.0) {
            return Err(Error::invalid("bandwidth_floor must be positive"));
        }
        if let BandwidthPolicy::Fixed(h) = self.svgd_bandwidth {
            if !(h > 0.0) {
                return Err(Error::invalid("fixed SVGD bandwidth must be positive"));
            }
        }
        Ok(())
    }
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            svgd_bandwidth: BandwidthPolicy::Median,
            kde_bandwidth: 0.55,
            bandwidth_floor: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Learn,
    Unlearn,
}

/// Score assembly for the per-round tilted target: the global KDE over
/// `global_particles`, divided by the local KDE over `local_particles`,
/// times exp(-+ L_k / temperature) depending on direction.
#[derive(Debug, Clone)]
pub struct TiltedTarget<'a> {
    pub global_particles: &'a ParticleSet,
    pub local_particles: &'a ParticleSet,
    pub shard: &'a AgentShard,
    pub temperature: f64,
    pub direction: Direction,
    /// Weight the data loss by the shard size N_k (off by default).
    pub weight_loss_by_size: bool,
}

/// Per-coordinate AdaGrad state: rate = base_rate / (fudge + sqrt(sum phi^2)).
#[derive(Debug, Clone, PartialEq)]
pub struct AdaGradState {
    pub base_rate: f64,
    pub fudge: f64,
    accum: Vec<f64>,
}

impl AdaGradState {
    pub fn new(base_rate: f64, n_particles: usize, dim: usize) -> Self {
        AdaGradState {
            base_rate,
            fudge: 1e-8,
            accum: vec![0.0; n_particles * dim],
        }
    }

    /// Accumulate phi^2 and return the per-coordinate rates for this step.
    pub fn step_rates(&mut self, phi: &[f64]) -> Vec<f64> {
        debug_assert_eq!(phi.len(), self.accum.len());
        self.accum
            .iter_mut()
            .zip(phi)
            .map(|(a, p)| {
                *a += p * p;
                self.base_rate / (self.fudge + a.sqrt())
            })
            .collect()
    }

    pub fn accum(&self) -> &[f64] {
        &self.accum
    }
}

/// RBF kernel k = exp(-||x-y||^2 / h) and its gradient w.r.t. x.
pub fn rbf_kernel_and_grad(x: &[f64], y: &[f64], h: f64) -> Result<(f64, Vec<f64>)> {
    if !(h > 0.0) {
        return Err(Error::invalid("kernel bandwidth must be positive"));
    }
    let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    let k = (-sq / h).exp();
    let grad = x
        .iter()
        .zip(y)
        .map(|(a, b)| -(2.0 / h) * (a - b) * k)
        .collect();
    Ok((k, grad))
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Median-heuristic bandwidth h = med^2 / ln(N_p).
///
/// med is the median of all pairwise distances, taking the lower of the two
/// middle values for even counts. Degenerate cases (N_p = 1, or a result
/// below the floor) fall back to max(floor, med^2).
pub fn median_bandwidth(particles: &ParticleSet, floor: f64) -> f64 {
    let n = particles.n_particles();
    if n == 1 {
        return floor;
    }
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push(sq_dist(particles.row(i), particles.row(j)).sqrt());
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // lower middle for even counts
    let med = dists[(dists.len() - 1) / 2];
    let h = med * med / (n as f64).ln();
    if h < floor {
        floor.max(med * med)
    } else {
        h
    }
}

/// Unnormalized KDE log density: log[(1/N) sum_n exp(-||x - theta_n||^2 / lambda)],
/// max-shifted so it stays finite for widely separated supports.
pub fn kde_log_density(x: &[f64], support: &ParticleSet, lambda: f64) -> f64 {
    let exponents: Vec<f64> = support.rows().map(|r| -sq_dist(x, r) / lambda).collect();
    let m = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = exponents.iter().map(|e| (e - m).exp()).sum();
    m + sum.ln() - (support.n_particles() as f64).ln()
}

/// Gradient of the KDE log density w.r.t. x (log-sum-exp stabilized).
pub fn kde_log_density_grad(x: &[f64], support: &ParticleSet, lambda: f64) -> Vec<f64> {
    let exponents: Vec<f64> = support.rows().map(|r| -sq_dist(x, r) / lambda).collect();
    let m = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = exponents.iter().map(|e| (e - m).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut grad = vec![0.0; x.len()];
    for (w, r) in weights.iter().zip(support.rows()) {
        let c = (w / total) * (-2.0 / lambda);
        for (g, (xi, ri)) in grad.iter_mut().zip(x.iter().zip(r)) {
            *g += c * (xi - ri);
        }
    }
    grad
}

/// Unnormalized log density of the tilted target (used by oracles and tests;
/// the constant log Z is dropped).
pub fn tilted_log_density(
    x: &[f64],
    target: &TiltedTarget,
    kernels: &KernelConfig,
    model: &ModelSpec,
) -> Result<f64> {
    let lambda = kernels.kde_bandwidth;
    let (loss, _) = loss_and_grad(x, target.shard, model)?;
    let weight = if target.weight_loss_by_size {
        target.shard.len() as f64
    } else {
        1.0
    };
    let sign = match target.direction {
        Direction::Learn => -1.0,
        Direction::Unlearn => 1.0,
    };
    Ok(kde_log_density(x, target.global_particles, lambda)
        - kde_log_density(x, target.local_particles, lambda)
        + sign * weight * loss / target.temperature)
}

/// Score of the tilted target:
/// grad log q - grad log t_k -+ (1/temperature) grad L_k.
pub fn tilted_score(
    x: &[f64],
    target: &TiltedTarget,
    kernels: &KernelConfig,
    model: &ModelSpec,
) -> Result<Vec<f64>> {
    if target.global_particles.dim() != target.local_particles.dim() {
        return Err(Error::invalid("global/local particle dimension mismatch"));
    }
    if !(target.temperature > 0.0) {
        return Err(Error::invalid("temperature must be positive"));
    }
    let lambda = kernels.kde_bandwidth;
    let q_grad = kde_log_density_grad(x, target.global_particles, lambda);
    let t_grad = kde_log_density_grad(x, target.local_particles, lambda);
    let (_, loss_grad) = loss_and_grad(x, target.shard, model)?;
    let weight = if target.weight_loss_by_size {
        target.shard.len() as f64
    } else {
        1.0
    };
    // learn: -(1/alpha) grad L_k; unlearn: +(1/alpha) grad L_k
    let sign = match target.direction {
        Direction::Learn => -1.0,
        Direction::Unlearn => 1.0,
    };
    let scale = sign * weight / target.temperature;
    Ok(q_grad
        .iter()
        .zip(&t_grad)
        .zip(&loss_grad)
        .map(|((q, t), l)| q - t + scale * l)
        .collect())
}

/// One synchronous SVGD step:
/// phi(theta_n) = (1/N_p) sum_j [ k(theta_j, theta_n) score(theta_j)
///                               + grad_{theta_j} k(theta_j, theta_n) ],
/// evaluated entirely at pre-step particle values, followed by an AdaGrad
/// per-coordinate update theta_n += rate_n * phi(theta_n).
pub fn svgd_step<F>(
    particles: &ParticleSet,
    score: F,
    kernels: &KernelConfig,
    ada: &mut AdaGradState,
) -> Result<ParticleSet>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = particles.n_particles();
    let d = particles.dim();
    let h = match kernels.svgd_bandwidth {
        BandwidthPolicy::Median => median_bandwidth(particles, kernels.bandwidth_floor),
        BandwidthPolicy::Fixed(h) => h,
    };

    let scores: Vec<Vec<f64>> = particles
        .rows()
        .map(|r| score(r))
        .collect::<Result<_>>()?;

    let mut phi = vec![0.0; n * d];
    for target_idx in 0..n {
        let theta_n = particles.row(target_idx);
        let out = &mut phi[target_idx * d..(target_idx + 1) * d];
        for j in 0..n {
            let theta_j = particles.row(j);
            let sq = sq_dist(theta_j, theta_n);
            let k = (-sq / h).exp();
            for dim in 0..d {
                // grad_{theta_j} k(theta_j, theta_n) = -(2/h)(theta_j - theta_n) k
                out[dim] += k * scores[j][dim] - (2.0 / h) * (theta_j[dim] - theta_n[dim]) * k;
            }
        }
        for v in out.iter_mut() {
            *v /= n as f64;
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "SVGD update phi for particle {target_idx}"
            )));
        }
    }

    let rates = ada.step_rates(&phi);
    let data = particles
        .as_slice()
        .iter()
        .zip(phi.iter().zip(&rates))
        .map(|(x, (p, r))| x + r * p)
        .collect();
    ParticleSet::new(data, n, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AgentShard;

    #[test]
    fn rbf_kernel_closed_form() {
        let (k, g) = rbf_kernel_and_grad(&[1.0, 2.0], &[1.0, 2.0], 3.0).unwrap();
        assert_eq!(k, 1.0);
        assert_eq!(g, vec![0.0, 0.0]);

        let (k, _) = rbf_kernel_and_grad(&[1.0, 0.0], &[0.0, 0.0], 1.0).unwrap();
        assert!((k - (-1.0f64).exp()).abs() < 1e-15);

        assert!(rbf_kernel_and_grad(&[0.0], &[0.0], 0.0).is_err());
    }

    #[test]
    fn rbf_grad_matches_finite_differences() {
        let x = [0.3, -0.7, 1.1];
        let y = [-0.2, 0.4, 0.9];
        let h = 0.8;
        let (_, grad) = rbf_kernel_and_grad(&x, &y, h).unwrap();
        let eps = 1e-6;
        for i in 0..3 {
            let mut xp = x;
            xp[i] += eps;
            let (kp, _) = rbf_kernel_and_grad(&xp, &y, h).unwrap();
            xp[i] -= 2.0 * eps;
            let (km, _) = rbf_kernel_and_grad(&xp, &y, h).unwrap();
            assert!((grad[i] - (kp - km) / (2.0 * eps)).abs() < 1e-6);
        }
    }

    #[test]
    fn median_bandwidth_two_particles() {
        let p = ParticleSet::from_rows(vec![vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let h = median_bandwidth(&p, 1e-6);
        assert!((h - 4.0 / 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn median_bandwidth_degenerate() {
        let p = ParticleSet::from_rows(vec![vec![1.0, 1.0]; 4]).unwrap();
        assert_eq!(median_bandwidth(&p, 1e-6), 1e-6);
        let single = ParticleSet::from_rows(vec![vec![1.0]]).unwrap();
        assert_eq!(median_bandwidth(&single, 1e-3), 1e-3);
    }

    #[test]
    fn median_bandwidth_permutation_invariant() {
        let p = ParticleSet::from_rows(vec![
            vec![0.0, 0.1],
            vec![1.0, -2.0],
            vec![3.0, 0.5],
            vec![-1.0, 0.7],
        ])
        .unwrap();
        let q = ParticleSet::from_rows(vec![
            vec![3.0, 0.5],
            vec![0.0, 0.1],
            vec![-1.0, 0.7],
            vec![1.0, -2.0],
        ])
        .unwrap();
        assert_eq!(median_bandwidth(&p, 1e-6), median_bandwidth(&q, 1e-6));
    }

    #[test]
    fn kde_grad_single_support() {
        let support = ParticleSet::from_rows(vec![vec![1.0, -1.0]]).unwrap();
        let g = kde_log_density_grad(&[2.0, 0.0], &support, 0.5);
        // one-term KDE is a Gaussian score: -(2/lambda)(x - theta)
        assert!((g[0] - (-(2.0 / 0.5) * 1.0)).abs() < 1e-12);
        assert!((g[1] - (-(2.0 / 0.5) * 1.0)).abs() < 1e-12);
    }

    #[test]
    fn kde_grad_symmetry_midpoint() {
        let support = ParticleSet::from_rows(vec![vec![-1.0], vec![1.0]]).unwrap();
        let g = kde_log_density_grad(&[0.0], &support, 0.7);
        assert!(g[0].abs() < 1e-14);
    }

    #[test]
    fn kde_grad_matches_finite_differences() {
        let support = ParticleSet::from_rows(vec![
            vec![0.2, -0.4],
            vec![1.1, 0.3],
            vec![-0.8, 0.9],
        ])
        .unwrap();
        let x = [0.5, 0.1];
        let lambda = 0.9;
        let g = kde_log_density_grad(&x, &support, lambda);
        let eps = 1e-6;
        for i in 0..2 {
            let mut xp = x;
            xp[i] += eps;
            let up = kde_log_density(&xp, &support, lambda);
            xp[i] -= 2.0 * eps;
            let dn = kde_log_density(&xp, &support, lambda);
            let fd = (up - dn) / (2.0 * eps);
            assert!((g[i] - fd).abs() / g[i].abs().max(1e-8) < 1e-5);
        }
    }

    #[test]
    fn kde_finite_for_large_coordinates() {
        let support = ParticleSet::from_rows(vec![vec![1e3, -1e3], vec![-1e3, 1e3]]).unwrap();
        let g = kde_log_density_grad(&[1e3, 1e3], &support, 0.55);
        assert!(g.iter().all(|v| v.is_finite()));
        assert!(kde_log_density(&[1e3, 1e3], &support, 0.55).is_finite());
    }

    fn tilt_fixture() -> (ModelSpec, AgentShard, ParticleSet, ParticleSet) {
        let model = ModelSpec::new(2, 1).unwrap();
        let shard = AgentShard::new(
            vec![vec![0.6], vec![-1.2], vec![0.1]],
            vec![0, 1, 1],
            &model,
        )
        .unwrap();
        let global = ParticleSet::from_rows(vec![
            vec![0.1, -0.2, 0.3, 0.0],
            vec![-0.5, 0.4, 0.2, 0.1],
        ])
        .unwrap();
        let local = ParticleSet::from_rows(vec![
            vec![0.3, 0.1, -0.1, 0.2],
            vec![0.0, -0.3, 0.5, -0.4],
        ])
        .unwrap();
        (model, shard, global, local)
    }

    #[test]
    fn tilted_score_kde_cancellation() {
        let (model, shard, global, _) = tilt_fixture();
        let kernels = KernelConfig::default();
        let target = TiltedTarget {
            global_particles: &global,
            local_particles: &global,
            shard: &shard,
            temperature: 2.0,
            direction: Direction::Learn,
            weight_loss_by_size: false,
        };
        let x = [0.2, -0.1, 0.4, 0.3];
        let score = tilted_score(&x, &target, &kernels, &model).unwrap();
        let (_, lg) = loss_and_grad(&x, &shard, &model).unwrap();
        for (s, l) in score.iter().zip(&lg) {
            assert!((s - (-l / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn unlearn_flips_loss_term() {
        let (model, shard, global, local) = tilt_fixture();
        let kernels = KernelConfig::default();
        let x = [0.2, -0.1, 0.4, 0.3];
        let mk = |direction| TiltedTarget {
            global_particles: &global,
            local_particles: &local,
            shard: &shard,
            temperature: 1.5,
            direction,
            weight_loss_by_size: false,
        };
        let learn = tilted_score(&x, &mk(Direction::Learn), &kernels, &model).unwrap();
        let unlearn = tilted_score(&x, &mk(Direction::Unlearn), &kernels, &model).unwrap();
        // data terms cancel in the sum: learn + unlearn = 2 (grad log q - grad log t)
        let q = kde_log_density_grad(&x, &global, kernels.kde_bandwidth);
        let t = kde_log_density_grad(&x, &local, kernels.kde_bandwidth);
        for i in 0..x.len() {
            assert!((learn[i] + unlearn[i] - 2.0 * (q[i] - t[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn tilted_score_matches_finite_differences() {
        let (model, shard, global, local) = tilt_fixture();
        let kernels = KernelConfig {
            kde_bandwidth: 1.3,
            ..KernelConfig::default()
        };
        for direction in [Direction::Learn, Direction::Unlearn] {
            let target = TiltedTarget {
                global_particles: &global,
                local_particles: &local,
                shard: &shard,
                temperature: 0.8,
                direction,
                weight_loss_by_size: false,
            };
            let x = [0.15, -0.25, 0.35, 0.05];
            let score = tilted_score(&x, &target, &kernels, &model).unwrap();
            let eps = 1e-6;
            for i in 0..x.len() {
                let mut xp = x;
                xp[i] += eps;
                let up = tilted_log_density(&xp, &target, &kernels, &model).unwrap();
                xp[i] -= 2.0 * eps;
                let dn = tilted_log_density(&xp, &target, &kernels, &model).unwrap();
                let fd = (up - dn) / (2.0 * eps);
                assert!(
                    (score[i] - fd).abs() / score[i].abs().max(1e-6) < 1e-5,
                    "dir {direction:?} coord {i}: {} vs {}",
                    score[i],
                    fd
                );
            }
        }
    }

    #[test]
    fn one_particle_step_is_adagrad_ascent() {
        let kernels = KernelConfig::default();
        let score = |x: &[f64]| Ok(x.iter().map(|v| -v).collect());
        let mut p = ParticleSet::from_rows(vec![vec![2.0, -3.0]]).unwrap();
        let mut ada = AdaGradState::new(0.1, 1, 2);
        let mut plain = vec![2.0, -3.0];
        let mut accum = vec![0.0f64, 0.0];
        for _ in 0..50 {
            p = svgd_step(&p, score, &kernels, &mut ada).unwrap();
            for i in 0..2 {
                let g = -plain[i];
                accum[i] += g * g;
                plain[i] += 0.1 / (1e-8 + accum[i].sqrt()) * g;
            }
            for i in 0..2 {
                assert!((p.row(0)[i] - plain[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_score_particles_repel() {
        let kernels = KernelConfig::default();
        let p = ParticleSet::from_rows(vec![vec![-0.5], vec![0.5]]).unwrap();
        let mut ada = AdaGradState::new(0.1, 2, 1);
        let next = svgd_step(&p, |_| Ok(vec![0.0]), &kernels, &mut ada).unwrap();
        assert!(next.row(0)[0] < -0.5);
        assert!(next.row(1)[0] > 0.5);
    }

    #[test]
    fn permutation_equivariance() {
        let kernels = KernelConfig::default();
        let rows = vec![vec![0.3, 1.0], vec![-0.9, 0.2], vec![0.4, -0.4]];
        let score = |x: &[f64]| Ok(x.iter().map(|v| 0.5 - v).collect());

        let p = ParticleSet::from_rows(rows.clone()).unwrap();
        let mut ada = AdaGradState::new(0.1, 3, 2);
        let out = svgd_step(&p, score, &kernels, &mut ada).unwrap();

        let perm = [2usize, 0, 1];
        let permuted = ParticleSet::from_rows(perm.iter().map(|&i| rows[i].clone()).collect())
            .unwrap();
        let mut ada_p = AdaGradState::new(0.1, 3, 2);
        let out_p = svgd_step(&permuted, score, &kernels, &mut ada_p).unwrap();

        for (slot, &src) in perm.iter().enumerate() {
            for j in 0..2 {
                assert!((out_p.row(slot)[j] - out.row(src)[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn non_finite_phi_reports_particle() {
        let kernels = KernelConfig::default();
        let p = ParticleSet::from_rows(vec![vec![0.0], vec![1.0]]).unwrap();
        let mut ada = AdaGradState::new(0.1, 2, 1);
        let err = svgd_step(&p, |_| Ok(vec![f64::INFINITY]), &kernels, &mut ada).unwrap_err();
        assert!(err.to_string().contains("particle 0"), "{err}");
    }
}
