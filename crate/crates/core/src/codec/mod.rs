//! Bit-exact compression of particle-update matrices: top-k sparsification,
//! combinatorial position coding, stochastic quantization, and per-iteration
//! bit accounting.

pub mod positions;
pub mod quantize;
pub mod sparsify;
pub mod stream;

pub use positions::{binomial, decode_positions, encode_positions, position_bits, position_code_width};
pub use quantize::{stochastic_quantize, QuantizedEntry, QuantizerSpec};
pub use sparsify::{
    sparsify_alpha_shared, sparsify_per_particle, sparsify_shared, DeltaMatrix, SparsityPattern,
};

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use stream::{BitReader, BitWriter};

/// Sparsity-pattern sharing scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    PerParticle,
    Shared,
    /// `num_groups` = 1/alpha_s contiguous particle groups sharing a pattern.
    AlphaShared { num_groups: usize },
}

impl Scheme {
    pub fn num_groups(&self, n_particles: usize) -> usize {
        match self {
            Scheme::PerParticle => n_particles,
            Scheme::Shared => 1,
            Scheme::AlphaShared { num_groups } => *num_groups,
        }
    }

    pub fn validate(&self, n_particles: usize) -> Result<()> {
        let g = self.num_groups(n_particles);
        if g == 0 || n_particles % g != 0 {
            return Err(Error::invalid(format!(
                "1/alpha = {g} must divide N_p = {n_particles}"
            )));
        }
        Ok(())
    }

    fn id(&self) -> u8 {
        match self {
            Scheme::PerParticle => 0,
            Scheme::Shared => 1,
            Scheme::AlphaShared { .. } => 2,
        }
    }
}

/// Dynamic-range policy for the quantizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmaxPolicy {
    /// Fixed range known to both sides; no header cost.
    Fixed(f64),
    /// Max absolute retained entry, sent as a 32-bit header per message.
    PerMessage,
}

impl AmaxPolicy {
    pub fn header_bits(&self) -> u64 {
        match self {
            AmaxPolicy::Fixed(_) => 0,
            AmaxPolicy::PerMessage => 32,
        }
    }
}

/// Either a sparsification ratio r = k/d or a per-iteration bit budget R_u.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SizeSpec {
    Ratio(f64),
    Budget(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionConfig {
    pub scheme: Scheme,
    pub size: SizeSpec,
    pub n_bits: u32,
    pub amax: AmaxPolicy,
}

impl CompressionConfig {
    pub fn validate_for(&self, n_particles: usize, dim: usize) -> Result<()> {
        self.scheme.validate(n_particles)?;
        if self.n_bits < 2 {
            return Err(Error::invalid("N_b must be >= 2"));
        }
        if let AmaxPolicy::Fixed(a) = self.amax {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::invalid("fixed a_max must be positive and finite"));
            }
        }
        self.resolve_k(n_particles, dim).map(|_| ())
    }

    /// Number of retained entries per group pattern.
    pub fn resolve_k(&self, n_particles: usize, dim: usize) -> Result<usize> {
        match self.size {
            SizeSpec::Ratio(r) => {
                if !(r > 0.0 && r <= 1.0) {
                    return Err(Error::invalid("ratio r must be in (0, 1]"));
                }
                let kf = r * dim as f64;
                let k = kf.round();
                if (kf - k).abs() > 1e-9 || k < 1.0 {
                    return Err(Error::invalid(format!(
                        "r * d = {kf} must be a positive integer"
                    )));
                }
                Ok(k as usize)
            }
            SizeSpec::Budget(budget) => {
                solve_ratio(budget, self.scheme, n_particles, dim, self.n_bits, self.amax)
            }
        }
    }
}

/// Analytic per-iteration uplink cost with the real-valued (un-ceiled)
/// position term and no header overhead:
///   per-particle: N_p (log2 C(d,k) + N_b k)
///   shared:       log2 C(d,k) + N_p N_b k
///   alpha-shared: (1/alpha) log2 C(d,k) + N_p N_b k
pub fn bits_per_iteration(
    scheme: Scheme,
    n_particles: usize,
    dim: usize,
    k: usize,
    n_bits: u32,
) -> f64 {
    let groups = scheme.num_groups(n_particles) as f64;
    groups * position_bits(dim, k) + (n_particles as u64 * n_bits as u64 * k as u64) as f64
}

/// Exact bit count of an encoded message: per-group fixed-width position
/// codes, N_p * N_b * k payload bits, plus declared a_max header bits.
pub fn accounted_bits(
    scheme: Scheme,
    n_particles: usize,
    dim: usize,
    k: usize,
    n_bits: u32,
    amax: AmaxPolicy,
) -> u64 {
    let groups = scheme.num_groups(n_particles) as u64;
    groups * position_code_width(dim, k) as u64
        + n_particles as u64 * n_bits as u64 * k as u64
        + amax.header_bits()
}

/// Largest k >= 1 whose exact encoded cost fits within `budget` bits.
///
/// The scan stops at the first k that exceeds the budget, so the returned k
/// satisfies accounted_bits(k) <= budget < accounted_bits(k + 1).
pub fn solve_ratio(
    budget: f64,
    scheme: Scheme,
    n_particles: usize,
    dim: usize,
    n_bits: u32,
    amax: AmaxPolicy,
) -> Result<usize> {
    if !(budget > 0.0) {
        return Err(Error::invalid("bit budget must be positive"));
    }
    let min_bits = accounted_bits(scheme, n_particles, dim, 1, n_bits, amax);
    if (min_bits as f64) > budget {
        return Err(Error::InfeasibleBudget {
            budget,
            min_bits: min_bits as f64,
        });
    }
    let mut k = 1;
    while k < dim {
        if accounted_bits(scheme, n_particles, dim, k + 1, n_bits, amax) as f64 > budget {
            break;
        }
        k += 1;
    }
    Ok(k)
}

/// Round a positive value up to the nearest f32-representable number, so a
/// 32-bit header can carry it without shrinking the dynamic range.
fn round_up_f32(v: f64) -> f64 {
    let a = v as f32;
    if (a as f64) < v {
        f32::from_bits(a.to_bits() + 1) as f64
    } else {
        a as f64
    }
}

/// A fully encoded particle-update matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedDelta {
    pub scheme: Scheme,
    pub n_particles: usize,
    pub dim: usize,
    pub k: usize,
    pub n_bits: u32,
    pub amax_is_per_message: bool,
    pub a_max: f64,
    pub pattern: SparsityPattern,
    /// Row-major: for each particle row, k entries in sorted index order.
    pub entries: Vec<QuantizedEntry>,
    /// Exact uplink cost: ceil position codes + payload + declared headers.
    pub bit_count: u64,
}

/// Sparsify and quantize an update matrix under the given config.
pub fn encode_delta(
    delta: &DeltaMatrix,
    cfg: &CompressionConfig,
    rng: &mut SeededRng,
) -> Result<CompressedDelta> {
    cfg.validate_for(delta.n_particles, delta.dim)?;
    let k = cfg.resolve_k(delta.n_particles, delta.dim)?;
    let pattern = match cfg.scheme {
        Scheme::PerParticle => sparsify_per_particle(delta, k)?,
        Scheme::Shared => sparsify_shared(delta, k)?,
        Scheme::AlphaShared { num_groups } => sparsify_alpha_shared(delta, k, num_groups)?,
    };

    let a_max = match cfg.amax {
        AmaxPolicy::Fixed(a) => a,
        AmaxPolicy::PerMessage => {
            let mut m: f64 = 0.0;
            for n in 0..delta.n_particles {
                let row = delta.row(n);
                for &j in pattern.group_for_row(n) {
                    m = m.max(row[j].abs());
                }
            }
            if m == 0.0 {
                1.0
            } else {
                round_up_f32(m)
            }
        }
    };
    let spec = QuantizerSpec::new(cfg.n_bits, a_max)?;

    let mut entries = Vec::with_capacity(delta.n_particles * k);
    for n in 0..delta.n_particles {
        let row = delta.row(n);
        for &j in pattern.group_for_row(n) {
            entries.push(stochastic_quantize(row[j], &spec, rng));
        }
    }

    let bit_count = accounted_bits(
        cfg.scheme,
        delta.n_particles,
        delta.dim,
        k,
        cfg.n_bits,
        cfg.amax,
    );

    Ok(CompressedDelta {
        scheme: cfg.scheme,
        n_particles: delta.n_particles,
        dim: delta.dim,
        k,
        n_bits: cfg.n_bits,
        amax_is_per_message: matches!(cfg.amax, AmaxPolicy::PerMessage),
        a_max,
        pattern,
        entries,
        bit_count,
    })
}

impl CompressedDelta {
    /// Reconstruct the dense N_p x d matrix: sign * magnitude at pattern
    /// positions, zero elsewhere.
    pub fn decode(&self) -> DeltaMatrix {
        let spec = QuantizerSpec {
            n_bits: self.n_bits,
            a_max: self.a_max,
        };
        let mut data = vec![0.0; self.n_particles * self.dim];
        let mut it = self.entries.iter();
        for n in 0..self.n_particles {
            for &j in self.pattern.group_for_row(n) {
                data[n * self.dim + j] = it.next().expect("entry count").value(&spec);
            }
        }
        DeltaMatrix {
            data,
            n_particles: self.n_particles,
            dim: self.dim,
        }
    }

    /// Serialize to a length-prefixed bitstream: fixed header, then per-group
    /// position codes, then packed sign/magnitude codes, MSB first.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut writer = BitWriter::new();
        for group in &self.pattern.groups {
            positions::encode_positions(group, self.dim, &mut writer).expect("valid pattern");
        }
        for e in &self.entries {
            writer.push_bit(e.negative);
            writer.push_bits(e.index, self.n_bits as usize - 1);
        }
        let blob = writer.into_bytes();

        let mut out = Vec::new();
        let body_len = 4 + 4 + 1 + 4 + 4 + 1 + 1 + 8 + blob.len();
        out.extend_from_slice(&(body_len as u32).to_be_bytes());
        out.extend_from_slice(&(self.n_particles as u32).to_be_bytes());
        out.extend_from_slice(&(self.dim as u32).to_be_bytes());
        out.push(self.scheme.id());
        out.extend_from_slice(&(self.scheme.num_groups(self.n_particles) as u32).to_be_bytes());
        out.extend_from_slice(&(self.k as u32).to_be_bytes());
        out.push(self.n_bits as u8);
        out.push(self.amax_is_per_message as u8);
        out.extend_from_slice(&self.a_max.to_be_bytes());
        out.extend_from_slice(&blob);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<CompressedDelta> {
        fn take<'a>(cur: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
            if cur.len() < n {
                return Err(Error::Decode("truncated message".into()));
            }
            let (head, tail) = cur.split_at(n);
            *cur = tail;
            Ok(head)
        }
        let mut cur = bytes;
        let body_len = u32::from_be_bytes(take(&mut cur, 4)?.try_into().unwrap()) as usize;
        if bytes.len() != body_len + 4 {
            return Err(Error::Decode("length prefix mismatch".into()));
        }
        let n_particles = u32::from_be_bytes(take(&mut cur, 4)?.try_into().unwrap()) as usize;
        let dim = u32::from_be_bytes(take(&mut cur, 4)?.try_into().unwrap()) as usize;
        let scheme_id = take(&mut cur, 1)?[0];
        let num_groups = u32::from_be_bytes(take(&mut cur, 4)?.try_into().unwrap()) as usize;
        let k = u32::from_be_bytes(take(&mut cur, 4)?.try_into().unwrap()) as usize;
        let n_bits = take(&mut cur, 1)?[0] as u32;
        let per_message = take(&mut cur, 1)?[0] != 0;
        let a_max = f64::from_be_bytes(take(&mut cur, 8)?.try_into().unwrap());
        let blob = cur;

        let scheme = match scheme_id {
            0 => Scheme::PerParticle,
            1 => Scheme::Shared,
            2 => Scheme::AlphaShared { num_groups },
            other => return Err(Error::Decode(format!("unknown scheme id {other}"))),
        };
        if n_particles == 0 || dim == 0 || k == 0 || k > dim {
            return Err(Error::Decode("invalid header dimensions".into()));
        }
        scheme
            .validate(n_particles)
            .map_err(|e| Error::Decode(e.to_string()))?;
        if scheme.num_groups(n_particles) != num_groups {
            return Err(Error::Decode("inconsistent group count".into()));
        }
        if n_bits < 2 || n_bits > 32 {
            return Err(Error::Decode("invalid N_b".into()));
        }
        if !(a_max > 0.0 && a_max.is_finite()) {
            return Err(Error::Decode("invalid a_max".into()));
        }

        let mut reader = BitReader::new(blob);
        let rows_per_group = n_particles / num_groups;
        let groups = (0..num_groups)
            .map(|_| positions::decode_positions(&mut reader, dim, k))
            .collect::<Result<Vec<_>>>()?;
        let pattern = SparsityPattern {
            groups,
            rows_per_group,
            k,
        };
        let mut entries = Vec::with_capacity(n_particles * k);
        for _ in 0..n_particles * k {
            let negative = reader.read_bit()?;
            let index = reader.read_bits(n_bits as usize - 1)?;
            entries.push(QuantizedEntry { negative, index });
        }

        let amax = if per_message {
            AmaxPolicy::PerMessage
        } else {
            AmaxPolicy::Fixed(a_max)
        };
        Ok(CompressedDelta {
            scheme,
            n_particles,
            dim,
            k,
            n_bits,
            amax_is_per_message: per_message,
            a_max,
            pattern,
            entries,
            bit_count: accounted_bits(scheme, n_particles, dim, k, n_bits, amax),
        })
    }
}
