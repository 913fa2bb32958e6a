//! Unbiased stochastic sign-magnitude quantization.
//!
//! Each retained entry spends 1 bit on the sign and N_b - 1 bits on a
//! magnitude index over a uniform grid of step delta = a_max / (2^(N_b-1) - 1).
//! Magnitudes round stochastically to one of the two adjacent levels so the
//! dequantized value is unbiased within the dynamic range.

use crate::error::{Error, Result};
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerSpec {
    pub n_bits: u32,
    pub a_max: f64,
}

impl QuantizerSpec {
    pub fn new(n_bits: u32, a_max: f64) -> Result<Self> {
        if n_bits < 2 {
            return Err(Error::invalid("N_b must be >= 2 (sign bit + magnitude)"));
        }
        if n_bits > 32 {
            return Err(Error::invalid("N_b above 32 is not supported"));
        }
        if !(a_max > 0.0 && a_max.is_finite()) {
            return Err(Error::invalid("a_max must be positive and finite"));
        }
        Ok(QuantizerSpec { n_bits, a_max })
    }

    /// Largest magnitude index: 2^(N_b - 1) - 1.
    pub fn max_index(&self) -> u64 {
        (1u64 << (self.n_bits - 1)) - 1
    }

    /// Grid step delta.
    pub fn step(&self) -> f64 {
        self.a_max / self.max_index() as f64
    }
}

/// One quantized entry: sign and magnitude level index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantizedEntry {
    pub negative: bool,
    pub index: u64,
}

impl QuantizedEntry {
    pub fn value(&self, spec: &QuantizerSpec) -> f64 {
        let mag = self.index as f64 * spec.step();
        if self.negative {
            -mag
        } else {
            mag
        }
    }
}

/// Stochastically quantize one value. The magnitude is clipped to a_max;
/// level t = floor(a / delta) is kept with probability 1 - (a - t delta)/delta,
/// otherwise t + 1 is used. sign(0) is fixed as +.
pub fn stochastic_quantize(x: f64, spec: &QuantizerSpec, rng: &mut SeededRng) -> QuantizedEntry {
    let delta = spec.step();
    let a = x.abs().min(spec.a_max);
    let mut t = (a / delta).floor() as u64;
    if t >= spec.max_index() {
        // a == a_max (or floor landed on the top level): deterministic
        return QuantizedEntry {
            negative: x < 0.0,
            index: spec.max_index().min(t),
        };
    }
    let frac = a / delta - t as f64;
    if rng.uniform() < frac {
        t += 1;
    }
    QuantizedEntry {
        negative: x < 0.0,
        index: t,
    }
}
