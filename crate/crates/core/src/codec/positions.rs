//! Combinatorial position coding: a sorted k-subset of [0, d) is mapped to
//! its colexicographic rank and written in ceil(log2 C(d, k)) bits.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::stream::{BitReader, BitWriter};
use crate::error::{Error, Result};

/// Exact binomial coefficient C(d, k).
pub fn binomial(d: usize, k: usize) -> BigUint {
    if k > d {
        return BigUint::zero();
    }
    let k = k.min(d - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(d - i) / BigUint::from(i + 1);
    }
    acc
}

/// log2 C(d, k) computed from the exact big integer.
///
/// The top 53 bits of the binomial are used as the mantissa, so the relative
/// error of the log is at machine precision even when C(d, k) overflows f64.
pub fn position_bits(d: usize, k: usize) -> f64 {
    let b = binomial(d, k);
    let bits = b.bits();
    if bits <= 1 {
        return 0.0; // C = 0 or 1
    }
    if bits <= 53 {
        b.to_f64().unwrap().log2()
    } else {
        let shift = bits - 53;
        let top = (b >> shift).to_f64().unwrap();
        top.log2() + shift as f64
    }
}

/// Fixed code width for a k-subset of [0, d).
pub fn position_code_width(d: usize, k: usize) -> usize {
    let b = binomial(d, k);
    if b <= BigUint::one() {
        0
    } else {
        // ceil(log2 b): number of bits of b-1
        (b - BigUint::one()).bits() as usize
    }
}

/// Colex rank of a sorted subset: sum_i C(c_i, i+1).
fn colex_rank(subset: &[usize]) -> BigUint {
    let mut rank = BigUint::zero();
    for (i, &c) in subset.iter().enumerate() {
        rank += binomial(c, i + 1);
    }
    rank
}

/// Append the position code for `subset` to the writer.
pub fn encode_positions(subset: &[usize], d: usize, writer: &mut BitWriter) -> Result<()> {
    let k = subset.len();
    if subset.windows(2).any(|w| w[0] >= w[1]) || subset.iter().any(|&c| c >= d) {
        return Err(Error::invalid("subset must be sorted, distinct, and < d"));
    }
    let width = position_code_width(d, k);
    let rank = colex_rank(subset);
    writer.push_big(&rank.to_bytes_be(), width);
    Ok(())
}

/// Read one position code and invert the colex ranking.
pub fn decode_positions(reader: &mut BitReader, d: usize, k: usize) -> Result<Vec<usize>> {
    let width = position_code_width(d, k);
    let bytes = reader.read_big(width)?;
    let mut rank = BigUint::from_bytes_be(&bytes);
    if rank >= binomial(d, k) {
        return Err(Error::Decode(format!(
            "position rank out of range for C({d}, {k})"
        )));
    }
    let mut subset = vec![0usize; k];
    let mut c = d;
    for i in (1..=k).rev() {
        // largest c with C(c, i) <= rank
        loop {
            c -= 1;
            let b = binomial(c, i);
            if b <= rank {
                rank -= b;
                subset[i - 1] = c;
                break;
            }
        }
    }
    Ok(subset)
}
