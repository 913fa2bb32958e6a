//! MSB-first bit-level reader/writer used by the codec serialization.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        BitWriter::default()
    }

    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    pub fn push_bit(&mut self, bit: bool) {
        let byte_idx = self.bit_len / 8;
        if byte_idx == self.bytes.len() {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[byte_idx] |= 0x80 >> (self.bit_len % 8);
        }
        self.bit_len += 1;
    }

    /// Write the low `width` bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u64, width: usize) {
        debug_assert!(width <= 64);
        for i in (0..width).rev() {
            self.push_bit((value >> i) & 1 == 1);
        }
    }

    /// Write an arbitrary-width big-endian integer given as bytes, padded to
    /// exactly `width` bits.
    pub fn push_big(&mut self, be_bytes: &[u8], width: usize) {
        let value_bits = be_bytes.len() * 8;
        debug_assert!(width >= significant_bits(be_bytes));
        for i in (0..width).rev() {
            let bit = if i < value_bits {
                let byte = be_bytes[be_bytes.len() - 1 - i / 8];
                (byte >> (i % 8)) & 1 == 1
            } else {
                false
            };
            self.push_bit(bit);
        }
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

fn significant_bits(be_bytes: &[u8]) -> usize {
    for (i, &b) in be_bytes.iter().enumerate() {
        if b != 0 {
            return (be_bytes.len() - i - 1) * 8 + (8 - b.leading_zeros() as usize);
        }
    }
    0
}

#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    bit_len: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        BitReader {
            bytes,
            pos: 0,
            bit_len: bytes.len() * 8,
        }
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        if self.pos >= self.bit_len {
            return Err(Error::Decode("bitstream exhausted".into()));
        }
        let bit = (self.bytes[self.pos / 8] >> (7 - self.pos % 8)) & 1 == 1;
        self.pos += 1;
        Ok(bit)
    }

    pub fn read_bits(&mut self, width: usize) -> Result<u64> {
        debug_assert!(width <= 64);
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | self.read_bit()? as u64;
        }
        Ok(v)
    }

    /// Read `width` bits into big-endian bytes (for arbitrary-width ranks).
    pub fn read_big(&mut self, width: usize) -> Result<Vec<u8>> {
        let n_bytes = width.div_ceil(8);
        let mut out = vec![0u8; n_bytes];
        for i in (0..width).rev() {
            if self.read_bit()? {
                let idx = out.len() - 1 - i / 8;
                out[idx] |= 1 << (i % 8);
            }
        }
        Ok(out)
    }
}
