//! Content digests for reproducibility records.

use alloc::string::String;
use core::fmt::Write;

use sha2::{Digest, Sha256};

/// Incremental SHA-256 over numeric inputs, hashed by bit pattern.
#[derive(Clone, Default)]
pub struct InputDigest {
    hasher: Sha256,
}

impl InputDigest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn label(mut self, s: &str) -> Self {
        self.hasher.update((s.len() as u64).to_le_bytes());
        self.hasher.update(s.as_bytes());
        self
    }

    pub fn f64s(mut self, xs: &[f64]) -> Self {
        self.hasher.update((xs.len() as u64).to_le_bytes());
        for x in xs {
            self.hasher.update(x.to_bits().to_le_bytes());
        }
        self
    }

    pub fn matrix(self, m: &crate::Matrix) -> Self {
        let flat: alloc::vec::Vec<f64> = m.as_slice().iter().flat_map(|z| [z.re, z.im]).collect();
        self.f64s(&flat)
    }

    pub fn operator(self, h: &crate::HermitianOperator) -> Self {
        let coords: alloc::vec::Vec<f64> = h
            .region()
            .sites()
            .iter()
            .flat_map(|s| s.coords().iter().map(|&c| c as f64))
            .collect();
        self.f64s(&[h.region().q() as f64]).f64s(&coords).matrix(h.matrix())
    }

    pub fn finish(self) -> String {
        hex(&self.hasher.finalize())
    }
}

pub fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(2 * bytes.len());
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// SHA-256 of raw bytes, hex encoded.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}
