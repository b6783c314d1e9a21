//! Keyed random streams.
//!
//! A stream is identified by a master seed and a path of counters
//! (cell, simulation, bootstrap replicate, purpose tag). The path is folded
//! into a 256-bit ChaCha key, so any two distinct paths give unrelated
//! generators and the same path always reproduces the same sequence,
//! whatever thread happens to evaluate it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Purpose tags appended to a stream path.
pub mod tag {
    pub const BASIS: u64 = 0xB0;
    pub const DATA: u64 = 0xDA;
    pub const BOOTSTRAP: u64 = 0xB5;
    pub const LANCZOS: u64 = 0x1A;
    pub const CELL: u64 = 0xCE;
    pub const SIMULATION: u64 = 0x51;
    pub const SPIKED: u64 = 0x5B;
    pub const CONCENTRATION: u64 = 0xC0;
    pub const TRUTH: u64 = 0x7E;
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    master_seed: u64,
    path: Vec<u64>,
}

#[inline]
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl RngStream {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            path: Vec::new(),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Stream one level down the tree.
    pub fn child(&self, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        Self {
            master_seed: self.master_seed,
            path,
        }
    }

    /// Shorthand for `child(tag).child(index)`.
    pub fn sub(&self, tag: u64, index: u64) -> Self {
        self.child(tag).child(index)
    }

    fn key(&self) -> [u8; 32] {
        // Length is folded in so that [a] and [a, 0] differ.
        let mut state = splitmix64(self.master_seed ^ 0x6A09_E667_F3BC_C908);
        state = splitmix64(state ^ self.path.len() as u64);
        for &c in &self.path {
            state = splitmix64(state ^ splitmix64(c.wrapping_add(0x3C6E_F372_FE94_F82B)));
        }
        let mut key = [0u8; 32];
        let mut s = state;
        for chunk in key.chunks_exact_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        key
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key())
    }
}
