// Copyright 2026 ctspline Contributors
// SPDX-License-Identifier: Apache-2.0

//! SplitMix64, spelled out in full so that seeded experiments reproduce
//! bit-for-bit on any platform or language. The constants are the reference
//! ones from Steele/Lea/Flood's java.util.SplittableRandom finalizer.

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on the open interval (0, 1): takes the top 53 bits and centers
    /// them half an ulp off the lattice so neither endpoint is reachable.
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
    }

    /// Uniform on the open interval (-1/2, 1/2).
    pub fn uniform_symmetric(&mut self) -> f64 {
        self.uniform_open() - 0.5
    }

    /// Uniform on (lo, hi).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform_open()
    }
}
