//! Deterministic per-root, per-hop random streams.
//!
//! A stream is derived from `(base_seed, root, hop, index)` by a linear mix
//! followed by the splitmix64 finalizer, then advanced with xorshift64
//! (shift triple 13/7/17). The constants below are part of the sampling
//! contract: changing any of them changes every sampled neighborhood.

/// Weyl increment of splitmix64.
pub const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
/// Odd multiplier for the root key.
pub const ROOT_MUL: u64 = 0xD1B5_4A32_D192_ED03;
/// Odd multiplier for the hop key.
pub const HOP_MUL: u64 = 0xABC9_8388_FB8F_AC03;
/// Odd multiplier for the slot index key.
pub const INDEX_MUL: u64 = 0x8CB9_2BA7_2F3D_8DD7;

/// Replacement state when a derivation lands on zero, the xorshift fixed point.
pub const NONZERO_FALLBACK: u64 = GOLDEN;

/// splitmix64 output finalizer.
#[inline]
pub fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// xorshift64 generator state. Never zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    state: u64,
}

impl RngStream {
    /// Derive the stream for one sampling site.
    pub fn derive(base_seed: u64, root: u64, hop: u32, index: u32) -> Self {
        let key = 1u64
            .wrapping_add(root.wrapping_mul(ROOT_MUL))
            .wrapping_add(u64::from(hop).wrapping_mul(HOP_MUL))
            .wrapping_add(u64::from(index).wrapping_mul(INDEX_MUL));
        let z = base_seed.wrapping_add(GOLDEN.wrapping_mul(key));
        Self::from_state(splitmix64_mix(z))
    }

    /// Wrap a raw state; zero is replaced by [`NONZERO_FALLBACK`].
    pub fn from_state(state: u64) -> Self {
        let state = if state == 0 { NONZERO_FALLBACK } else { state };
        RngStream { state }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    /// One xorshift64 step; the returned value is the new state.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.state = x;
        x
    }

    /// Uniform index in `[0, bound)` by modulo reduction.
    ///
    /// Bias is at most `bound / 2^64`. Panics if `bound == 0`.
    #[inline]
    pub fn uniform_index(&mut self, bound: usize) -> usize {
        assert!(bound > 0, "uniform_index bound must be positive");
        (self.next_u64() % bound as u64) as usize
    }
}

/// Sampling seed for step `step` of a run keyed by `base_seed`.
pub fn step_seed(base_seed: u64, step: u64) -> u64 {
    splitmix64_mix(base_seed ^ splitmix64_mix(step.wrapping_add(GOLDEN)))
}
