//! Deterministic, platform-independent randomness.
//!
//! Cross-agent comparability requires that a `(master_seed, turn_index)` pair
//! produce the same game everywhere, forever. Everything random therefore
//! flows through one pinned construction:
//!
//! - Stream derivation: `seed = SHA-256(domain ‖ part₀.to_le_bytes() ‖ …)`,
//!   where `domain` is an ASCII label separating independent streams (turn
//!   scripts vs. the random baseline's answers).
//! - Generator: ChaCha20 (a counter-based stream cipher with a fixed,
//!   specified output sequence), consumed 64 bits at a time.
//! - Sampling: bounded integers by rejection from `next_u64`, permutations by
//!   Fisher-Yates, Bernoulli by a 53-bit uniform draw in `[0, 1)`.
//!
//! None of these depend on standard-library RNG choices, word size, or
//! platform endianness.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

use crate::engine::Permutation;

const TURN_DOMAIN: &str = "pick-the-right-stuff/turn/v1";
const RANDOM_AGENT_DOMAIN: &str = "pick-the-right-stuff/agent/random/v1";

/// Derive a 32-byte seed from a domain label and integer parts.
pub fn derive_seed(domain: &str, parts: &[u64]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(domain.as_bytes());
    for part in parts {
        hasher.update(part.to_le_bytes());
    }
    hasher.finalize().into()
}

/// Seed for the event script of one turn.
pub fn turn_seed(master_seed: u64, turn_index: u64) -> [u8; 32] {
    derive_seed(TURN_DOMAIN, &[master_seed, turn_index])
}

/// Seed for the random baseline's answers in one turn (independent of the
/// script stream so the game and the agent never share randomness).
pub fn random_agent_seed(master_seed: u64, turn_index: u64) -> [u8; 32] {
    derive_seed(RANDOM_AGENT_DOMAIN, &[master_seed, turn_index])
}

/// The pinned deterministic generator.
#[derive(Debug, Clone)]
pub struct DetRng {
    inner: ChaCha20Rng,
}

impl DetRng {
    pub fn from_seed_bytes(seed: [u8; 32]) -> Self {
        Self {
            inner: ChaCha20Rng::from_seed(seed),
        }
    }

    pub fn for_turn(master_seed: u64, turn_index: u64) -> Self {
        Self::from_seed_bytes(turn_seed(master_seed, turn_index))
    }

    pub fn for_random_agent(master_seed: u64, turn_index: u64) -> Self {
        Self::from_seed_bytes(random_agent_seed(master_seed, turn_index))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, n)` by rejection sampling; unbiased for every `n`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "bound must be positive");
        let zone = (u64::MAX / n) * n;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }

    /// Uniform in `[lo, hi]` inclusive.
    pub fn range_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        assert!(lo <= hi, "empty range {lo}..={hi}");
        lo + self.below(hi - lo + 1)
    }

    /// Uniform index in `[0, n)`.
    pub fn index(&mut self, n: usize) -> usize {
        self.below(n as u64) as usize
    }

    /// Bernoulli draw: true with probability `p`.
    ///
    /// Uses the top 53 bits of one `next_u64` as a uniform in `[0, 1)`, so
    /// `p = 0.0` is never true and `p = 1.0` always is.
    pub fn chance(&mut self, p: f64) -> bool {
        let unit = (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        unit < p
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, slice: &mut [T]) {
        for i in (1..slice.len()).rev() {
            let j = self.index(i + 1);
            slice.swap(i, j);
        }
    }

    /// Uniform permutation over all permutations of `[0, n)`, identity
    /// included.
    pub fn permutation(&mut self, n: usize) -> Permutation {
        let mut map: Vec<usize> = (0..n).collect();
        self.shuffle(&mut map);
        Permutation::new(map).expect("a shuffled identity map is a bijection")
    }
}
