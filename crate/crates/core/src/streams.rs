//! Counter-based derivation of per-replication random streams.
//!
//! Every replication of an experiment owns an independent ChaCha stream whose
//! key is a splitmix64 hash of the experiment seed and the replication index.
//! Streams can therefore be created in any order, on any thread, and the
//! sample produced for replication `i` never depends on how work was
//! scheduled.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer; a single invertible mix of the state.
#[inline]
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn derive_key(seed: u64, index: u64, domain: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut state = splitmix64(seed)
        ^ splitmix64(index.wrapping_mul(GOLDEN_GAMMA))
        ^ splitmix64(domain.wrapping_mul(0xD605_BBB5_8C8A_BC03));
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    key
}

/// Stream for replication `index` of the experiment seeded with `seed`.
pub fn replication_rng(seed: u64, index: u64) -> ChaCha12Rng {
    ChaCha12Rng::from_seed(derive_key(seed, index, 0))
}

/// Auxiliary stream separated from every replication stream, for setup work
/// such as generating a base matrix or a validation battery.
pub fn auxiliary_rng(seed: u64, purpose: u64) -> ChaCha12Rng {
    ChaCha12Rng::from_seed(derive_key(seed, purpose, 1))
}
