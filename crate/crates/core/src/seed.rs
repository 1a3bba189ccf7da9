//! Seed derivation.
//!
//! Every random stream in a run is derived from one root seed:
//! `derive(root, stream)` for the top-level streams below, and
//! `derive(derive(root, stream), index)` for per-cycle or per-read streams.

/// Initial-dataset draws.
pub const SEEDING: u64 = 1;
/// Surrogate training (indexed by cycle).
pub const TRAIN: u64 = 2;
/// Annealer (indexed by cycle; the annealer further derives per-read streams).
pub const ANNEAL: u64 = 3;
/// Random fallback proposals when every annealer state is already known.
pub const FALLBACK: u64 = 4;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed from `parent` and a stream index.
pub fn derive(parent: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(parent) ^ stream.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_differ() {
        assert_ne!(derive(7, TRAIN), derive(7, ANNEAL));
        assert_ne!(derive(7, 0), derive(8, 0));
        assert_eq!(derive(7, 3), derive(7, 3));
    }
}
