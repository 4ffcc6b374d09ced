//! Seed derivation. Every random stream of an experiment is a pure function of
//! `(master seed, stream, index)`, so any single trial or rollout series can be
//! reproduced on its own.

/// Training trial `index` uses `derive_seed(master, TRAIN_STREAM, index)`.
pub const TRAIN_STREAM: u64 = 1;
/// Rollout series for instance `index`; rollout `k` adds `k` to this base.
pub const ROLLOUT_STREAM: u64 = 2;

/// SplitMix64 finaliser over a mix of the three inputs.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    let mut z = master
        ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_add(1).wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
