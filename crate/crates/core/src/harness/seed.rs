/// Golden-ratio increment used by SplitMix64.
pub const SEED_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
pub const MIX_MUL_1: u64 = 0xBF58_476D_1CE4_E5B9;
pub const MIX_MUL_2: u64 = 0x94D0_49BB_1331_11EB;

/// SplitMix64 finalizer, a bijection on `u64`.
pub fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(MIX_MUL_1);
    x = (x ^ (x >> 27)).wrapping_mul(MIX_MUL_2);
    x ^ (x >> 31)
}

/// Per-trial stream key: `mix64(mix64(master) + GAMMA * (trial + 1))`.
///
/// For a fixed master seed the map `trial -> key` is injective, since the
/// inner affine map has an odd multiplier and `mix64` is a bijection.
pub fn seed_substream(master: u64, trial: u64) -> u64 {
    mix64(mix64(master).wrapping_add(SEED_GAMMA.wrapping_mul(trial.wrapping_add(1))))
}
