//! Seed derivation. Fold assignment and model initialization draw from separate
//! streams, so changing `k` never perturbs the random layers of a given fold index.

const FOLD_STREAM: u64 = 0x666f_6c64; // "fold"
const MODEL_STREAM: u64 = 0x6d_6f64_656c; // "model"

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn derive(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(stream)).wrapping_add(index))
}

/// Seed for the stratified fold shuffle.
pub fn fold_plan_seed(master: u64) -> u64 {
    derive(master, FOLD_STREAM, 0)
}

/// Master seed of the model(s) trained for `fold`.
pub fn fold_model_seed(master: u64, fold: usize) -> u64 {
    derive(master, MODEL_STREAM, fold as u64)
}
