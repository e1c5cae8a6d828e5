//! Splittable seed derivation.
//!
//! `split(seed, i)` is the `i`-th output of a SplitMix64 stream started at
//! `seed`. Cells derive their seed by splitting the base seed successively by
//! their coordinates, so a cell's seed does not depend on which other cells
//! are in the grid.
//!
//! Speed is deliberately left out of the cell seed: all speeds of one
//! (vehicle count, perception time, deceleration) row replay the same random
//! stream, and a faster vehicle can then only turn a safe trial into a
//! collision, never the reverse.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn split(seed: u64, index: u64) -> u64 {
    mix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn cell_seed(base: u64, n_vehicles: u32, t_perception: f64, a: f64) -> u64 {
    [u64::from(n_vehicles), t_perception.to_bits(), a.to_bits()]
        .into_iter()
        .fold(base, split)
}
