//! Bit-probe set membership at desk scale.
//!
//! The library has two halves. The constructive half (`probegraph`, `schemes`)
//! builds randomized probe graphs, checks their expansion properties exactly,
//! and runs the Hall-matching encoders for non-adaptive majority schemes and
//! adaptive tree schemes. The lower-bound half (`boolfunc`, `lowerlab`,
//! `polyalg`) classifies three-variable query functions, searches for minimal
//! space by brute force, and emits machine-checkable unsatisfiability
//! witnesses: forced cycle configurations for majority, density and dimension
//! certificates for the other classes, and polynomial-rank certificates for
//! the degree argument.
//!
//! Everything is deterministic: randomized operations take explicit seeds and
//! exhaustive checks carry explicit budgets.

pub mod boolfunc;
pub mod io;
pub mod lowerlab;
pub mod polyalg;
pub mod probegraph;
pub mod schemes;

/// Default cap on exhaustive memory enumeration, in bits (2^24 assignments).
pub const DEFAULT_ENUM_BITS: u32 = 24;

/// Default cap on subset enumeration counts (expansion checks, verify loops).
pub const DEFAULT_SUBSET_BUDGET: u64 = 1 << 22;

/// Mix a base seed with a stream index; used to derive per-attempt seeds in
/// generate-and-verify loops without correlated streams.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
