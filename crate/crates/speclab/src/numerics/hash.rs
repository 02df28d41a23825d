//! Deterministic bit mixing for reproducible "arbitrary" vectors.
//!
//! Iterative eigensolvers need a start vector that is generic (no accidental
//! orthogonality to wanted eigenvectors) yet bit-reproducible across runs and
//! platforms.  splitmix64 provides exactly that: a fixed avalanche permutation
//! of the input index, mapped affinely into [−0.5, 0.5).

/// splitmix64 finalizer: a bijective avalanche mix of `x`.
#[inline]
#[must_use]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Deterministic pseudo-uniform value in [−0.5, 0.5) derived from an index
/// and a salt (used e.g. to derive Lanczos start vectors from vertex indices,
/// with the salt distinguishing perturbed restarts).
#[inline]
#[must_use]
pub fn unit_from_hash(index: u64, salt: u64) -> f64 {
    let bits = splitmix64(index ^ splitmix64(salt));
    // Take the top 53 bits for a uniform dyadic rational in [0, 1).
    (bits >> 11) as f64 / (1u64 << 53) as f64 - 0.5
}
