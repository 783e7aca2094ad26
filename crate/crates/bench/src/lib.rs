//! Shared fixtures for the benchmarks.

use proxhull::oracles::{double_well, radial_sqdist};
use proxhull::ScalarField;

/// The double well sampled on `[-2, 2]` with spacing `h`.
pub fn double_well_1d(h: f64) -> ScalarField {
    let n = (4.0 / h).round() as usize + 1;
    ScalarField::from_fn(&[n], h, |i| double_well(-2.0 + i[0] as f64 * h)).unwrap()
}

/// Squared distance to the unit circle on `[-2.5, 2.5]^2`, zero outside the
/// disk of radius 2.
pub fn radial_2d(h: f64) -> ScalarField {
    let n = (5.0 / h).round() as usize + 1;
    ScalarField::from_fn(&[n, n], h, |i| {
        let p = [-2.5 + i[0] as f64 * h, -2.5 + i[1] as f64 * h];
        if p[0].hypot(p[1]) <= 2.0 {
            radial_sqdist(p)
        } else {
            0.0
        }
    })
    .unwrap()
}

/// A deterministic pseudo-random field with values in `[0, 1)`.
pub fn noise_2d(n: usize) -> ScalarField {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    ScalarField::from_fn(&[n, n], 1.0 / n as f64, |_| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    })
    .unwrap()
}
