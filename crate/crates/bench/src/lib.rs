//! Fixed inputs shared by the benchmarks.

use qmetric_core::random::{random_hermitian, rng_from_seed};
use qmetric_core::registry::{bloch3, random_full_rank};
use qmetric_core::{CMatrix, ParametricFamily};

/// Dimensions swept by the per-dimension benchmarks.
pub const DIMS: [usize; 3] = [2, 4, 8];

pub fn hermitian(d: usize) -> CMatrix {
    random_hermitian(&mut rng_from_seed(d as u64), d, 1.0)
}

/// Two-parameter random family of dimension `d` and a point in it.
pub fn random_family(d: usize) -> (ParametricFamily, Vec<f64>) {
    (
        random_full_rank(d, 2, 17, 0.5, false).expect("valid family"),
        vec![0.3, -0.2],
    )
}

pub fn bloch_point() -> (ParametricFamily, Vec<f64>) {
    (bloch3(), vec![0.6, 0.7, 0.2])
}
