//! Seeded random matrices, unitaries and spectra.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hermitian::{CMatrix, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` derived from `seed`.
pub fn rng_stream(seed: u64, index: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Entries i.i.d. complex Gaussian with unit variance.
pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(s * re, s * im)
    })
}

/// Columns of a Gaussian matrix orthonormalized by QR, with the phases of
/// `R`'s diagonal absorbed so the result is Haar distributed.
pub fn random_isometry<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = gaussian_matrix(rng, rows, cols);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let ph = d / d.norm();
            for i in 0..rows {
                q[(i, j)] *= ph;
            }
        }
    }
    q
}

pub fn random_unitary<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    random_isometry(rng, d, d)
}

/// `(G + G†)/2` for Gaussian `G`, times `scale`.
pub fn random_hermitian<R: Rng>(rng: &mut R, d: usize, scale: f64) -> CMatrix {
    let g = gaussian_matrix(rng, d, d);
    (&g + g.adjoint()).map(|z| z * (0.5 * scale))
}

/// Purely imaginary Hermitian matrix `i·A` with `A` real antisymmetric;
/// `exp(i t G)` is then a real rotation.
pub fn random_imaginary_hermitian<R: Rng>(rng: &mut R, d: usize, scale: f64) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in (i + 1)..d {
            let a: f64 = rng.sample(StandardNormal);
            m[(i, j)] = C64::new(0.0, a * scale);
            m[(j, i)] = C64::new(0.0, -a * scale);
        }
    }
    m
}

/// Probability vector sorted descending whose entries are all at least
/// `margin` and whose consecutive gaps are at least `margin`.
pub fn random_spectrum<R: Rng>(rng: &mut R, d: usize, margin: f64) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(Error::InvalidParams("spectrum dimension must be positive".into()));
    }
    // Minimal configuration: p_{d-1} = margin, gaps = margin.
    let base: Vec<f64> = (0..d).map(|i| margin * (d - i) as f64).collect();
    let used: f64 = base.iter().sum();
    if used > 1.0 {
        return Err(Error::InvalidParams(format!(
            "dimension {d} cannot keep margin {margin}"
        )));
    }
    // Increment δ_i raises entries 0..=i, so it costs (i+1)·δ_i of mass.
    let weights: Vec<f64> = (0..d).map(|_| rng.random::<f64>() + 0.05).collect();
    let cost: f64 = weights.iter().enumerate().map(|(i, w)| w * (i + 1) as f64).sum();
    let spare = 1.0 - used;
    let mut p = base;
    for (i, w) in weights.iter().enumerate() {
        let delta = w * spare / cost;
        for x in p.iter_mut().take(i + 1) {
            *x += delta;
        }
    }
    let total: f64 = p.iter().sum();
    for x in p.iter_mut() {
        *x /= total;
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::max_abs;

    #[test]
    fn isometry_is_orthonormal() {
        let mut rng = rng_from_seed(3);
        let v = random_isometry(&mut rng, 6, 2);
        let gram = v.adjoint() * &v;
        assert!(max_abs(&(gram - CMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn spectrum_respects_margins() {
        let mut rng = rng_from_seed(11);
        for d in 1..=8 {
            let p = random_spectrum(&mut rng, d, 0.02).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(*p.last().unwrap() >= 0.02 - 1e-15);
            for w in p.windows(2) {
                assert!(w[0] - w[1] >= 0.02 - 1e-15);
            }
        }
        assert!(random_spectrum(&mut rng, 10, 0.02).is_err());
    }

    #[test]
    fn streams_are_reproducible() {
        let a: f64 = rng_stream(42, 5).random();
        let b: f64 = rng_stream(42, 5).random();
        let c: f64 = rng_stream(42, 6).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
