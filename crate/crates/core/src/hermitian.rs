//! Dense complex kernel: Hermitian eigendecomposition with a pinned phase
//! gauge, the SLD (Lyapunov) solver, quantum relative entropy and central
//! differences.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::DensityMatrix;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Max-entry deviation from Hermiticity accepted on input.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as zero.
pub const RANK_TOL: f64 = 1e-12;
/// Eigenvalues closer than this form one degenerate cluster.
pub const CLUSTER_GAP: f64 = 1e-8;
/// Default finite-difference step.
pub const FD_STEP: f64 = 1e-5;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 10_000;

pub fn zeros(d: usize) -> CMatrix {
    CMatrix::zeros(d, d)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max |m - m†|` over entries.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `⟨a|b⟩`, antilinear in the first argument.
pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}

pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

/// `m` restricted to a real scalar multiple.
pub fn scale(m: &CMatrix, s: f64) -> CMatrix {
    m.map(|z| z * s)
}

/// Spectral decomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted in descending order. Each eigenvector is gauged
/// so that its largest-modulus component is real and non-negative; within
/// a degenerate cluster the basis is whatever the solver returned, which
/// is deterministic for a given input.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    values: Vec<f64>,
    vectors: CMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvectors as columns.
    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> CVector {
        self.vectors.column(i).into_owned()
    }

    /// `Σ f(p_i) |v_i⟩⟨v_i|`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for (i, &p) in self.values.iter().enumerate() {
            let s = f(p);
            for r in 0..d {
                scaled[(r, i)] *= s;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map_spectrum(|p| p)
    }

    /// Express `m` in the eigenbasis: `V† m V`.
    pub fn to_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        self.vectors.adjoint() * m * &self.vectors
    }

    /// Inverse of [`EigenSystem::to_eigenbasis`].
    pub fn from_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        &self.vectors * m * self.vectors.adjoint()
    }

    /// Index ranges of eigenvalue clusters separated by more than `gap`.
    pub fn clusters(&self, gap: f64) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.values.len() {
            if i == self.values.len() || (self.values[i - 1] - self.values[i]).abs() >= gap {
                out.push(start..i);
                start = i;
            }
        }
        out
    }
}

/// Multiply `v` by the unit phase that makes its largest-modulus entry real
/// and non-negative. The first entry attaining the maximum wins.
pub fn gauge_vector(v: &mut CVector) {
    let mut best = 0;
    let mut best_mod = -1.0;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > best_mod {
            best_mod = m;
            best = i;
        }
    }
    if best_mod > 0.0 {
        let phase = v[best] / best_mod;
        let c = phase.conj();
        for z in v.iter_mut() {
            *z *= c;
        }
        v[best] = C64::new(v[best].re, 0.0);
    }
}

pub fn eig_hermitian(m: &CMatrix) -> Result<EigenSystem> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let defect = hermiticity_defect(m);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let sym = (m + m.adjoint()).map(|z| z * 0.5);
    let eig = sym
        .try_symmetric_eigen(EIG_EPS, EIG_MAX_ITER)
        .ok_or(Error::NoConvergence)?;

    let d = m.nrows();
    let mut order: Vec<usize> = (0..d).collect();
    // Stable: exact ties keep solver order.
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut vectors = CMatrix::zeros(d, d);
    let mut values = Vec::with_capacity(d);
    for (col, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let mut v: CVector = eig.eigenvectors.column(src).into_owned();
        let n = v.norm();
        v /= C64::from(n);
        gauge_vector(&mut v);
        vectors.set_column(col, &v);
    }
    Ok(EigenSystem { values, vectors })
}

/// Positive square root of a PSD matrix; slightly negative eigenvalues are
/// clamped to zero.
pub fn sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    Ok(eig_hermitian(m)?.map_spectrum(|p| p.max(0.0).sqrt()))
}

/// Symmetric logarithmic derivative: the Hermitian `λ` with
/// `(ρλ + λρ)/2 = dρ` on the support of `ρ`, zero on its kernel.
pub fn sld_solve(rho: &DensityMatrix, drho: &CMatrix) -> Result<CMatrix> {
    let d = rho.dim();
    if drho.nrows() != d || drho.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: drho.nrows(),
        });
    }
    let scale_ref = max_abs(drho).max(1.0);
    let defect = hermiticity_defect(drho);
    if defect > HERMITIAN_TOL * scale_ref {
        return Err(Error::NotHermitian(defect));
    }
    let tr = trace(drho).norm();
    if tr > HERMITIAN_TOL * scale_ref {
        return Err(Error::NotTraceless(tr));
    }
    let es = rho.eigen()?;
    sld_in_frame(&es, drho)
}

/// SLD given an already computed eigensystem of the state.
pub(crate) fn sld_in_frame(es: &EigenSystem, drho: &CMatrix) -> Result<CMatrix> {
    let d = es.dim();
    let a = es.to_eigenbasis(drho);
    let p = es.values();
    let kernel_tol = 1e-8 * max_abs(drho).max(1.0);
    let mut lam = CMatrix::zeros(d, d);
    for j in 0..d {
        for k in 0..d {
            let s = p[j] + p[k];
            if p[j] < RANK_TOL && p[k] < RANK_TOL {
                if a[(j, k)].norm() > kernel_tol {
                    return Err(Error::UnsupportedTangent(a[(j, k)].norm()));
                }
                continue;
            }
            lam[(j, k)] = a[(j, k)] * (2.0 / s);
        }
    }
    let lam = es.from_eigenbasis(&lam);
    Ok((&lam + lam.adjoint()).map(|z| z * 0.5))
}

/// Quantum relative entropy `tr ρ(ln ρ − ln σ)` in nats.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: sigma.dim(),
        });
    }
    let es_sigma = sigma.eigen()?;
    let smin = es_sigma.values().iter().cloned().fold(f64::INFINITY, f64::min);
    if smin < RANK_TOL {
        return Err(Error::SingularSecondArgument(smin));
    }
    let es_rho = rho.eigen()?;
    let neg_entropy: f64 = es_rho
        .values()
        .iter()
        .filter(|&&p| p > RANK_TOL)
        .map(|&p| p * p.ln())
        .sum();
    let rho_in_sigma = es_sigma.to_eigenbasis(rho.matrix());
    let cross: f64 = es_sigma
        .values()
        .iter()
        .enumerate()
        .map(|(k, &s)| rho_in_sigma[(k, k)].re * s.ln())
        .sum();
    Ok(neg_entropy - cross)
}

/// Values that can be combined linearly by a difference stencil.
pub trait Stencil: Sized {
    /// `a·x + b·y`
    fn axpby(a: f64, x: &Self, b: f64, y: &Self) -> Self;
}

impl Stencil for f64 {
    fn axpby(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        a * x + b * y
    }
}

impl Stencil for C64 {
    fn axpby(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        x * a + y * b
    }
}

impl Stencil for Vec<f64> {
    fn axpby(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        x.iter().zip(y).map(|(u, v)| a * u + b * v).collect()
    }
}

impl Stencil for CMatrix {
    fn axpby(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        x.zip_map(y, |u, v| u * a + v * b)
    }
}

impl<A: Stencil, B: Stencil> Stencil for (A, B) {
    fn axpby(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        (A::axpby(a, &x.0, b, &y.0), B::axpby(a, &x.1, b, &y.1))
    }
}

/// `(f(t+h) − f(t−h)) / 2h`.
pub fn central_difference<T: Stencil>(mut f: impl FnMut(f64) -> T, t: f64, h: f64) -> T {
    let inv = 1.0 / (2.0 * h);
    let up = f(t + h);
    T::axpby(inv, &up, -inv, &f(t - h))
}

/// One Richardson step on top of [`central_difference`]:
/// `(4·D(h/2) − D(h)) / 3`, fourth-order accurate.
pub fn richardson_difference<T: Stencil>(mut f: impl FnMut(f64) -> T, t: f64, h: f64) -> T {
    let coarse = central_difference(&mut f, t, h);
    let fine = central_difference(&mut f, t, 0.5 * h);
    T::axpby(4.0 / 3.0, &fine, -1.0 / 3.0, &coarse)
}

/// Default derivative used throughout the crate.
pub fn derivative<T: Stencil>(f: impl FnMut(f64) -> T, t: f64) -> T {
    richardson_difference(f, t, FD_STEP)
}
