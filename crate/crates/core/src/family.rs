//! Parametric families `θ ↦ ρ(θ)` and their spectral presentations.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hermitian::{derivative, max_abs, CMatrix, CVector, C64, FD_STEP};
use crate::state::DensityMatrix;

pub type EvalFn = Arc<dyn Fn(&[f64]) -> CMatrix + Send + Sync>;
pub type SpectralFn = Arc<dyn Fn(&[f64]) -> SpectralPresentation + Send + Sync>;

/// Eigenvalues `p_i(θ)` and a chosen orthonormal eigenvector frame
/// `|w_i(θ)⟩` (one column per eigenvalue). The phase of each column is the
/// gauge; it must vary smoothly with `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPresentation {
    pub eigenvalues: Vec<f64>,
    pub vectors: CMatrix,
}

impl SpectralPresentation {
    pub fn new(eigenvalues: Vec<f64>, vectors: CMatrix) -> Self {
        SpectralPresentation { eigenvalues, vectors }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, i: usize) -> CVector {
        self.vectors.column(i).into_owned()
    }

    /// `Σ p_i |w_i⟩⟨w_i|`.
    pub fn reconstruct(&self) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (i, &p) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(i).scale_mut(p);
        }
        &scaled * self.vectors.adjoint()
    }

    /// Largest deviation from `Σ p = 1` and from orthonormality.
    pub fn defect(&self) -> f64 {
        let d = self.dim();
        let gram = self.vectors.adjoint() * &self.vectors;
        let ortho = max_abs(&(gram - CMatrix::identity(d, d)));
        let sum: f64 = self.eigenvalues.iter().sum();
        ortho.max((sum - 1.0).abs())
    }

    /// Multiply column `i` by `exp(i·alpha[i])`.
    pub fn rephase(&self, alpha: &[f64]) -> Self {
        let mut vectors = self.vectors.clone();
        for (i, &a) in alpha.iter().enumerate() {
            vectors.column_mut(i).apply(|z| *z *= C64::from_polar(1.0, a));
        }
        SpectralPresentation {
            eigenvalues: self.eigenvalues.clone(),
            vectors,
        }
    }
}

/// Open interval `(lo, hi)`; infinite ends allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamDomain {
    pub lo: f64,
    pub hi: f64,
}

impl ParamDomain {
    pub const REAL: ParamDomain = ParamDomain {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        ParamDomain { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    /// Interior with room for a difference stencil of half-width `margin`.
    pub fn contains_with_margin(&self, x: f64, margin: f64) -> bool {
        x - margin > self.lo && x + margin < self.hi
    }
}

/// A smooth map from a parameter box to density matrices.
#[derive(Clone)]
pub struct ParametricFamily {
    name: String,
    param_names: Vec<String>,
    dim: usize,
    domain: Vec<ParamDomain>,
    eval: EvalFn,
    spectral: Option<SpectralFn>,
}

impl fmt::Debug for ParametricFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametricFamily")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .field("spectral", &self.spectral.is_some())
            .finish()
    }
}

impl ParametricFamily {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        domain: Vec<ParamDomain>,
        eval: impl Fn(&[f64]) -> CMatrix + Send + Sync + 'static,
    ) -> Self {
        let param_names = (0..domain.len()).map(|i| format!("theta{i}")).collect();
        ParametricFamily {
            name: name.into(),
            param_names,
            dim,
            domain,
            eval: Arc::new(eval),
            spectral: None,
        }
    }

    /// Family defined entirely by a spectral presentation.
    pub fn from_spectral(
        name: impl Into<String>,
        dim: usize,
        domain: Vec<ParamDomain>,
        spectral: impl Fn(&[f64]) -> SpectralPresentation + Send + Sync + 'static,
    ) -> Self {
        let spectral: SpectralFn = Arc::new(spectral);
        let s = spectral.clone();
        let mut fam = ParametricFamily::new(name, dim, domain, move |t| s(t).reconstruct());
        fam.spectral = Some(spectral);
        fam
    }

    pub fn with_param_names(mut self, names: &[&str]) -> Self {
        assert_eq!(names.len(), self.domain.len());
        self.param_names = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_spectral(mut self, spectral: impl Fn(&[f64]) -> SpectralPresentation + Send + Sync + 'static) -> Self {
        self.spectral = Some(Arc::new(spectral));
        self
    }

    pub(crate) fn with_spectral_fn(mut self, spectral: Option<SpectralFn>) -> Self {
        self.spectral = spectral;
        self
    }

    /// Same states, presentation dropped.
    pub fn without_spectral(mut self) -> Self {
        self.spectral = None;
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn param_names(&self) -> &[String] {
        &self.param_names
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nparams(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[ParamDomain] {
        &self.domain
    }

    pub fn has_spectral(&self) -> bool {
        self.spectral.is_some()
    }

    pub(crate) fn spectral_fn(&self) -> Option<&SpectralFn> {
        self.spectral.as_ref()
    }

    pub(crate) fn eval_fn(&self) -> &EvalFn {
        &self.eval
    }

    fn check_len(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.nparams() {
            return Err(Error::ParamCount {
                expected: self.nparams(),
                got: theta.len(),
            });
        }
        Ok(())
    }

    /// `θ` must lie in the open domain.
    pub fn check_theta(&self, theta: &[f64]) -> Result<()> {
        self.check_theta_margin(theta, 0.0)
    }

    /// `θ` must lie in the domain with `margin` to spare in every coordinate.
    pub fn check_theta_margin(&self, theta: &[f64], margin: f64) -> Result<()> {
        self.check_len(theta)?;
        for (i, (&x, dom)) in theta.iter().zip(&self.domain).enumerate() {
            if !x.is_finite() || !dom.contains_with_margin(x, margin) {
                return Err(Error::ParamOutOfDomain {
                    name: self.param_names[i].clone(),
                    value: x,
                });
            }
        }
        Ok(())
    }

    /// Validated state at `θ`.
    pub fn evaluate(&self, theta: &[f64]) -> Result<DensityMatrix> {
        self.check_theta(theta)?;
        DensityMatrix::new((self.eval)(theta))
    }

    /// Raw matrix at `θ` with no checks; used inside difference stencils.
    pub fn matrix_at(&self, theta: &[f64]) -> CMatrix {
        (self.eval)(theta)
    }

    pub fn spectral_at(&self, theta: &[f64]) -> Option<SpectralPresentation> {
        self.spectral.as_ref().map(|s| s(theta))
    }

    /// `∂ρ/∂θ^l` at `θ`, projected onto Hermitian traceless matrices.
    pub fn partial(&self, theta: &[f64], l: usize) -> CMatrix {
        let mut point = theta.to_vec();
        let raw: CMatrix = derivative(
            |t| {
                point[l] = t;
                (self.eval)(&point)
            },
            theta[l],
        );
        let mut out = (&raw + raw.adjoint()) * C64::from(0.5);
        let shift = out.trace() / C64::from(self.dim as f64);
        for i in 0..self.dim {
            out[(i, i)] -= shift;
        }
        out
    }

    /// All partial derivatives at an interior `θ`.
    pub fn tangents(&self, theta: &[f64]) -> Result<Vec<CMatrix>> {
        self.check_theta_margin(theta, FD_STEP)?;
        Ok((0..self.nparams()).map(|l| self.partial(theta, l)).collect())
    }

    /// One-parameter family in coordinate `axis` with the others held at
    /// `theta`. The presentation, if any, is carried along.
    pub fn restrict(&self, theta: &[f64], axis: usize) -> Result<ParametricFamily> {
        self.check_len(theta)?;
        if axis >= self.nparams() {
            return Err(Error::InvalidArgument(format!(
                "axis {axis} out of range for {} parameters",
                self.nparams()
            )));
        }
        let base = theta.to_vec();
        let lift = move |t: &[f64]| {
            let mut p = base.clone();
            p[axis] = t[0];
            p
        };
        Ok(self.compose(
            format!("{}[{}]", self.name, self.param_names[axis]),
            vec![self.domain[axis]],
            &[self.param_names[axis].as_str()],
            lift,
        ))
    }

    /// Family `ψ ↦ ρ(lift(ψ))` with presentation carried along.
    pub(crate) fn compose(
        &self,
        name: String,
        domain: Vec<ParamDomain>,
        names: &[&str],
        lift: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> ParametricFamily {
        let lift = Arc::new(lift);
        let eval = self.eval.clone();
        let l1 = lift.clone();
        let mut fam = ParametricFamily::new(name, self.dim, domain, move |t| eval(&l1(t))).with_param_names(names);
        if let Some(s) = &self.spectral {
            let s = s.clone();
            let l2 = lift.clone();
            fam.spectral = Some(Arc::new(move |t| s(&l2(t))));
        }
        fam
    }
}

/// One-parameter family `t ↦ ρ(θ + t·v)`, defined on the largest open
/// interval of `t` that keeps `θ + t·v` in the domain box.
pub fn directional_family(family: &ParametricFamily, theta: &[f64], v: &[f64]) -> Result<ParametricFamily> {
    family.check_theta(theta)?;
    if v.len() != family.nparams() {
        return Err(Error::ParamCount {
            expected: family.nparams(),
            got: v.len(),
        });
    }
    if v.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroDirection);
    }
    let mut t_lo = f64::NEG_INFINITY;
    let mut t_hi = f64::INFINITY;
    for ((&x, &dir), dom) in theta.iter().zip(v).zip(family.domain()) {
        if dir == 0.0 {
            continue;
        }
        let a = (dom.lo - x) / dir;
        let b = (dom.hi - x) / dir;
        t_lo = t_lo.max(a.min(b));
        t_hi = t_hi.min(a.max(b));
    }
    let domain = ParamDomain::new(t_lo, t_hi);
    if !domain.contains_with_margin(0.0, FD_STEP) {
        return Err(Error::DomainExit);
    }
    let base = theta.to_vec();
    let dir = v.to_vec();
    Ok(
        family.compose(format!("{}·dir", family.name()), vec![domain], &["t"], move |t| {
            base.iter().zip(&dir).map(|(b, d)| b + t[0] * d).collect()
        }),
    )
}
