//! Built-in families: the two-level Bloch family with its closed-form
//! eigenvectors, the three-level rotating mixture, a rank-one rotation, a
//! commuting simplex family, and seeded random unitary orbits.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::family::{ParamDomain, ParametricFamily, SpectralPresentation};
use crate::hermitian::{eig_hermitian, CMatrix, C64};
use crate::random::{random_hermitian, random_imaginary_hermitian, random_spectrum, random_unitary, rng_from_seed};

pub const FAMILY_NAMES: &[&str] = &[
    "bloch3",
    "rot3-mixture",
    "pure-rotation",
    "diagonal-simplex",
    "random-full-rank",
    "random-pure",
];

/// Minimum eigenvalue and eigenvalue gap of random spectra.
pub const RANDOM_SPECTRUM_MARGIN: f64 = 0.02;

/// Named real parameters for a registry family (the CLI's JSON object).
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(transparent)]
pub struct FamilyParams(BTreeMap<String, f64>);

impl FamilyParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.0.insert(key.to_string(), value);
        self
    }

    fn real(&self, key: &str, default: f64) -> f64 {
        self.0.get(key).copied().unwrap_or(default)
    }

    fn count(&self, key: &str, default: usize) -> Result<usize> {
        match self.0.get(key) {
            None => Ok(default),
            Some(&x) if x >= 0.0 && x.fract() == 0.0 && x < 1e9 => Ok(x as usize),
            Some(&x) => Err(Error::InvalidParams(format!(
                "'{key}' must be a non-negative integer, got {x}"
            ))),
        }
    }

    fn seed(&self, default: u64) -> Result<u64> {
        match self.0.get("seed") {
            None => Ok(default),
            Some(&x) if x >= 0.0 && x.fract() == 0.0 && x <= 9.007_199_254_740_992e15 => Ok(x as u64),
            Some(&x) => Err(Error::InvalidParams(format!(
                "'seed' must be a non-negative integer, got {x}"
            ))),
        }
    }

    fn flag(&self, key: &str) -> bool {
        self.0.get(key).is_some_and(|&x| x != 0.0)
    }

    /// Keys other than `allowed` (the empty key is a placeholder and ignored).
    fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        for k in self.0.keys() {
            if !k.is_empty() && !allowed.contains(&k.as_str()) {
                return Err(Error::InvalidParams(format!("unknown parameter '{k}'")));
            }
        }
        Ok(())
    }
}

pub fn family_registry(name: &str, params: &FamilyParams) -> Result<ParametricFamily> {
    match name {
        "bloch3" => {
            params.reject_unknown(&[])?;
            Ok(bloch3())
        }
        "rot3-mixture" => {
            params.reject_unknown(&["eps"])?;
            rot3_mixture(params.real("eps", 0.1))
        }
        "pure-rotation" => {
            params.reject_unknown(&[])?;
            Ok(pure_rotation())
        }
        "diagonal-simplex" => {
            params.reject_unknown(&[])?;
            Ok(diagonal_simplex())
        }
        "random-full-rank" => {
            params.reject_unknown(&["d", "p", "seed", "drift", "real"])?;
            random_full_rank(
                params.count("d", 3)?,
                params.count("p", 1)?,
                params.seed(42)?,
                params.real("drift", 0.0),
                params.flag("real"),
            )
        }
        "random-pure" => {
            params.reject_unknown(&["d", "p", "seed", "real"])?;
            random_pure(
                params.count("d", 3)?,
                params.count("p", 1)?,
                params.seed(42)?,
                params.flag("real"),
            )
        }
        other => Err(Error::UnknownFamily(other.to_string())),
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Two-level states with Bloch vector of length `r` at polar angle `θ` and
/// azimuth `φ`, presented with the eigenvectors
/// `v₁ = (cos(θ/2)e^{−iφ/2}, sin(θ/2)e^{iφ/2})`,
/// `v₂ = (sin(θ/2)e^{−iφ/2}, −cos(θ/2)e^{iφ/2})`.
pub fn bloch3() -> ParametricFamily {
    let domain = vec![ParamDomain::new(0.0, 1.0), ParamDomain::REAL, ParamDomain::REAL];
    ParametricFamily::from_spectral("bloch3", 2, domain, |t| {
        let (r, th, ph) = (t[0], t[1], t[2]);
        let (s, co) = (0.5 * th).sin_cos();
        let minus = C64::from_polar(1.0, -0.5 * ph);
        let plus = C64::from_polar(1.0, 0.5 * ph);
        let vectors = CMatrix::from_row_slice(2, 2, &[minus * co, minus * s, plus * s, -plus * co]);
        SpectralPresentation::new(vec![0.5 * (1.0 + r), 0.5 * (1.0 - r)], vectors)
    })
    .with_param_names(&["r", "theta", "phi"])
}

/// The Bloch matrix written out entrywise, independent of the presentation.
pub fn bloch3_matrix(r: f64, th: f64, ph: f64) -> CMatrix {
    let off = C64::from_polar(0.5 * r * th.sin(), -ph);
    CMatrix::from_row_slice(
        2,
        2,
        &[
            c(0.5 * (1.0 + r * th.cos()), 0.0),
            off,
            off.conj(),
            c(0.5 * (1.0 - r * th.cos()), 0.0),
        ],
    )
}

/// `(1−2ε)|v₁⟩⟨v₁| + ε|v₂(θ)⟩⟨v₂(θ)| + ε|v₃(θ)⟩⟨v₃(θ)|` with `v₂, v₃`
/// rotating in the plane orthogonal to `v₁`. The density matrix does not
/// depend on `θ`; only the presentation does.
pub fn rot3_mixture(eps: f64) -> Result<ParametricFamily> {
    if !(eps > 0.0 && eps < 1.0 / 3.0) {
        return Err(Error::ParamOutOfDomain {
            name: "eps".into(),
            value: eps,
        });
    }
    Ok(
        ParametricFamily::from_spectral("rot3-mixture", 3, vec![ParamDomain::REAL], move |t| {
            let (s, co) = t[0].sin_cos();
            let vectors = CMatrix::from_row_slice(
                3,
                3,
                &[
                    c(1.0, 0.0),
                    c(0.0, 0.0),
                    c(0.0, 0.0),
                    c(0.0, 0.0),
                    c(co, 0.0),
                    c(-s, 0.0),
                    c(0.0, 0.0),
                    c(s, 0.0),
                    c(co, 0.0),
                ],
            );
            SpectralPresentation::new(vec![1.0 - 2.0 * eps, eps, eps], vectors)
        })
        .with_param_names(&["theta"]),
    )
}

/// `|w(θ)⟩ = (cos θ, sin θ)`.
pub fn pure_rotation() -> ParametricFamily {
    ParametricFamily::from_spectral("pure-rotation", 2, vec![ParamDomain::REAL], |t| {
        let (s, co) = t[0].sin_cos();
        let vectors = CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)]);
        SpectralPresentation::new(vec![1.0, 0.0], vectors)
    })
    .with_param_names(&["theta"])
}

/// `diag((1+θ)/2, (1−θ)/2)` on `θ ∈ (−1, 1)`.
pub fn diagonal_simplex() -> ParametricFamily {
    ParametricFamily::from_spectral("diagonal-simplex", 2, vec![ParamDomain::new(-1.0, 1.0)], |t| {
        SpectralPresentation::new(vec![0.5 * (1.0 + t[0]), 0.5 * (1.0 - t[0])], CMatrix::identity(2, 2))
    })
    .with_param_names(&["theta"])
}

/// Precomputed `exp(i t G)` via `G = Q diag(g) Q†`.
#[derive(Clone)]
struct Generator {
    basis: CMatrix,
    spectrum: Vec<f64>,
}

impl Generator {
    fn new(g: &CMatrix) -> Self {
        let es = eig_hermitian(g).expect("generator is Hermitian");
        Generator {
            basis: es.vectors().clone(),
            spectrum: es.values().to_vec(),
        }
    }

    fn exp_i(&self, t: f64) -> CMatrix {
        let mut scaled = self.basis.clone();
        for (j, &g) in self.spectrum.iter().enumerate() {
            scaled.column_mut(j).apply(|z| *z *= C64::from_polar(1.0, t * g));
        }
        &scaled * self.basis.adjoint()
    }
}

/// `ρ(θ) = U(θ) diag(p(θ)) U(θ)†` with
/// `U(θ) = exp(iθ₁G₁)···exp(iθ_pG_p)·U₀`; the frame is the columns of `U(θ)`.
fn unitary_orbit(
    name: &str,
    dim: usize,
    generators: Vec<CMatrix>,
    u0: CMatrix,
    spectrum: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
) -> ParametricFamily {
    let gens: Vec<Generator> = generators.iter().map(Generator::new).collect();
    let nparams = gens.len();
    let names: Vec<String> = (0..nparams).map(|i| format!("theta{i}")).collect();
    let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    ParametricFamily::from_spectral(name, dim, vec![ParamDomain::REAL; nparams], move |t| {
        let mut u = CMatrix::identity(dim, dim);
        for (g, &x) in gens.iter().zip(t) {
            u *= g.exp_i(x);
        }
        SpectralPresentation::new(spectrum(t), u * &u0)
    })
    .with_param_names(&name_refs)
}

fn check_random_shape(d: usize, p: usize) -> Result<()> {
    if !(2..=8).contains(&d) {
        return Err(Error::InvalidParams(format!("d must be in 2..=8, got {d}")));
    }
    if p == 0 {
        return Err(Error::InvalidParams("p must be at least 1".into()));
    }
    Ok(())
}

fn random_generators(seed: u64, d: usize, p: usize, real: bool) -> (Vec<CMatrix>, CMatrix, crate::random::SeededRng) {
    let mut rng = rng_from_seed(seed);
    let generators = (0..p)
        .map(|_| {
            if real {
                random_imaginary_hermitian(&mut rng, d, 1.0)
            } else {
                random_hermitian(&mut rng, d, 1.0)
            }
        })
        .collect();
    let u0 = if real {
        let a = random_imaginary_hermitian(&mut rng, d, 1.0);
        Generator::new(&a).exp_i(1.0).map(|z| C64::new(z.re, 0.0))
    } else {
        random_unitary(&mut rng, d)
    };
    (generators, u0, rng)
}

/// Random full-rank unitary orbit. The spectrum is fixed, or with
/// `drift > 0` moves along the segment between two random spectra, so
/// every eigenvalue and gap stays at least [`RANDOM_SPECTRUM_MARGIN`].
/// With `real` the frame is real orthogonal for every `θ`.
pub fn random_full_rank(d: usize, p: usize, seed: u64, drift: f64, real: bool) -> Result<ParametricFamily> {
    check_random_shape(d, p)?;
    if !(0.0..=1.0).contains(&drift) {
        return Err(Error::ParamOutOfDomain {
            name: "drift".into(),
            value: drift,
        });
    }
    let (generators, u0, mut rng) = random_generators(seed, d, p, real);
    let base = random_spectrum(&mut rng, d, RANDOM_SPECTRUM_MARGIN)?;
    let other = random_spectrum(&mut rng, d, RANDOM_SPECTRUM_MARGIN)?;
    let weights: Vec<f64> = (0..p).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
    let offset: f64 = rand::Rng::random_range(&mut rng, 0.0..std::f64::consts::TAU);
    let spectrum = move |t: &[f64]| {
        if drift == 0.0 {
            return base.clone();
        }
        let phase: f64 = offset + weights.iter().zip(t).map(|(w, x)| w * x).sum::<f64>();
        let s = drift * 0.5 * (1.0 + phase.sin());
        base.iter().zip(&other).map(|(a, b)| (1.0 - s) * a + s * b).collect()
    };
    Ok(unitary_orbit("random-full-rank", d, generators, u0, spectrum))
}

/// Random pure-state orbit `U(θ)|ψ₀⟩`.
pub fn random_pure(d: usize, p: usize, seed: u64, real: bool) -> Result<ParametricFamily> {
    check_random_shape(d, p)?;
    let (generators, u0, _) = random_generators(seed, d, p, real);
    let mut spectrum = vec![0.0; d];
    spectrum[0] = 1.0;
    Ok(unitary_orbit("random-pure", d, generators, u0, move |_| {
        spectrum.clone()
    }))
}
