use nalgebra::DMatrix;

use super::MetricMatrix;
use crate::error::{Error, Result};
use crate::family::ParametricFamily;
use crate::hermitian::{derivative, eig_hermitian, hermiticity_defect, max_abs, outer, CMatrix, C64, FD_STEP};
use crate::random::{random_isometry, rng_from_seed};
use crate::state::DensityMatrix;

const POVM_ELEMENT_TOL: f64 = 1e-10;
const POVM_SUM_TOL: f64 = 1e-9;
const VANISHING_PROBABILITY: f64 = 1e-12;
const VANISHING_FLOW: f64 = 1e-9;

/// Positive operator-valued measure: Hermitian PSD elements summing to `I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<CMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let d = first.nrows();
        let mut total = CMatrix::zeros(d, d);
        for (m, e) in elements.iter().enumerate() {
            if e.nrows() != d || e.ncols() != d {
                return Err(Error::InvalidPovm(format!("element {m} has the wrong shape")));
            }
            let defect = hermiticity_defect(e);
            if defect > POVM_ELEMENT_TOL {
                return Err(Error::InvalidPovm(format!("element {m} is not Hermitian ({defect:e})")));
            }
            let min = eig_hermitian(e)?.values().last().copied().unwrap_or(0.0);
            if min < -POVM_ELEMENT_TOL {
                return Err(Error::InvalidPovm(format!("element {m} has eigenvalue {min:e}")));
            }
            total += e;
        }
        let residual = max_abs(&(total - CMatrix::identity(d, d)));
        if residual > POVM_SUM_TOL {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity only within {residual:e}"
            )));
        }
        Ok(Povm { elements })
    }

    pub fn computational_basis(d: usize) -> Self {
        let elements = (0..d)
            .map(|i| {
                let mut e = CMatrix::zeros(d, d);
                e[(i, i)] = C64::from(1.0);
                e
            })
            .collect();
        Povm { elements }
    }

    /// Rank-one projectors onto the orthonormal columns of `basis`.
    pub fn from_basis(basis: &CMatrix) -> Result<Self> {
        Povm::new(
            (0..basis.ncols())
                .map(|i| {
                    let v = basis.column(i).into_owned();
                    outer(&v, &v)
                })
                .collect(),
        )
    }

    /// `{E_k† E_k}` for Kraus blocks of a seeded random isometry.
    pub fn random(d: usize, outcomes: usize, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let v = random_isometry(&mut rng, d * outcomes, d);
        let elements = (0..outcomes)
            .map(|k| {
                let block = v.rows(k * d, d).into_owned();
                let m = block.adjoint() * block;
                (&m + m.adjoint()).map(|z| z * 0.5)
            })
            .collect();
        Povm { elements }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }
}

fn probabilities_raw(rho: &CMatrix, povm: &Povm) -> Vec<f64> {
    povm.elements
        .iter()
        .map(|m| rho.component_mul(&m.transpose()).sum().re)
        .collect()
}

/// `p_m = tr{ρ M_m}`, with tiny negative round-off clamped to zero.
pub fn born_probabilities(rho: &DensityMatrix, povm: &Povm) -> Result<Vec<f64>> {
    if rho.dim() != povm.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: povm.dim(),
        });
    }
    Ok(probabilities_raw(rho.matrix(), povm)
        .into_iter()
        .map(|p| if (-POVM_ELEMENT_TOL..0.0).contains(&p) { 0.0 } else { p })
        .collect())
}

/// `F_kl = Σ_m (∂_k p_m)(∂_l p_m)/p_m` with differenced Born probabilities.
pub fn classical_fisher(family: &ParametricFamily, theta: &[f64], povm: &Povm) -> Result<MetricMatrix> {
    let rho = family.evaluate(theta)?;
    family.check_theta_margin(theta, FD_STEP)?;
    let probs = born_probabilities(&rho, povm)?;
    let np = family.nparams();
    let mut point = theta.to_vec();
    let grads: Vec<Vec<f64>> = (0..np)
        .map(|l| {
            let g = derivative(
                |t| {
                    point[l] = t;
                    probabilities_raw(&family.matrix_at(&point), povm)
                },
                theta[l],
            );
            point[l] = theta[l];
            g
        })
        .collect();
    let mut f = DMatrix::zeros(np, np);
    for (m, &p) in probs.iter().enumerate() {
        if p <= VANISHING_PROBABILITY {
            if grads.iter().any(|g| g[m].abs() > VANISHING_FLOW) {
                return Err(Error::VanishingProbabilityWithFlow { outcome: m });
            }
            continue;
        }
        for k in 0..np {
            for l in 0..np {
                f[(k, l)] += grads[k][m] * grads[l][m] / p;
            }
        }
    }
    Ok(MetricMatrix::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::ParamDomain;
    use crate::registry::{bloch3, diagonal_simplex};

    #[test]
    fn born_on_maximally_mixed() {
        let povm = Povm::random(3, 4, 5);
        let p = born_probabilities(&DensityMatrix::maximally_mixed(3), &povm).unwrap();
        for (pm, m) in p.iter().zip(povm.elements()) {
            assert!((pm - crate::hermitian::trace(m).re / 3.0).abs() < 1e-14);
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn born_on_diagonal_and_bloch_axis() {
        let basis = Povm::computational_basis(2);
        let p = born_probabilities(&DensityMatrix::diagonal(&[0.8, 0.2]).unwrap(), &basis).unwrap();
        assert_eq!(p, vec![0.8, 0.2]);
        let r = 0.35;
        let p = born_probabilities(&bloch3().evaluate(&[r, 0.0, 0.0]).unwrap(), &basis).unwrap();
        assert!((p[0] - (1.0 + r) / 2.0).abs() < 1e-15);
        assert!((p[1] - (1.0 - r) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn random_povm_is_valid() {
        let povm = Povm::random(4, 3, 77);
        assert!(Povm::new(povm.elements().to_vec()).is_ok());
    }

    #[test]
    fn rejects_incomplete_povm() {
        let mut e = Povm::computational_basis(2).elements().to_vec();
        e.pop();
        assert!(matches!(Povm::new(e), Err(Error::InvalidPovm(_))));
    }

    #[test]
    fn fisher_of_constant_family_vanishes() {
        let rho = DensityMatrix::diagonal(&[0.6, 0.4]).unwrap().into_matrix();
        let fam = ParametricFamily::new("const", 2, vec![ParamDomain::REAL], move |_| rho.clone());
        let f = classical_fisher(&fam, &[0.0], &Povm::random(2, 3, 1)).unwrap();
        assert_eq!(f.scalar(), 0.0);
    }

    #[test]
    fn fisher_of_simplex_at_origin() {
        let f = classical_fisher(&diagonal_simplex(), &[0.0], &Povm::computational_basis(2)).unwrap();
        assert!((f.scalar() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn vanishing_probability_with_flow() {
        // p₁(θ) = θ at θ = 0 has zero probability but unit derivative.
        let fam = ParametricFamily::new("edge", 2, vec![ParamDomain::REAL], |t| {
            let mut m = CMatrix::zeros(2, 2);
            m[(0, 0)] = C64::from(1.0 - t[0]);
            m[(1, 1)] = C64::from(t[0]);
            m
        });
        let err = classical_fisher(&fam, &[0.0], &Povm::computational_basis(2)).unwrap_err();
        assert_eq!(err, Error::VanishingProbabilityWithFlow { outcome: 1 });
    }
}
