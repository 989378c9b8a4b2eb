//! The presentation-dependent quantum information `C_Υ` and its
//! gauge-invariant part `C_L`, both from spectral first-order data.

use nalgebra::DMatrix;

use super::{sld_information, MetricMatrix};
use crate::error::{Error, Result};
use crate::family::ParametricFamily;
use crate::hermitian::{outer, RANK_TOL};
use crate::tangent::{tangent_data, TangentData};

/// Flow of eigenvalue mass allowed into a zero eigenvalue.
pub const CLASSICAL_FLOW_TOL: f64 = 1e-9;

fn classical_term(td: &TangentData) -> Result<DMatrix<f64>> {
    let np = td.nparams();
    let mut out = DMatrix::zeros(np, np);
    for (i, &p) in td.eigenvalues.iter().enumerate() {
        if p < RANK_TOL {
            if td.dp.iter().any(|row| row[i].abs() > CLASSICAL_FLOW_TOL) {
                return Err(Error::SingularClassicalTerm { index: i });
            }
            continue;
        }
        for k in 0..np {
            for l in 0..np {
                out[(k, l)] += td.dp[k][i] * td.dp[l][i] / p;
            }
        }
    }
    Ok(out)
}

fn off_diagonal_term(td: &TangentData) -> DMatrix<f64> {
    let np = td.nparams();
    let d = td.dim();
    let p = &td.eigenvalues;
    let mut out = DMatrix::zeros(np, np);
    for i in 0..d {
        for j in (i + 1)..d {
            let w = 4.0 * (p[i] + p[j]);
            for k in 0..np {
                for l in 0..np {
                    out[(k, l)] += w * (td.overlaps[k][(i, j)] * td.overlaps[l][(i, j)].conj()).re;
                }
            }
        }
    }
    out
}

fn diagonal_overlap_term(td: &TangentData) -> DMatrix<f64> {
    let np = td.nparams();
    let mut out = DMatrix::zeros(np, np);
    for (i, &p) in td.eigenvalues.iter().enumerate() {
        for k in 0..np {
            for l in 0..np {
                out[(k, l)] += 4.0 * p * (td.overlaps[k][(i, i)] * td.overlaps[l][(i, i)].conj()).re;
            }
        }
    }
    out
}

/// `C_Υ` from first-order data in whatever gauge `td` carries.
pub fn c_upsilon_from_tangent(td: &TangentData) -> Result<MetricMatrix> {
    Ok(MetricMatrix::new(
        classical_term(td)? + off_diagonal_term(td) + diagonal_overlap_term(td),
    ))
}

/// `C_L`: `C_Υ` without the diagonal-overlap term.
pub fn c_l_from_tangent(td: &TangentData) -> Result<MetricMatrix> {
    Ok(MetricMatrix::new(classical_term(td)? + off_diagonal_term(td)))
}

/// `C_Υ` in the gauge of the family's spectral presentation.
pub fn c_upsilon_states(family: &ParametricFamily, theta: &[f64]) -> Result<MetricMatrix> {
    if !family.has_spectral() {
        return Err(Error::MissingGauge);
    }
    c_upsilon_from_tangent(&tangent_data(family, theta)?)
}

/// `C_L` from the overlap form. Uses the family's presentation when it has
/// one and the eigensolver frame otherwise; the value does not depend on
/// the gauge.
pub fn c_l_information(family: &ParametricFamily, theta: &[f64]) -> Result<MetricMatrix> {
    c_l_from_tangent(&tangent_data(family, theta)?)
}

/// `C_L` split into the Fisher information of the eigenvalues and the
/// eigenvalue-weighted SLD informations of the eigenvector families.
#[derive(Debug, Clone, PartialEq)]
pub struct ClDecomposition {
    pub classical: MetricMatrix,
    pub pure_part: MetricMatrix,
    pub total: MetricMatrix,
}

pub fn c_l_decomposition(family: &ParametricFamily, theta: &[f64]) -> Result<ClDecomposition> {
    let spectral = family.spectral_fn().ok_or(Error::MissingGauge)?.clone();
    let td = tangent_data(family, theta)?;
    let classical = MetricMatrix::new(classical_term(&td)?);
    let np = family.nparams();
    let mut pure = DMatrix::zeros(np, np);
    for (i, &p) in td.eigenvalues.iter().enumerate() {
        if p < RANK_TOL {
            continue;
        }
        let s = spectral.clone();
        let branch = ParametricFamily::new(
            format!("{}#{i}", family.name()),
            family.dim(),
            family.domain().to_vec(),
            move |t| {
                let w = s(t).vector(i);
                outer(&w, &w)
            },
        );
        pure += sld_information(&branch, theta)?.matrix() * p;
    }
    let pure_part = MetricMatrix::new(pure);
    let total = classical.add(&pure_part);
    Ok(ClDecomposition {
        classical,
        pure_part,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{directional_family, ParamDomain};
    use crate::metrics::{mc_metric, CFunction};
    use crate::registry::{bloch3, diagonal_simplex, pure_rotation, random_full_rank, random_pure, rot3_mixture};

    #[test]
    fn bloch3_native_gauge() {
        let (r, th, ph) = (0.6, 0.7, 0.5);
        let cu = c_upsilon_states(&bloch3(), &[r, th, ph]).unwrap();
        let want = MetricMatrix::from_diagonal(&[1.0 / (1.0 - r * r), 1.0, 1.0]);
        assert!(cu.max_abs_diff(&want) < 1e-7, "{:?}", cu.rows());
    }

    #[test]
    fn bloch3_shifted_gauge() {
        let (r, th, ph) = (0.6, 0.7, 0.5);
        let base = bloch3();
        let s = base.spectral_fn().unwrap().clone();
        let shifted = base
            .clone()
            .with_spectral(move |t| s(t).rephase(&[-t[2] / 2.0, -t[2] / 2.0]));
        let cu = c_upsilon_states(&shifted, &[r, th, ph]).unwrap();
        assert!((cu.get(2, 2) - (2.0 + 2.0 * r * th.cos())).abs() < 1e-7);
    }

    #[test]
    fn bloch3_cl_matrix() {
        let (r, th, ph) = (0.3, 1.1, -0.4);
        let cl = c_l_information(&bloch3(), &[r, th, ph]).unwrap();
        let want = MetricMatrix::from_diagonal(&[1.0 / (1.0 - r * r), 1.0, th.sin().powi(2)]);
        assert!(cl.max_abs_diff(&want) < 1e-7);
        let engine = mc_metric(&bloch3(), &[r, th, ph], &CFunction::CL).unwrap();
        assert!(engine.max_abs_diff(&cl) < 1e-7);
    }

    #[test]
    fn rot3_mixture_cl_is_eight_eps() {
        for eps in [0.05, 0.1, 0.2] {
            let cl = c_l_information(&rot3_mixture(eps).unwrap(), &[0.4]).unwrap();
            assert!((cl.scalar() - 8.0 * eps).abs() < 1e-7);
        }
    }

    #[test]
    fn constant_family_is_zero() {
        let fam = ParametricFamily::from_spectral("const", 2, vec![ParamDomain::REAL], |_| {
            crate::family::SpectralPresentation::new(vec![0.7, 0.3], crate::hermitian::identity(2))
        });
        assert_eq!(c_upsilon_states(&fam, &[0.0]).unwrap().max_abs(), 0.0);
        assert_eq!(c_l_information(&fam, &[0.0]).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn missing_gauge_is_reported() {
        assert!(matches!(
            c_upsilon_states(&bloch3().without_spectral(), &[0.5, 0.5, 0.5]),
            Err(Error::MissingGauge)
        ));
        assert!(matches!(
            c_l_decomposition(&bloch3().without_spectral(), &[0.5, 0.5, 0.5]),
            Err(Error::MissingGauge)
        ));
    }

    #[test]
    fn cl_agrees_across_routes() {
        for seed in 0..20 {
            let fam = random_full_rank(3, 2, seed, 0.5, false).unwrap();
            let a = c_l_information(&fam, &[0.2, 0.1]).unwrap();
            let b = c_l_information(&fam.clone().without_spectral(), &[0.2, 0.1]).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-7 * a.max_abs().max(1.0));
        }
    }

    #[test]
    fn cl_minus_sld_closed_form() {
        for seed in 0..20 {
            let fam = random_full_rank(3, 1, 40 + seed, 0.5, false).unwrap();
            let td = tangent_data(&fam, &[0.3]).unwrap();
            let cl = c_l_from_tangent(&td).unwrap().scalar();
            let h = sld_information(&fam, &[0.3]).unwrap().scalar();
            let p = &td.eigenvalues;
            let o = &td.overlaps[0];
            let mut gap = 0.0;
            for j in 0..3 {
                for k in 0..3 {
                    if j != k {
                        gap += 8.0 * p[j] * p[k] / (p[j] + p[k]) * o[(j, k)].norm_sqr();
                    }
                }
            }
            assert!((cl - h - gap).abs() < 1e-8 * cl.max(1.0));
        }
    }

    #[test]
    fn decomposition_examples() {
        let simplex = c_l_decomposition(&diagonal_simplex(), &[0.2]).unwrap();
        assert!(simplex.pure_part.max_abs() < 1e-10);
        let rot = c_l_decomposition(&rot3_mixture(0.1).unwrap(), &[0.3]).unwrap();
        assert!(rot.classical.max_abs() < 1e-10);
        assert!((rot.pure_part.scalar() - 0.8).abs() < 1e-8);
        let pure = c_l_decomposition(&pure_rotation(), &[0.3]).unwrap();
        assert!(pure.classical.max_abs() < 1e-10);
        assert!((pure.pure_part.scalar() - 4.0).abs() < 1e-8);
    }

    #[test]
    fn pure_states_cl_equals_sld() {
        for seed in 0..10 {
            let fam = random_pure(4, 2, seed, false).unwrap();
            let cl = c_l_information(&fam, &[0.1, 0.2]).unwrap();
            let h = sld_information(&fam, &[0.1, 0.2]).unwrap();
            assert!(cl.max_abs_diff(&h) < 1e-9 * h.max_abs().max(1.0));
        }
    }

    #[test]
    fn upsilon_dominates_cl_dominates_sld() {
        let fam = bloch3();
        let theta = [0.4, 0.9, 1.3];
        let cu = c_upsilon_states(&fam, &theta).unwrap();
        let cl = c_l_information(&fam, &theta).unwrap();
        let h = sld_information(&fam, &theta).unwrap();
        assert!(cu.order_margin(&cl) >= -1e-8);
        assert!(cl.order_margin(&h) >= -1e-8);
        let dir = directional_family(&fam, &theta, &[0.1, 0.3, -0.5]).unwrap();
        assert!(c_upsilon_states(&dir, &[0.0]).unwrap().scalar() >= c_l_information(&dir, &[0.0]).unwrap().scalar());
    }
}
