//! SLD, KMB and RLD informations and the generic Morozova–Chentsov engine.

use nalgebra::DMatrix;

use super::{CFunction, MetricMatrix};
use crate::error::{Error, Result};
use crate::family::ParametricFamily;
use crate::hermitian::{max_abs, sld_solve, trace, CMatrix, CLUSTER_GAP, RANK_TOL};
use crate::tangent::NEGLIGIBLE_COUPLING;

/// Evaluate the quadratic form of `cf` in the eigenbasis of the state.
///
/// `p` are the eigenvalues and `a[k]` the `k`-th tangent `∂ρ/∂θ^k`
/// expressed in the matching eigenbasis. Entry `(k, l)` is
/// `C·Σ_i a_k[i,i]·a_l[i,i]/p_i + 2·Σ_{j<m} c(p_j, p_m)·Re(a_k[j,m]·conj(a_l[j,m]))`.
pub fn mc_metric_in_frame(p: &[f64], a: &[CMatrix], cf: &CFunction) -> Result<MetricMatrix> {
    let d = p.len();
    let np = a.len();
    let pmin = p.iter().copied().fold(f64::INFINITY, f64::min);
    if cf.requires_full_rank() && pmin < RANK_TOL {
        return Err(Error::RankDeficient(pmin));
    }
    let scale = a.iter().map(max_abs).fold(1.0, f64::max);
    let coupling_tol = NEGLIGIBLE_COUPLING * scale;
    let mut out = DMatrix::zeros(np, np);

    for i in 0..d {
        if p[i] < RANK_TOL {
            if a.iter().any(|ak| ak[(i, i)].norm() > coupling_tol) {
                return Err(Error::SingularClassicalTerm { index: i });
            }
            continue;
        }
        for k in 0..np {
            for l in 0..np {
                out[(k, l)] += cf.constant() * a[k][(i, i)].re * a[l][(i, i)].re / p[i];
            }
        }
    }

    for j in 0..d {
        for m in (j + 1)..d {
            let kernel = p[j] < RANK_TOL && p[m] < RANK_TOL;
            let degenerate = (p[j] - p[m]).abs() < CLUSTER_GAP;
            let c = if kernel {
                f64::INFINITY
            } else if degenerate {
                let mean = 0.5 * (p[j] + p[m]);
                cf.c(mean, mean)
            } else {
                cf.c(p[j], p[m])
            };
            if !c.is_finite() {
                let worst = a.iter().map(|ak| ak[(j, m)].norm()).fold(0.0, f64::max);
                if worst > coupling_tol {
                    return Err(if kernel {
                        Error::UnsupportedTangent(worst)
                    } else {
                        Error::DegeneracyUnresolved {
                            j,
                            k: m,
                            gap: (p[j] - p[m]).abs(),
                        }
                    });
                }
                continue;
            }
            for k in 0..np {
                for l in 0..np {
                    out[(k, l)] += 2.0 * c * (a[k][(j, m)] * a[l][(j, m)].conj()).re;
                }
            }
        }
    }
    Ok(MetricMatrix::new(out))
}

/// Invariant metric of `cf` for `family` at `θ`, from the eigensystem of
/// `ρ(θ)` and differenced tangents.
pub fn mc_metric(family: &ParametricFamily, theta: &[f64], cf: &CFunction) -> Result<MetricMatrix> {
    let rho = family.evaluate(theta)?;
    let es = rho.eigen()?;
    let a: Vec<CMatrix> = family.tangents(theta)?.iter().map(|t| es.to_eigenbasis(t)).collect();
    mc_metric_in_frame(es.values(), &a, cf)
}

/// `H_kl = Re tr{ρ λ_k λ_l}` with each `λ_k` from the Lyapunov solve.
pub fn sld_information(family: &ParametricFamily, theta: &[f64]) -> Result<MetricMatrix> {
    let rho = family.evaluate(theta)?;
    let lambdas = family
        .tangents(theta)?
        .iter()
        .map(|t| sld_solve(&rho, t))
        .collect::<Result<Vec<_>>>()?;
    let np = lambdas.len();
    let mut h = DMatrix::zeros(np, np);
    for k in 0..np {
        let rl = rho.matrix() * &lambdas[k];
        for l in k..np {
            let v = trace(&(&rl * &lambdas[l])).re;
            h[(k, l)] = v;
            h[(l, k)] = v;
        }
    }
    Ok(MetricMatrix::new(h))
}

pub fn kmb_information(family: &ParametricFamily, theta: &[f64]) -> Result<MetricMatrix> {
    mc_metric(family, theta, &CFunction::KMB)
}

pub fn rld_information(family: &ParametricFamily, theta: &[f64]) -> Result<MetricMatrix> {
    mc_metric(family, theta, &CFunction::RLD)
}
