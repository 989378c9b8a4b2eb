//! First-order spectral data of a family at a point: eigenvalue
//! derivatives `∂p_i/∂θ^l` and the overlap tensor
//! `O^{(l)}_{jk} = ⟨∂_l w_j | w_k⟩`.

use crate::error::{Error, Result};
use crate::family::ParametricFamily;
use crate::hermitian::{derivative, CMatrix, CVector, C64, FD_STEP};

/// Eigenvalue gap below which the eigensolver route refuses to divide.
pub const RESOLVABLE_GAP: f64 = 1e-6;
/// Coupling below which an unresolved pair is treated as uncoupled.
pub const NEGLIGIBLE_COUPLING: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct TangentData {
    /// `p_i(θ)`.
    pub eigenvalues: Vec<f64>,
    /// Frame `|w_i(θ)⟩` as columns.
    pub frame: CMatrix,
    /// `dp[l][i] = ∂p_i/∂θ^l`.
    pub dp: Vec<Vec<f64>>,
    /// `overlaps[l][(j, k)] = ⟨∂_l w_j | w_k⟩`.
    pub overlaps: Vec<CMatrix>,
}

impl TangentData {
    pub fn nparams(&self) -> usize {
        self.dp.len()
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `∂_l |w_i⟩ = Σ_k conj(O^{(l)}_{ik}) |w_k⟩`.
    pub fn vector_derivative(&self, l: usize, i: usize) -> CVector {
        let o = &self.overlaps[l];
        let mut out = CVector::zeros(self.dim());
        for k in 0..self.dim() {
            out += self.frame.column(k) * o[(i, k)].conj();
        }
        out
    }

    /// `∂ρ/∂θ^l` rebuilt from the spectral derivatives.
    pub fn reconstruct_partial(&self, l: usize) -> CMatrix {
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        for i in 0..d {
            let w = self.frame.column(i).into_owned();
            let dw = self.vector_derivative(l, i);
            out += &w * w.adjoint() * C64::from(self.dp[l][i]);
            out += (&dw * w.adjoint() + &w * dw.adjoint()) * C64::from(self.eigenvalues[i]);
        }
        out
    }

    /// Directional data `Σ_l v^l (·)_l` as a one-parameter tangent.
    pub fn contract(&self, v: &[f64]) -> TangentData {
        let d = self.dim();
        let mut dp = vec![0.0; d];
        let mut o = CMatrix::zeros(d, d);
        for (l, &vl) in v.iter().enumerate() {
            for (acc, x) in dp.iter_mut().zip(&self.dp[l]) {
                *acc += vl * x;
            }
            o += self.overlaps[l].map(|z| z * vl);
        }
        TangentData {
            eigenvalues: self.eigenvalues.clone(),
            frame: self.frame.clone(),
            dp: vec![dp],
            overlaps: vec![o],
        }
    }

    /// Worst violation of `O_{jk} + conj(O_{kj}) = 0`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for o in &self.overlaps {
            for j in 0..d {
                for k in 0..d {
                    worst = worst.max((o[(j, k)] + o[(k, j)].conj()).norm());
                }
            }
        }
        worst
    }

    /// Worst `|Σ_i ∂p_i/∂θ^l|`.
    pub fn trace_defect(&self) -> f64 {
        self.dp
            .iter()
            .map(|row| row.iter().sum::<f64>().abs())
            .fold(0.0, f64::max)
    }
}

/// Spectral first-order data at `θ`.
///
/// With a spectral presentation the supplied eigenvalues and frame are
/// differenced directly, so the gauge the presentation carries is the gauge
/// the overlaps describe. Without one, the frame comes from the
/// eigensolver, `∂p_i = ⟨w_i|∂ρ|w_i⟩`, off-diagonal overlaps are
/// `⟨w_j|∂ρ|w_k⟩/(p_j − p_k)` and diagonal overlaps are zero.
pub fn tangent_data(family: &ParametricFamily, theta: &[f64]) -> Result<TangentData> {
    family.check_theta_margin(theta, FD_STEP)?;
    match family.spectral_fn() {
        Some(spectral) => {
            let base = spectral(theta);
            let mut dp = Vec::with_capacity(theta.len());
            let mut overlaps = Vec::with_capacity(theta.len());
            let mut point = theta.to_vec();
            for l in 0..theta.len() {
                let (dvals, dvecs): (Vec<f64>, CMatrix) = derivative(
                    |t| {
                        point[l] = t;
                        let sp = spectral(&point);
                        (sp.eigenvalues, sp.vectors)
                    },
                    theta[l],
                );
                point[l] = theta[l];
                dp.push(dvals);
                overlaps.push(dvecs.adjoint() * &base.vectors);
            }
            Ok(TangentData {
                eigenvalues: base.eigenvalues,
                frame: base.vectors,
                dp,
                overlaps,
            })
        }
        None => {
            let rho = family.evaluate(theta)?;
            let es = rho.eigen()?;
            let partials = family.tangents(theta)?;
            let p = es.values();
            let d = es.dim();
            let mut dp = Vec::with_capacity(partials.len());
            let mut overlaps = Vec::with_capacity(partials.len());
            for partial in &partials {
                let a = es.to_eigenbasis(partial);
                dp.push((0..d).map(|i| a[(i, i)].re).collect());
                let mut o = CMatrix::zeros(d, d);
                for j in 0..d {
                    for k in 0..d {
                        if j == k {
                            continue;
                        }
                        let gap = p[j] - p[k];
                        if gap.abs() < RESOLVABLE_GAP {
                            if a[(j, k)].norm() > NEGLIGIBLE_COUPLING {
                                return Err(Error::DegeneracyUnresolved { j, k, gap: gap.abs() });
                            }
                            continue;
                        }
                        o[(j, k)] = a[(j, k)] / gap;
                    }
                }
                overlaps.push(o);
            }
            Ok(TangentData {
                eigenvalues: p.to_vec(),
                frame: es.vectors().clone(),
                dp,
                overlaps,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::directional_family;
    use crate::hermitian::max_abs;
    use crate::random::rng_from_seed;
    use crate::registry::{bloch3, diagonal_simplex, pure_rotation, random_full_rank, random_pure, rot3_mixture};
    use rand::Rng;

    #[test]
    fn simplex_has_constant_frame() {
        let td = tangent_data(&diagonal_simplex(), &[0.0]).unwrap();
        assert!((td.dp[0][0] - 0.5).abs() < 1e-10);
        assert!((td.dp[0][1] + 0.5).abs() < 1e-10);
        assert!(max_abs(&td.overlaps[0]) < 1e-12);
    }

    #[test]
    fn bloch3_azimuthal_diagonal_overlap() {
        // ∂_φ v₁ = (−(i/2)cos(θ/2)e^{−iφ/2}, (i/2)sin(θ/2)e^{iφ/2}), so
        // ⟨∂_φ v₁|v₁⟩ = (i/2)(cos²(θ/2) − sin²(θ/2)) = (i/2)cos θ.
        let (r, th, ph) = (0.6, 0.9, 0.4);
        let td = tangent_data(&bloch3(), &[r, th, ph]).unwrap();
        let o = td.overlaps[2][(0, 0)];
        assert!(o.re.abs() < 1e-9);
        assert!((o.im - 0.5 * th.cos()).abs() < 1e-9);
    }

    #[test]
    fn pure_rotation_unit_overlap() {
        let td = tangent_data(&pure_rotation(), &[0.3]).unwrap();
        assert!((td.overlaps[0][(0, 1)].norm() - 1.0).abs() < 1e-9);
        assert!(td.overlaps[0][(0, 0)].norm() < 1e-9);
    }

    #[test]
    fn eigensolver_route_refuses_coupled_degeneracy() {
        // diag(0.5, 0.25, 0.25) pushed along a tangent that mixes the
        // degenerate pair.
        let degenerate =
            crate::family::ParametricFamily::new("deg", 3, vec![crate::family::ParamDomain::new(-0.1, 0.1)], |t| {
                let mut m = CMatrix::zeros(3, 3);
                m[(0, 0)] = C64::from(0.5);
                m[(1, 1)] = C64::from(0.25);
                m[(2, 2)] = C64::from(0.25);
                m[(1, 2)] = C64::from(t[0]);
                m[(2, 1)] = C64::from(t[0]);
                m
            });
        assert!(matches!(
            tangent_data(&degenerate, &[0.0]),
            Err(Error::DegeneracyUnresolved { .. })
        ));
    }

    #[test]
    fn invariants_on_registry_grid() {
        let fams = vec![
            (bloch3(), vec![0.6, 0.7, 0.2]),
            (rot3_mixture(0.1).unwrap(), vec![0.4]),
            (pure_rotation(), vec![0.3]),
            (diagonal_simplex(), vec![0.2]),
            (random_full_rank(4, 2, 9, 0.5, false).unwrap(), vec![0.3, -0.2]),
            (random_pure(3, 2, 5, false).unwrap(), vec![0.2, 0.9]),
        ];
        for (fam, theta) in fams {
            for k in 0..10 {
                let t: Vec<f64> = theta.iter().map(|x| x + 0.03 * k as f64).collect();
                for route in [fam.clone(), fam.clone().without_spectral()] {
                    let td = tangent_data(&route, &t).unwrap();
                    assert!(td.antisymmetry_defect() < 1e-7, "{}", fam.name());
                    assert!(td.trace_defect() < 1e-8);
                    for o in &td.overlaps {
                        for i in 0..td.dim() {
                            assert!(o[(i, i)].re.abs() < 1e-7);
                        }
                    }
                    for l in 0..td.nparams() {
                        let fd = route.partial(&t, l);
                        assert!(
                            max_abs(&(td.reconstruct_partial(l) - fd)) < 1e-6,
                            "{} route spectral={}",
                            fam.name(),
                            route.has_spectral()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn directional_reduction_matches_contraction() {
        let mut rng = rng_from_seed(99);
        let fam = bloch3();
        let rnd = random_full_rank(3, 3, 12, 0.4, false).unwrap();
        for trial in 0..50 {
            let (f, theta): (&crate::family::ParametricFamily, Vec<f64>) = if trial % 2 == 0 {
                (
                    &fam,
                    vec![
                        rng.random_range(0.2..0.8),
                        rng.random_range(0.2..2.5),
                        rng.random_range(-3.0..3.0),
                    ],
                )
            } else {
                (&rnd, (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            };
            let v: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let dir = directional_family(f, &theta, &v).unwrap();
            let scalar = tangent_data(&dir, &[0.0]).unwrap();
            let multi = tangent_data(f, &theta).unwrap().contract(&v);
            for i in 0..scalar.dim() {
                assert!((scalar.dp[0][i] - multi.dp[0][i]).abs() < 1e-6);
            }
            assert!(max_abs(&(&scalar.overlaps[0] - &multi.overlaps[0])) < 1e-6);
        }
    }

    #[test]
    fn bloch3_directional_sum_of_partials() {
        let theta = [0.5, 0.8, 0.1];
        let dir = directional_family(&bloch3(), &theta, &[1.0, 1.0, 0.0]).unwrap();
        let scalar = tangent_data(&dir, &[0.0]).unwrap();
        // p₁ = (1+r)/2 does not depend on θ.
        assert!((scalar.dp[0][0] - 0.5).abs() < 1e-6);
        assert!((scalar.dp[0][1] + 0.5).abs() < 1e-6);
    }

    #[test]
    fn contraction_of_unit_vector_selects_partial() {
        let td = tangent_data(&bloch3(), &[0.5, 0.8, 0.1]).unwrap();
        let c = td.contract(&[0.0, 0.0, 1.0]);
        assert_eq!(c.dp[0], td.dp[2]);
    }
}
