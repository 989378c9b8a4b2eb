//! Phase gauges of spectral presentations: rephasing, the one-parameter
//! gauge that removes the diagonal overlaps, and the multi-parameter
//! integrability test for such a gauge.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::ParametricFamily;
use crate::hermitian::FD_STEP;
use crate::tangent::tangent_data;

/// Largest real part tolerated in a diagonal overlap `⟨w_k'|w_k⟩`.
pub const IMAGINARY_TOL: f64 = 1e-6;
/// Verdict threshold of [`integrability_test`].
pub const INTEGRABILITY_TOL: f64 = 1e-6;
pub const DEFAULT_STEPS: usize = 512;

type PhaseFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
enum Phases {
    Closed(PhaseFn),
    Sampled {
        grid: Vec<f64>,
        values: Vec<Vec<f64>>,
        slopes: Vec<Vec<f64>>,
    },
}

/// Phases `α_k(θ)` applied as `|w_k⟩ ↦ exp(iα_k)|w_k⟩`.
#[derive(Clone)]
pub struct PhaseAssignment {
    dim: usize,
    phases: Phases,
}

impl fmt::Debug for PhaseAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.phases {
            Phases::Closed(_) => "closed",
            Phases::Sampled { .. } => "sampled",
        };
        f.debug_struct("PhaseAssignment")
            .field("dim", &self.dim)
            .field("kind", &kind)
            .finish()
    }
}

impl PhaseAssignment {
    pub fn zero(dim: usize) -> Self {
        Self::closed(dim, move |_| vec![0.0; dim])
    }

    pub fn closed(dim: usize, alpha: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        PhaseAssignment {
            dim,
            phases: Phases::Closed(Arc::new(alpha)),
        }
    }

    /// One-parameter phases known at ascending `grid` points, with
    /// derivatives `slopes`, interpolated by cubic Hermite segments.
    pub fn sampled(grid: Vec<f64>, values: Vec<Vec<f64>>, slopes: Vec<Vec<f64>>) -> Result<Self> {
        if grid.len() < 2 || values.len() != grid.len() || slopes.len() != grid.len() {
            return Err(Error::InvalidArgument(
                "sampled phases need at least two grid points and one value and slope row per point".into(),
            ));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("phase grid must be strictly ascending".into()));
        }
        let dim = values[0].len();
        if values.iter().chain(&slopes).any(|row| row.len() != dim) {
            return Err(Error::InvalidArgument("phase rows have inconsistent lengths".into()));
        }
        if values.iter().chain(&slopes).flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("phases must be finite".into()));
        }
        Ok(PhaseAssignment {
            dim,
            phases: Phases::Sampled { grid, values, slopes },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self.phases, Phases::Sampled { .. })
    }

    /// `α(θ)`. Sampled phases extend past the grid with the end segments.
    pub fn eval(&self, theta: &[f64]) -> Vec<f64> {
        match &self.phases {
            Phases::Closed(f) => f(theta),
            Phases::Sampled { grid, values, slopes } => {
                let t = theta[0];
                let i = grid.partition_point(|&g| g <= t).saturating_sub(1).min(grid.len() - 2);
                let h = grid[i + 1] - grid[i];
                let u = (t - grid[i]) / h;
                let (u2, u3) = (u * u, u * u * u);
                let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
                let h10 = u3 - 2.0 * u2 + u;
                let h01 = -2.0 * u3 + 3.0 * u2;
                let h11 = u3 - u2;
                (0..self.dim)
                    .map(|k| {
                        h00 * values[i][k]
                            + h10 * h * slopes[i][k]
                            + h01 * values[i + 1][k]
                            + h11 * h * slopes[i + 1][k]
                    })
                    .collect()
            }
        }
    }
}

/// The family with its presentation rephased by `pa`. `ρ(θ)` is unchanged.
pub fn apply_gauge(family: &ParametricFamily, pa: &PhaseAssignment) -> Result<ParametricFamily> {
    let spectral = family.spectral_fn().ok_or(Error::MissingGauge)?.clone();
    if pa.dim() != family.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            got: pa.dim(),
        });
    }
    if pa.is_sampled() && family.nparams() != 1 {
        return Err(Error::InvalidArgument(
            "sampled phases apply to one-parameter families only".into(),
        ));
    }
    let pa = pa.clone();
    Ok(family.clone().with_spectral(move |t| spectral(t).rephase(&pa.eval(t))))
}

/// Phases `α_k(θ) = ∫_{θ₀}^{θ} Im⟨w_k'|w_k⟩ dφ` on `steps` trapezoid
/// panels over `[θ₀, θ₁]`. Applied with [`apply_gauge`] they remove the
/// diagonal overlaps, so `C_Υ` of the result equals `C_L`.
pub fn minimizing_gauge_1p(
    family: &ParametricFamily,
    theta0: f64,
    theta1: f64,
    steps: usize,
) -> Result<PhaseAssignment> {
    if family.nparams() != 1 {
        return Err(Error::ParamCount {
            expected: 1,
            got: family.nparams(),
        });
    }
    if !family.has_spectral() {
        return Err(Error::MissingGauge);
    }
    if steps == 0 || !(theta1 > theta0) {
        return Err(Error::InvalidArgument(format!(
            "need theta0 < theta1 and steps >= 1 (got [{theta0}, {theta1}], {steps})"
        )));
    }
    family.check_theta_margin(&[theta0], FD_STEP)?;
    family.check_theta_margin(&[theta1], FD_STEP)?;
    let h = (theta1 - theta0) / steps as f64;
    let grid: Vec<f64> = (0..=steps)
        .map(|n| if n == steps { theta1 } else { theta0 + h * n as f64 })
        .collect();
    let slopes = grid
        .par_iter()
        .map(|&t| {
            let td = tangent_data(family, &[t])?;
            let o = &td.overlaps[0];
            (0..td.dim())
                .map(|k| {
                    let z = o[(k, k)];
                    if z.re.abs() > IMAGINARY_TOL {
                        Err(Error::NonImaginaryOverlap(z.re))
                    } else {
                        Ok(z.im)
                    }
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let d = family.dim();
    let mut values = vec![vec![0.0; d]];
    for n in 1..grid.len() {
        let dt = grid[n] - grid[n - 1];
        let prev = &values[n - 1];
        let next = (0..d)
            .map(|k| prev[k] + 0.5 * dt * (slopes[n - 1][k] + slopes[n][k]))
            .collect();
        values.push(next);
    }
    PhaseAssignment::sampled(grid, values, slopes)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrabilityEntry {
    /// Eigenvector index.
    pub j: usize,
    pub l: usize,
    pub k: usize,
    /// `Im⟨∂_l w_j|∂_k w_j⟩`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrabilityReport {
    pub entries: Vec<IntegrabilityEntry>,
    pub max_abs: f64,
    pub tolerance: f64,
    /// A gauge with vanishing diagonal overlaps in every direction exists
    /// near `θ`.
    pub pass: bool,
}

/// `Im⟨∂_l w_j|∂_k w_j⟩` for every `j` and `l < k`. The quantity does not
/// depend on the gauge; the test passes when all vanish.
pub fn integrability_test(family: &ParametricFamily, theta: &[f64]) -> Result<IntegrabilityReport> {
    if !family.has_spectral() {
        return Err(Error::MissingGauge);
    }
    let np = family.nparams();
    let mut entries = Vec::new();
    if np > 1 {
        let td = tangent_data(family, theta)?;
        let d = td.dim();
        for j in 0..d {
            for l in 0..np {
                for k in (l + 1)..np {
                    let value: f64 = (0..d)
                        .map(|m| (td.overlaps[l][(j, m)] * td.overlaps[k][(j, m)].conj()).im)
                        .sum();
                    entries.push(IntegrabilityEntry { j, l, k, value });
                }
            }
        }
    }
    let max_abs = entries.iter().map(|e| e.value.abs()).fold(0.0, f64::max);
    Ok(IntegrabilityReport {
        entries,
        max_abs,
        tolerance: INTEGRABILITY_TOL,
        pass: max_abs <= INTEGRABILITY_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::directional_family;
    use crate::hermitian::max_abs;
    use crate::metrics::{c_l_information, c_upsilon_states};
    use crate::random::rng_from_seed;
    use crate::registry::{bloch3, random_full_rank, random_pure};
    use rand::Rng;

    fn bloch_phi(r: f64, th: f64) -> ParametricFamily {
        bloch3().restrict(&[r, th, 0.0], 2).unwrap()
    }

    #[test]
    fn zero_gauge_is_identity() {
        let fam = bloch3();
        let g = apply_gauge(&fam, &PhaseAssignment::zero(2)).unwrap();
        let t = [0.4, 0.5, 0.6];
        assert_eq!(g.spectral_at(&t), fam.spectral_at(&t));
    }

    #[test]
    fn shifted_bloch_gauge_reproduces_second_matrix() {
        let g = apply_gauge(&bloch3(), &PhaseAssignment::closed(2, |t| vec![-t[2] / 2.0; 2])).unwrap();
        let (r, th) = (0.7, 1.2);
        let cu = c_upsilon_states(&g, &[r, th, 0.5]).unwrap();
        assert!((cu.get(2, 2) - (2.0 + 2.0 * r * th.cos())).abs() < 1e-7);
        let rho = g.evaluate(&[r, th, 0.5]).unwrap();
        assert!(max_abs(&(g.spectral_at(&[r, th, 0.5]).unwrap().reconstruct() - rho.matrix())) < 1e-10);
    }

    #[test]
    fn cl_is_gauge_invariant() {
        let fam = random_full_rank(3, 2, 21, 0.5, false).unwrap();
        let theta = [0.2, 0.4];
        let base = c_l_information(&fam, &theta).unwrap();
        let pa = PhaseAssignment::closed(3, |t| vec![3.0 * t[0], -t[1] * t[0], (2.0 * t[1]).sin()]);
        let gauged = apply_gauge(&fam, &pa).unwrap();
        assert!(c_l_information(&gauged, &theta).unwrap().max_abs_diff(&base) < 1e-9);
    }

    #[test]
    fn minimizing_gauge_on_bloch_phi() {
        let (r, th) = (0.5, 0.8);
        let fam = bloch_phi(r, th);
        let before = c_upsilon_states(&fam, &[0.3]).unwrap().scalar();
        assert!((before - 1.0).abs() < 1e-7);
        let pa = minimizing_gauge_1p(&fam, -1.0, 1.0, DEFAULT_STEPS).unwrap();
        let g = apply_gauge(&fam, &pa).unwrap();
        for t in [-0.9, -0.3, 0.0, 0.3, 0.77] {
            let cu = c_upsilon_states(&g, &[t]).unwrap().scalar();
            assert!((cu - th.sin().powi(2)).abs() < 1e-6, "{t}: {cu}");
        }
    }

    #[test]
    fn minimal_gauge_gives_zero_phases() {
        // Real eigenvectors already have vanishing diagonal overlaps.
        let fam = random_full_rank(3, 1, 4, 0.3, true).unwrap();
        let pa = minimizing_gauge_1p(&fam, 0.0, 1.0, 64).unwrap();
        assert!(pa.eval(&[1.0]).iter().all(|a| a.abs() < 1e-9));
    }

    #[test]
    fn diagonal_overlaps_vanish_on_grid() {
        let fam = random_full_rank(3, 2, 7, 0.5, false).unwrap();
        let dir = directional_family(&fam, &[0.1, 0.2], &[1.0, 0.7]).unwrap();
        let pa = minimizing_gauge_1p(&dir, -0.5, 0.5, 128).unwrap();
        let g = apply_gauge(&dir, &pa).unwrap();
        for n in 0..=128 {
            let t = -0.5 + n as f64 / 128.0;
            let td = tangent_data(&g, &[t]).unwrap();
            let s: f64 = (0..3)
                .map(|k| td.eigenvalues[k] * td.overlaps[0][(k, k)].norm_sqr())
                .sum();
            assert!(s < 1e-10, "{t}: {s}");
        }
    }

    #[test]
    fn trapezoid_converges_quadratically() {
        let fam = random_full_rank(3, 2, 7, 0.5, false).unwrap();
        let dir = directional_family(&fam, &[0.1, 0.2], &[1.0, 0.7]).unwrap();
        let at = |n| minimizing_gauge_1p(&dir, 0.0, 1.0, n).unwrap().eval(&[1.0])[0];
        let (a, b, c) = (at(16), at(32), at(64));
        let ratio = (a - b).abs() / (b - c).abs();
        assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn random_gauges_never_beat_cl() {
        let fam = random_full_rank(3, 1, 30, 0.5, false).unwrap();
        let cl = c_l_information(&fam, &[0.4]).unwrap().scalar();
        let mut rng = rng_from_seed(1);
        for _ in 0..50 {
            let coef: Vec<(f64, f64, f64)> = (0..3)
                .map(|_| {
                    (
                        rng.random_range(-2.0..2.0),
                        rng.random_range(-3.0..3.0),
                        rng.random_range(0.0..6.0),
                    )
                })
                .collect();
            let pa = PhaseAssignment::closed(3, move |t| {
                coef.iter().map(|(a, b, c)| a * (b * t[0] + c).sin()).collect()
            });
            let cu = c_upsilon_states(&apply_gauge(&fam, &pa).unwrap(), &[0.4])
                .unwrap()
                .scalar();
            assert!(cu >= cl - 1e-9);
        }
    }

    #[test]
    fn bloch_is_not_integrable() {
        let th = 0.9;
        let rep = integrability_test(&bloch3(), &[0.5, th, 0.3]).unwrap();
        assert!(!rep.pass);
        let e = rep.entries.iter().find(|e| e.j == 0 && e.l == 1 && e.k == 2).unwrap();
        assert!((e.value - 0.5 * (th / 2.0).sin() * (th / 2.0).cos()).abs() < 1e-6);
    }

    #[test]
    fn real_and_one_parameter_families_pass() {
        assert!(
            integrability_test(&random_full_rank(3, 2, 2, 0.2, true).unwrap(), &[0.3, 0.1])
                .unwrap()
                .pass
        );
        assert!(
            integrability_test(&random_pure(3, 3, 2, true).unwrap(), &[0.3, 0.1, 0.5])
                .unwrap()
                .pass
        );
        let one = integrability_test(&bloch_phi(0.5, 0.5), &[0.2]).unwrap();
        assert!(one.pass && one.entries.is_empty());
    }

    #[test]
    fn sampled_validation() {
        assert!(PhaseAssignment::sampled(vec![0.0], vec![vec![0.0]], vec![vec![0.0]]).is_err());
        assert!(PhaseAssignment::sampled(vec![1.0, 0.0], vec![vec![0.0]; 2], vec![vec![0.0]; 2]).is_err());
        let pa =
            PhaseAssignment::sampled(vec![0.0, 1.0], vec![vec![0.0], vec![1.0]], vec![vec![1.0], vec![1.0]]).unwrap();
        assert!((pa.eval(&[0.25])[0] - 0.25).abs() < 1e-15);
        assert!(matches!(
            minimizing_gauge_1p(&bloch3(), 0.0, 1.0, 8),
            Err(Error::ParamCount { .. })
        ));
    }
}
