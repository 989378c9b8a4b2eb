//! Measurement simulation: the SLD-optimal measurement, the condition for
//! it to saturate the quantum bound, multinomial sampling, maximum
//! likelihood estimation and Cramér–Rao Monte Carlo experiments.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::ParametricFamily;
use crate::hermitian::{eig_hermitian, outer, sld_solve, sqrt_psd, trace, CMatrix, C64, CLUSTER_GAP, FD_STEP};
use crate::metrics::{born_probabilities, classical_fisher, sld_information, Povm};
use crate::random::{rng_from_seed, rng_stream};

pub const MLE_GRID: usize = 256;
pub const MLE_PASSES: usize = 3;
pub const MLE_TERNARY_ITERS: usize = 40;
/// Minimum spread of the log-likelihood over the grid.
pub const FLAT_TOL: f64 = 1e-12;
/// Half-width of the MLE search window in units of the Cramér–Rao
/// standard deviation.
pub const SEARCH_HALF_WIDTH: f64 = 12.0;

fn one_parameter(family: &ParametricFamily) -> Result<()> {
    if family.nparams() != 1 {
        return Err(Error::ParamCount {
            expected: 1,
            got: family.nparams(),
        });
    }
    Ok(())
}

/// Projective measurement onto the eigenspaces of the SLD at `θ`.
pub fn sld_optimal_povm(family: &ParametricFamily, theta: f64) -> Result<Povm> {
    one_parameter(family)?;
    let rho = family.evaluate(&[theta])?;
    let drho = family.tangents(&[theta])?.remove(0);
    let lambda = sld_solve(&rho, &drho)?;
    let es = eig_hermitian(&lambda)?;
    let elements = es
        .clusters(CLUSTER_GAP)
        .into_iter()
        .map(|range| {
            let mut proj = CMatrix::zeros(es.dim(), es.dim());
            for i in range {
                let v = es.vector(i);
                proj += outer(&v, &v);
            }
            proj
        })
        .collect();
    Povm::new(elements)
}

/// `max_x min_ξ ‖M_x^{1/2} λ ρ^{1/2} − ξ M_x^{1/2} ρ^{1/2}‖` over real `ξ`,
/// Frobenius norm. Zero exactly when the measurement attains the SLD
/// information.
pub fn equality_condition_residual(family: &ParametricFamily, theta: f64, povm: &Povm) -> Result<f64> {
    one_parameter(family)?;
    let rho = family.evaluate(&[theta])?;
    if povm.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: povm.dim(),
        });
    }
    let drho = family.tangents(&[theta])?.remove(0);
    let lambda = sld_solve(&rho, &drho)?;
    let root = sqrt_psd(rho.matrix())?;
    let lam_root = &lambda * &root;
    let mut worst: f64 = 0.0;
    for m in povm.elements() {
        let mr = sqrt_psd(m)?;
        let x = &mr * &lam_root;
        let y = &mr * &root;
        let yy = y.norm_squared();
        let xi = if yy > 0.0 {
            trace(&(y.adjoint() * &x)).re / yy
        } else {
            0.0
        };
        worst = worst.max((x - y * C64::from(xi)).norm());
    }
    Ok(worst)
}

/// Multinomial draw of `n` outcomes from `probs` by sequential binomials.
pub fn sample_counts<R: Rng>(rng: &mut R, probs: &[f64], n: u64) -> Vec<u64> {
    let mut counts = vec![0; probs.len()];
    let mut left = n;
    let mut mass: f64 = probs.iter().sum();
    for (m, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if m + 1 == probs.len() {
            counts[m] = left;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(left, q).expect("probability in [0, 1]").sample(rng);
        counts[m] = k;
        left -= k;
        mass -= p;
    }
    counts
}

/// Outcome counts of `n` independent measurements of `ρ(θ)`.
pub fn sample_outcomes(
    family: &ParametricFamily,
    theta_true: &[f64],
    povm: &Povm,
    n: u64,
    seed: u64,
) -> Result<Vec<u64>> {
    let probs = born_probabilities(&family.evaluate(theta_true)?, povm)?;
    Ok(sample_counts(&mut rng_from_seed(seed), &probs, n))
}

fn raw_probabilities(rho: &CMatrix, povm: &Povm) -> Vec<f64> {
    povm.elements()
        .iter()
        .map(|m| {
            rho.iter()
                .zip(m.transpose().iter())
                .map(|(a, b)| (a * b).re)
                .sum::<f64>()
                .max(0.0)
        })
        .collect()
}

fn log_likelihood(probs: &[f64], counts: &[u64]) -> f64 {
    let mut s = 0.0;
    for (&p, &c) in probs.iter().zip(counts) {
        if c > 0 {
            s += c as f64 * p.ln();
        }
    }
    if s.is_nan() {
        f64::NEG_INFINITY
    } else {
        s
    }
}

/// Grid-plus-ternary maximum likelihood for a one-parameter family, with
/// the outcome probabilities on the grid computed once.
#[derive(Debug, Clone)]
pub struct MleSolver {
    family: ParametricFamily,
    povm: Povm,
    lo: f64,
    hi: f64,
    grid: Vec<f64>,
    grid_probs: Vec<Vec<f64>>,
}

impl MleSolver {
    pub fn new(family: &ParametricFamily, povm: &Povm, interval: (f64, f64)) -> Result<Self> {
        one_parameter(family)?;
        let (lo, hi) = interval;
        if !(hi > lo) {
            return Err(Error::InvalidArgument(format!("empty search interval [{lo}, {hi}]")));
        }
        family.check_theta(&[lo])?;
        family.check_theta(&[hi])?;
        if povm.dim() != family.dim() {
            return Err(Error::DimensionMismatch {
                expected: family.dim(),
                got: povm.dim(),
            });
        }
        let step = (hi - lo) / (MLE_GRID - 1) as f64;
        let grid: Vec<f64> = (0..MLE_GRID)
            .map(|i| if i + 1 == MLE_GRID { hi } else { lo + step * i as f64 })
            .collect();
        let grid_probs = grid
            .iter()
            .map(|&t| raw_probabilities(&family.matrix_at(&[t]), povm))
            .collect();
        Ok(MleSolver {
            family: family.clone(),
            povm: povm.clone(),
            lo,
            hi,
            grid,
            grid_probs,
        })
    }

    fn ll(&self, t: f64, counts: &[u64]) -> f64 {
        log_likelihood(&raw_probabilities(&self.family.matrix_at(&[t]), &self.povm), counts)
    }

    pub fn solve(&self, counts: &[u64]) -> Result<f64> {
        if counts.len() != self.povm.len() {
            return Err(Error::DimensionMismatch {
                expected: self.povm.len(),
                got: counts.len(),
            });
        }
        let mid = 0.5 * (self.lo + self.hi);
        let lls: Vec<f64> = self.grid_probs.iter().map(|p| log_likelihood(p, counts)).collect();
        let finite = lls.iter().copied().filter(|x| x.is_finite());
        let (min, max) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        if !max.is_finite() || (max - min < FLAT_TOL && lls.iter().all(|x| x.is_finite())) {
            return Err(Error::FlatLikelihood);
        }
        let better =
            |(t1, l1): (f64, f64), (t2, l2): (f64, f64)| l1 > l2 || (l1 == l2 && (t1 - mid).abs() < (t2 - mid).abs());
        let mut best_i = 0;
        for i in 1..self.grid.len() {
            if better((self.grid[i], lls[i]), (self.grid[best_i], lls[best_i])) {
                best_i = i;
            }
        }
        let mut best = (self.grid[best_i], lls[best_i]);
        let mut a = self.grid[best_i.saturating_sub(1)];
        let mut b = self.grid[(best_i + 1).min(self.grid.len() - 1)];
        for _ in 0..MLE_PASSES {
            let (mut l, mut r) = (a, b);
            for _ in 0..MLE_TERNARY_ITERS {
                let m1 = l + (r - l) / 3.0;
                let m2 = r - (r - l) / 3.0;
                let (f1, f2) = (self.ll(m1, counts), self.ll(m2, counts));
                if f1 < f2 {
                    l = m1;
                } else if f1 > f2 {
                    r = m2;
                } else {
                    l = m1;
                    r = m2;
                }
            }
            let x = 0.5 * (l + r);
            let cand = (x, self.ll(x, counts));
            if cand.1 > best.1 {
                best = cand;
            }
            let half = 4.0 * (r - l).max(f64::EPSILON * best.0.abs().max(1.0));
            a = (best.0 - half).max(self.lo);
            b = (best.0 + half).min(self.hi);
        }
        Ok(best.0)
    }
}

/// `argmax_θ Σ_m counts_m ln p_m(θ)` over `interval`.
pub fn mle_1p(family: &ParametricFamily, povm: &Povm, counts: &[u64], interval: (f64, f64)) -> Result<f64> {
    MleSolver::new(family, povm, interval)?.solve(counts)
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimationReport {
    pub family: String,
    pub n_samples: u64,
    pub reps: usize,
    pub seed: u64,
    pub theta_true: f64,
    pub search_interval: (f64, f64),
    pub estimates: Vec<f64>,
    pub mean: f64,
    pub bias: f64,
    pub empirical_variance: f64,
    pub mse: f64,
    pub fisher: f64,
    pub sld_bound: f64,
    /// `1/(N·F)`
    pub cr_rhs: f64,
    /// `1/(N·H_SLD)`
    pub sld_rhs: f64,
    pub variance_ratio: f64,
    /// Estimates that landed on the search interval boundary.
    pub boundary_hits: usize,
    /// Whether the sample size, replication count and interior estimates
    /// make the variance meaningful.
    pub variance_reliable: bool,
}

/// Repeat `reps` times: draw `n` outcomes at `θ_true` and estimate `θ` by
/// maximum likelihood. Replication `i` uses random stream `i` of `seed`.
pub fn cramer_rao_experiment(
    family: &ParametricFamily,
    theta_true: f64,
    povm: &Povm,
    n: u64,
    reps: usize,
    seed: u64,
) -> Result<EstimationReport> {
    one_parameter(family)?;
    if n == 0 || reps == 0 {
        return Err(Error::InvalidArgument(
            "need at least one sample and one replication".into(),
        ));
    }
    let fisher = classical_fisher(family, &[theta_true], povm)?.scalar();
    let sld_bound = sld_information(family, &[theta_true])?.scalar();
    if !(fisher > 0.0) {
        return Err(Error::InvalidArgument(
            "measurement carries no Fisher information at theta_true".into(),
        ));
    }
    let half = SEARCH_HALF_WIDTH / (n as f64 * fisher).sqrt();
    let dom = family.domain()[0];
    let margin = FD_STEP * (dom.hi - dom.lo).min(1.0);
    let interval = (
        (theta_true - half).max(dom.lo + margin),
        (theta_true + half).min(dom.hi - margin),
    );
    let solver = MleSolver::new(family, povm, interval)?;
    let probs = born_probabilities(&family.evaluate(&[theta_true])?, povm)?;
    let estimates = (0..reps)
        .into_par_iter()
        .map(|i| {
            let counts = sample_counts(&mut rng_stream(seed, i as u64), &probs, n);
            solver.solve(&counts)
        })
        .collect::<Result<Vec<f64>>>()?;
    let k = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / k;
    let empirical_variance = if estimates.len() > 1 {
        estimates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    let mse = estimates.iter().map(|x| (x - theta_true).powi(2)).sum::<f64>() / k;
    let boundary_hits = estimates
        .iter()
        .filter(|&&x| x <= interval.0 || x >= interval.1)
        .count();
    let cr_rhs = 1.0 / (n as f64 * fisher);
    Ok(EstimationReport {
        family: family.name().to_string(),
        n_samples: n,
        reps,
        seed,
        theta_true,
        search_interval: interval,
        mean,
        bias: mean - theta_true,
        empirical_variance,
        mse,
        fisher,
        sld_bound,
        cr_rhs,
        sld_rhs: 1.0 / (n as f64 * sld_bound),
        variance_ratio: empirical_variance / cr_rhs,
        boundary_hits,
        variance_reliable: n >= 100 && reps >= 30 && boundary_hits == 0,
        estimates,
    })
}
