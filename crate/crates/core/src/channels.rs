//! Quantum channels in Kraus form, canonical Kraus operators of a channel
//! family, the channel-level SM bound and monotonicity experiments.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::{ParamDomain, ParametricFamily, SpectralPresentation};
use crate::hermitian::{eig_hermitian, max_abs, trace, CMatrix, C64, CLUSTER_GAP, FD_STEP, RANK_TOL};
use crate::metrics::{MetricKind, MetricMatrix};
use crate::random::{random_isometry, rng_from_seed};
use crate::state::DensityMatrix;

/// Allowed `‖Σ E_k†E_k − I‖_max`.
pub const TP_TOL: f64 = 1e-9;
/// Allowed off-diagonal Gram residual of canonical Kraus operators.
pub const CANONICAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
enum ChannelKind {
    General,
    Unitary,
    Depolarizing(f64),
}

/// Trace-preserving completely positive map `ρ ↦ Σ_k E_k ρ E_k†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    operators: Vec<CMatrix>,
    kind: ChannelKind,
}

fn tp_residual_of(dim: usize, ops: &[CMatrix]) -> f64 {
    let mut sum = CMatrix::zeros(dim, dim);
    for e in ops {
        sum += e.adjoint() * e;
    }
    max_abs(&(sum - CMatrix::identity(dim, dim)))
}

impl KrausChannel {
    pub fn identity(d: usize) -> Self {
        KrausChannel {
            dim: d,
            operators: vec![CMatrix::identity(d, d)],
            kind: ChannelKind::Unitary,
        }
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::from_operators(vec![u])
    }

    /// Checks square equal shapes and trace preservation. A single
    /// operator is recognised as a unitary channel.
    pub fn from_operators(operators: Vec<CMatrix>) -> Result<Self> {
        let dim = operators
            .first()
            .ok_or_else(|| Error::InvalidArgument("a channel needs at least one Kraus operator".into()))?
            .nrows();
        for e in &operators {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: if e.nrows() != dim { e.nrows() } else { e.ncols() },
                });
            }
        }
        let residual = tp_residual_of(dim, &operators);
        if !(residual <= TP_TOL) {
            return Err(Error::NotTracePreserving(residual));
        }
        let kind = if operators.len() == 1 {
            ChannelKind::Unitary
        } else {
            ChannelKind::General
        };
        Ok(KrausChannel { dim, operators, kind })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn tp_residual(&self) -> f64 {
        tp_residual_of(self.dim, &self.operators)
    }

    fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for e in &self.operators {
            out += e * m * e.adjoint();
        }
        out
    }

    /// Image of a spectral presentation when the channel maps one to
    /// another without re-diagonalising.
    fn map_presentation(&self, sp: &SpectralPresentation) -> Option<SpectralPresentation> {
        match self.kind {
            ChannelKind::Unitary => Some(SpectralPresentation::new(
                sp.eigenvalues.clone(),
                &self.operators[0] * &sp.vectors,
            )),
            ChannelKind::Depolarizing(r) => {
                let floor = (1.0 - r) / self.dim as f64;
                Some(SpectralPresentation::new(
                    sp.eigenvalues.iter().map(|p| r * p + floor).collect(),
                    sp.vectors.clone(),
                ))
            }
            ChannelKind::General => None,
        }
    }
}

/// Generalised Pauli `X^a Z^b` on `C^d`.
fn weyl(d: usize, a: usize, b: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for j in 0..d {
        let phase = 2.0 * std::f64::consts::PI * (b * j) as f64 / d as f64;
        m[((j + a) % d, j)] = C64::from_polar(1.0, phase);
    }
    m
}

/// `ρ ↦ rρ + (1−r)I/d` as a weighted twirl over the generalised Paulis,
/// for `−1/(d²−1) ≤ r ≤ 1`.
pub fn depolarizing_channel(d: usize, r: f64) -> Result<KrausChannel> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "depolarizing channel needs d >= 2, got {d}"
        )));
    }
    let d2 = (d * d) as f64;
    let lo = -1.0 / (d2 - 1.0);
    if !(r >= lo - 1e-15 && r <= 1.0) {
        return Err(Error::ParamOutOfDomain {
            name: "r".into(),
            value: r,
        });
    }
    let rest = (1.0 - r) / d2;
    let mut operators = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let w = if a == 0 && b == 0 { r + rest } else { rest };
            if w > 0.0 {
                operators.push(weyl(d, a, b).map(|z| z * w.sqrt()));
            }
        }
    }
    Ok(KrausChannel {
        dim: d,
        operators,
        kind: if r == 1.0 {
            ChannelKind::Unitary
        } else {
            ChannelKind::Depolarizing(r)
        },
    })
}

/// Kraus operators taken as the `d×d` blocks of a random `nd×d` isometry.
pub fn random_tpcp(d: usize, kraus_count: usize, seed: u64) -> Result<KrausChannel> {
    if kraus_count == 0 || d == 0 {
        return Err(Error::InvalidArgument(
            "random channel needs d >= 1 and at least one Kraus operator".into(),
        ));
    }
    let mut rng = rng_from_seed(seed);
    let v = random_isometry(&mut rng, kraus_count * d, d);
    let operators = (0..kraus_count).map(|k| v.rows(k * d, d).into_owned()).collect();
    KrausChannel::from_operators(operators)
}

pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != ch.dim {
        return Err(Error::DimensionMismatch {
            expected: ch.dim,
            got: rho.dim(),
        });
    }
    DensityMatrix::new(ch.apply_matrix(rho.matrix()))
}

/// `θ ↦ E(ρ(θ))`. Unitary and depolarizing channels carry the family's
/// presentation across; other channels leave the image to the eigensolver.
pub fn pushforward_family(ch: &KrausChannel, family: &ParametricFamily) -> Result<ParametricFamily> {
    if family.dim() != ch.dim {
        return Err(Error::DimensionMismatch {
            expected: ch.dim,
            got: family.dim(),
        });
    }
    let names: Vec<&str> = family.param_names().iter().map(|s| s.as_str()).collect();
    let eval = family.eval_fn().clone();
    let c1 = ch.clone();
    let pushed = ParametricFamily::new(
        format!("E∘{}", family.name()),
        family.dim(),
        family.domain().to_vec(),
        move |t| c1.apply_matrix(&eval(t)),
    )
    .with_param_names(&names);
    let spectral = match (family.spectral_fn(), ch.kind) {
        (Some(s), ChannelKind::Unitary | ChannelKind::Depolarizing(_)) => {
            let s = s.clone();
            let c2 = ch.clone();
            Some(
                Arc::new(move |t: &[f64]| c2.map_presentation(&s(t)).expect("presentation-preserving channel"))
                    as crate::family::SpectralFn,
            )
        }
        _ => None,
    };
    Ok(pushed.with_spectral_fn(spectral))
}

/// One-parameter family of channels `θ ↦ E(θ)`.
#[derive(Clone)]
pub struct ChannelFamily {
    name: String,
    dim: usize,
    domain: ParamDomain,
    eval: Arc<dyn Fn(f64) -> Result<KrausChannel> + Send + Sync>,
}

impl std::fmt::Debug for ChannelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChannelFamily")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl ChannelFamily {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        domain: ParamDomain,
        eval: impl Fn(f64) -> Result<KrausChannel> + Send + Sync + 'static,
    ) -> Self {
        ChannelFamily {
            name: name.into(),
            dim,
            domain,
            eval: Arc::new(eval),
        }
    }

    /// `θ ↦ U(θ)·U(θ)†`.
    pub fn unitary(
        name: impl Into<String>,
        dim: usize,
        domain: ParamDomain,
        u: impl Fn(f64) -> CMatrix + Send + Sync + 'static,
    ) -> Self {
        Self::new(name, dim, domain, move |t| KrausChannel::unitary(u(t)))
    }

    /// Depolarizing channels parameterised by `r ∈ (−1/(d²−1), 1)`.
    pub fn depolarizing(d: usize) -> Self {
        let d2 = (d * d) as f64;
        Self::new("depolarizing", d, ParamDomain::new(-1.0 / (d2 - 1.0), 1.0), move |r| {
            depolarizing_channel(d, r)
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> ParamDomain {
        self.domain
    }

    pub fn evaluate(&self, theta: f64) -> Result<KrausChannel> {
        if !self.domain.contains(theta) {
            return Err(Error::ParamOutOfDomain {
                name: "theta".into(),
                value: theta,
            });
        }
        self.raw(theta)
    }

    fn raw(&self, theta: f64) -> Result<KrausChannel> {
        let ch = (self.eval)(theta)?;
        if ch.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: ch.dim,
            });
        }
        Ok(ch)
    }
}

fn gram_element(a: &CMatrix, rho0: &CMatrix, b: &CMatrix) -> C64 {
    trace(&(a * rho0 * b.adjoint()))
}

/// Canonical operators with their weights `p_k`, in decreasing order.
fn canonical_from_channel(ch: &KrausChannel, rho0: &DensityMatrix) -> Result<(Vec<CMatrix>, Vec<f64>)> {
    if rho0.dim() != ch.dim {
        return Err(Error::DimensionMismatch {
            expected: ch.dim,
            got: rho0.dim(),
        });
    }
    let n = ch.len();
    let r = rho0.matrix();
    let ops = ch.operators();
    let mut g = CMatrix::zeros(n, n);
    for j in 0..n {
        for k in j..n {
            let v = gram_element(&ops[j], r, &ops[k]);
            g[(j, k)] = v;
            g[(k, j)] = v.conj();
        }
    }
    let es = eig_hermitian(&g)?;
    let pmin = es.values().iter().copied().fold(f64::INFINITY, f64::min);
    if pmin < -1e-10 {
        return Err(Error::GramNotPsd(pmin));
    }
    let u = es.vectors();
    let mut out = Vec::new();
    let mut weights = Vec::new();
    for (k, &p) in es.values().iter().enumerate() {
        if p < RANK_TOL {
            continue;
        }
        let mut ups = CMatrix::zeros(ch.dim, ch.dim);
        for (j, e) in ops.iter().enumerate() {
            ups += e * u[(j, k)].conj();
        }
        out.push(ups);
        weights.push(p);
    }
    let residual = canonical_residual(&out, rho0);
    if residual > CANONICAL_TOL {
        return Err(Error::GramNotPsd(residual));
    }
    Ok((out, weights))
}

/// Index ranges of equal weights (the canonical set is only fixed up to a
/// unitary inside each range).
fn weight_clusters(p: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=p.len() {
        if k == p.len() || p[k - 1] - p[k] > CLUSTER_GAP * p[k - 1].max(1.0) {
            out.push(start..k);
            start = k;
        }
    }
    out
}

/// Largest off-diagonal `|tr{Υ_j ρ₀ Υ_k†}|`.
pub fn canonical_residual(ops: &[CMatrix], rho0: &DensityMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..ops.len() {
        for k in 0..ops.len() {
            if j != k {
                worst = worst.max(gram_element(&ops[j], rho0.matrix(), &ops[k]).norm());
            }
        }
    }
    worst
}

/// Canonical Kraus operators of `E(θ)` relative to `ρ₀`: the Kraus set with
/// `tr{Υ_j ρ₀ Υ_k†} = δ_jk p_k`, ordered by decreasing `p_k`, with branches
/// of zero weight dropped.
pub fn canonical_kraus(chf: &ChannelFamily, theta: f64, rho0: &DensityMatrix) -> Result<Vec<CMatrix>> {
    Ok(canonical_from_channel(&chf.evaluate(theta)?, rho0)?.0)
}

/// Canonical Kraus operators at `θ` aligned with `reference`, a canonical
/// set at a nearby point. Each operator is rephased so that
/// `tr{Υ_k(θ) ρ₀ Υ_k^ref†}` is real and non-negative; inside a block of
/// equal weights the operators are rotated so that the block of overlaps
/// is positive semidefinite, which reduces to the phase rule for blocks of
/// size one.
pub fn canonical_kraus_aligned(
    chf: &ChannelFamily,
    theta: f64,
    rho0: &DensityMatrix,
    reference: &[CMatrix],
) -> Result<Vec<CMatrix>> {
    let (ops, weights) = canonical_from_channel(&chf.raw(theta)?, rho0)?;
    if ops.len() != reference.len() {
        return Err(Error::CanonicalKrausJump);
    }
    let r = rho0.matrix();
    let n = ops.len();
    let overlap = CMatrix::from_fn(n, n, |a, b| gram_element(&ops[a], r, &reference[b]));
    let clusters = weight_clusters(&weights);
    // Each reference operator goes to the block holding most of its overlap.
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); clusters.len()];
    for b in 0..n {
        let (best, mass) = clusters
            .iter()
            .enumerate()
            .map(|(c, range)| (c, range.clone().map(|a| overlap[(a, b)].norm_sqr()).sum::<f64>()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .ok_or(Error::CanonicalKrausJump)?;
        if mass.sqrt() < RANK_TOL {
            return Err(Error::CanonicalKrausJump);
        }
        members[best].push(b);
    }
    let mut out = vec![CMatrix::zeros(chf.dim, chf.dim); n];
    for (range, refs) in clusters.iter().zip(&members) {
        if refs.len() != range.len() {
            return Err(Error::CanonicalKrausJump);
        }
        let m = CMatrix::from_fn(range.len(), refs.len(), |a, b| overlap[(range.start + a, refs[b])]);
        let svd = m.svd(true, true);
        let (v, yt) = (svd.u.ok_or(Error::NoConvergence)?, svd.v_t.ok_or(Error::NoConvergence)?);
        // W with (Wᵀ M) = Y Σ Y† ⪰ 0.
        let w = v.map(|z| z.conj()) * yt.map(|z| z.conj());
        for (bi, &b) in refs.iter().enumerate() {
            let mut op = CMatrix::zeros(chf.dim, chf.dim);
            for ai in 0..range.len() {
                op += &ops[range.start + ai] * w[(ai, bi)];
            }
            out[b] = op;
        }
    }
    Ok(out)
}

/// `4 Σ_k tr{Υ_k′ ρ₀ Υ_k′†}` with phase-aligned central differences of the
/// canonical Kraus operators.
pub fn sm_channel_bound(chf: &ChannelFamily, theta: f64, rho0: &DensityMatrix) -> Result<f64> {
    let h = FD_STEP;
    if !chf.domain.contains_with_margin(theta, h) {
        return Err(Error::ParamOutOfDomain {
            name: "theta".into(),
            value: theta,
        });
    }
    let base = canonical_kraus(chf, theta, rho0)?;
    let at = |t: f64| canonical_kraus_aligned(chf, t, rho0, &base);
    let (p1, m1, p2, m2) = (
        at(theta + h)?,
        at(theta - h)?,
        at(theta + 0.5 * h)?,
        at(theta - 0.5 * h)?,
    );
    let mut total = 0.0;
    for k in 0..base.len() {
        let coarse = (&p1[k] - &m1[k]) / C64::from(2.0 * h);
        let fine = (&p2[k] - &m2[k]) / C64::from(h);
        let d = (fine * C64::from(4.0) - coarse) / C64::from(3.0);
        total += trace(&(&d * rho0.matrix() * d.adjoint())).re;
    }
    Ok(4.0 * total)
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub metric: String,
    pub before: MetricMatrix,
    pub after: MetricMatrix,
    pub delta: MetricMatrix,
    /// Largest eigenvalue of `delta`; positive means the metric grew in
    /// some direction.
    pub max_increase: f64,
}

pub fn monotonicity_experiment(
    family: &ParametricFamily,
    theta: &[f64],
    metric: MetricKind,
    ch: &KrausChannel,
) -> Result<MonotonicityReport> {
    let pushed = pushforward_family(ch, family)?;
    let before = metric.compute(family, theta, None)?;
    let after = metric.compute(&pushed, theta, None)?;
    let delta = after.sub(&before);
    Ok(MonotonicityReport {
        metric: metric.name().to_string(),
        max_increase: delta.max_eigenvalue(),
        before,
        after,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::CVector;
    use crate::metrics::{c_l_information, c_upsilon_states, sld_information};
    use crate::registry::{bloch3, random_full_rank, rot3_mixture};

    fn plus() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(&CVector::from_vec(vec![C64::from(s), C64::from(s)])).unwrap()
    }

    fn z_rotation(t: f64) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_vec(vec![
            C64::from_polar(1.0, -t / 2.0),
            C64::from_polar(1.0, t / 2.0),
        ]))
    }

    #[test]
    fn identity_channel_leaves_state() {
        let rho = DensityMatrix::diagonal(&[0.6, 0.4]).unwrap();
        assert_eq!(apply_channel(&KrausChannel::identity(2), &rho).unwrap(), rho);
    }

    #[test]
    fn depolarizing_matches_affine_map() {
        let rho = rot3_mixture(0.1).unwrap().evaluate(&[0.7]).unwrap();
        for r in [-0.125, 0.0, 0.3, 0.5, 1.0] {
            let ch = depolarizing_channel(3, r).unwrap();
            assert!(ch.tp_residual() < TP_TOL);
            let out = apply_channel(&ch, &rho).unwrap();
            let want = rho.matrix() * C64::from(r) + CMatrix::identity(3, 3) * C64::from((1.0 - r) / 3.0);
            assert!(max_abs(&(out.matrix() - want)) < 1e-10);
        }
        assert!(depolarizing_channel(3, -0.2).is_err());
        assert!(depolarizing_channel(3, 1.1).is_err());
    }

    #[test]
    fn depolarized_rot3_spectrum() {
        let ch = depolarizing_channel(3, 0.5).unwrap();
        let out = apply_channel(&ch, &rot3_mixture(0.1).unwrap().evaluate(&[0.0]).unwrap()).unwrap();
        let es = out.eigen().unwrap();
        let want = [0.5 * 0.8 + 1.0 / 6.0, 0.5 * 0.1 + 1.0 / 6.0, 0.5 * 0.1 + 1.0 / 6.0];
        for (a, b) in es.values().iter().zip(want) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn random_channels_are_trace_preserving_and_reproducible() {
        for seed in 0..100 {
            let ch = random_tpcp(2 + (seed as usize % 3), 1 + (seed as usize % 4), seed).unwrap();
            assert!(ch.tp_residual() < TP_TOL);
        }
        assert_eq!(random_tpcp(3, 2, 7).unwrap(), random_tpcp(3, 2, 7).unwrap());
        let u = random_tpcp(3, 1, 1).unwrap();
        assert_eq!(u.kind, ChannelKind::Unitary);
    }

    #[test]
    fn from_operators_rejects_non_tp() {
        let half = CMatrix::identity(2, 2).map(|z| z * 0.5);
        assert!(matches!(
            KrausChannel::from_operators(vec![half]),
            Err(Error::NotTracePreserving(_))
        ));
    }

    #[test]
    fn pushforward_through_identity_is_same_family() {
        let fam = bloch3();
        let pushed = pushforward_family(&KrausChannel::identity(2), &fam).unwrap();
        assert_eq!(pushed.matrix_at(&[0.3, 0.4, 0.5]), fam.matrix_at(&[0.3, 0.4, 0.5]));
        assert!(pushed.has_spectral());
        assert!(matches!(
            pushforward_family(&KrausChannel::identity(3), &fam),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn depolarized_rot3_cl_matches_closed_form() {
        let (eps, r) = (0.1, 0.5);
        let fam = rot3_mixture(eps).unwrap();
        let pushed = pushforward_family(&depolarizing_channel(3, r).unwrap(), &fam).unwrap();
        let cl = c_l_information(&pushed, &[0.2]).unwrap().scalar();
        assert!((cl - (8.0 * r * eps + 8.0 * (1.0 - r) / 3.0)).abs() < 1e-7);
        let rep = monotonicity_experiment(&fam, &[0.2], MetricKind::Cl, &depolarizing_channel(3, r).unwrap()).unwrap();
        assert!((rep.before.scalar() - 0.8).abs() < 1e-7);
        assert!((rep.delta.scalar() - (1.0 - r) * (8.0 / 3.0 - 8.0 * eps)).abs() < 1e-7);
    }

    #[test]
    fn unitary_channels_preserve_metrics() {
        let fam = random_full_rank(3, 2, 3, 0.4, false).unwrap();
        let u = random_tpcp(3, 1, 99).unwrap();
        let pushed = pushforward_family(&u, &fam).unwrap();
        let plain = pushed.clone().without_spectral();
        let theta = [0.1, -0.2];
        for m in [MetricKind::Sld, MetricKind::Kmb, MetricKind::Rld, MetricKind::Cl] {
            let a = m.compute(&fam, &theta, None).unwrap();
            for b in [
                m.compute(&pushed, &theta, None).unwrap(),
                m.compute(&plain, &theta, None).unwrap(),
            ] {
                assert!(a.max_abs_diff(&b) < 1e-8 * a.max_abs().max(1.0), "{m}");
            }
        }
    }

    #[test]
    fn sld_never_grows_under_random_channels() {
        let fam = random_full_rank(3, 1, 8, 0.5, false).unwrap();
        for seed in 0..30 {
            let ch = random_tpcp(3, 1 + seed as usize % 4, 200 + seed).unwrap();
            let rep = monotonicity_experiment(&fam, &[0.3], MetricKind::Sld, &ch).unwrap();
            assert!(rep.max_increase <= 1e-8);
        }
        let id = monotonicity_experiment(&fam, &[0.3], MetricKind::Sld, &KrausChannel::identity(3)).unwrap();
        assert!(id.delta.max_abs() < 1e-12);
    }

    #[test]
    fn canonical_kraus_of_unitary_is_the_unitary() {
        let chf = ChannelFamily::unitary("zrot", 2, ParamDomain::REAL, z_rotation);
        let ops = canonical_kraus(&chf, 0.4, &plus()).unwrap();
        assert_eq!(ops.len(), 1);
        assert!(max_abs(&(&ops[0] - z_rotation(0.4))) < 1e-12);
    }

    #[test]
    fn canonical_kraus_of_depolarizing_on_maximally_mixed() {
        let chf = ChannelFamily::depolarizing(3);
        let rho0 = DensityMatrix::maximally_mixed(3);
        let ops = canonical_kraus(&chf, 0.3, &rho0).unwrap();
        assert!(canonical_residual(&ops, &rho0) < 1e-10);
        let total: f64 = ops.iter().map(|u| gram_element(u, rho0.matrix(), u).re).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sm_bound_examples() {
        let chf = ChannelFamily::unitary("zrot", 2, ParamDomain::REAL, z_rotation);
        assert!((sm_channel_bound(&chf, 0.4, &plus()).unwrap() - 1.0).abs() < 1e-8);
        let constant = ChannelFamily::new("const", 3, ParamDomain::REAL, |_| random_tpcp(3, 2, 5));
        let rho0 = DensityMatrix::diagonal(&[0.5, 0.3, 0.2]).unwrap();
        assert!(sm_channel_bound(&constant, 0.0, &rho0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn sm_bound_agrees_with_state_family_in_induced_gauge() {
        // E_k(θ) = F_k·exp(iθG) on a pure input; the induced presentation is
        // w_k = Υ_k|ψ⟩/√p_k with the canonical operators aligned to θ₀.
        let d = 3;
        let base = random_tpcp(d, d, 11).unwrap();
        let mut rng = rng_from_seed(12);
        let g = crate::random::random_hermitian(&mut rng, d, 1.0);
        let gen = eig_hermitian(&g).unwrap();
        let expi = move |t: f64| {
            gen.from_eigenbasis(&CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                d,
                gen.values().iter().map(|&x| C64::from_polar(1.0, t * x)),
            )))
        };
        let ops = base.operators().to_vec();
        let chf = ChannelFamily::new("rotated", d, ParamDomain::REAL, move |t| {
            let u = expi(t);
            KrausChannel::from_operators(ops.iter().map(|f| f * &u).collect())
        });
        let psi = crate::random::gaussian_matrix(&mut rng, d, 1).column(0).normalize();
        let rho0 = DensityMatrix::pure(&psi).unwrap();
        let theta0 = 0.35;
        let reference = canonical_kraus(&chf, theta0, &rho0).unwrap();
        assert_eq!(reference.len(), d);
        let (c2, r2, psi2) = (chf.clone(), rho0.clone(), psi.clone());
        let induced = ParametricFamily::from_spectral("induced", d, vec![ParamDomain::REAL], move |t| {
            let ups = canonical_kraus_aligned(&c2, t[0], &r2, &reference).unwrap();
            let mut vectors = CMatrix::zeros(d, d);
            let mut p = Vec::with_capacity(d);
            for (k, u) in ups.iter().enumerate() {
                let w = u * &psi2;
                let n = w.norm();
                p.push(n * n);
                vectors.set_column(k, &(w / C64::from(n)));
            }
            SpectralPresentation::new(p, vectors)
        });
        let bound = sm_channel_bound(&chf, theta0, &rho0).unwrap();
        let cu = c_upsilon_states(&induced, &[theta0]).unwrap().scalar();
        assert!((bound - cu).abs() < 1e-6, "{bound} {cu}");
        let h = sld_information(&induced, &[theta0]).unwrap().scalar();
        assert!(bound >= h - 1e-8);
    }

    #[test]
    fn sm_bound_on_depolarizing_with_degenerate_weights() {
        // ρ₀ = I/d: the twirl operators are already canonical with d² − 1
        // equal weights, and only their norms move with r.
        let (d, r) = (3usize, 0.3);
        let d2 = (d * d) as f64;
        let q0 = r + (1.0 - r) / d2;
        let want = (1.0 - 1.0 / d2).powi(2) / q0 + (d2 - 1.0) / (d2 * (1.0 - r));
        let chf = ChannelFamily::depolarizing(d);
        let got = sm_channel_bound(&chf, r, &DensityMatrix::maximally_mixed(d)).unwrap();
        assert!((got - want).abs() < 1e-7 * want, "{got} {want}");
    }

    #[test]
    fn sm_bound_ignores_the_kraus_realization() {
        let d = 3;
        let mut rng = rng_from_seed(21);
        let mix = crate::random::random_unitary(&mut rng, d * d);
        let mixed = ChannelFamily::new("mixed twirl", d, ChannelFamily::depolarizing(d).domain(), move |r| {
            let ops = depolarizing_channel(d, r)?.operators().to_vec();
            let n = ops.len();
            KrausChannel::from_operators(
                (0..n)
                    .map(|k| (0..n).fold(CMatrix::zeros(d, d), |acc, j| acc + &ops[j] * mix[(j, k)]))
                    .collect(),
            )
        });
        let plain = ChannelFamily::depolarizing(d);
        for rho0 in [
            plus_d(d),
            DensityMatrix::maximally_mixed(d),
            DensityMatrix::diagonal(&[0.5, 0.3, 0.2]).unwrap(),
        ] {
            let a = sm_channel_bound(&plain, 0.4, &rho0).unwrap();
            let b = sm_channel_bound(&mixed, 0.4, &rho0).unwrap();
            assert!(a.is_finite() && a < 1e3, "{a}");
            assert!((a - b).abs() < 1e-6 * a.max(1.0), "{a} {b}");
        }
    }

    fn plus_d(d: usize) -> DensityMatrix {
        DensityMatrix::pure(&CVector::from_element(d, C64::from(1.0 / (d as f64).sqrt()))).unwrap()
    }
}
