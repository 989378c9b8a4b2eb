use qmetric_core::channels::{depolarizing_channel, monotonicity_experiment, random_tpcp};
use qmetric_core::estimation::{cramer_rao_experiment, sld_optimal_povm};
use qmetric_core::family::directional_family;
use qmetric_core::gauge::{apply_gauge, minimizing_gauge_1p, DEFAULT_STEPS};
use qmetric_core::hermitian::relative_entropy;
use qmetric_core::metrics::{c_l_information, c_upsilon_states, classical_fisher, kmb_information, sld_information};
use qmetric_core::random::rng_from_seed;
use qmetric_core::registry::{bloch3, random_full_rank, rot3_mixture};
use qmetric_core::{MetricKind, ParametricFamily, PhaseAssignment, Povm};
use rand::Rng;
use serde_json::{json, Map, Value};

use crate::cli::Suite;
use crate::failure::Failure;
use crate::output::Report;

pub const ORDER_TOL: f64 = 1e-8;

struct Tally {
    checks: usize,
    failed: usize,
    first_failure: Option<String>,
    worst: Map<String, Value>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            checks: 0,
            failed: 0,
            first_failure: None,
            worst: Map::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failed += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(what());
            }
        }
    }

    /// A computation that errored counts as a failed assertion.
    fn attempt<T>(&mut self, r: qmetric_core::Result<T>, what: impl FnOnce() -> String) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.check(false, || format!("{}: {e}", what()));
                None
            }
        }
    }

    fn worst(&mut self, key: &str, value: f64) {
        self.worst.insert(key.into(), json!(value));
    }

    fn finish(self, suite: &str, seed: u64, extra: Value) -> Report {
        let mut out = json!({
            "suite": suite,
            "seed": seed,
            "checks": self.checks,
            "passed": self.checks - self.failed,
            "failed": self.failed,
            "worst": self.worst,
            "first_failure": self.first_failure,
        });
        if let (Value::Object(o), Value::Object(e)) = (&mut out, extra) {
            o.extend(e);
        }
        Report {
            json: out,
            table: None,
            suite_failure: self.first_failure,
        }
    }
}

pub fn run(suite: Suite, metric: &str, seed: u64) -> Result<Report, Failure> {
    match suite {
        Suite::Sandwich => Ok(sandwich(seed)),
        Suite::Gauge => Ok(gauge(seed)),
        Suite::Monotone => monotone(metric, seed),
        Suite::Crlb => Ok(crlb(seed)),
        Suite::KmbLimit => Ok(kmb_limit(seed)),
    }
}

/// Families with fixed seeds; the point is drawn from the run seed.
fn random_point(i: usize, rng: &mut impl Rng) -> (usize, usize, Vec<f64>) {
    let d = 2 + i % 3;
    let p = 1 + (i / 3) % 3;
    (d, p, (0..p).map(|_| rng.random_range(-1.0..1.0)).collect())
}

fn sandwich(seed: u64) -> Report {
    let mut t = Tally::new();
    let mut rng = rng_from_seed(seed);
    let (mut lo, mut hi, mut sld_min) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for i in 0..200 {
        let (d, p, theta) = random_point(i, &mut rng);
        let Some(fam) = t.attempt(random_full_rank(d, p, i as u64, 0.5, false), || format!("family {i}")) else {
            continue;
        };
        let h = t.attempt(sld_information(&fam, &theta), || format!("family {i}: H_SLD"));
        let cl = t.attempt(c_l_information(&fam, &theta), || format!("family {i}: C_L"));
        let cu = t.attempt(c_upsilon_states(&fam, &theta), || format!("family {i}: C_Υ"));
        let (Some(h), Some(cl), Some(cu)) = (h, cl, cu) else {
            continue;
        };
        let a = cl.order_margin(&h);
        let b = cu.order_margin(&cl);
        let m = h.min_eigenvalue();
        lo = lo.min(a);
        hi = hi.min(b);
        sld_min = sld_min.min(m);
        t.check(a >= -ORDER_TOL, || format!("family {i}: min eig(C_L − H_SLD) = {a:e}"));
        t.check(b >= -ORDER_TOL, || format!("family {i}: min eig(C_Υ − C_L) = {b:e}"));
        t.check(m >= -ORDER_TOL, || format!("family {i}: min eig(H_SLD) = {m:e}"));
    }
    t.worst("min_eig_cl_minus_sld", lo);
    t.worst("min_eig_cupsilon_minus_cl", hi);
    t.worst("min_eig_sld", sld_min);
    t.finish("sandwich", seed, json!({"families": 200}))
}

fn gauge(seed: u64) -> Report {
    let mut t = Tally::new();
    let mut rng = rng_from_seed(seed);
    let (mut gap, mut order, mut drift) = (0.0f64, f64::INFINITY, 0.0f64);
    for i in 0..20u64 {
        let d = 2 + (i as usize) % 3;
        let fam = if i % 2 == 0 {
            random_full_rank(d, 1, 500 + i, 0.5, false)
        } else {
            random_full_rank(d, 2, 500 + i, 0.5, false).and_then(|b| directional_family(&b, &[0.1, -0.2], &[1.0, 0.6]))
        };
        let Some(fam) = t.attempt(fam, || format!("family {i}")) else {
            continue;
        };
        let gauged = minimizing_gauge_1p(&fam, -0.5, 0.5, DEFAULT_STEPS).and_then(|pa| apply_gauge(&fam, &pa));
        let Some(gauged) = t.attempt(gauged, || format!("family {i}: minimizing gauge")) else {
            continue;
        };
        for x in [-0.45, -0.2, 0.0, 0.13, 0.4] {
            let pair = c_upsilon_states(&gauged, &[x]).and_then(|cu| Ok((cu, c_l_information(&fam, &[x])?)));
            if let Some((cu, cl)) = t.attempt(pair, || format!("family {i} at {x}")) {
                let g = (cu.scalar() - cl.scalar()).abs();
                gap = gap.max(g);
                t.check(g <= 1e-6, || {
                    format!("family {i} at {x}: |C_Υ − C_L| = {g:e} after minimization")
                });
            }
        }
        let Some(cl) = t.attempt(c_l_information(&fam, &[0.1]), || format!("family {i}: C_L")) else {
            continue;
        };
        for _ in 0..20 {
            let coef: Vec<(f64, f64, f64)> = (0..d)
                .map(|_| {
                    (
                        rng.random_range(-2.0..2.0),
                        rng.random_range(-3.0..3.0),
                        rng.random_range(-2.0..2.0),
                    )
                })
                .collect();
            let pa = PhaseAssignment::closed(d, move |x| {
                coef.iter().map(|(a, b, s)| a * (b * x[0]).sin() + s * x[0]).collect()
            });
            let res =
                apply_gauge(&fam, &pa).and_then(|g| Ok((c_upsilon_states(&g, &[0.1])?, c_l_information(&g, &[0.1])?)));
            if let Some((cu, cl2)) = t.attempt(res, || format!("family {i}: random gauge")) {
                let o = cu.scalar() - cl.scalar();
                let c = cl2.max_abs_diff(&cl) / cl.max_abs().max(1.0);
                order = order.min(o);
                drift = drift.max(c);
                t.check(o >= -1e-9, || {
                    format!("family {i}: C_Υ − C_L = {o:e} under a random gauge")
                });
                t.check(c <= 1e-9, || {
                    format!("family {i}: C_L changed by {c:e} under a random gauge")
                });
            }
        }
    }
    t.worst("max_gap_after_minimization", gap);
    t.worst("min_cupsilon_minus_cl_random_gauges", order);
    t.worst("max_cl_gauge_change", drift);
    t.finish("gauge", seed, json!({"families": 20}))
}

fn monotone(metric: &str, seed: u64) -> Result<Report, Failure> {
    let kind: MetricKind = metric
        .parse()
        .map_err(|_| Failure::validation(format!("--metric: unknown metric '{metric}'")))?;
    match kind {
        MetricKind::Sld | MetricKind::Kmb | MetricKind::Rld => Ok(monotone_holds(kind, seed)),
        MetricKind::Cl => Ok(cl_violation(seed)),
        _ => Err(Failure::validation(format!(
            "--metric: the monotone suite covers sld, kmb, rld and cl, not '{metric}'"
        ))),
    }
}

fn monotone_holds(kind: MetricKind, seed: u64) -> Report {
    let mut t = Tally::new();
    let mut rng = rng_from_seed(seed);
    let mut families: Vec<(String, qmetric_core::Result<ParametricFamily>, Vec<f64>)> = vec![
        (
            "bloch3 along r".into(),
            bloch3().restrict(&[0.6, 0.7, 0.2], 0),
            vec![0.6],
        ),
        ("rot3-mixture".into(), rot3_mixture(0.1), vec![0.3]),
    ];
    for s in 0..8u64 {
        families.push((
            format!("random-full-rank seed {}", 900 + s),
            random_full_rank(2 + s as usize % 3, 1, 900 + s, 0.5, false),
            vec![0.2],
        ));
    }
    let mut worst = f64::NEG_INFINITY;
    for (label, fam, theta) in families {
        let Some(fam) = t.attempt(fam, || label.clone()) else {
            continue;
        };
        for j in 0..30 {
            let ch_seed: u64 = rng.random();
            let rep = random_tpcp(fam.dim(), 1 + j % 4, ch_seed)
                .and_then(|ch| monotonicity_experiment(&fam, &theta, kind, &ch));
            if let Some(rep) = t.attempt(rep, || format!("{label}, channel seed {ch_seed}")) {
                worst = worst.max(rep.max_increase);
                let inc = rep.max_increase;
                t.check(inc <= ORDER_TOL, || {
                    format!("{label}, channel seed {ch_seed}: {kind} grew by {inc:e}")
                });
            }
        }
    }
    t.worst("max_increase", worst);
    t.finish(
        "monotone",
        seed,
        json!({"metric": kind.name(), "expect": "no increase", "families": 10, "channels_per_family": 30}),
    )
}

fn cl_violation(seed: u64) -> Report {
    let mut t = Tally::new();
    let mut found = Vec::new();
    let mut largest = f64::NEG_INFINITY;
    for eps in [0.05, 0.1, 0.2, 0.3] {
        for r in [0.2, 0.5, 0.8] {
            let rep = rot3_mixture(eps)
                .and_then(|f| Ok((f, depolarizing_channel(3, r)?)))
                .and_then(|(f, ch)| monotonicity_experiment(&f, &[0.3], MetricKind::Cl, &ch));
            if let Some(rep) = t.attempt(rep, || format!("rot3-mixture eps {eps}, depolarizing r {r}")) {
                largest = largest.max(rep.max_increase);
                if rep.max_increase > ORDER_TOL {
                    found.push(json!({
                        "family": "rot3-mixture",
                        "eps": eps,
                        "channel": {"type": "depolarizing", "r": r},
                        "before": rep.before.scalar(),
                        "after": rep.after.scalar(),
                        "delta": rep.delta.scalar(),
                    }));
                }
            }
        }
    }
    let n = found.len();
    t.check(n > 0, || "no increase of C_L found under depolarizing channels".into());
    t.worst("max_increase", largest);
    t.finish(
        "monotone",
        seed,
        json!({"metric": "cl", "expect": "a violation exists", "violations_found": n, "violations": found}),
    )
}

fn crlb(seed: u64) -> Report {
    let mut t = Tally::new();
    let mut rng = rng_from_seed(seed);
    let mut margin = f64::INFINITY;
    for i in 0..50u64 {
        let d = 2 + (i as usize) % 3;
        let p = 1 + (i as usize / 3) % 2;
        let theta: Vec<f64> = (0..p).map(|_| rng.random_range(-0.8..0.8)).collect();
        let povm = Povm::random(d, 2 + (i as usize) % 4, rng.random());
        let pair = random_full_rank(d, p, 1100 + i, 0.5, false)
            .and_then(|f| Ok((sld_information(&f, &theta)?, classical_fisher(&f, &theta, &povm)?)));
        if let Some((h, f)) = t.attempt(pair, || format!("family {i}")) {
            let m = h.order_margin(&f);
            margin = margin.min(m);
            t.check(m >= -ORDER_TOL, || format!("family {i}: min eig(H_SLD − F) = {m:e}"));
        }
    }
    t.worst("min_eig_sld_minus_fisher", margin);

    let (r_true, n, reps) = (0.5, 10_000u64, 500usize);
    let mut mc = Value::Null;
    let rep = bloch3()
        .restrict(&[r_true, 0.7, 0.2], 0)
        .and_then(|f| Ok((sld_optimal_povm(&f, r_true)?, f)))
        .and_then(|(povm, f)| cramer_rao_experiment(&f, r_true, &povm, n, reps, seed));
    if let Some(rep) = t.attempt(rep, || "bloch3 Monte Carlo".into()) {
        let target = (1.0 - r_true * r_true) / n as f64;
        let rel = (rep.empirical_variance - target).abs() / target;
        let floor = 0.95 * rep.cr_rhs;
        let v = rep.empirical_variance;
        t.check(rep.fisher <= rep.sld_bound + ORDER_TOL, || {
            format!(
                "bloch3 Monte Carlo: F = {} exceeds H_SLD = {}",
                rep.fisher, rep.sld_bound
            )
        });
        t.check(rel <= 0.15, || {
            format!("bloch3 Monte Carlo: variance {v:e} is {rel:.3} away from (1 − r²)/N")
        });
        t.check(v >= floor, || {
            format!("bloch3 Monte Carlo: variance {v:e} below 0.95/(N·F) = {floor:e}")
        });
        t.worst("variance_relative_error", rel);
        mc = json!({
            "family": "bloch3 along r",
            "theta_true": r_true,
            "n_samples": n,
            "reps": reps,
            "empirical_variance": v,
            "target": target,
            "variance_floor": floor,
            "cr_rhs": rep.cr_rhs,
            "bias": rep.bias,
            "boundary_hits": rep.boundary_hits,
        });
    }
    t.finish("crlb", seed, json!({"families": 50, "monte_carlo": mc}))
}

fn kmb_limit(seed: u64) -> Report {
    let mut t = Tally::new();
    let mut ratios = Vec::new();
    for i in 0..10u64 {
        let d = 3 + (i as usize) % 2;
        let x = 0.1 * i as f64 - 0.4;
        let res = random_full_rank(d, 1, 300 + i, 0.8, false).and_then(|fam| {
            let h = kmb_information(&fam, &[x])?.scalar();
            let rho = fam.evaluate(&[x])?;
            let err = |eps: f64| -> qmetric_core::Result<f64> {
                let sigma = fam.evaluate(&[x + eps])?;
                Ok((2.0 * relative_entropy(&rho, &sigma)? / (eps * eps) - h).abs())
            };
            Ok(err(1e-2)? / err(1e-3)?)
        });
        if let Some(ratio) = t.attempt(res, || format!("family {i}")) {
            ratios.push(ratio);
            t.check((5.0..=20.0).contains(&ratio), || {
                format!(
                    "family {i} (seed {}): error ratio err(1e-2)/err(1e-3) = {ratio:.3} outside [5, 20]",
                    300 + i
                )
            });
        }
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    t.worst("min_error_ratio", lo);
    t.worst("max_error_ratio", hi);
    t.finish("kmb-limit", seed, json!({"families": 10, "ratios": ratios}))
}
