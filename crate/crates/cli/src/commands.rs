use qmetric_core::channels::{
    canonical_kraus, depolarizing_channel, monotonicity_experiment, pushforward_family, random_tpcp, sm_channel_bound,
    ChannelFamily,
};
use qmetric_core::estimation::{cramer_rao_experiment, sld_optimal_povm};
use qmetric_core::gauge::{apply_gauge, integrability_test, minimizing_gauge_1p};
use qmetric_core::metrics::{c_l_information, c_upsilon_states};
use qmetric_core::registry::{bloch3, random_pure, rot3_mixture};
use qmetric_core::{
    CMatrix, CVector, DensityMatrix, KrausChannel, MetricKind, MetricMatrix, ParamDomain, ParametricFamily,
    PhaseAssignment, Povm, C64,
};
use serde_json::{json, Value};

use crate::cli::{
    ChannelBoundArgs, ChannelKind, EstimateArgs, Example, ExamplesArgs, GaugeMinArgs, MetricArgs, PointArgs,
    PovmChoice, Probe,
};
use crate::failure::Failure;
use crate::input::{load_point, parse_metrics, parse_reals, ChannelDescriptor};
use crate::output::{matrix_cells, matrix_header, real, Report, Table};

fn params_json(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or(Value::Null)
}

fn matrix_json(m: &MetricMatrix) -> Value {
    json!(m.rows())
}

fn choose_povm(choice: PovmChoice, family: &ParametricFamily, theta: &[f64]) -> Result<Povm, Failure> {
    match choice {
        PovmChoice::Basis => Ok(Povm::computational_basis(family.dim())),
        PovmChoice::SldOptimal => {
            if family.nparams() != 1 {
                return Err(Failure::validation(format!(
                    "--povm: sld-optimal needs a one-parameter family, '{}' has {}",
                    family.name(),
                    family.nparams()
                )));
            }
            Ok(sld_optimal_povm(family, theta[0])?)
        }
    }
}

/// One-parameter slice through `theta` along `axis`.
fn slice(family: &ParametricFamily, theta: &[f64], axis: usize) -> Result<ParametricFamily, Failure> {
    if axis >= family.nparams() {
        return Err(Failure::validation(format!(
            "--axis: {axis} is out of range for {} parameters",
            family.nparams()
        )));
    }
    if family.nparams() == 1 {
        return Ok(family.clone());
    }
    family
        .restrict(theta, axis)
        .map_err(|e| Failure::from_core("--axis", e))
}

pub fn metric(a: &MetricArgs, seed: u64) -> Result<Report, Failure> {
    let PointArgs {
        family: name,
        params,
        theta,
    } = &a.point;
    let (family, _, theta) = load_point(name, params, theta)?;
    let kinds = parse_metrics(&a.metrics)?;
    let povm = choose_povm(a.povm, &family, &theta)?;
    let p = family.nparams();
    let compute = |fam: &ParametricFamily, k: MetricKind| k.compute(fam, &theta, Some(&povm));

    let mut head = json!({
        "family": name,
        "params": params_json(params),
        "theta": theta,
    });
    let entries: Vec<Value>;
    let table;
    match &a.channel {
        None => {
            let mut t = Table::new(std::iter::once("metric".to_string()).chain(matrix_header(p)));
            let mut out = Vec::new();
            for &k in &kinds {
                let m = compute(&family, k)?;
                t.push(std::iter::once(k.name().to_string()).chain(matrix_cells(&m)).collect());
                out.push(json!({"name": k.name(), "matrix": matrix_json(&m)}));
            }
            entries = out;
            table = t;
        }
        Some(raw) => {
            let desc = ChannelDescriptor::parse(raw)?;
            let ch = desc.build(family.dim(), seed)?;
            let pushed = pushforward_family(&ch, &family)?;
            let mut t = Table::new(
                ["metric", "stage"]
                    .into_iter()
                    .map(String::from)
                    .chain(matrix_header(p)),
            );
            let mut out = Vec::new();
            for &k in &kinds {
                let before = compute(&family, k)?;
                let after = compute(&pushed, k)?;
                let delta = after.sub(&before);
                for (stage, m) in [("before", &before), ("after", &after), ("delta", &delta)] {
                    t.push(
                        [k.name().to_string(), stage.to_string()]
                            .into_iter()
                            .chain(matrix_cells(m))
                            .collect(),
                    );
                }
                out.push(json!({
                    "name": k.name(),
                    "before": matrix_json(&before),
                    "after": matrix_json(&after),
                    "delta": matrix_json(&delta),
                    "max_increase": delta.max_eigenvalue(),
                }));
            }
            head["channel"] = serde_json::to_value(&desc).unwrap_or(Value::Null);
            entries = out;
            table = t;
        }
    }
    head["metrics"] = Value::Array(entries);
    Ok(Report::json(head).with_table(table))
}

pub fn examples(a: &ExamplesArgs) -> Result<Report, Failure> {
    match a.which {
        Example::Bloch3Gauges => bloch3_gauges(a.phi),
        Example::DepolarizeCl => depolarize_cl(&parse_reals("--r", &a.r)?, &parse_reals("--eps", &a.eps)?, a.theta),
    }
}

fn bloch3_gauges(phi: f64) -> Result<Report, Failure> {
    if !phi.is_finite() {
        return Err(Failure::validation("--phi: must be finite"));
    }
    let native = bloch3();
    let shifted = apply_gauge(&native, &PhaseAssignment::closed(2, |t| vec![-t[2] / 2.0; 2]))?;
    let mut t = Table::new(
        ["r", "theta", "gauge"]
            .into_iter()
            .map(String::from)
            .chain(matrix_header(3)),
    );
    let mut points = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 1..=9 {
        let r = i as f64 / 10.0;
        for th in [0.3, 1.2] {
            let point = [r, th, phi];
            let a = c_upsilon_states(&native, &point)?;
            let b = c_upsilon_states(&shifted, &point)?;
            let expected_a = MetricMatrix::from_diagonal(&[1.0 / (1.0 - r * r), 1.0, 1.0]);
            let expected_phi = 2.0 + 2.0 * r * th.cos();
            let dev = a.max_abs_diff(&expected_a).max((b.get(2, 2) - expected_phi).abs());
            worst = worst.max(dev);
            for (g, m) in [("native", &a), ("shifted", &b)] {
                t.push(
                    [real(r), real(th), g.to_string()]
                        .into_iter()
                        .chain(matrix_cells(m))
                        .collect(),
                );
            }
            points.push(json!({
                "r": r,
                "theta": th,
                "native_gauge": matrix_json(&a),
                "shifted_gauge": matrix_json(&b),
                "expected_native_gauge": matrix_json(&expected_a),
                "expected_shifted_phi_phi": expected_phi,
                "deviation": dev,
            }));
        }
    }
    Ok(Report::json(json!({
        "example": "bloch3-gauges",
        "phi": phi,
        "points": points,
        "max_deviation": worst,
    }))
    .with_table(t))
}

fn depolarize_cl(rs: &[f64], epss: &[f64], theta: f64) -> Result<Report, Failure> {
    let mut t = Table::new(["eps", "r", "before", "after", "delta", "predicted_delta"]);
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for &eps in epss {
        let fam = rot3_mixture(eps).map_err(|e| Failure::from_core("--eps", e))?;
        for &r in rs {
            let ch = depolarizing_channel(3, r).map_err(|e| Failure::from_core("--r", e))?;
            let rep = monotonicity_experiment(&fam, &[theta], MetricKind::Cl, &ch)?;
            let predicted = (1.0 - r) * (8.0 / 3.0 - 8.0 * eps);
            let (before, after, delta) = (rep.before.scalar(), rep.after.scalar(), rep.delta.scalar());
            worst = worst
                .max((before - 8.0 * eps).abs())
                .max((after - (8.0 * r * eps + 8.0 * (1.0 - r) / 3.0)).abs())
                .max((delta - predicted).abs());
            t.push(vec![
                real(eps),
                real(r),
                real(before),
                real(after),
                real(delta),
                real(predicted),
            ]);
            rows.push(json!({
                "eps": eps,
                "r": r,
                "before": before,
                "after": after,
                "delta": delta,
                "predicted_delta": predicted,
            }));
        }
    }
    Ok(Report::json(json!({
        "example": "depolarize-cl",
        "theta": theta,
        "rows": rows,
        "max_deviation": worst,
    }))
    .with_table(t))
}

pub fn gauge_min(a: &GaugeMinArgs) -> Result<Report, Failure> {
    let PointArgs {
        family: name,
        params,
        theta,
    } = &a.point;
    let (family, _, theta) = load_point(name, params, theta)?;
    let line = slice(&family, &theta, a.axis)?;
    if !(a.from < a.to) {
        return Err(Failure::validation("--from/--to: need from < to"));
    }
    if a.steps == 0 {
        return Err(Failure::validation("--steps: must be positive"));
    }
    if a.points == 0 {
        return Err(Failure::validation("--points: must be positive"));
    }
    let pa = minimizing_gauge_1p(&line, a.from, a.to, a.steps).map_err(|e| Failure::from_core("--from/--to", e))?;
    let gauged = apply_gauge(&line, &pa)?;
    let d = line.dim();
    let mut t = Table::new(
        ["theta", "cupsilon_before", "cupsilon_after", "cl"]
            .into_iter()
            .map(String::from)
            .chain((0..d).map(|k| format!("alpha_{k}"))),
    );
    let mut samples = Vec::new();
    let mut gap: f64 = 0.0;
    let width = (a.to - a.from) / a.points as f64;
    for i in 0..a.points {
        let x = a.from + (i as f64 + 0.5) * width;
        let before = c_upsilon_states(&line, &[x])?.scalar();
        let after = c_upsilon_states(&gauged, &[x])?.scalar();
        let cl = c_l_information(&line, &[x])?.scalar();
        let alpha = pa.eval(&[x]);
        gap = gap.max((after - cl).abs());
        t.push(
            [real(x), real(before), real(after), real(cl)]
                .into_iter()
                .chain(alpha.iter().map(|&v| real(v)))
                .collect(),
        );
        samples.push(json!({
            "theta": x,
            "alpha": alpha,
            "cupsilon_before": before,
            "cupsilon_after": after,
            "cl": cl,
        }));
    }
    Ok(Report::json(json!({
        "family": name,
        "params": params_json(params),
        "base_point": theta,
        "axis": a.axis,
        "interval": [a.from, a.to],
        "steps": a.steps,
        "samples": samples,
        "max_gap": gap,
    }))
    .with_table(t))
}

pub fn gauge_check(a: &PointArgs) -> Result<Report, Failure> {
    let (family, _, theta) = load_point(&a.family, &a.params, &a.theta)?;
    let rep = integrability_test(&family, &theta).map_err(|e| Failure::from_core("--family", e))?;
    let mut t = Table::new(["j", "l", "k", "value"]);
    for e in &rep.entries {
        t.push(vec![e.j.to_string(), e.l.to_string(), e.k.to_string(), real(e.value)]);
    }
    Ok(Report::json(json!({
        "family": a.family,
        "params": params_json(&a.params),
        "theta": theta,
        "entries": rep.entries,
        "max_abs": rep.max_abs,
        "tolerance": rep.tolerance,
        "verdict": if rep.pass { "PASS" } else { "FAIL" },
    }))
    .with_table(t))
}

fn phase_unitary(d: usize, t: f64) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        d,
        (0..d).map(|j| C64::from_polar(1.0, -t * j as f64)),
    ))
}

fn channel_family(kind: ChannelKind, d: usize, kraus: usize, seed: u64) -> Result<ChannelFamily, Failure> {
    Ok(match kind {
        ChannelKind::Depolarizing => ChannelFamily::depolarizing(d),
        ChannelKind::Phase => ChannelFamily::unitary("phase", d, ParamDomain::REAL, move |t| phase_unitary(d, t)),
        ChannelKind::RandomPhase => {
            let base: KrausChannel = random_tpcp(d, kraus, seed).map_err(|e| Failure::from_core("--kraus", e))?;
            ChannelFamily::new("random-phase", d, ParamDomain::REAL, move |t| {
                let u = phase_unitary(d, t);
                KrausChannel::from_operators(base.operators().iter().map(|k| k * &u).collect())
            })
        }
    })
}

fn probe_state(kind: Probe, d: usize, seed: u64) -> Result<DensityMatrix, Failure> {
    Ok(match kind {
        Probe::Plus => DensityMatrix::pure(&CVector::from_element(d, C64::from(1.0 / (d as f64).sqrt())))?,
        Probe::Zero => {
            let mut v = CVector::zeros(d);
            v[0] = C64::from(1.0);
            DensityMatrix::pure(&v)?
        }
        Probe::Mixed => DensityMatrix::maximally_mixed(d),
        Probe::Random => random_pure(d, 1, seed, false)?.evaluate(&[0.0])?,
    })
}

pub fn channel_bound(a: &ChannelBoundArgs, seed: u64) -> Result<Report, Failure> {
    if a.dim == 0 {
        return Err(Failure::validation("--dim: must be positive"));
    }
    if a.channel_family == ChannelKind::Depolarizing && a.dim < 2 {
        return Err(Failure::validation(
            "--dim: depolarizing channels need dimension at least 2",
        ));
    }
    if !a.theta.is_finite() {
        return Err(Failure::validation("--theta: must be finite"));
    }
    let chf = channel_family(a.channel_family, a.dim, a.kraus, seed)?;
    let rho0 = probe_state(a.rho0, a.dim, seed)?;
    let weights: Vec<f64> = canonical_kraus(&chf, a.theta, &rho0)
        .map_err(|e| Failure::from_core("--theta", e))?
        .iter()
        .map(|k| (k * rho0.matrix() * k.adjoint()).trace().re)
        .collect();
    let bound = sm_channel_bound(&chf, a.theta, &rho0).map_err(|e| Failure::from_core("--theta", e))?;
    let kind = match a.channel_family {
        ChannelKind::Depolarizing => "depolarizing",
        ChannelKind::Phase => "phase",
        ChannelKind::RandomPhase => "random-phase",
    };
    let probe = match a.rho0 {
        Probe::Plus => "plus",
        Probe::Zero => "zero",
        Probe::Mixed => "mixed",
        Probe::Random => "random",
    };
    let mut t = Table::new(["channel_family", "dim", "theta", "rho0", "bound"]);
    t.push(vec![
        kind.into(),
        a.dim.to_string(),
        real(a.theta),
        probe.into(),
        real(bound),
    ]);
    Ok(Report::json(json!({
        "channel_family": kind,
        "dim": a.dim,
        "theta": a.theta,
        "rho0": probe,
        "seed": seed,
        "canonical_weights": weights,
        "bound": bound,
    }))
    .with_table(t))
}

pub fn estimate(a: &EstimateArgs, seed: u64) -> Result<Report, Failure> {
    let PointArgs {
        family: name,
        params,
        theta,
    } = &a.point;
    let (family, _, theta) = load_point(name, params, theta)?;
    let line = slice(&family, &theta, a.axis)?;
    let truth = theta[a.axis];
    let povm = choose_povm(a.povm, &line, &[truth])?;
    if a.samples == 0 {
        return Err(Failure::validation("--samples: must be positive"));
    }
    if a.reps == 0 {
        return Err(Failure::validation("--reps: must be positive"));
    }
    let rep = cramer_rao_experiment(&line, truth, &povm, a.samples, a.reps, seed)?;
    let mut t = Table::new(["rep", "estimate"]);
    for (i, e) in rep.estimates.iter().enumerate() {
        t.push(vec![i.to_string(), real(*e)]);
    }
    let mut out = serde_json::to_value(&rep).map_err(|e| Failure::validation(e.to_string()))?;
    out["family"] = json!(name);
    out["params"] = params_json(params);
    out["base_point"] = json!(theta);
    out["axis"] = json!(a.axis);
    Ok(Report::json(out).with_table(t))
}
