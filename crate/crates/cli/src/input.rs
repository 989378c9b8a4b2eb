use qmetric_core::channels::{depolarizing_channel, random_tpcp};
use qmetric_core::registry::{family_registry, FamilyParams, FAMILY_NAMES};
use qmetric_core::{KrausChannel, MetricKind, ParametricFamily};
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

pub const DEFAULT_SEED: u64 = 42;
pub const SEED_VAR: &str = "QML_SEED";

/// `--seed`, then `QML_SEED`, then 42.
pub fn resolve_seed(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::validation(format!("{SEED_VAR}: '{v}' is not a non-negative integer"))),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_SEED),
        Err(e) => Err(Failure::validation(format!("{SEED_VAR}: {e}"))),
    }
}

pub fn parse_list<T: std::str::FromStr>(field: &str, raw: &str) -> Result<Vec<T>, Failure> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Failure::validation(format!("{field}: cannot parse '{s}'")))
        })
        .collect::<Result<Vec<T>, _>>()
        .and_then(|v| {
            if v.is_empty() {
                Err(Failure::validation(format!("{field}: empty list")))
            } else {
                Ok(v)
            }
        })
}

pub fn parse_reals(field: &str, raw: &str) -> Result<Vec<f64>, Failure> {
    let v: Vec<f64> = parse_list(field, raw)?;
    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
        return Err(Failure::validation(format!("{field}: {x} is not finite")));
    }
    Ok(v)
}

pub fn parse_metrics(raw: &str) -> Result<Vec<MetricKind>, Failure> {
    let names: Vec<String> = parse_list("--metrics", raw)?;
    names
        .iter()
        .map(|n| {
            n.parse::<MetricKind>().map_err(|_| {
                let known: Vec<&str> = MetricKind::ALL.iter().map(|m| m.name()).collect();
                Failure::validation(format!("--metrics: unknown metric '{n}' (known: {})", known.join(", ")))
            })
        })
        .collect()
}

pub fn parse_params(raw: &str) -> Result<FamilyParams, Failure> {
    serde_json::from_str(raw).map_err(|e| Failure::validation(format!("--params: {e}")))
}

pub fn load_family(name: &str, params: &FamilyParams) -> Result<ParametricFamily, Failure> {
    if !FAMILY_NAMES.contains(&name) {
        return Err(Failure::validation(format!(
            "--family: unknown family '{name}' (known: {})",
            FAMILY_NAMES.join(", ")
        )));
    }
    family_registry(name, params).map_err(|e| Failure::from_core("--params", e))
}

/// Family and a point in its domain.
pub fn load_point(
    name: &str,
    params: &str,
    theta: &str,
) -> Result<(ParametricFamily, FamilyParams, Vec<f64>), Failure> {
    let params = parse_params(params)?;
    let family = load_family(name, &params)?;
    let theta = parse_reals("--theta", theta)?;
    if theta.len() != family.nparams() {
        return Err(Failure::validation(format!(
            "--theta: family '{name}' has {} parameters, got {} values",
            family.nparams(),
            theta.len()
        )));
    }
    family
        .check_theta(&theta)
        .map_err(|e| Failure::from_core("--theta", e))?;
    Ok((family, params, theta))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ChannelDescriptor {
    Depolarizing { r: f64 },
    Random { kraus: usize, seed: Option<u64> },
}

impl ChannelDescriptor {
    pub fn parse(raw: &str) -> Result<Self, Failure> {
        serde_json::from_str(raw).map_err(|e| Failure::validation(format!("--channel: {e}")))
    }

    /// Random channels without their own seed take `default_seed`.
    pub fn build(&self, dim: usize, default_seed: u64) -> Result<KrausChannel, Failure> {
        match *self {
            ChannelDescriptor::Depolarizing { r } => {
                depolarizing_channel(dim, r).map_err(|e| Failure::from_core("--channel", e))
            }
            ChannelDescriptor::Random { kraus, seed } => {
                random_tpcp(dim, kraus, seed.unwrap_or(default_seed)).map_err(|e| Failure::from_core("--channel", e))
            }
        }
    }
}
