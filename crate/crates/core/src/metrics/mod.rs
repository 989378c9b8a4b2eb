//! Quantum informations as Riemannian metrics on a parameter space.

mod cfunction;
mod povm;
mod quantum;
mod upsilon;

use nalgebra::DMatrix;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::family::ParametricFamily;

pub use cfunction::{f_function_scan, log_grid, CFunction, FScanReport};
pub use povm::{born_probabilities, classical_fisher, Povm};
pub use quantum::{kmb_information, mc_metric, mc_metric_in_frame, rld_information, sld_information};
pub use upsilon::{
    c_l_decomposition, c_l_from_tangent, c_l_information, c_upsilon_from_tangent, c_upsilon_states, ClDecomposition,
};

/// Tolerance on symmetry of a metric matrix.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// `p×p` real symmetric matrix of a quantum information at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMatrix(DMatrix<f64>);

impl MetricMatrix {
    /// Symmetrizes `m`; panics on a non-square input.
    pub fn new(m: DMatrix<f64>) -> Self {
        assert!(m.is_square(), "metric matrix must be square");
        let sym = (&m + m.transpose()) * 0.5;
        MetricMatrix(sym)
    }

    pub fn zeros(p: usize) -> Self {
        MetricMatrix(DMatrix::zeros(p, p))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        MetricMatrix(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag)))
    }

    pub fn nparams(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.0[(k, l)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// The single entry of a one-parameter metric.
    pub fn scalar(&self) -> f64 {
        assert_eq!(self.nparams(), 1, "scalar() on a {}-parameter metric", self.nparams());
        self.0[(0, 0)]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.0.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &MetricMatrix) -> f64 {
        (&self.0 - &other.0).iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    pub fn sub(&self, other: &MetricMatrix) -> MetricMatrix {
        MetricMatrix(&self.0 - &other.0)
    }

    pub fn add(&self, other: &MetricMatrix) -> MetricMatrix {
        MetricMatrix(&self.0 + &other.0)
    }

    /// `v^T M v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(v);
        (v.transpose() * &self.0 * &v)[(0, 0)]
    }

    /// Smallest eigenvalue of `self − other`; non-negative iff `self ⪰ other`.
    pub fn order_margin(&self, other: &MetricMatrix) -> f64 {
        self.sub(other).min_eigenvalue()
    }
}

impl Serialize for MetricMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

/// Quantum informations available by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Fisher,
    Sld,
    Kmb,
    Rld,
    Cupsilon,
    Cl,
}

impl MetricKind {
    pub const ALL: [MetricKind; 6] = [
        MetricKind::Fisher,
        MetricKind::Sld,
        MetricKind::Kmb,
        MetricKind::Rld,
        MetricKind::Cupsilon,
        MetricKind::Cl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Fisher => "fisher",
            MetricKind::Sld => "sld",
            MetricKind::Kmb => "kmb",
            MetricKind::Rld => "rld",
            MetricKind::Cupsilon => "cupsilon",
            MetricKind::Cl => "cl",
        }
    }

    /// Evaluate at `θ`. The classical Fisher information uses `povm`, or
    /// the computational basis when none is given.
    pub fn compute(self, family: &ParametricFamily, theta: &[f64], povm: Option<&Povm>) -> Result<MetricMatrix> {
        match self {
            MetricKind::Fisher => match povm {
                Some(p) => classical_fisher(family, theta, p),
                None => classical_fisher(family, theta, &Povm::computational_basis(family.dim())),
            },
            MetricKind::Sld => sld_information(family, theta),
            MetricKind::Kmb => kmb_information(family, theta),
            MetricKind::Rld => rld_information(family, theta),
            MetricKind::Cupsilon => c_upsilon_states(family, theta),
            MetricKind::Cl => c_l_information(family, theta),
        }
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}

impl std::fmt::Display for MetricKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
