//! Riemannian metrics on parametric families of density matrices.
//!
//! The crate computes classical Fisher information for a measurement, the
//! monotone SLD, KMB and RLD quantum informations through a generic
//! Morozova–Chentsov engine, the gauge-dependent SM quantum information
//! `C_Υ`, and its gauge-invariant lower envelope `C_L`. Alongside the
//! metrics it provides the machinery needed to check their relationships:
//! Kraus channels and pushforwards, eigenvector phase gauges, and a
//! measurement/estimation harness for Cramér–Rao experiments.
//!
//! Matrices are dense `nalgebra` matrices over `Complex64`; all operations
//! are pure functions and every value type is `Send + Sync`.

#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod error;
pub mod estimation;
pub mod family;
pub mod gauge;
pub mod hermitian;
pub mod metrics;
pub mod random;
pub mod registry;
pub mod state;
pub mod tangent;

pub use channels::{ChannelFamily, KrausChannel};
pub use error::{Error, Result};
pub use family::{ParamDomain, ParametricFamily, SpectralPresentation};
pub use gauge::PhaseAssignment;
pub use hermitian::{CMatrix, CVector, EigenSystem, C64};
pub use metrics::{CFunction, MetricKind, MetricMatrix, Povm};
pub use state::DensityMatrix;
pub use tangent::TangentData;
