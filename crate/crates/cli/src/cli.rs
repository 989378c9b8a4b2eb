use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Format;

/// Quantum information metrics on parametric families of density matrices.
///
/// Exit codes: 0 success, 1 verification suite failed, 2 invalid input,
/// 3 numerical failure. The seed defaults to $QML_SEED, then 42.
#[derive(Debug, Parser)]
#[command(name = "qmetric", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Random seed (overrides $QML_SEED).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate metrics at a point, optionally before and after a channel.
    Metric(MetricArgs),
    /// Reproduce the built-in worked examples.
    Examples(ExamplesArgs),
    /// Run a property suite with fixed seeds.
    Verify(VerifyArgs),
    /// Build the gauge that minimises C_Υ along one parameter.
    GaugeMin(GaugeMinArgs),
    /// Test whether a minimising gauge can exist around a point.
    GaugeCheck(PointArgs),
    /// Upper bound on the information carried by a channel family.
    ChannelBound(ChannelBoundArgs),
    /// Monte Carlo maximum-likelihood estimation against the Cramér–Rao bound.
    Estimate(EstimateArgs),
}

#[derive(Debug, Args)]
pub struct PointArgs {
    /// Registry family name.
    #[arg(long)]
    pub family: String,

    /// Family parameters as a JSON object.
    #[arg(long, default_value = "{}")]
    pub params: String,

    /// Point, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: String,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    #[command(flatten)]
    pub point: PointArgs,

    /// Comma separated: fisher, sld, kmb, rld, cupsilon, cl.
    #[arg(long, default_value = "sld,cl,cupsilon")]
    pub metrics: String,

    /// Measurement for the Fisher information.
    #[arg(long, value_enum, default_value = "basis")]
    pub povm: PovmChoice,

    /// Channel descriptor, e.g. {"type":"depolarizing","r":0.5} or
    /// {"type":"random","kraus":2,"seed":7}.
    #[arg(long)]
    pub channel: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PovmChoice {
    /// Computational basis.
    Basis,
    /// Spectral projectors of the SLD (one-parameter families).
    SldOptimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Example {
    Bloch3Gauges,
    DepolarizeCl,
}

#[derive(Debug, Args)]
pub struct ExamplesArgs {
    #[arg(value_enum)]
    pub which: Example,

    /// Bloch azimuth for bloch3-gauges.
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub phi: f64,

    /// Depolarizing strengths for depolarize-cl.
    #[arg(long, default_value = "0.2,0.5,0.8,1", allow_hyphen_values = true)]
    pub r: String,

    /// Mixture weights for depolarize-cl.
    #[arg(long, default_value = "0.05,0.1,0.2")]
    pub eps: String,

    /// Rotation angle for depolarize-cl.
    #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Sandwich,
    Gauge,
    Monotone,
    Crlb,
    KmbLimit,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,

    /// Metric for the monotone suite: sld, kmb, rld or cl.
    #[arg(long, default_value = "sld")]
    pub metric: String,
}

#[derive(Debug, Args)]
pub struct GaugeMinArgs {
    #[command(flatten)]
    pub point: PointArgs,

    /// Parameter to vary; the others stay at --theta.
    #[arg(long, default_value_t = 0)]
    pub axis: usize,

    /// Start of the interval (the phases vanish here).
    #[arg(long, allow_hyphen_values = true)]
    pub from: f64,

    #[arg(long, allow_hyphen_values = true)]
    pub to: f64,

    /// Trapezoid panels.
    #[arg(long, default_value_t = qmetric_core::gauge::DEFAULT_STEPS)]
    pub steps: usize,

    /// Evaluation points reported, evenly spaced.
    #[arg(long, default_value_t = 9)]
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelKind {
    /// θ ↦ depolarizing with r = θ.
    Depolarizing,
    /// θ ↦ exp(−iθG), G = diag(0, 1, …, d−1).
    Phase,
    /// θ ↦ E∘exp(−iθG) for a seeded random channel E.
    RandomPhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Probe {
    /// Uniform superposition.
    Plus,
    /// First basis vector.
    Zero,
    /// Maximally mixed.
    Mixed,
    /// Seeded random pure state.
    Random,
}

#[derive(Debug, Args)]
pub struct ChannelBoundArgs {
    #[arg(long = "channel-family", value_enum)]
    pub channel_family: ChannelKind,

    #[arg(long, default_value_t = 2)]
    pub dim: usize,

    /// Kraus operators of the random channel.
    #[arg(long, default_value_t = 2)]
    pub kraus: usize,

    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,

    /// Input state.
    #[arg(long, value_enum, default_value = "plus")]
    pub rho0: Probe,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub point: PointArgs,

    /// Estimated parameter; the others stay at --theta.
    #[arg(long, default_value_t = 0)]
    pub axis: usize,

    #[arg(long, value_enum, default_value = "sld-optimal")]
    pub povm: PovmChoice,

    /// Outcomes per replication.
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,

    #[arg(long, default_value_t = 200)]
    pub reps: usize,
}
