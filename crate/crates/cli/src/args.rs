use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "eaqc", version, about = "Ensemble-encoded adiabatic quantum computing experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output file. Defaults to `$EAQC_OUT_DIR/<command>.csv`, else stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Omit the timing lines from the output header.
    #[arg(long, global = true)]
    pub no_clock: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an instance document.
    Gen(GenArgs),
    /// Classical landscape report: ground corner, gaps, critical ensemble size.
    Landscape(LandscapeArgs),
    /// Lowest levels of H(lambda) over a lambda grid.
    Spectrum(SpectrumArgs),
    /// Gap curves and minimum gaps, for one instance or a filtered random set.
    Mingap(MingapArgs),
    /// Mean-field ground state and gap over a lambda grid.
    Meanfield(MeanfieldArgs),
    /// Annealing runs with optional dephasing.
    Anneal(AnnealArgs),
    /// Mean error over a random instance set.
    Batch(BatchArgs),
    /// Log-negativity between the two ensembles of an M = 2 instance.
    Negativity(NegativityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Couplings and biases uniform in [-1, 1].
    Random,
    /// All couplings -1, all biases K.
    Ferro,
    /// The three-variable Exact Cover instance.
    ExactCover,
    /// The three-spin instance used for spectra.
    SpectrumExample,
    /// The three-spin instance used for landscape plots.
    LandscapeExample,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InstanceArgs {
    /// Instance document with keys "M", "J", "K".
    #[arg(long, conflicts_with = "family")]
    pub instance: Option<PathBuf>,

    /// Named instance family (default: random).
    #[arg(long, value_enum)]
    pub family: Option<Family>,

    /// Number of logical spins for generated families.
    #[arg(long = "M", default_value_t = 3)]
    pub m: usize,

    /// Bias of the ferromagnetic family.
    #[arg(long = "K", default_value_t = 0.2)]
    pub k: f64,

    /// Seed of the random family and of sampled instance sets.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Comma list or inclusive range of ensemble sizes: `5`, `1,3,5`, `1..7`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Sizes(pub Vec<usize>);

impl FromStr for Sizes {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected N, N,N,... or A..B, got {s:?}");
        let values: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            (a..=b).collect()
        } else {
            s.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
        };
        if values.is_empty() || values.contains(&0) {
            return Err(format!("ensemble sizes must be positive, got {s:?}"));
        }
        Ok(Sizes(values))
    }
}

/// Comma list of positive reals.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Reals(pub Vec<f64>);

impl FromStr for Reals {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let values: Vec<f64> = s
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| format!("bad number {v:?}")))
            .collect::<Result<_, _>>()?;
        if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(format!("values must be positive and finite, got {s:?}"));
        }
        Ok(Reals(values))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Noise {
    /// Ensemble-wide S^z / S^x jump operators.
    Collective,
    /// Independent sigma^z on every qubit.
    Individual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Reduced,
    FullSpace,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LandscapeArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,

    /// Ensemble sizes at which the corner gap is reported.
    #[arg(long = "N", default_value = "1..10")]
    pub n: Sizes,

    /// Also write f(eps) along every corner-to-corner trajectory to this CSV.
    #[arg(long)]
    pub curve_out: Option<PathBuf>,

    /// Samples of eps in [0, 1] per trajectory.
    #[arg(long, default_value_t = 51)]
    pub eps_points: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,

    #[arg(long = "N", default_value_t = 5)]
    pub n: usize,

    /// Number of levels per lambda.
    #[arg(long, default_value_t = 30)]
    pub levels: usize,

    /// Number of uniform lambda points on [0, 1].
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MingapArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,

    #[arg(long = "N", default_value = "1")]
    pub n: Sizes,

    #[arg(long, default_value_t = 101)]
    pub grid: usize,

    /// Refine the minimum by golden-section search.
    #[arg(long)]
    pub refine: bool,

    /// One row per N with the minimum instead of the full curve.
    #[arg(long)]
    pub summary: bool,

    /// Use a random set filtered on N_c (`3` or `>7`) instead of one instance;
    /// writes (N, mean, best, worst).
    #[arg(long)]
    pub filter_nc: Option<String>,

    /// Size of the filtered set.
    #[arg(long, default_value_t = 60)]
    pub count: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MeanfieldArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,

    #[arg(long, default_value_t = 101)]
    pub grid: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DynamicsArgs {
    /// Sweep times.
    #[arg(long, default_value = "100")]
    pub tau: Reals,

    #[arg(long, default_value_t = 0.0)]
    pub gamma_z: f64,

    #[arg(long, default_value_t = 0.0)]
    pub gamma_x: f64,

    #[arg(long, value_enum, default_value_t = Noise::Collective)]
    pub noise: Noise,

    /// Integrator steps (default: max(10^4, 100 tau)).
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnnealArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,

    #[arg(long = "N", default_value = "1")]
    pub n: Sizes,

    #[command(flatten)]
    pub dynamics: DynamicsArgs,

    /// Representation used for individual dephasing.
    #[arg(long, value_enum, default_value_t = Backend::Reduced)]
    pub backend: Backend,

    /// Also write the final level distribution of every run to this CSV.
    #[arg(long)]
    pub levels_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BatchArgs {
    /// Logical spins per instance.
    #[arg(long = "M", default_value_t = 3)]
    pub m: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Keep only instances whose N_c matches (`3` or `>7`).
    #[arg(long)]
    pub filter_nc: Option<String>,

    #[arg(long, default_value_t = 60)]
    pub count: usize,

    #[arg(long = "N", default_value = "1..7")]
    pub n: Sizes,

    #[command(flatten)]
    pub dynamics: DynamicsArgs,

    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub threads: Option<usize>,

    /// Also write every (instance, N, tau) cell to this CSV.
    #[arg(long)]
    pub cells_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NegativityArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,

    #[arg(long = "N", default_value = "1..4")]
    pub n: Sizes,

    #[arg(long, default_value_t = 60.0)]
    pub tau: f64,

    #[arg(long, default_value_t = 1e-4)]
    pub gamma_z: f64,

    #[arg(long, default_value_t = 0.0)]
    pub gamma_x: f64,

    /// Number of equally spaced sample times on [0, tau].
    #[arg(long, default_value_t = 61)]
    pub samples: usize,

    #[arg(long)]
    pub steps: Option<usize>,
}
