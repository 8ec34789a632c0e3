//! Command-line flags and the matching TOML config schema.
//!
//! Every field is optional so that a flag, a config entry and the built-in
//! default can be layered: flags win over the config file, which wins over
//! the defaults applied at dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Deserializer};

#[derive(Debug, Parser)]
#[command(name = "pkpz", version, about = "Exact distributions of the periodic KPZ fixed point and their stochastic cross-checks")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalArgs {
    /// TOML file with a [global] table and one table per command
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// seed for stochastic commands (default: $PKPZ_SEED, else 0)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// write results here instead of stdout
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// cap on worker threads
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// largest acceptable error proxy; above it the exit code is 2
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    /// root index cutoff K of the determinant series
    #[arg(long, global = true)]
    pub roots: Option<usize>,
    /// leaf tolerance of the special functions
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// record wall time per result (output is then no longer reproducible byte for byte)
    #[arg(long, global = true)]
    #[serde(default)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Joint CDF F(β) or its density in β_m
    Cdf(CdfArgs),
    /// Probability of the query events given the height ℓ at (0, 1)
    Conditional(ConditionalArgs),
    /// Limit laws of the pinched-up field
    Limit(LimitArgs),
    /// Monte Carlo estimate of a limit-field probability
    Mc(McArgs),
    /// Empirical scaled CDF from TASEP on a ring
    Tasep(TasepArgs),
    /// Special functions
    Specfun(SpecfunArgs),
    /// Run acceptance suites and print a pass/fail table
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Cdf,
    Density,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdfArgs {
    /// number of points
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "one_or_many")]
    pub gamma: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub tau: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "one_or_many")]
    pub beta: Option<Vec<f64>>,
    /// period
    #[arg(long)]
    pub p: Option<f64>,
    /// trapezoid nodes per circle
    #[arg(long)]
    pub nodes: Option<usize>,
    /// circle radii in (0, 1), in either order
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub radii: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub quantity: Option<Quantity>,
    /// CSV of points with header gamma,tau,beta,p; vector entries separated by ';'
    #[arg(long)]
    pub batch: Option<PathBuf>,
    /// emit an (x, y) table over a β grid instead of records
    #[arg(long)]
    #[serde(default)]
    pub plot_data: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionalArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "one_or_many")]
    pub x: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub t: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "one_or_many")]
    pub h: Option<Vec<f64>>,
    /// conditioning height at (0, 1)
    #[arg(long)]
    pub ell: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitKind {
    /// limit of the conditional probability
    Conditional,
    /// S_∞(a, b) by line quadrature and by bridge quadrature
    SInf,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitArgs {
    #[arg(long, value_enum)]
    pub what: Option<LimitKind>,
    /// period regime: 1 (large), 2 (critical) or 3 (small)
    #[arg(long)]
    #[serde(default, deserialize_with = "string_or_int")]
    pub case: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "one_or_many")]
    pub x: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub t: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "one_or_many")]
    pub h: Option<Vec<f64>>,
    /// circle length of the critical regime
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub a: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "one_or_many")]
    pub b: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McArgs {
    /// period regime: 1 (large), 2 (critical) or 3 (small)
    #[arg(long)]
    #[serde(default, deserialize_with = "string_or_int")]
    pub case: Option<String>,
    /// spatial positions (default all zero)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "one_or_many")]
    pub x: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub t: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "one_or_many")]
    pub h: Option<Vec<f64>>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub paths: Option<usize>,
    /// independent stream under the seed
    #[arg(long)]
    pub stream: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TasepArgs {
    /// half ring size
    #[arg(long)]
    pub a: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "one_or_many")]
    pub gamma: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub tau: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "one_or_many")]
    pub beta: Option<Vec<f64>>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub stream: Option<u64>,
    /// emit the empirical CDF over a β grid next to the exact one
    #[arg(long)]
    #[serde(default)]
    pub plot_data: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Special {
    /// c(ρ) as a theta sum and as its Poisson dual
    COfRho,
    Polylog,
    A1,
    A2,
    /// wrapped Gaussian density on a circle of length ρ
    Wrapped,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecfunArgs {
    #[arg(long = "fn", value_enum)]
    #[serde(rename = "fn")]
    pub function: Option<Special>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// complex argument as re[,im]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, deserialize_with = "one_or_many")]
    pub z: Option<Vec<f64>>,
    /// polylogarithm order: 0.5, 1.5 or 2.5
    #[arg(long)]
    pub order: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    /// criterion name or number, "fast" or "all"
    #[arg(long)]
    #[serde(default, deserialize_with = "string_or_int")]
    pub suite: Option<String>,
}

/// The config file: `[global]` plus one table per command.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub global: GlobalArgs,
    #[serde(default)]
    pub cdf: CdfArgs,
    #[serde(default)]
    pub conditional: ConditionalArgs,
    #[serde(default)]
    pub limit: LimitArgs,
    #[serde(default)]
    pub mc: McArgs,
    #[serde(default)]
    pub tasep: TasepArgs,
    #[serde(default)]
    pub specfun: SpecfunArgs,
    #[serde(default)]
    pub verify: VerifyArgs,
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum V {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(Option::<V>::deserialize(d)?.map(|v| match v {
        V::One(x) => vec![x],
        V::Many(v) => v,
    }))
}

fn string_or_int<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum V {
        S(String),
        I(i64),
    }
    Ok(Option::<V>::deserialize(d)?.map(|v| match v {
        V::S(s) => s,
        V::I(i) => i.to_string(),
    }))
}

/// Field-wise layering: `self` wins, `base` fills the gaps.
pub trait Layer {
    fn over(self, base: Self) -> Self;
}

macro_rules! layer {
    ($ty:ty { $($f:ident),* } $(; $($b:ident),*)?) => {
        impl Layer for $ty {
            fn over(self, base: Self) -> Self {
                Self { $($f: self.$f.or(base.$f),)* $($($b: self.$b || base.$b,)*)? }
            }
        }
    };
}

layer!(GlobalArgs { config, seed, output, format, jobs, threshold, roots, tol }; timing);
layer!(CdfArgs { m, gamma, tau, beta, p, nodes, radii, quantity, batch, from, to, points }; plot_data);
layer!(ConditionalArgs { x, t, h, ell, p, nodes });
layer!(LimitArgs { what, case, x, t, h, r, a, b });
layer!(McArgs { case, x, t, h, r, paths, stream });
layer!(TasepArgs { a, gamma, tau, beta, runs, stream, from, to, points }; plot_data);
layer!(SpecfunArgs { function, rho, z, order, x, t });
layer!(VerifyArgs { suite });
