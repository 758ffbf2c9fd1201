//! Command-line surface. Every settings struct doubles as the schema of the
//! JSON config file: a config key has the same name as the flag, with `-`
//! replaced by `_`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use spectop_core::graph::{generate, read_graph, Family, FamilySpec, WeightedGraph};
use spectop_core::rng::trial_seed;

use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "spectop",
    version,
    about = "Spectral mass near the top of the spectrum: graphs, nets, bound checks and walk series",
    after_help = "Exit status: 0 when every check passes, 1 on an inequality violation, 2 on a usage error.\n\
                  SPECTOP_THREADS sets the worker thread count; outputs do not depend on it."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a graph in the plain-text `n m` / `u v w` format.
    Gen(GenArgs),
    /// Eigenvalues as CSV, or the spectral count of one interval as JSON.
    Spectrum(SpectrumArgs),
    /// Build an r-net.
    Net(NetArgs),
    /// Run the local captain-based r-net and print its transcript.
    LocalNet(LocalNetArgs),
    /// Check an inequality over trials.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Return probabilities and the Kesten–McKay reference.
    #[command(subcommand)]
    Walks(WalksCommand),
    /// Second-eigenvalue and main theorem checks over growing n.
    Sweep(SweepArgs),
}

#[derive(Subcommand, Debug)]
pub enum VerifyCommand {
    /// Spectral radius drop after deleting an r-net.
    RadDrop(RadDropArgs),
    /// Trace of A^{2r} against the sum over balls of radius r.
    LocalGlobal(LocalGlobalArgs),
    /// Eigenvalue count deviation after removing a vertex set.
    Interlace(InterlaceArgs),
    /// Spectral mass in [(1-θ)x, x] against the finite-parameter bound.
    FiniteParam(FiniteParamArgs),
    /// Hypotheses, implied constant and en-route bound of a headline theorem.
    Thm(ThmArgs),
}

#[derive(Subcommand, Debug)]
pub enum WalksCommand {
    /// Return probabilities of the d-regular tree as CSV `n,p_2n,scaled`.
    Tree(TreeArgs),
    /// Return series from one vertex of a finite graph.
    Finite(FiniteArgs),
    /// Fit p_2n ≈ C (ρ/d)^{2n} n^{-α} on a window.
    Fit(FitArgs),
    /// Compare the top-mass exponent with the return-decay exponent.
    Roundtrip(RoundtripArgs),
}

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default)]
pub struct Common {
    /// JSON config file; flags override its keys.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Master seed. Trial t uses a stream derived from (seed, t).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file. A `.manifest.json` (and `.violation.json` on failure) is
    /// written next to it. Defaults to stdout, with the manifest on stderr.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default)]
pub struct GraphArgs {
    /// path, cycle, torus-grid, hypercube, complete, random-regular or tree-ball.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    /// Draw edge weights uniformly from [w_lo, w_hi].
    #[arg(long, requires = "w_hi")]
    pub w_lo: Option<f64>,
    #[arg(long, requires = "w_lo")]
    pub w_hi: Option<f64>,
    /// Read the graph from a file instead of generating it.
    #[arg(long, conflicts_with = "family")]
    pub graph: Option<PathBuf>,
}

/// A graph given by file, or a family instantiated per trial seed.
pub enum GraphSource {
    File(WeightedGraph),
    Family(FamilySpec),
}

impl GraphSource {
    /// The graph for trial `t`, with the seed it was generated from.
    pub fn instance(&self, seed: u64, t: usize) -> CliResult<(u64, WeightedGraph)> {
        let s = trial_seed(seed, t as u64);
        Ok(match self {
            GraphSource::File(g) => (s, g.clone()),
            GraphSource::Family(spec) => (s, generate(&FamilySpec { seed: s, ..*spec })?),
        })
    }
}

impl GraphArgs {
    pub fn source(&self) -> CliResult<GraphSource> {
        if let Some(path) = &self.graph {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            return Ok(GraphSource::File(read_graph(&text)?));
        }
        let name = self
            .family
            .as_deref()
            .ok_or_else(|| CliError::Usage("give --family or --graph".into()))?;
        let mut obj = Map::new();
        obj.insert("family".into(), Value::from(name));
        for (key, v) in [
            ("n", self.n),
            ("d", self.d),
            ("rows", self.rows),
            ("cols", self.cols),
            ("dim", self.dim),
            ("depth", self.depth),
        ] {
            if let Some(v) = v {
                obj.insert(key.into(), Value::from(v));
            }
        }
        let family: Family = serde_json::from_value(Value::Object(obj))
            .map_err(|e| CliError::Usage(format!("family `{name}`: {e}")))?;
        let mut spec = FamilySpec::new(family);
        if let (Some(lo), Some(hi)) = (self.w_lo, self.w_hi) {
            spec = spec.with_weights(lo, hi);
        }
        Ok(GraphSource::Family(spec))
    }
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum NetChoice {
    Greedy,
    Expander,
    Both,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ModeChoice {
    Delete,
    ZeroRowsCols,
    Both,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum VariantChoice {
    Main,
    Expander,
    SecondEig,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesChoice {
    /// Simple random walk return probabilities (regular unit-weighted graphs).
    Srw,
    /// Raw moments <1_o, A^k 1_o> (any graph).
    Moment,
}

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default)]
pub struct GenArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
}

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default)]
pub struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    /// Lower end of a closed interval to count (with --hi).
    #[arg(long, requires = "hi", allow_negative_numbers = true)]
    pub lo: Option<f64>,
    #[arg(long, requires = "lo", allow_negative_numbers = true)]
    pub hi: Option<f64>,
    /// Largest n the dense solver accepts.
    #[arg(long)]
    pub cap: Option<usize>,
    /// Bound the eigenpair residuals (costs eigenvectors).
    #[arg(long)]
    pub residual: Option<bool>,
}

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default)]
pub struct NetArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub r: Option<usize>,
    /// greedy or expander.
    #[arg(long, value_enum)]
    pub method: Option<NetChoice>,
    /// Selection probability of the expander net.
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default)]
pub struct LocalNetArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub r: Option<usize>,
    /// Captain probability.
    #[arg(long)]
    pub p: Option<f64>,
    /// Cell radius.
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: Option<usize>,
    /// Take p and R from the worst-case parameter formula for the graph's
    /// maximum degree.
    #[arg(long)]
    pub theory: Option<bool>,
}

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default)]
pub struct RadDropArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<NetChoice>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Allowed negative slack, relative to max(1, λ1(G)^{2r}).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default)]
pub struct LocalGlobalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Relative tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default)]
pub struct InterlaceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    /// Vertices drawn (with repetition) into U per trial.
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeChoice>,
    #[arg(long)]
    pub cap: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default)]
pub struct FiniteParamArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    /// lambda1, lambda2 or a number.
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<NetChoice>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub cap: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default)]
pub struct ThmArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    #[arg(long, value_enum)]
    pub variant: Option<VariantChoice>,
    /// lambda1, lambda2 or a number; ignored by second-eig.
    #[arg(long)]
    pub x: Option<String>,
    /// Ignored by second-eig.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Expansion constant of the expander variant.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub cap: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default)]
pub struct TreeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long)]
    pub d: Option<usize>,
    /// Largest n in p_2n.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub half_steps: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default)]
pub struct FiniteArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
    /// Root vertex.
    #[arg(long)]
    pub o: Option<usize>,
    /// Number of steps.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub steps: Option<usize>,
    #[arg(long, value_enum)]
    pub kind: Option<SeriesChoice>,
}

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default)]
pub struct FitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long)]
    pub d: Option<usize>,
    /// Tree series length when no --input is given.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub half_steps: Option<usize>,
    /// CSV with columns n,p_2n as written by `walks tree`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// First n of the window (default N/10).
    #[arg(long)]
    pub from: Option<usize>,
    /// Last n of the window (default N).
    #[arg(long)]
    pub to: Option<usize>,
}

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default)]
pub struct RoundtripArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub half_steps: Option<usize>,
    /// θ grid is 2^-k for k in min_exp..=max_exp.
    #[arg(long)]
    pub min_exp: Option<i32>,
    #[arg(long)]
    pub max_exp: Option<i32>,
    /// Largest accepted exponent gap.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Serialize, Deserialize, Default, Debug, Clone)]
#[serde(default)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Families parameterized by n: path, cycle, complete, random-regular.
    #[arg(long, value_delimiter = ',')]
    pub families: Option<Vec<String>>,
    /// Degree of random-regular members.
    #[arg(long)]
    pub d: Option<usize>,
    /// n runs over 2^min_exp..=2^max_exp.
    #[arg(long)]
    pub min_exp: Option<u32>,
    #[arg(long)]
    pub max_exp: Option<u32>,
    #[arg(long)]
    pub cap: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
}

/// Evaluation point given as `lambda1`, `lambda2` or a number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XRule {
    Lambda1,
    Lambda2,
    Value(f64),
}

impl XRule {
    pub fn parse(text: &str) -> CliResult<Self> {
        match text {
            "lambda1" => Ok(XRule::Lambda1),
            "lambda2" => Ok(XRule::Lambda2),
            other => other
                .parse()
                .map(XRule::Value)
                .map_err(|_| CliError::Usage(format!("x must be lambda1, lambda2 or a number, got `{other}`"))),
        }
    }
}
