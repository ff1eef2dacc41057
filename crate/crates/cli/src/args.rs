use std::path::PathBuf;

use charpoly_cubature::cubature::Tolerances;
use charpoly_cubature::GaussRat;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "cubature", version, about = "Orthogonal polynomials from centrohermitian pencils and their Gaussian cubature rules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the exact identity suites up to a degree.
    Identities(SuiteArgs),
    /// Dump a polynomial family table.
    Family(FamilyArgs),
    /// Print the moments L(z^j zb^k) for j + k <= m-max.
    Moments(SuiteArgs),
    /// Compute cubature nodes and weights.
    Nodes(RuleArgs),
    /// Build (or re-read) a rule and check it against the moments.
    CubatureVerify(VerifyArgs),
    /// Plot the nodes as SVG.
    Plot(RuleArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Params {
    /// Parameter a, e.g. `3/2`, `1+i`, `0.5-2i`.
    #[arg(long, allow_hyphen_values = true)]
    pub a: GaussRat,
    /// Parameter c.
    #[arg(long, allow_hyphen_values = true)]
    pub c: GaussRat,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Args, Debug)]
pub struct SuiteArgs {
    #[arg(long)]
    pub m_max: usize,
    #[command(flatten)]
    pub params: Params,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Q,
    P,
    U,
}

#[derive(Args, Debug)]
pub struct FamilyArgs {
    #[arg(long)]
    pub m_max: usize,
    #[command(flatten)]
    pub params: Params,
    /// `q` for Q(a, c), `p` for the P-family at c, `u` for Chebyshev U.
    #[arg(long, value_enum, default_value = "q")]
    pub kind: Kind,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Clone)]
pub struct TolArgs {
    #[arg(long)]
    pub tol_commutator: Option<f64>,
    #[arg(long)]
    pub tol_residual: Option<f64>,
    #[arg(long)]
    pub tol_exactness: Option<f64>,
    #[arg(long)]
    pub tol_weights: Option<f64>,
    #[arg(long)]
    pub tol_vanishing: Option<f64>,
}

impl TolArgs {
    pub fn resolve(&self) -> Tolerances {
        let mut t = Tolerances::default();
        if let Some(v) = self.tol_commutator {
            t.commutator = v;
        }
        if let Some(v) = self.tol_residual {
            t.joint_residual = v;
        }
        if let Some(v) = self.tol_exactness {
            t.exactness = v;
        }
        if let Some(v) = self.tol_weights {
            t.weight_crosscheck = v;
        }
        if let Some(v) = self.tol_vanishing {
            t.vanishing = v;
        }
        t
    }
}

#[derive(Args, Debug)]
pub struct RuleArgs {
    #[arg(long)]
    pub m: usize,
    #[command(flatten)]
    pub params: Params,
    #[command(flatten)]
    pub output: Output,
    #[command(flatten)]
    pub tol: TolArgs,
    /// Emit nodes even outside the Gaussian regime (no realness guarantee).
    #[arg(long)]
    pub force: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub m: usize,
    #[command(flatten)]
    pub params: Params,
    #[command(flatten)]
    pub output: Output,
    #[command(flatten)]
    pub tol: TolArgs,
    /// Verify the nodes and weights of this CSV rule file instead.
    #[arg(long)]
    pub rule: Option<PathBuf>,
}
