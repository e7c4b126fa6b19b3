//! `xorlab` command-line front end.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use xorlab::copula::CopulaParam;
use xorlab::network::Topology;
use xorlab::surface::WeightCoord;
use xorlab::trainer::TrainMode;

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "xorlab", version, about = "Copula xor families, probabilistic logic and small feedforward networks")]
pub struct Cli {
    /// Output format for results printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frank copula evaluation and fitting.
    #[command(subcommand)]
    Copula(CopulaCmd),
    /// Boolean expressions and probabilistic logic.
    #[command(subcommand)]
    Logic(LogicCmd),
    /// Least-squares fit of a linear model, optionally with an x1*x2 feature.
    Regress {
        #[arg(long)]
        data: String,
        #[arg(long)]
        product_feature: bool,
        /// Target column for multi-target datasets.
        #[arg(long)]
        target: Option<String>,
    },
    /// Network evaluation and transforms.
    #[command(subcommand)]
    Net(NetCmd),
    /// Train a network by gradient descent.
    Train(TrainArgs),
    /// Label a trained network against the xor limit functions.
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        #[arg(long, default_value_t = 21)]
        grid: usize,
    },
    /// Train from many seeds and tabulate the resulting labels.
    Sweep(SweepArgs),
    /// Error-surface projection onto a pair of weights.
    Surface(SurfaceArgs),
    /// Built-in datasets.
    #[command(subcommand)]
    Dataset(DatasetCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CopulaFn {
    And,
    Or,
    Xor,
}

#[derive(Debug, Subcommand)]
pub enum CopulaCmd {
    /// Evaluate A_s, R_s or F_s at one point.
    Eval {
        #[arg(long)]
        s: CopulaParam,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[arg(long = "fn", value_enum)]
        function: CopulaFn,
    },
    /// Find s with A_s(x, y) = p.
    SolveS {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[arg(long)]
        p: f64,
    },
    /// Tabulate a function over a lattice on [0, 1]^2 as x,y,value CSV.
    Grid {
        #[arg(long)]
        s: CopulaParam,
        #[arg(long = "fn", value_enum)]
        function: CopulaFn,
        #[arg(long, default_value_t = 21, value_parser = clap::value_parser!(u64).range(2..))]
        steps: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum LogicCmd {
    /// Compositional probability of an expression under Frank's copula.
    Prob {
        #[arg(long)]
        expr: String,
        /// Variable probabilities, e.g. a=0.5,b=0.25.
        #[arg(long, value_parser = parse_assignment)]
        assign: Assignment,
        #[arg(long)]
        s: CopulaParam,
    },
    /// Truth table of an expression.
    Table {
        #[arg(long)]
        expr: String,
    },
    /// Column frequencies of a Boolean dataset.
    Freq {
        #[arg(long)]
        data: String,
        /// Also check the and/or bounds for the first two columns.
        #[arg(long)]
        check: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum NetCmd {
    /// Evaluate a model at one input.
    Forward {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        input: Vec<f64>,
    },
    /// Fold an all-identity model into a single layer.
    Collapse {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Count weights (including biases) of a topology.
    Count {
        /// Layer sizes such as 2-9-1, optionally followed by /inp-...
        #[arg(long, value_parser = parse_layer_sizes)]
        spec: LayerSizes,
    },
}

#[derive(Debug, Args)]
pub struct TrainOpts {
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0.001)]
    pub tol: f64,
    #[arg(long, default_value = "per-sample")]
    pub mode: TrainMode,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub init_range: f64,
    /// Target column for multi-target datasets.
    #[arg(long)]
    pub target: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub spec: Topology,
    #[arg(long)]
    pub data: String,
    #[command(flatten)]
    pub opts: TrainOpts,
    /// Model file to write; run metadata goes next to it as <out>.meta.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-iteration SSE log (CSV).
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub spec: Topology,
    #[arg(long)]
    pub data: String,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub restarts: u64,
    #[command(flatten)]
    pub opts: TrainOpts,
    /// Classification tolerance.
    #[arg(long, default_value_t = 0.05)]
    pub classify_tol: f64,
    /// Per-run CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
pub struct SurfaceArgs {
    #[command(subcommand)]
    pub all: Option<SurfaceCmd>,
    #[arg(long, required = true)]
    pub model: Option<PathBuf>,
    #[arg(long, required = true)]
    pub data: Option<String>,
    /// Two weights, e.g. w1_11,w1_12.
    #[arg(long, required = true, value_parser = parse_pair)]
    pub pair: Option<(WeightCoord, WeightCoord)>,
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true, default_value = "-5,5")]
    pub range: (f64, f64),
    #[arg(long, default_value_t = 101, value_parser = clap::value_parser!(u64).range(2..))]
    pub steps: u64,
    /// Grid CSV to write; metadata goes next to it as <out>.meta.json.
    #[arg(long, required = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SurfaceCmd {
    /// Write a grid for every pair of weights.
    AllPairs {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: String,
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true, default_value = "-5,5")]
        range: (f64, f64),
        #[arg(long, default_value_t = 101, value_parser = clap::value_parser!(u64).range(2..))]
        steps: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum DatasetCmd {
    /// Write a built-in dataset as CSV.
    Emit {
        #[arg(long)]
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// List built-in datasets.
    List,
}

pub type Assignment = Vec<(String, f64)>;

#[derive(Debug, Clone)]
pub struct LayerSizes(pub Vec<usize>);

fn parse_layer_sizes(text: &str) -> Result<LayerSizes, String> {
    commands::parse_sizes(text).map(LayerSizes)
}

fn parse_assignment(text: &str) -> Result<Assignment, String> {
    text.split(',')
        .map(|part| {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| format!("`{part}` is not of the form name=value"))?;
            let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn parse_pair(text: &str) -> Result<(WeightCoord, WeightCoord), String> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| format!("`{text}` is not a pair like w1_11,w1_12"))?;
    let a = a.parse::<WeightCoord>().map_err(|e| e.to_string())?;
    let b = b.parse::<WeightCoord>().map_err(|e| e.to_string())?;
    Ok((a, b))
}

fn parse_range(text: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = text
        .split_once(',')
        .ok_or_else(|| format!("`{text}` is not a range like -5,5"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("`{lo}` is not a number"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("`{hi}` is not a number"))?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(format!("range [{lo}, {hi}] must be finite with lo < hi"));
    }
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match commands::run(&cli) {
        Ok(done) => {
            print!("{}", done.text);
            if done.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
