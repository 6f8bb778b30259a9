use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "parrondo", version, about = "Exact and simulated mean profits for cooperative Parrondo games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Exact mean profit per turn for one ring size and schedule.
    Mean(Options),
    /// Means over a range of ring sizes, one column per pattern.
    Table(Options),
    /// Simulate the ensemble game and compare with the exact mean.
    Simulate(Options),
    /// Scan the (p0, p3, p1) cube for Parrondo and anti-Parrondo points.
    Region(Options),
    /// Evaluate the four ergodicity conditions, or estimate their volumes.
    Ergodicity(Options),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupChoice {
    Auto,
    Cyclic,
    Dihedral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Rational,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initial {
    Random,
    Losers,
    Winners,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Number of players on the ring.
    #[arg(long)]
    pub n: Option<usize>,
    /// Inclusive range of ring sizes, e.g. 3:10.
    #[arg(long = "n-range", value_name = "A:B")]
    pub n_range: Option<String>,
    /// p0,p1,p2,p3 (or p0,p1,p3 with p2 = p1); decimals or fractions like 4/25.
    #[arg(long, value_name = "P0,P1,P2,P3")]
    pub params: Option<String>,
    /// Periodic pattern A^r B^s.
    #[arg(long, value_name = "R,S")]
    pub pattern: Option<String>,
    /// Pure game B (`--game b`).
    #[arg(long, value_name = "b")]
    pub game: Option<String>,
    /// Random mixture playing A with probability gamma.
    #[arg(long, value_name = "GAMMA")]
    pub mixture: Option<String>,
    #[arg(long, value_enum)]
    pub group: Option<GroupChoice>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Number of turns; scientific notation such as 1e7 is accepted.
    #[arg(long)]
    pub turns: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Independent replications for the strong-law check.
    #[arg(long)]
    pub replications: Option<usize>,
    /// Reference mean for the strong-law check instead of the exact one.
    #[arg(long, allow_hyphen_values = true)]
    pub reference: Option<f64>,
    #[arg(long, value_enum)]
    pub initial: Option<Initial>,
    /// Grid cells per axis.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Box to scan, as lo_p0,lo_p3,lo_p1,hi_p0,hi_p3,hi_p1.
    #[arg(long, value_name = "LO0,LO3,LO1,HI0,HI3,HI1")]
    pub subcube: Option<String>,
    /// Evaluate every grid point at its image under (p0,p1,p3) -> (1-p3,1-p1,1-p0).
    #[arg(long)]
    pub reflect: bool,
    /// Monte Carlo samples for condition volumes.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}
