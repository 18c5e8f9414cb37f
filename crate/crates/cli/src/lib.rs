//! Command-line front end for `closing-core`.

pub mod commands;
pub mod mapfile;
pub mod report;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use commands::{run, CliError, Run};

#[derive(Debug, Parser)]
#[command(name = "closing", version, about = "Flux, action and periodic-orbit tools for area-preserving torus maps")]
pub struct Cli {
    /// Torus quadrature points per axis.
    #[arg(long, global = true, default_value_t = 512)]
    pub grid: usize,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub json_out: Option<PathBuf>,
    /// Write orbits as CSV.
    #[arg(long, global = true)]
    pub csv_out: Option<PathBuf>,
    /// Include wall-clock timings (makes reports non-reproducible).
    #[arg(long, global = true)]
    pub timings: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormArg {
    Polar,
    NegVDu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlacementArg {
    Single,
    PulledBack,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Flux vector, loop fluxes and exactness.
    Flux { map: PathBuf },
    /// Action function and total action of a disk-supported map.
    Action {
        map: PathBuf,
        /// `cx,cy,r` or the name of a disk in the map file; defaults to the
        /// first twist's disk.
        #[arg(long)]
        disk: Option<String>,
        #[arg(long, value_enum, default_value_t = FormArg::Polar)]
        form: FormArg,
    },
    /// Periodic points of a given period.
    Orbits {
        map: PathBuf,
        #[arg(long)]
        period: u32,
        /// Restrict to a disk (`cx,cy,r` or a name); whole torus otherwise.
        #[arg(long)]
        disk: Option<String>,
        /// Newton seeds per axis.
        #[arg(long, default_value_t = 64)]
        seeds: usize,
    },
    /// Closing scan: rationalize flux, then twist in a disk until a periodic point appears.
    Scan {
        map: PathBuf,
        #[arg(long)]
        disk: String,
        #[arg(long, default_value_t = 20)]
        q_max: u32,
        #[arg(long, default_value_t = 0.05)]
        c0: f64,
        #[arg(long, default_value_t = 200)]
        t_steps: usize,
        #[arg(long, default_value_t = 32)]
        seeds: usize,
        #[arg(long, value_enum, default_value_t = PlacementArg::Single)]
        placement: PlacementArg,
        /// Radius halvings allowed before giving up on disjointness.
        #[arg(long, default_value_t = 6)]
        max_shrinks: u32,
    },
    /// Perturb by band shears so that the flux becomes rational.
    Rationalize {
        map: PathBuf,
        #[arg(long, default_value_t = 20)]
        q_max: u32,
        #[arg(long, default_value_t = 0.05)]
        c0: f64,
        /// Horizontal shear band `lo,hi` in y.
        #[arg(long)]
        hband: Option<String>,
        /// Vertical shear band `lo,hi` in x.
        #[arg(long)]
        vband: Option<String>,
        /// Write the perturbed map file here.
        #[arg(long)]
        map_out: Option<PathBuf>,
    },
    /// Invariant checks on a map file and a seeded random chain.
    Verify {
        map: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        depth: usize,
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
}
