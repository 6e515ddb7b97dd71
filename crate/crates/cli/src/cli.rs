use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "capgap", version, about = "Capacitance stencils, band gaps and certified gap solitons")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Args)]
pub struct Global {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for parallel stages (0: all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Seed for randomized probes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacitance stencil of a disk geometry via cell problems.
    Kernel {
        geometry: PathBuf,
        /// Overrides `bz_grid_m`.
        #[arg(long)]
        bz_grid: Option<usize>,
        /// Overrides `stencil_radius`.
        #[arg(long)]
        stencil_radius: Option<usize>,
        /// Overrides `grid_n`.
        #[arg(long)]
        grid_n: Option<usize>,
        /// Also compute the exterior Laplacian spectrum floor.
        #[arg(long)]
        floor: bool,
    },
    /// Band structure CSV on an M×M grid.
    Bands {
        stencil: PathBuf,
        #[arg(long, default_value_t = 64)]
        bz_grid: usize,
    },
    /// Gap report, optionally with spectral projector kernels.
    Gaps {
        stencil: PathBuf,
        #[arg(long, default_value_t = 64)]
        bz_grid: usize,
        /// Export the P₊ kernel on a period-k window for each qualifying gap.
        #[arg(long)]
        projector_k: Option<usize>,
    },
    /// Solve and certify a soliton problem.
    Soliton { problem: PathBuf },
    /// Recompute every check of a result from raw inputs.
    Verify { result: PathBuf, problem: PathBuf },
}
