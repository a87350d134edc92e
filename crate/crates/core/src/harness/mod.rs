//! Experiment drivers behind the command-line workflows: ψ-grid
//! benchmarking, 2-D score grids and runtime scaling.

pub mod bench;
pub mod grid;
pub mod scalability;

pub use bench::{run_bench, BenchDataset, BenchOutcome, BenchPlan, BenchRow};
pub use grid::{heatmap_pgm, score_grid, GridCell, GridSpec};
pub use scalability::{run_scalability, RuntimeRow, ScalabilityPlan};

/// `2^1 ..= 2^8`.
pub const DEFAULT_PSI_GRID: [usize; 8] = [2, 4, 8, 16, 32, 64, 128, 256];

pub(crate) fn fmt_f64(v: f64) -> String {
    v.to_string()
}
