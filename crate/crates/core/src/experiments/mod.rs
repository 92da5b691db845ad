//! Experiment drivers composing the engines: staged 4-qubit Mach-Zehnder
//! runs with fringe scans, the continuously monitored 12-qubit Zeno sweep,
//! simulated tomography, and the frequency-alignment loop.

mod align;
mod mz12;
mod mz4;
pub mod presets;
mod tomo;

pub use align::{
    AlignmentCost, AlignmentOutcome, AlignmentProblem, align_frequencies, default_crosstalk,
};
pub use mz12::{
    Mz12Mode, Mz12Options, ZenoSweepResult, concurrence_series, mz12_ensemble_chunk,
    mz12_sme_inputs, run_mz12, zeno_metrics, ENSEMBLE_CHUNK,
};
pub use mz4::{FringeFit, FringeScan, fit_fringe, run_mz4, run_mz4_tomography};
pub use tomo::{reconstruct_exact, simulate_tomography};
