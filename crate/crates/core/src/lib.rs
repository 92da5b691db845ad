//! Desk-scale simulation of which-way Mach-Zehnder interferometry on
//! superconducting-qubit lattices.
//!
//! The crate models a photon hopping through a lattice of two-level sites
//! (the hard-core-boson limit of a Bose-Hubbard chip), with a dispersively
//! monitored site acting as the which-way detector. It provides:
//!
//! * [`qlinalg`] — dense complex linear algebra: Kronecker products,
//!   Hermitian eigendecomposition, partial trace, matrix exponentials.
//! * [`device`] — the device model (qubit specs, coupling graph, readout
//!   parameters), excitation-sector bases, Hamiltonian builders, and
//!   collapse operators.
//! * [`lindblad`] — a deterministic Lindblad master-equation integrator
//!   over piecewise-constant staged schedules.
//! * [`sme`] — a homodyne stochastic-master-equation trajectory solver for
//!   continuous monitoring, plus deterministic ensemble averaging.
//! * [`readout`] — dispersive-readout physics: pointer states, photon
//!   number, Stark shift, measurement-induced dephasing, Gaussian POVMs.
//! * [`qinfo`] — concurrence, single-excitation projection, purity, von
//!   Neumann entropy, and the complementarity bounds tying them to fringe
//!   visibility.
//! * [`experiments`] — drivers composing the engines into complete runs:
//!   staged 4-qubit interferometry with fringe scans, the 12-qubit
//!   continuous-measurement Zeno sweep, simulated tomography, and the
//!   Nelder-Mead frequency-alignment loop.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats, and the
//! command-line front end live in the companion `mzsim-cli` crate.
//!
//! Unit conventions: frequencies and rates cross public APIs in Hz (cycles
//! per second, the "/2π" convention) and are converted to angular units
//! (rad/s) inside Hamiltonian and collapse-operator builders. Times are
//! seconds everywhere.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod device;
pub mod error;
pub mod experiments;
pub mod lindblad;
pub mod optim;
pub mod qinfo;
pub mod qlinalg;
pub mod quad;
pub mod readout;
pub mod sme;

pub use error::{Error, Result};
pub use qlinalg::{ComplexMatrix, C64};
