//! Frequency-alignment loop: recover Z-control crosstalk offsets by
//! matching simulated populations against a hidden-ground-truth device.
//!
//! The mock hardware applies `actual_offset = M u + e` to the stage
//! frequencies, where `u` holds the commanded per-qubit offsets (the
//! optimization variables), `M` is a diagonally dominant crosstalk matrix,
//! and `e` is an injected miscalibration. The cost compares populations at
//! fixed probe times against a clean reference simulation, and a
//! Nelder-Mead loop drives it to zero.
//!
//! Identifiability: each cost exposes only as many scalars as it has probe
//! populations, and a uniform shift of every working qubit leaves the
//! dynamics invariant. Problems therefore optimize a subset of qubits
//! (`free`), leaving at least one working qubit as the frequency anchor.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use core::cell::Cell;

use crate::device::{DeviceModel, SectorBasis, Stage, build_hcb, collapse_operators};
use crate::error::{Error, Result};
use crate::lindblad::{DensityOperator, EvolveOptions, evolve_stage};
use crate::optim::{NelderMeadOptions, OptimResult, nelder_mead};

/// Which probe experiment the cost function runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignmentCost {
    /// 4-qubit beamsplit stage; cost = |dP_Q1| + |dP_Q2| at the arrival peak.
    Mz4Stage1,
    /// 4-qubit merge stage from |0110>; cost = |dP_Q3| at its peak.
    Mz4Stage4,
    /// 12-qubit run; cost = |dP_Q4| + |dP_Q8| + |dP_Q15| at their peaks.
    Mz12,
}

/// One alignment task over a mock device with hidden crosstalk.
#[derive(Debug, Clone)]
pub struct AlignmentProblem {
    pub device: DeviceModel,
    pub cost: AlignmentCost,
    /// Crosstalk matrix M (per-position); actual = M u + e.
    pub crosstalk: Vec<Vec<f64>>,
    /// Hidden miscalibration e in Hz, per position.
    pub injected_shifts_hz: Vec<f64>,
    /// Positions whose offsets the optimizer may command.
    pub free: Vec<usize>,
    /// Cost-evaluation budget for the simplex loop.
    pub budget: usize,
}

impl AlignmentProblem {
    pub fn new(
        device: DeviceModel,
        cost: AlignmentCost,
        crosstalk: Vec<Vec<f64>>,
        injected_shifts_hz: Vec<f64>,
        free: Vec<usize>,
        budget: usize,
    ) -> Result<Self> {
        let n = device.n_qubits();
        if crosstalk.len() != n || crosstalk.iter().any(|row| row.len() != n) {
            return Err(Error::Shape(format!("crosstalk matrix must be {n}x{n}")));
        }
        for (i, row) in crosstalk.iter().enumerate() {
            let off: f64 = row
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, v)| v.abs())
                .sum();
            if row[i].abs() <= off {
                return Err(Error::Domain(format!(
                    "crosstalk matrix is not diagonally dominant at row {i}"
                )));
            }
        }
        if injected_shifts_hz.len() != n {
            return Err(Error::Shape(format!("injected shifts must have {n} entries")));
        }
        if free.is_empty() || free.iter().any(|&p| p >= n) {
            return Err(Error::Index("free positions must be a nonempty subset".into()));
        }
        if budget == 0 {
            return Err(Error::Domain("alignment budget must be positive".into()));
        }
        Ok(Self { device, cost, crosstalk, injected_shifts_hz, free, budget })
    }

    /// Convenience: injects `e = -M u_true` for a compensable ground truth
    /// supported on the free positions.
    pub fn with_compensable_shifts(
        device: DeviceModel,
        cost: AlignmentCost,
        crosstalk: Vec<Vec<f64>>,
        true_offsets_hz: &[(usize, f64)],
        budget: usize,
    ) -> Result<Self> {
        let n = device.n_qubits();
        let mut u_true = vec![0.0; n];
        let mut free = Vec::new();
        for &(pos, hz) in true_offsets_hz {
            if pos >= n {
                return Err(Error::Index(format!("position {pos} out of range")));
            }
            u_true[pos] = hz;
            free.push(pos);
        }
        let mut injected = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                injected[i] -= crosstalk[i][j] * u_true[j];
            }
        }
        Self::new(device, cost, crosstalk, injected, free, budget)
    }

    /// The commanded offsets that exactly cancel the injection, when the
    /// injection lies in the range of M restricted to the free positions.
    pub fn compensating_offsets_hz(&self) -> Vec<f64> {
        // Solve M u = -e on the full space (M is small and well conditioned).
        let n = self.device.n_qubits();
        let mut m: Vec<Vec<f64>> = self.crosstalk.clone();
        let mut b: Vec<f64> = self.injected_shifts_hz.iter().map(|&e| -e).collect();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
                .unwrap();
            m.swap(col, pivot);
            b.swap(col, pivot);
            for row in (col + 1)..n {
                let f = m[row][col] / m[col][col];
                for k in col..n {
                    m[row][k] -= f * m[col][k];
                }
                b[row] -= f * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let mut acc = b[row];
            for k in (row + 1)..n {
                acc -= m[row][k] * x[k];
            }
            x[row] = acc / m[row][row];
        }
        x
    }
}

/// Identity plus a uniform off-diagonal coupling; panics if not diagonally
/// dominant (`|off_diag| (n-1) >= 1`).
pub fn default_crosstalk(n: usize, off_diag: f64) -> Vec<Vec<f64>> {
    assert!(off_diag.abs() * (n as f64 - 1.0) < 1.0, "crosstalk must stay diagonally dominant");
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { off_diag }).collect())
        .collect()
}

/// Outcome of one alignment run.
#[derive(Debug, Clone)]
pub struct AlignmentOutcome {
    /// Commanded offsets per position (zero outside the free set).
    pub offsets_hz: Vec<f64>,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub evaluations: usize,
    /// Residual actual detunings M u + e per position.
    pub residual_detuning_hz: Vec<f64>,
    /// Best cost after each evaluation.
    pub history: Vec<f64>,
}

struct Probe {
    base_frequencies_hz: Vec<f64>,
    initial: u32,
    basis: SectorBasis,
    /// (observed position, probe time).
    observed: Vec<(usize, f64)>,
    reference: Vec<f64>,
    duration_s: f64,
}

fn populations_at(
    device: &DeviceModel,
    frequencies_hz: &[f64],
    basis: &SectorBasis,
    initial: u32,
    duration_s: f64,
    observed: &[(usize, f64)],
) -> Result<Vec<f64>> {
    let stage = Stage::new("probe", duration_s, frequencies_hz.to_vec());
    let h = build_hcb(device, frequencies_hz, basis, frequencies_hz[0])?;
    let c_ops = collapse_operators(device, &stage, basis)?;
    let idx = basis
        .index_of(initial)
        .ok_or_else(|| Error::Sector("probe initial state outside basis".into()))?;
    let rho0 = DensityOperator::basis_state(basis.dim(), idx)?;
    let opts = EvolveOptions { dt_output_s: 1e-9, ..Default::default() };
    let trace = evolve_stage(&h, &c_ops, &rho0, duration_s, &opts)?;
    let mut out = Vec::with_capacity(observed.len());
    for &(pos, t) in observed {
        let k = trace.index_at(t);
        let diag = basis.number_diag(pos);
        let m = trace.states[k].matrix();
        out.push(diag.iter().enumerate().map(|(i, &d)| d * m[(i, i)].re).sum());
    }
    Ok(out)
}

fn build_probe(problem: &AlignmentProblem) -> Result<Probe> {
    let device = &problem.device;
    let (base, initial_labels, basis, watch, duration): (Vec<f64>, Vec<usize>, SectorBasis, Vec<usize>, f64) =
        match problem.cost {
            AlignmentCost::Mz4Stage1 => (
                vec![5.820e9, 5.820e9, 5.820e9, 6.190e9],
                vec![0],
                SectorBasis::new(device.n_qubits(), 1)?,
                vec![1, 2],
                120e-9,
            ),
            AlignmentCost::Mz4Stage4 => (
                vec![6.165e9, 5.820e9, 5.820e9, 5.820e9],
                vec![1, 2],
                SectorBasis::new(device.n_qubits(), 2)?,
                vec![3],
                150e-9,
            ),
            AlignmentCost::Mz12 => (
                vec![5.82e9; 12],
                vec![0],
                SectorBasis::new(device.n_qubits(), 1)?,
                vec![4, 8, 15],
                200e-9,
            ),
        };
    if base.len() != device.n_qubits() {
        return Err(Error::Shape(format!(
            "cost kind expects {} qubits, device has {}",
            base.len(),
            device.n_qubits()
        )));
    }
    let initial_positions: Vec<usize> = initial_labels
        .iter()
        .map(|&l| device.position(l))
        .collect::<Result<_>>()?;
    let initial = basis.state_from_positions(&initial_positions)?;

    // Reference run on the clean device: probe each watched qubit at the
    // time its population peaks.
    let stage = Stage::new("probe", duration, base.clone());
    let h = build_hcb(device, &base, &basis, base[0])?;
    let c_ops = collapse_operators(device, &stage, &basis)?;
    let rho0 = DensityOperator::basis_state(basis.dim(), basis.index_of(initial).unwrap())?;
    let opts = EvolveOptions { dt_output_s: 1e-9, ..Default::default() };
    let trace = evolve_stage(&h, &c_ops, &rho0, duration, &opts)?;

    let mut observed = Vec::new();
    let mut reference = Vec::new();
    for &label in &watch {
        let pos = device.position(label)?;
        let diag = basis.number_diag(pos);
        let series: Vec<f64> = trace
            .states
            .iter()
            .map(|s| diag.iter().enumerate().map(|(i, &d)| d * s.matrix()[(i, i)].re).sum())
            .collect();
        let (argmax, &peak) = series
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .expect("nonempty probe trace");
        observed.push((pos, trace.times_s[argmax]));
        reference.push(peak);
    }
    Ok(Probe {
        base_frequencies_hz: base,
        initial,
        basis,
        observed,
        reference,
        duration_s: duration,
    })
}

/// Minimizes the population-mismatch cost over the free offsets.
pub fn align_frequencies(problem: &AlignmentProblem) -> Result<AlignmentOutcome> {
    let probe = build_probe(problem)?;
    let n = problem.device.n_qubits();
    let device = problem.device.clone();

    let apply = |u_free_mhz: &[f64]| -> Vec<f64> {
        // Commanded offsets in Hz on the full position space.
        let mut u = vec![0.0; n];
        for (&pos, &v) in problem.free.iter().zip(u_free_mhz) {
            u[pos] = v * 1e6;
        }
        u
    };
    let actual_frequencies = |u: &[f64]| -> Vec<f64> {
        let mut f = probe.base_frequencies_hz.clone();
        for i in 0..n {
            let mut mix = problem.injected_shifts_hz[i];
            for j in 0..n {
                mix += problem.crosstalk[i][j] * u[j];
            }
            f[i] += mix;
        }
        f
    };

    let failure: Cell<Option<Error>> = Cell::new(None);
    let mut cost_fn = |x: &[f64]| -> f64 {
        let freqs = actual_frequencies(&apply(x));
        match populations_at(
            &device,
            &freqs,
            &probe.basis,
            probe.initial,
            probe.duration_s,
            &probe.observed,
        ) {
            Ok(p) => p
                .iter()
                .zip(&probe.reference)
                .map(|(got, want)| (got - want).abs())
                .sum(),
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        }
    };

    let start = vec![0.0; problem.free.len()];
    let initial_cost = cost_fn(&start);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let opts = NelderMeadOptions {
        budget: problem.budget,
        init_step: 0.3, // MHz
        simplex_tol: 1e-9,
        cost_spread_tol: 1e-14,
    };
    let OptimResult { point, cost, evaluations, history } =
        match nelder_mead(&mut cost_fn, &start, &opts) {
            Ok(r) => r,
            Err(e) => return Err(failure.take().unwrap_or(e)),
        };

    let offsets_hz = apply(&point);
    let mut residual = vec![0.0; n];
    for i in 0..n {
        residual[i] = problem.injected_shifts_hz[i];
        for j in 0..n {
            residual[i] += problem.crosstalk[i][j] * offsets_hz[j];
        }
    }
    Ok(AlignmentOutcome {
        offsets_hz,
        initial_cost,
        final_cost: cost,
        evaluations,
        residual_detuning_hz: residual,
        history,
    })
}
