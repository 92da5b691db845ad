//! Deterministic Lindblad master-equation integrator over staged schedules.
//!
//! The right-hand side is
//! `drho/dt = -i[H, rho] + sum_k (C_k rho C_k^+ - 1/2 {C_k^+ C_k, rho})`
//! with `H` in angular units. Integration uses an embedded Dormand-Prince
//! 5(4) pair directly on the density matrix; at the dimensions this crate
//! targets a superoperator representation would only add bookkeeping.
//!
//! Dissipators are compiled once per stage: diagonal collapse operators
//! (dephasing) and the diagonal anticommutator parts fold into a single
//! elementwise coefficient mask, and the remaining `C rho C^+` terms run
//! over sparse triplets. [`lindblad_rhs`] keeps an independent dense-matmul
//! route that the compiled path is tested against.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::device::{DeviceModel, Schedule, SectorBasis, collapse_operators, build_hcb};
use crate::error::{Error, Result};
use crate::qlinalg::{C64, ComplexMatrix, eigh};

/// Sector-resolved density operator: Hermitian, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity and unit trace (1e-9). Positivity is not
    /// re-diagonalized here; engines and tests check it where it matters.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape("density operator must be square".into()));
        }
        matrix.check_finite()?;
        if matrix.hermiticity_error() > 1e-9 * matrix.frobenius_norm().max(1.0) {
            return Err(Error::Shape("density operator is not Hermitian within 1e-9".into()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(Error::Domain(format!("density operator trace {tr} is not 1")));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    /// Normalized projector onto the given amplitudes.
    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        Ok(Self { matrix: ComplexMatrix::outer(amplitudes)? })
    }

    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Index(format!("basis state {index} out of range for dim {dim}")));
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(index, index)] = C64::ONE;
        Ok(Self { matrix: m })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace_real(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(eigh(&self.matrix.hermitized())?.eigenvalues[0])
    }

    /// Trace distance `1/2 ||rho - sigma||_1`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::Shape("trace distance needs equal dimensions".into()));
        }
        let diff = (&self.matrix - &other.matrix).hermitized();
        let eig = eigh(&diff)?;
        Ok(0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
    }
}

/// Time grid, state snapshots, and named real observable series.
#[derive(Debug, Clone, Default)]
pub struct EvolutionTrace {
    pub times_s: Vec<f64>,
    pub states: Vec<DensityOperator>,
    pub observables: BTreeMap<String, Vec<f64>>,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.times_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times_s.is_empty()
    }

    pub fn final_state(&self) -> Result<&DensityOperator> {
        self.states.last().ok_or_else(|| Error::Numeric("empty evolution trace".into()))
    }

    pub fn observable(&self, name: &str) -> Result<&[f64]> {
        self.observables
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Index(format!("no observable named '{name}'")))
    }

    /// Index of the snapshot closest to `t_s`.
    pub fn index_at(&self, t_s: f64) -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (i, &t) in self.times_s.iter().enumerate() {
            let d = (t - t_s).abs();
            if d < dist {
                dist = d;
                best = i;
            }
        }
        best
    }
}

/// Integrator controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Snapshot spacing.
    pub dt_output_s: f64,
    /// Optional cap on the internal adaptive step.
    pub dt_max_s: Option<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, dt_output_s: 1e-9, dt_max_s: None }
    }
}

impl EvolveOptions {
    /// Tight tolerances for analytic cross-checks.
    pub fn strict() -> Self {
        Self { rtol: 1e-11, atol: 1e-13, ..Self::default() }
    }
}

const TRACE_DRIFT_LIMIT: f64 = 1e-7;

/// Lindblad right-hand side by dense matrix products. This is the reference
/// route; the integrator uses the compiled plan below.
pub fn lindblad_rhs(
    h: &ComplexMatrix,
    c_ops: &[ComplexMatrix],
    rho: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    check_dims(h, c_ops, rho.rows())?;
    let minus_i = C64::new(0.0, -1.0);
    let mut out = (&(h * rho) - &(rho * h)).scaled(minus_i);
    for c in c_ops {
        let cd = c.dagger();
        let cdc = &cd * c;
        let sandwich = &(c * rho) * &cd;
        let anti = &(&cdc * rho) + &(rho * &cdc);
        out = &out + &(&sandwich - &anti.scaled(C64::new(0.5, 0.0)));
    }
    Ok(out)
}

fn check_dims(h: &ComplexMatrix, c_ops: &[ComplexMatrix], dim: usize) -> Result<()> {
    if !h.is_square() || h.rows() != dim {
        return Err(Error::Shape(format!(
            "Hamiltonian is {}x{}, state dimension is {dim}",
            h.rows(),
            h.cols()
        )));
    }
    if h.hermiticity_error() > 1e-9 * h.frobenius_norm().max(1.0) {
        return Err(Error::Shape("Hamiltonian is not Hermitian".into()));
    }
    for c in c_ops {
        if !c.is_square() || c.rows() != dim {
            return Err(Error::Shape(format!(
                "collapse operator is {}x{}, state dimension is {dim}",
                c.rows(),
                c.cols()
            )));
        }
    }
    Ok(())
}

/// Dissipator compiled for repeated evaluation.
pub(crate) struct CollapsePlan {
    dim: usize,
    /// Elementwise mask: diagonal dissipators plus every diagonal
    /// anticommutator term, applied as out += mask .* rho.
    mask: Option<ComplexMatrix>,
    /// Sparse C rho C^+ terms (ops that are not purely diagonal).
    sparse: Vec<Vec<(usize, usize, C64)>>,
    /// Dense fallbacks: (C, C^+C) for operators with non-diagonal C^+C.
    dense: Vec<(ComplexMatrix, ComplexMatrix)>,
}

impl CollapsePlan {
    pub(crate) fn new(c_ops: &[ComplexMatrix], dim: usize) -> Result<Self> {
        let mut mask: Option<ComplexMatrix> = None;
        let mut sparse = Vec::new();
        let mut dense = Vec::new();
        let add_mask = |f: &mut dyn FnMut(usize, usize) -> C64, dim: usize,
                        mask: &mut Option<ComplexMatrix>| {
            let m = mask.get_or_insert_with(|| ComplexMatrix::zeros(dim, dim));
            for i in 0..dim {
                for j in 0..dim {
                    m[(i, j)] += f(i, j);
                }
            }
        };
        for c in c_ops {
            if !c.is_square() || c.rows() != dim {
                return Err(Error::Shape("collapse operator dimension mismatch".into()));
            }
            let mut triplets = Vec::new();
            let mut diagonal = true;
            for i in 0..dim {
                for j in 0..dim {
                    let v = c[(i, j)];
                    if v != C64::ZERO {
                        if i != j {
                            diagonal = false;
                        }
                        triplets.push((i, j, v));
                    }
                }
            }
            if diagonal {
                // D[diag d] rho = (d_i d_j^* - (|d_i|^2 + |d_j|^2)/2) rho.
                let mut d = vec![C64::ZERO; dim];
                for &(i, _, v) in &triplets {
                    d[i] = v;
                }
                add_mask(
                    &mut |i, j| d[i] * d[j].conj()
                        - C64::new(0.5 * (d[i].norm_sqr() + d[j].norm_sqr()), 0.0),
                    dim,
                    &mut mask,
                );
                continue;
            }
            let cdc = &c.dagger() * c;
            let mut cdc_diagonal = true;
            'scan: for i in 0..dim {
                for j in 0..dim {
                    if i != j && cdc[(i, j)].norm() > 1e-300 {
                        cdc_diagonal = false;
                        break 'scan;
                    }
                }
            }
            if cdc_diagonal {
                let g: Vec<f64> = (0..dim).map(|i| cdc[(i, i)].re).collect();
                add_mask(
                    &mut |i, j| C64::new(-0.5 * (g[i] + g[j]), 0.0),
                    dim,
                    &mut mask,
                );
                sparse.push(triplets);
            } else {
                dense.push((c.clone(), cdc));
            }
        }
        Ok(Self { dim, mask, sparse, dense })
    }

    /// out += dissipator(rho); `tmp` is scratch of the same dimension.
    pub(crate) fn accumulate(
        &self,
        rho: &ComplexMatrix,
        out: &mut ComplexMatrix,
        tmp: &mut ComplexMatrix,
    ) {
        if let Some(mask) = &self.mask {
            let (o, m, r) = (out.data_mut(), mask.data(), rho.data());
            for ((o, &m), &r) in o.iter_mut().zip(m).zip(r) {
                *o += m * r;
            }
        }
        for triplets in &self.sparse {
            for &(i, j, v) in triplets {
                for &(k, l, w) in triplets {
                    out[(i, k)] += v * w.conj() * rho[(j, l)];
                }
            }
        }
        for (c, cdc) in &self.dense {
            ComplexMatrix::matmul_into(c, rho, tmp);
            let crho = tmp.clone();
            ComplexMatrix::matmul_into(&crho, &c.dagger(), tmp);
            for (o, &t) in out.data_mut().iter_mut().zip(tmp.data()) {
                *o += t;
            }
            ComplexMatrix::matmul_into(cdc, rho, tmp);
            for (o, &t) in out.data_mut().iter_mut().zip(tmp.data()) {
                *o -= 0.5 * t;
            }
            ComplexMatrix::matmul_into(rho, cdc, tmp);
            for (o, &t) in out.data_mut().iter_mut().zip(tmp.data()) {
                *o -= 0.5 * t;
            }
        }
        let _ = self.dim;
    }
}

/// Compiled right-hand side: commutator plus dissipator plan.
pub(crate) struct LindbladRhs {
    h: ComplexMatrix,
    plan: CollapsePlan,
    tmp: ComplexMatrix,
}

impl LindbladRhs {
    pub(crate) fn new(h: &ComplexMatrix, c_ops: &[ComplexMatrix], dim: usize) -> Result<Self> {
        check_dims(h, c_ops, dim)?;
        Ok(Self { h: h.clone(), plan: CollapsePlan::new(c_ops, dim)?, tmp: ComplexMatrix::zeros(dim, dim) })
    }

    pub(crate) fn eval(&mut self, rho: &ComplexMatrix, out: &mut ComplexMatrix) {
        // out = -i (h rho - rho h)
        ComplexMatrix::matmul_into(&self.h, rho, &mut self.tmp);
        ComplexMatrix::matmul_into(rho, &self.h, out);
        let minus_i = C64::new(0.0, -1.0);
        for (o, &t) in out.data_mut().iter_mut().zip(self.tmp.data()) {
            *o = minus_i * (t - *o);
        }
        let plan = &self.plan;
        plan.accumulate(rho, out, &mut self.tmp);
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order minus fourth-order weights (error estimate uses k1..k7).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Dopri5 {
    k: Vec<ComplexMatrix>,
    ytmp: ComplexMatrix,
    ynew: ComplexMatrix,
}

impl Dopri5 {
    fn new(dim: usize) -> Self {
        Self {
            k: (0..7).map(|_| ComplexMatrix::zeros(dim, dim)).collect(),
            ytmp: ComplexMatrix::zeros(dim, dim),
            ynew: ComplexMatrix::zeros(dim, dim),
        }
    }

    /// One trial step of size `h`; returns the scaled error norm. On entry
    /// `k[0]` must hold f(y).
    fn try_step(&mut self, rhs: &mut LindbladRhs, y: &ComplexMatrix, h: f64, opts: &EvolveOptions) -> f64 {
        for stage in 0..6 {
            self.ytmp.data_mut().copy_from_slice(y.data());
            for (j, &a) in A[stage].iter().enumerate().take(stage + 1) {
                if a == 0.0 {
                    continue;
                }
                let c = C64::new(h * a, 0.0);
                for (t, &kj) in self.ytmp.data_mut().iter_mut().zip(self.k[j].data()) {
                    *t += c * kj;
                }
            }
            let (head, tail) = self.k.split_at_mut(stage + 1);
            let _ = head;
            rhs.eval(&self.ytmp, &mut tail[0]);
        }
        // Stage 6 used A[5] (the 5th-order weights), so ytmp is the new y.
        self.ynew.data_mut().copy_from_slice(self.ytmp.data());
        rhs.eval(&self.ynew, {
            let (_, tail) = self.k.split_at_mut(6);
            &mut tail[0]
        });

        let n = y.data().len();
        let mut err = 0.0;
        for idx in 0..n {
            let mut e = C64::ZERO;
            for (j, &w) in E.iter().enumerate() {
                e += C64::new(h * w, 0.0) * self.k[j].data()[idx];
            }
            let scale = opts.atol
                + opts.rtol * y.data()[idx].norm().max(self.ynew.data()[idx].norm());
            let q = e.norm() / scale;
            err += q * q;
        }
        (err / n as f64).sqrt()
    }
}

/// Integrates one piecewise-constant stage and snapshots on a uniform grid.
pub fn evolve_stage(
    h: &ComplexMatrix,
    c_ops: &[ComplexMatrix],
    rho0: &DensityOperator,
    duration_s: f64,
    opts: &EvolveOptions,
) -> Result<EvolutionTrace> {
    evolve_stage_impl(h, c_ops, rho0, duration_s, opts, true)
}

/// As [`evolve_stage`] but keeps only the final state (cost-function loops).
pub fn evolve_final(
    h: &ComplexMatrix,
    c_ops: &[ComplexMatrix],
    rho0: &DensityOperator,
    duration_s: f64,
    opts: &EvolveOptions,
) -> Result<DensityOperator> {
    let trace = evolve_stage_impl(h, c_ops, rho0, duration_s, opts, false)?;
    trace.states.into_iter().next_back().ok_or_else(|| Error::Numeric("empty trace".into()))
}

fn evolve_stage_impl(
    h: &ComplexMatrix,
    c_ops: &[ComplexMatrix],
    rho0: &DensityOperator,
    duration_s: f64,
    opts: &EvolveOptions,
    keep_snapshots: bool,
) -> Result<EvolutionTrace> {
    if duration_s < 0.0 || !duration_s.is_finite() {
        return Err(Error::Domain("stage duration must be nonnegative".into()));
    }
    if !(opts.dt_output_s > 0.0) {
        return Err(Error::Domain("dt_output_s must be positive".into()));
    }
    let dim = rho0.dim();
    let mut rhs = LindbladRhs::new(h, c_ops, dim)?;

    let mut trace = EvolutionTrace::default();
    trace.times_s.push(0.0);
    if keep_snapshots {
        trace.states.push(rho0.clone());
    }
    if duration_s == 0.0 {
        if !keep_snapshots {
            trace.states.push(rho0.clone());
        }
        return Ok(trace);
    }

    // Output grid: multiples of dt_output_s, always ending exactly at the
    // stage duration.
    let mut grid = Vec::new();
    let mut k = 1usize;
    loop {
        let t = k as f64 * opts.dt_output_s;
        if t >= duration_s - 1e-12 * duration_s.max(opts.dt_output_s) {
            break;
        }
        grid.push(t);
        k += 1;
    }
    grid.push(duration_s);

    let mut stepper = Dopri5::new(dim);
    let mut y = rho0.matrix().clone();
    let mut t = 0.0;
    let h_cap = opts.dt_max_s.unwrap_or(f64::INFINITY);
    let mut h_step = (opts.dt_output_s.min(duration_s) / 8.0).min(h_cap);
    rhs.eval(&y, &mut stepper.k[0]);

    for (gi, &t_node) in grid.iter().enumerate() {
        while t < t_node {
            let h_try = h_step.min(t_node - t).min(h_cap);
            let err = stepper.try_step(&mut rhs, &y, h_try, opts);
            if err <= 1.0 {
                t += h_try;
                y.data_mut().copy_from_slice(stepper.ynew.data());
                // FSAL: the last stage evaluation is f at the new point.
                let k6 = stepper.k[6].clone();
                stepper.k[0] = k6;
                let grow = if err <= 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h_step = (h_try * grow).min(h_cap);
            } else {
                h_step = h_try * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h_step < duration_s * 1e-14 {
                    return Err(Error::Stiffness(format!(
                        "step size underflow at t = {t} s (error {err})"
                    )));
                }
            }
        }
        let tr = trace_of(&y);
        let drift = (tr - 1.0).abs();
        if drift > TRACE_DRIFT_LIMIT {
            return Err(Error::TraceDrift { drift });
        }
        let last = gi + 1 == grid.len();
        if last {
            // Hand-off state: renormalize the (bounded) drift and strip the
            // round-off anti-Hermitian part.
            let m = y.hermitized().scaled(C64::new(1.0 / tr, 0.0));
            trace.times_s.push(t_node);
            trace.states.push(DensityOperator::from_matrix_unchecked(m));
        } else if keep_snapshots {
            trace.times_s.push(t_node);
            trace.states.push(DensityOperator::from_matrix_unchecked(y.clone()));
        }
    }
    Ok(trace)
}

fn trace_of(m: &ComplexMatrix) -> f64 {
    m.trace().re
}

/// Runs a staged schedule from an occupation state and records per-qubit
/// populations `n_Q<label>` on the common output grid.
pub fn run_schedule(
    device: &DeviceModel,
    schedule: &Schedule,
    initial: u32,
    basis: &SectorBasis,
    opts: &EvolveOptions,
) -> Result<EvolutionTrace> {
    schedule.validate_for(device)?;
    let idx = basis.index_of(initial).ok_or_else(|| {
        Error::Sector(format!(
            "initial state {} is outside the basis sector",
            basis.bitstring(initial)
        ))
    })?;
    let mut rho = DensityOperator::basis_state(basis.dim(), idx)?;

    let mut full = EvolutionTrace::default();
    let mut t_offset = 0.0;
    for (si, stage) in schedule.stages.iter().enumerate() {
        let h = build_hcb(device, &stage.frequencies_hz, basis, schedule.rotating_frame_hz)?;
        let c_ops = collapse_operators(device, stage, basis)?;
        let stage_trace = evolve_stage(&h, &c_ops, &rho, stage.duration_s, opts)?;
        rho = stage_trace.final_state()?.clone();
        let skip = if si == 0 { 0 } else { 1 };
        for (&t, s) in stage_trace.times_s.iter().zip(&stage_trace.states).skip(skip) {
            full.times_s.push(t_offset + t);
            full.states.push(s.clone());
        }
        t_offset += stage.duration_s;
    }

    for p in 0..device.n_qubits() {
        let diag = basis.number_diag(p);
        let series: Vec<f64> = full
            .states
            .iter()
            .map(|s| {
                diag.iter()
                    .enumerate()
                    .map(|(i, &d)| d * s.matrix()[(i, i)].re)
                    .sum()
            })
            .collect();
        full.observables.insert(format!("n_Q{}", device.label(p)), series);
    }
    let total: Vec<f64> = full
        .states
        .iter()
        .map(|s| {
            basis
                .states()
                .iter()
                .enumerate()
                .map(|(i, &v)| v.count_ones() as f64 * s.matrix()[(i, i)].re)
                .sum()
        })
        .collect();
    full.observables.insert("n_total".into(), total);
    Ok(full)
}

/// Tr(rho op) for Hermitian `op`; the imaginary residue must be noise.
pub fn expectation(rho: &DensityOperator, op: &ComplexMatrix) -> Result<f64> {
    if op.rows() != rho.dim() || op.cols() != rho.dim() {
        return Err(Error::Shape(format!(
            "operator is {}x{}, state dimension is {}",
            op.rows(),
            op.cols(),
            rho.dim()
        )));
    }
    if op.hermiticity_error() > 1e-9 * op.frobenius_norm().max(1.0) {
        return Err(Error::Shape("expectation target is not Hermitian".into()));
    }
    let n = rho.dim();
    let mut acc = C64::ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += rho.matrix()[(i, j)] * op[(j, i)];
        }
    }
    if acc.im.abs() > 1e-6 {
        return Err(Error::Consistency(format!(
            "expectation value has imaginary residue {}",
            acc.im
        )));
    }
    Ok(acc.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{toy_device, CouplingEdge, CouplingGraph, QubitSpec, SectorBasis, Stage};
    use crate::qlinalg::pauli_z;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    const TWO_PI: f64 = core::f64::consts::TAU;

    #[test]
    fn rhs_stationary_state() {
        // [H, rho] = 0 and no collapse operators: identically zero.
        let h = ComplexMatrix::from_real_diag(&[1.0e6, 2.0e6]);
        let rho = ComplexMatrix::from_real_diag(&[0.3, 0.7]);
        let out = lindblad_rhs(&h, &[], &rho).unwrap();
        assert!(out.frobenius_norm() < 1e-12);
    }

    #[test]
    fn rhs_decay_and_dephasing_rates() {
        // C = sqrt(G1) sigma-: d rho_11 / dt = -G1 (excited population).
        let g1 = 2.5e5;
        let mut sm = ComplexMatrix::zeros(2, 2);
        sm[(0, 1)] = C64::new(g1.sqrt(), 0.0);
        let rho = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        let out = lindblad_rhs(&ComplexMatrix::zeros(2, 2), &[sm], &rho).unwrap();
        assert!((out[(1, 1)].re + g1).abs() < 1e-6);
        assert!((out[(0, 0)].re - g1).abs() < 1e-6);

        // C = sqrt(Gphi/2) sigma_z: d rho_01 / dt = -Gphi rho_01.
        let gphi = 4.0e5;
        let c = pauli_z().scaled(C64::new((gphi / 2.0).sqrt(), 0.0));
        let mut rho = ComplexMatrix::from_real_diag(&[0.5, 0.5]);
        rho[(0, 1)] = C64::new(0.25, 0.1);
        rho[(1, 0)] = rho[(0, 1)].conj();
        let out = lindblad_rhs(&ComplexMatrix::zeros(2, 2), &[c], &rho).unwrap();
        let want = rho[(0, 1)].scaled_rate(-gphi);
        assert!((out[(0, 1)] - want).norm() < 1e-9);
        assert!(out[(0, 0)].norm() < 1e-12);
    }

    trait ScaledRate {
        fn scaled_rate(self, r: f64) -> C64;
    }
    impl ScaledRate for C64 {
        fn scaled_rate(self, r: f64) -> C64 {
            C64::new(self.re * r, self.im * r)
        }
    }

    #[test]
    fn compiled_plan_matches_reference_rhs() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let dim = 5;
        // Mixed bag: diagonal dephasing, sparse decay, and a dense operator.
        let mut decay = ComplexMatrix::zeros(dim, dim);
        decay[(0, 3)] = C64::new(300.0, 0.0);
        decay[(1, 4)] = C64::new(140.0, -20.0);
        let deph = ComplexMatrix::from_real_diag(&[10.0, -10.0, 30.0, -7.0, 0.5]);
        let dense = ComplexMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * 40.0
        });
        let c_ops = vec![decay, deph, dense];
        let h = ComplexMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * 1e5
        })
        .hermitized();
        let rho = crate::qlinalg::random_density(&mut rng, dim);

        let reference = lindblad_rhs(&h, &c_ops, &rho).unwrap();
        let mut rhs = LindbladRhs::new(&h, &c_ops, dim).unwrap();
        let mut out = ComplexMatrix::zeros(dim, dim);
        rhs.eval(&rho, &mut out);
        assert!(out.distance(&reference) < 1e-12 * reference.frobenius_norm().max(1.0));
    }

    #[test]
    fn zero_duration_keeps_initial_state() {
        let rho = DensityOperator::basis_state(3, 1).unwrap();
        let trace =
            evolve_stage(&ComplexMatrix::zeros(3, 3), &[], &rho, 0.0, &EvolveOptions::default())
                .unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(trace.states[0], rho);
    }

    #[test]
    fn t1_decay_matches_exponential() {
        // Single qubit, T1 = 10 us, 200 ns: <n> = e^{-0.02} within 1e-8.
        let t1 = 10e-6;
        let mut sm = ComplexMatrix::zeros(2, 2);
        sm[(0, 1)] = C64::new((1.0 / t1).sqrt(), 0.0);
        let rho = DensityOperator::basis_state(2, 1).unwrap();
        let opts = EvolveOptions { dt_output_s: 10e-9, ..EvolveOptions::strict() };
        let trace = evolve_stage(&ComplexMatrix::zeros(2, 2), &[sm], &rho, 200e-9, &opts).unwrap();
        let n_final = trace.final_state().unwrap().matrix()[(1, 1)].re;
        let want = (-200e-9f64 / t1).exp();
        assert!(
            ((n_final - want) / want).abs() < 1e-8,
            "relative error {}",
            ((n_final - want) / want).abs()
        );
    }

    #[test]
    fn resonant_swap_full_transfer() {
        // J/2pi = 3.56 MHz: complete population transfer at t = 1/(4J).
        let dev = toy_device(2, 3.56e6);
        let basis = SectorBasis::new(2, 1).unwrap();
        let h = build_hcb(&dev, &[5.82e9, 5.82e9], &basis, 5.82e9).unwrap();
        let idx = basis.index_of(0b10).unwrap();
        let rho = DensityOperator::basis_state(3, idx).unwrap();
        let t_swap = 1.0 / (4.0 * 3.56e6);
        let opts = EvolveOptions { dt_output_s: 1e-9, ..EvolveOptions::strict() };
        let trace = evolve_stage(&h, &[], &rho, t_swap, &opts).unwrap();
        let target = basis.index_of(0b01).unwrap();
        let p = trace.final_state().unwrap().matrix()[(target, target)].re;
        assert!(p > 0.9999, "transfer {p}");
        // sin^2(2 pi J t) along the way.
        for (&t, s) in trace.times_s.iter().zip(&trace.states) {
            let want = (TWO_PI / 2.0 * 2.0 * 3.56e6 * t).sin().powi(2);
            assert!((s.matrix()[(target, target)].re - want).abs() < 1e-7);
        }
    }

    #[test]
    fn schedule_semigroup_property() {
        let dev = toy_device(3, 2.4e6);
        let basis = SectorBasis::new(3, 1).unwrap();
        let freqs = vec![5.82e9, 5.8205e9, 5.82e9];
        let stage = |d: f64| Stage::new("s", d, freqs.clone());
        let sched_two = Schedule::new(5.82e9, vec![stage(50e-9), stage(50e-9)]).unwrap();
        let sched_one = Schedule::new(5.82e9, vec![stage(100e-9)]).unwrap();
        let initial = basis.state_from_positions(&[0]).unwrap();
        let opts = EvolveOptions::strict();
        let a = run_schedule(&dev, &sched_two, initial, &basis, &opts).unwrap();
        let b = run_schedule(&dev, &sched_one, initial, &basis, &opts).unwrap();
        let d = a
            .final_state()
            .unwrap()
            .matrix()
            .distance(b.final_state().unwrap().matrix());
        assert!(d < 1e-10, "distance {d}");
        // Times strictly increase across the stage boundary.
        for w in a.times_s.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn trace_hermiticity_and_positivity_preserved() {
        let mut q0 = QubitSpec::ideal(0, 5.82e9, -220e6);
        q0.t1_s = Some(15e-6);
        let mut q1 = QubitSpec::ideal(1, 5.82e9, -220e6);
        q1.tphi_s = Some(8e-6);
        let q2 = QubitSpec::ideal(2, 5.82e9, -220e6);
        let edges = vec![
            CouplingEdge { a: 0, b: 1, j_hz: 3.0e6 },
            CouplingEdge { a: 1, b: 2, j_hz: 3.0e6 },
        ];
        let dev = DeviceModel::new(vec![q0, q1, q2], CouplingGraph::new(edges), vec![None; 3])
            .unwrap();
        let basis = SectorBasis::new(3, 1).unwrap();
        let stage = Stage::new("s", 150e-9, vec![5.82e9, 5.82e9, 5.821e9])
            .with_measurement(1, 2.0e6);
        let sched = Schedule::new(5.82e9, vec![stage]).unwrap();
        let initial = basis.state_from_positions(&[0]).unwrap();
        let trace =
            run_schedule(&dev, &sched, initial, &basis, &EvolveOptions::default()).unwrap();
        let mut prev_total = f64::INFINITY;
        for (s, &t) in trace.states.iter().zip(&trace.times_s) {
            assert!((s.trace_real() - 1.0).abs() < 1e-9, "trace drift at {t}");
            assert!(s.matrix().hermiticity_error() < 1e-9);
            assert!(s.min_eigenvalue().unwrap() > -1e-7);
            let total: f64 = trace.observable("n_total").unwrap()
                [trace.index_at(t)];
            assert!(total <= prev_total + 1e-9);
            prev_total = total;
        }
    }

    #[test]
    fn halving_dt_max_is_converged() {
        let dev = toy_device(2, 3.56e6);
        let basis = SectorBasis::new(2, 1).unwrap();
        let h = build_hcb(&dev, &[5.82e9, 5.82e9], &basis, 5.82e9).unwrap();
        let rho = DensityOperator::basis_state(3, basis.index_of(0b10).unwrap()).unwrap();
        let run = |dt_max: f64| {
            let opts = EvolveOptions { dt_max_s: Some(dt_max), ..EvolveOptions::default() };
            evolve_final(&h, &[], &rho, 100e-9, &opts).unwrap()
        };
        let coarse = run(2e-9);
        let fine = run(1e-9);
        assert!(coarse.matrix().distance(fine.matrix()) < 1e-8);
    }

    #[test]
    fn expectation_checks() {
        let rho = DensityOperator::basis_state(2, 1).unwrap();
        let n_op = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        assert_eq!(expectation(&rho, &n_op).unwrap(), 1.0);

        // Maximally mixed against a traceless op vanishes.
        let half = DensityOperator::new(ComplexMatrix::from_real_diag(&[0.5, 0.5])).unwrap();
        assert!(expectation(&half, &pauli_z()).unwrap().abs() < 1e-15);

        // Random state: eigenbasis-summation oracle.
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let m = crate::qlinalg::random_density(&mut rng, 4);
        let rho = DensityOperator::new(m.hermitized()).unwrap();
        let op = crate::qlinalg::random_density(&mut rng, 4).hermitized();
        let eig = eigh(&op).unwrap();
        let mut oracle = 0.0;
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            // <v_k| rho |v_k>
            let mut amp = C64::ZERO;
            for i in 0..4 {
                for j in 0..4 {
                    amp += eig.eigenvectors[(i, k)].conj()
                        * rho.matrix()[(i, j)]
                        * eig.eigenvectors[(j, k)];
                }
            }
            oracle += lam * amp.re;
        }
        let got = expectation(&rho, &op).unwrap();
        assert!((got - oracle).abs() < 1e-12);
    }

    #[test]
    fn invalid_density_operators_rejected() {
        let mut m = ComplexMatrix::from_real_diag(&[0.5, 0.5]);
        m[(0, 1)] = C64::new(0.0, 0.5);
        assert!(DensityOperator::new(m).is_err()); // not Hermitian
        let m = ComplexMatrix::from_real_diag(&[0.7, 0.7]);
        assert!(DensityOperator::new(m).is_err()); // trace 1.4
    }
}
