//! Homodyne stochastic-master-equation trajectories for continuous
//! which-way monitoring.
//!
//! One conditioned state evolves under
//!
//! `d rho = -i[H, rho] dt + sum_k D[C_k] rho dt + G D[A] rho dt
//!          + sqrt(G) H[A] rho dW`,
//!
//! with `D[A] rho = A rho A^+ - 1/2 {A^+A, rho}`,
//! `H[A] rho = A rho + rho A^+ - Tr(A rho + rho A^+) rho`, and the
//! measurement record `I dt = <A> dt + dW`. Only the monitored channel is
//! unraveled; background decay and dephasing stay deterministic Lindblad
//! terms. Detector efficiency is fixed at one.
//!
//! Rate convention: `G` is the *unraveling rate* of the Hermitian operator
//! `A`. Averaging over noise recovers the Lindblad channel `sqrt(G) A`;
//! for `A = sigma_z` that channel dephases coherences at `2 G`, so a
//! physical measurement-induced dephasing rate `Gamma_m` (the rate at
//! which coherences decay, `Gamma_phi` contribution) corresponds to
//! `G = Gamma_m_angular / 2`. Use [`unraveling_rate_from_dephasing_hz`]
//! to convert a calibrated `Gamma_m/2pi`.
//!
//! Integration is fixed-step Euler-Maruyama; each step re-Hermitizes and
//! renormalizes the state. Every trajectory owns a counter-based RNG
//! stream derived from (master seed, trajectory index), so ensembles are
//! reproducible under any execution order.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::PI;

// In no_std builds float math comes from the trait; builds whose dependency
// graph links std resolve the inherent methods instead and see this unused.
#[allow(unused_imports)]
use num_traits::Float;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::device::{DeviceModel, Schedule, SectorBasis, build_hcb, collapse_operators};
use crate::error::{Error, Result};
use crate::lindblad::{DensityOperator, EvolutionTrace, LindbladRhs};
use crate::qlinalg::{C64, ComplexMatrix};

/// Converts a calibrated measurement-induced dephasing rate `Gamma_m/2pi`
/// (Hz) into the unraveling rate `G` (rad/s) for `A = sigma_z`.
pub fn unraveling_rate_from_dephasing_hz(gamma_m_hz: f64) -> f64 {
    PI * gamma_m_hz
}

/// Configuration of the monitored channel and the trajectory ensemble.
#[derive(Debug, Clone)]
pub struct SmeConfig {
    /// Monitored Hermitian operator (sigma_z of the which-way qubit).
    pub measured_operator: ComplexMatrix,
    /// Unraveling rate G in rad/s (see module docs for the convention).
    pub rate: f64,
    /// Euler-Maruyama step.
    pub dt_s: f64,
    pub n_trajectories: usize,
    /// Master seed; trajectory k uses stream k.
    pub seed: u64,
    /// Snapshot spacing for recorded states (`None` records no states).
    pub snapshot_dt_s: Option<f64>,
}

impl SmeConfig {
    pub fn new(measured_operator: ComplexMatrix, rate: f64, dt_s: f64) -> Result<Self> {
        if !measured_operator.is_square() {
            return Err(Error::Shape("measured operator must be square".into()));
        }
        if measured_operator.hermiticity_error()
            > 1e-9 * measured_operator.frobenius_norm().max(1.0)
        {
            return Err(Error::Shape("measured operator must be Hermitian".into()));
        }
        if !(dt_s > 0.0) {
            return Err(Error::Domain("SME step must be positive".into()));
        }
        if rate < 0.0 || !rate.is_finite() {
            return Err(Error::Domain("unraveling rate must be nonnegative".into()));
        }
        Ok(Self {
            measured_operator,
            rate,
            dt_s,
            n_trajectories: 1,
            seed: 0,
            snapshot_dt_s: None,
        })
    }

    pub fn with_trajectories(mut self, n: usize, seed: u64) -> Self {
        self.n_trajectories = n;
        self.seed = seed;
        self
    }

    pub fn with_snapshots(mut self, snapshot_dt_s: f64) -> Self {
        self.snapshot_dt_s = Some(snapshot_dt_s);
        self
    }
}

/// The RNG stream for one trajectory of an ensemble.
pub fn trajectory_rng(master_seed: u64, trajectory: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(trajectory);
    rng
}

/// One recorded trajectory: the homodyne signal and optional snapshots.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    /// Start time of each Euler-Maruyama step.
    pub times_s: Vec<f64>,
    /// Signal samples I(t) = <A> + dW/dt, one per step.
    pub signal: Vec<f64>,
    pub seed: u64,
    pub trajectory: u64,
    pub snapshot_times_s: Vec<f64>,
    pub states: Option<Vec<DensityOperator>>,
}

/// Compiled per-stage stepper.
pub(crate) struct SmeStepper {
    rhs: LindbladRhs,
    a_diag: Option<Vec<f64>>,
    a_full: ComplexMatrix,
    sqrt_rate: f64,
    tmp: ComplexMatrix,
}

impl SmeStepper {
    pub(crate) fn new(
        h: &ComplexMatrix,
        c_ops: &[ComplexMatrix],
        cfg: &SmeConfig,
        dim: usize,
    ) -> Result<Self> {
        if cfg.measured_operator.rows() != dim {
            return Err(Error::Shape(format!(
                "measured operator is {}x{}, state dimension is {dim}",
                cfg.measured_operator.rows(),
                cfg.measured_operator.cols()
            )));
        }
        // The deterministic D-term of the monitored channel folds into the
        // collapse plan as sqrt(G) A.
        let mut all_ops: Vec<ComplexMatrix> = c_ops.to_vec();
        if cfg.rate > 0.0 {
            all_ops.push(cfg.measured_operator.scaled(C64::new(cfg.rate.sqrt(), 0.0)));
        }
        let rhs = LindbladRhs::new(h, &all_ops, dim)?;
        let a = &cfg.measured_operator;
        let mut a_diag = Some(Vec::with_capacity(dim));
        'diag: for i in 0..dim {
            for j in 0..dim {
                if i != j && a[(i, j)] != C64::ZERO {
                    a_diag = None;
                    break 'diag;
                }
            }
            if let Some(d) = a_diag.as_mut() {
                d.push(a[(i, i)].re);
            }
        }
        Ok(Self {
            rhs,
            a_diag,
            a_full: a.clone(),
            sqrt_rate: cfg.rate.sqrt(),
            tmp: ComplexMatrix::zeros(dim, dim),
        })
    }

    /// Advances `rho` by `dt` with noise `dw`; returns the signal sample
    /// `<A> + dw/dt` evaluated before the update.
    pub(crate) fn step(&mut self, rho: &mut ComplexMatrix, dt: f64, dw: f64) -> Result<f64> {
        let dim = rho.rows();
        self.rhs.eval(rho, &mut self.tmp);
        let drift = self.tmp.clone();

        // m = A rho + rho A and its trace.
        let mut mean2 = 0.0;
        let m = if let Some(diag) = &self.a_diag {
            let mut m = rho.clone();
            for i in 0..dim {
                for j in 0..dim {
                    m[(i, j)] *= diag[i] + diag[j];
                }
                mean2 += diag[i] * 2.0 * rho[(i, i)].re;
            }
            m
        } else {
            ComplexMatrix::matmul_into(&self.a_full, rho, &mut self.tmp);
            let mut m = self.tmp.clone();
            ComplexMatrix::matmul_into(rho, &self.a_full, &mut self.tmp);
            for (o, &t) in m.data_mut().iter_mut().zip(self.tmp.data()) {
                *o += t;
            }
            mean2 = m.trace().re;
            m
        };
        let mean_a = 0.5 * mean2;

        // rho += drift dt + sqrt(G) (m - tr(m) rho) dW
        let noise = C64::new(self.sqrt_rate * dw, 0.0);
        let dt_c = C64::new(dt, 0.0);
        let tr_m = C64::new(mean2, 0.0);
        for idx in 0..rho.data().len() {
            let r = rho.data()[idx];
            rho.data_mut()[idx] =
                r + dt_c * drift.data()[idx] + noise * (m.data()[idx] - tr_m * r);
        }

        // Enforce Hermiticity and unit trace after every step.
        let herm = rho.hermitized();
        let tr = herm.trace().re;
        if !(tr > 0.5) {
            return Err(Error::Instability(format!(
                "trace fell to {tr}; reduce the SME step"
            )));
        }
        *rho = herm.scaled(C64::new(1.0 / tr, 0.0));
        Ok(mean_a + dw / dt)
    }
}

/// One Euler-Maruyama update of a conditioned state.
pub fn sme_step(
    rho: &DensityOperator,
    h: &ComplexMatrix,
    c_ops: &[ComplexMatrix],
    cfg: &SmeConfig,
    dw: f64,
) -> Result<(DensityOperator, f64)> {
    let mut stepper = SmeStepper::new(h, c_ops, cfg, rho.dim())?;
    let mut m = rho.matrix().clone();
    let signal = stepper.step(&mut m, cfg.dt_s, dw)?;
    Ok((DensityOperator::from_matrix_unchecked(m), signal * cfg.dt_s))
}

/// Samples the trajectory with the given stream index, starting from an
/// occupation state. Deterministic in (cfg.seed, trajectory).
pub fn sample_trajectory(
    device: &DeviceModel,
    schedule: &Schedule,
    initial: u32,
    basis: &SectorBasis,
    cfg: &SmeConfig,
    trajectory: u64,
) -> Result<TrajectoryRecord> {
    let idx = basis.index_of(initial).ok_or_else(|| {
        Error::Sector(format!(
            "initial state {} is outside the basis sector",
            basis.bitstring(initial)
        ))
    })?;
    let rho0 = DensityOperator::basis_state(basis.dim(), idx)?;
    sample_trajectory_from(device, schedule, &rho0, basis, cfg, trajectory)
}

/// Samples one trajectory from an arbitrary initial state.
pub fn sample_trajectory_from(
    device: &DeviceModel,
    schedule: &Schedule,
    rho0: &DensityOperator,
    basis: &SectorBasis,
    cfg: &SmeConfig,
    trajectory: u64,
) -> Result<TrajectoryRecord> {
    schedule.validate_for(device)?;
    if rho0.dim() != basis.dim() {
        return Err(Error::Shape(format!(
            "initial state dim {} does not match basis dim {}",
            rho0.dim(),
            basis.dim()
        )));
    }
    let mut rng = trajectory_rng(cfg.seed, trajectory);
    let mut record = TrajectoryRecord {
        times_s: Vec::new(),
        signal: Vec::new(),
        seed: cfg.seed,
        trajectory,
        snapshot_times_s: Vec::new(),
        states: cfg.snapshot_dt_s.map(|_| Vec::new()),
    };
    let mut rho = rho0.matrix().clone();
    if let Some(states) = record.states.as_mut() {
        record.snapshot_times_s.push(0.0);
        states.push(DensityOperator::from_matrix_unchecked(rho.clone()));
    }

    let mut t_offset = 0.0;
    for stage in &schedule.stages {
        if stage.duration_s == 0.0 {
            continue;
        }
        let h = build_hcb(device, &stage.frequencies_hz, basis, schedule.rotating_frame_hz)?;
        let c_ops = collapse_operators(device, stage, basis)?;
        let mut stepper = SmeStepper::new(&h, &c_ops, cfg, basis.dim())?;

        let n_steps = (stage.duration_s / cfg.dt_s - 1e-9).ceil().max(1.0) as usize;
        let dt = stage.duration_s / n_steps as f64;
        let snap_stride = cfg
            .snapshot_dt_s
            .map(|s| ((s / dt).round() as usize).max(1))
            .unwrap_or(usize::MAX);
        for k in 0..n_steps {
            let dw: f64 = rng.sample::<f64, _>(StandardNormal) * dt.sqrt();
            let t = t_offset + k as f64 * dt;
            let signal = stepper.step(&mut rho, dt, dw)?;
            record.times_s.push(t);
            record.signal.push(signal);
            let at_boundary = k + 1 == n_steps;
            if (k + 1) % snap_stride == 0 || (at_boundary && record.states.is_some()) {
                let t_snap = t_offset + (k + 1) as f64 * dt;
                // Stage ends coincide with stride points on the common grid;
                // avoid recording them twice.
                if record
                    .snapshot_times_s
                    .last()
                    .is_none_or(|&last| t_snap > last + 0.5 * dt)
                {
                    record.snapshot_times_s.push(t_snap);
                    if let Some(states) = record.states.as_mut() {
                        states.push(DensityOperator::from_matrix_unchecked(rho.clone()));
                    }
                }
            }
        }
        t_offset += stage.duration_s;
    }
    Ok(record)
}

/// A named diagonal observable (populations, sigma_z) for ensemble
/// statistics.
#[derive(Debug, Clone)]
pub struct DiagObservable {
    pub name: String,
    pub diag: Vec<f64>,
}

impl DiagObservable {
    pub fn populations(device: &DeviceModel, basis: &SectorBasis) -> Vec<Self> {
        (0..device.n_qubits())
            .map(|p| Self {
                name: format!("n_Q{}", device.label(p)),
                diag: basis.number_diag(p),
            })
            .collect()
    }

    fn eval(&self, rho: &ComplexMatrix) -> f64 {
        self.diag
            .iter()
            .enumerate()
            .map(|(i, &d)| d * rho[(i, i)].re)
            .sum()
    }
}

/// Streaming mean over trajectory state snapshots.
///
/// Accumulators merge associatively but floating-point sums are not; for
/// bit-reproducible ensembles, merge chunk accumulators in index order.
#[derive(Debug, Clone)]
pub struct EnsembleAccumulator {
    times_s: Vec<f64>,
    observables: Vec<DiagObservable>,
    count: usize,
    state_sums: Vec<ComplexMatrix>,
    obs_sums: Vec<Vec<f64>>,
    obs_sq_sums: Vec<Vec<f64>>,
}

impl EnsembleAccumulator {
    pub fn new(times_s: Vec<f64>, dim: usize, observables: Vec<DiagObservable>) -> Self {
        let nt = times_s.len();
        Self {
            times_s,
            state_sums: vec![ComplexMatrix::zeros(dim, dim); nt],
            obs_sums: vec![vec![0.0; nt]; observables.len()],
            obs_sq_sums: vec![vec![0.0; nt]; observables.len()],
            observables,
            count: 0,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Folds one trajectory in; its snapshots must sit on the common grid.
    pub fn push(&mut self, record: &TrajectoryRecord) -> Result<()> {
        let states = record
            .states
            .as_ref()
            .ok_or_else(|| Error::Alignment("trajectory record carries no states".into()))?;
        if record.snapshot_times_s.len() != self.times_s.len() {
            return Err(Error::Alignment(format!(
                "trajectory has {} snapshots, ensemble grid has {}",
                record.snapshot_times_s.len(),
                self.times_s.len()
            )));
        }
        for (a, b) in record.snapshot_times_s.iter().zip(&self.times_s) {
            if (a - b).abs() > 1e-12 + 1e-9 * b.abs() {
                return Err(Error::Alignment(format!("snapshot time {a} is not grid time {b}")));
            }
        }
        for (k, state) in states.iter().enumerate() {
            let m = state.matrix();
            for (s, &v) in self.state_sums[k].data_mut().iter_mut().zip(m.data()) {
                *s += v;
            }
            for (oi, obs) in self.observables.iter().enumerate() {
                let v = obs.eval(m);
                self.obs_sums[oi][k] += v;
                self.obs_sq_sums[oi][k] += v * v;
            }
        }
        self.count += 1;
        Ok(())
    }

    /// Merges another accumulator over the same grid into this one.
    pub fn merge(&mut self, other: &EnsembleAccumulator) -> Result<()> {
        if other.times_s.len() != self.times_s.len()
            || self.observables.len() != other.observables.len()
        {
            return Err(Error::Alignment("ensemble accumulators use different grids".into()));
        }
        for (mine, theirs) in self.state_sums.iter_mut().zip(&other.state_sums) {
            for (s, &v) in mine.data_mut().iter_mut().zip(theirs.data()) {
                *s += v;
            }
        }
        for oi in 0..self.obs_sums.len() {
            for k in 0..self.times_s.len() {
                self.obs_sums[oi][k] += other.obs_sums[oi][k];
                self.obs_sq_sums[oi][k] += other.obs_sq_sums[oi][k];
            }
        }
        self.count += other.count;
        Ok(())
    }

    /// Mean states plus per-observable means and standard errors
    /// (`se_<name>`).
    pub fn finalize(&self) -> Result<EvolutionTrace> {
        if self.count == 0 {
            return Err(Error::Numeric("ensemble contains no trajectories".into()));
        }
        let n = self.count as f64;
        let mut trace = EvolutionTrace {
            times_s: self.times_s.clone(),
            states: Vec::with_capacity(self.times_s.len()),
            observables: BTreeMap::new(),
        };
        for sum in &self.state_sums {
            let mean = sum.scaled(C64::new(1.0 / n, 0.0)).hermitized();
            let tr = mean.trace().re;
            trace
                .states
                .push(DensityOperator::from_matrix_unchecked(
                    mean.scaled(C64::new(1.0 / tr, 0.0)),
                ));
        }
        for (oi, obs) in self.observables.iter().enumerate() {
            let mut means = Vec::with_capacity(self.times_s.len());
            let mut ses = Vec::with_capacity(self.times_s.len());
            for k in 0..self.times_s.len() {
                let mean = self.obs_sums[oi][k] / n;
                let var = if self.count > 1 {
                    ((self.obs_sq_sums[oi][k] - n * mean * mean) / (n - 1.0)).max(0.0)
                } else {
                    0.0
                };
                means.push(mean);
                ses.push((var / n).sqrt());
            }
            trace.observables.insert(obs.name.clone(), means);
            trace.observables.insert(format!("se_{}", obs.name), ses);
        }
        Ok(trace)
    }
}

/// Averages recorded trajectories over a common grid.
pub fn ensemble_average(
    records: &[TrajectoryRecord],
    observables: &[DiagObservable],
) -> Result<EvolutionTrace> {
    let first = records
        .first()
        .ok_or_else(|| Error::Numeric("ensemble contains no trajectories".into()))?;
    let states = first
        .states
        .as_ref()
        .ok_or_else(|| Error::Alignment("trajectory record carries no states".into()))?;
    let dim = states
        .first()
        .map(DensityOperator::dim)
        .ok_or_else(|| Error::Alignment("trajectory record has no snapshots".into()))?;
    let mut acc =
        EnsembleAccumulator::new(first.snapshot_times_s.clone(), dim, observables.to_vec());
    for r in records {
        acc.push(r)?;
    }
    acc.finalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{CouplingGraph, QubitSpec, Stage};
    use crate::lindblad::{EvolveOptions, evolve_stage, lindblad_rhs};

    fn single_qubit() -> (DeviceModel, SectorBasis, Schedule) {
        let dev = DeviceModel::new(
            vec![QubitSpec::ideal(0, 5.82e9, -220e6)],
            CouplingGraph::default(),
            vec![None],
        )
        .unwrap();
        let basis = SectorBasis::new(1, 1).unwrap();
        let sched =
            Schedule::new(5.82e9, vec![Stage::new("hold", 200e-9, vec![5.82e9])]).unwrap();
        (dev, basis, sched)
    }

    fn plus_state() -> DensityOperator {
        let a = C64::new(1.0 / 2f64.sqrt(), 0.0);
        DensityOperator::pure(&[a, a]).unwrap()
    }

    #[test]
    fn zero_rate_reduces_to_lindblad_step() {
        let (_, basis, _) = single_qubit();
        let h = ComplexMatrix::from_real_diag(&[0.0, 1.0e7]);
        let cfg = SmeConfig::new(basis.sigma_z_matrix(0), 0.0, 1e-10).unwrap();
        let rho = plus_state();
        let dw = 3e-6;
        let (next, _) = sme_step(&rho, &h, &[], &cfg, dw).unwrap();
        let drift = lindblad_rhs(&h, &[], rho.matrix()).unwrap();
        let want = rho.matrix() + &drift.scaled(C64::new(cfg.dt_s, 0.0));
        assert!(next.matrix().distance(&want.hermitized()) < 1e-15);
    }

    #[test]
    fn signal_is_mean_plus_noise() {
        let (_, basis, _) = single_qubit();
        let cfg = SmeConfig::new(basis.sigma_z_matrix(0), 1e5, 1e-10).unwrap();
        let rho = DensityOperator::basis_state(2, 1).unwrap(); // <sigma_z> = +1
        let dw = 2e-6;
        let (_, d_i) = sme_step(&rho, &ComplexMatrix::zeros(2, 2), &[], &cfg, dw).unwrap();
        assert!((d_i - (1.0 * cfg.dt_s + dw)).abs() < 1e-18);
    }

    #[test]
    fn identical_seeds_are_bit_identical() {
        let (dev, basis, sched) = single_qubit();
        let cfg = SmeConfig::new(basis.sigma_z_matrix(0), 2e7, 1e-10)
            .unwrap()
            .with_trajectories(4, 42)
            .with_snapshots(1e-9);
        let initial = 0u32;
        let a = sample_trajectory(&dev, &sched, initial, &basis, &cfg, 3).unwrap();
        let b = sample_trajectory(&dev, &sched, initial, &basis, &cfg, 3).unwrap();
        assert_eq!(a.signal, b.signal);
        let c = sample_trajectory(&dev, &sched, initial, &basis, &cfg, 4).unwrap();
        assert_ne!(a.signal, c.signal);
    }

    #[test]
    fn strong_monitoring_collapses_by_born_rule() {
        // (|0> + |1>)/sqrt(2) under strong sigma_z monitoring: trajectories
        // collapse to <sigma_z> = +-1, half of them each way.
        let (dev, basis, sched) = single_qubit();
        let rate = unraveling_rate_from_dephasing_hz(20e6); // G T ~ 12 >> 1
        let cfg = SmeConfig::new(basis.sigma_z_matrix(0), rate, 5e-11)
            .unwrap()
            .with_snapshots(200e-9);
        let n = 4000;
        let mut plus = 0usize;
        let rho0 = plus_state();
        let sz = basis.sigma_z_matrix(0);
        for k in 0..n {
            let r = sample_trajectory_from(&dev, &sched, &rho0, &basis, &cfg, k as u64).unwrap();
            let last = r.states.as_ref().unwrap().last().unwrap();
            let z = crate::lindblad::expectation(last, &sz).unwrap();
            assert!(z.abs() > 0.98, "not collapsed: <sigma_z> = {z}");
            if z > 0.0 {
                plus += 1;
            }
        }
        let frac = plus as f64 / n as f64;
        // 3 sigma of a fair binomial with 4000 draws.
        let bound = 3.0 * 0.5 / (n as f64).sqrt();
        assert!((frac - 0.5).abs() < bound, "plus fraction {frac}");
    }

    #[test]
    fn ensemble_mean_matches_lindblad_dephasing() {
        // Unconditional average of the unraveled channel reproduces the
        // deterministic solution with Gamma_phi = 2 G.
        let (dev, basis, sched) = single_qubit();
        let gamma_phi = 2.0 * core::f64::consts::PI * 2.0e6; // rad/s
        let cfg = SmeConfig::new(basis.sigma_z_matrix(0), gamma_phi / 2.0, 1e-10)
            .unwrap()
            .with_trajectories(800, 7)
            .with_snapshots(10e-9);
        let rho0 = plus_state();
        let mut records = Vec::new();
        for k in 0..cfg.n_trajectories {
            records
                .push(sample_trajectory_from(&dev, &sched, &rho0, &basis, &cfg, k as u64).unwrap());
        }
        let obs = DiagObservable::populations(&dev, &basis);
        let mean = ensemble_average(&records, &obs).unwrap();

        let c = pauli_z_like(&basis).scaled(C64::new((gamma_phi / 2.0).sqrt(), 0.0));
        let lindblad = evolve_stage(
            &ComplexMatrix::zeros(2, 2),
            &[c],
            &rho0,
            200e-9,
            &EvolveOptions { dt_output_s: 10e-9, ..Default::default() },
        )
        .unwrap();
        assert_eq!(mean.len(), lindblad.len());
        for (m, l) in mean.states.iter().zip(&lindblad.states) {
            let d = m.trace_distance(l).unwrap();
            assert!(d < 0.05, "trace distance {d}");
        }
        // Standard errors present and sane.
        let se = mean.observable("se_n_Q0").unwrap();
        assert!(se.iter().all(|&v| (0.0..0.5).contains(&v)));
    }

    fn pauli_z_like(basis: &SectorBasis) -> ComplexMatrix {
        basis.sigma_z_matrix(0)
    }

    #[test]
    fn increment_statistics_are_centered() {
        // E[dW] = 0 within 4 sigma over a full trajectory's noise stream.
        let dt: f64 = 1e-10;
        let n = 20_000;
        let mut rng = trajectory_rng(123, 0);
        let mut sum = 0.0;
        for _ in 0..n {
            sum += rng.sample::<f64, _>(StandardNormal) * dt.sqrt();
        }
        let sigma = dt.sqrt() * (n as f64).sqrt();
        assert!(sum.abs() < 4.0 * sigma);
    }

    #[test]
    fn long_time_average_recovers_constant_signal() {
        // H = 0, rho = |1><1|: <sigma_z> = 1 is a fixed point, so the mean
        // of I over the run converges to 1 within 3 sigma.
        let (dev, basis, sched) = single_qubit();
        let rate = 1e6;
        let cfg = SmeConfig::new(basis.sigma_z_matrix(0), rate, 1e-10).unwrap();
        let rho0 = DensityOperator::basis_state(2, 1).unwrap();
        let r = sample_trajectory_from(&dev, &sched, &rho0, &basis, &cfg, 0).unwrap();
        let n = r.signal.len() as f64;
        let mean = r.signal.iter().sum::<f64>() / n;
        // I = 1 + dW/dt: the mean of dW/dt over n steps has std
        // 1/sqrt(n dt).
        let sigma = 1.0 / (n * cfg.dt_s).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * sigma, "mean {mean}, sigma {sigma}");
    }

    #[test]
    fn ensemble_average_trivial_cases() {
        let (dev, basis, sched) = single_qubit();
        let cfg = SmeConfig::new(basis.sigma_z_matrix(0), 1e6, 1e-10)
            .unwrap()
            .with_snapshots(50e-9);
        let rho0 = plus_state();
        let obs = DiagObservable::populations(&dev, &basis);
        let a = sample_trajectory_from(&dev, &sched, &rho0, &basis, &cfg, 0).unwrap();
        let b = sample_trajectory_from(&dev, &sched, &rho0, &basis, &cfg, 1).unwrap();

        // n = 1: the trajectory itself.
        let solo = ensemble_average(core::slice::from_ref(&a), &obs).unwrap();
        for (m, s) in solo.states.iter().zip(a.states.as_ref().unwrap()) {
            assert!(m.matrix().distance(s.matrix()) < 1e-12);
        }

        // Permutation invariance up to float association: compare via merge
        // in both orders using the same chunking.
        let mean_ab = ensemble_average(&[a.clone(), b.clone()], &obs).unwrap();
        let mean_ba = ensemble_average(&[b, a], &obs).unwrap();
        for (x, y) in mean_ab.states.iter().zip(&mean_ba.states) {
            assert!(x.matrix().distance(y.matrix()) < 1e-13);
        }
    }

    #[test]
    fn instability_guard_fires_for_huge_steps() {
        let (dev, basis, sched) = single_qubit();
        // Absurd step: G dt >> 1.
        let cfg = SmeConfig::new(basis.sigma_z_matrix(0), 1e12, 1e-9).unwrap();
        let rho0 = plus_state();
        let mut failed = false;
        for k in 0..32 {
            if sample_trajectory_from(&dev, &sched, &rho0, &basis, &cfg, k).is_err() {
                failed = true;
                break;
            }
        }
        assert!(failed, "expected an instability error at G dt >> 1");
    }

    #[test]
    fn deterministic_channels_stay_deterministic() {
        // A decaying qubit with zero measurement rate: every trajectory
        // equals the Lindblad solution exactly (no noise enters).
        let mut q = QubitSpec::ideal(0, 5.82e9, -220e6);
        q.t1_s = Some(5e-6);
        let dev =
            DeviceModel::new(vec![q], CouplingGraph::default(), vec![None]).unwrap();
        let basis = SectorBasis::new(1, 1).unwrap();
        let sched =
            Schedule::new(5.82e9, vec![Stage::new("hold", 100e-9, vec![5.82e9])]).unwrap();
        let cfg = SmeConfig::new(basis.sigma_z_matrix(0), 0.0, 1e-10)
            .unwrap()
            .with_snapshots(100e-9);
        let r = sample_trajectory(&dev, &sched, 1u32, &basis, &cfg, 0).unwrap();
        let p_final = r.states.as_ref().unwrap().last().unwrap().matrix()[(1, 1)].re;
        let want = (-100e-9f64 / 5e-6).exp();
        // First-order Euler at dt = 0.1 ns over 1000 steps.
        assert!((p_final - want).abs() < 1e-5, "{p_final} vs {want}");
    }
}
