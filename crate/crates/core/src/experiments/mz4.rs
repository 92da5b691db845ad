//! The staged 4-qubit interferometer: fringe scans, sinusoidal fits, and
//! the two-qubit tomography variant.

use alloc::format;
use alloc::vec::Vec;

// In no_std builds float math comes from the trait; builds whose dependency
// graph links std resolve the inherent methods instead and see this unused.
#[allow(unused_imports)]
use num_traits::Float;

use crate::device::{DeviceModel, SectorBasis, sector_reduce_pair};
use crate::error::{Error, Result};
use crate::experiments::presets::{MZ4_PHASE_STAGE_S, mz4_schedule, mz4_tomography_schedule};
use crate::lindblad::{DensityOperator, EvolveOptions, run_schedule};

/// Interference scan: final beamsplitter population versus phase detuning.
#[derive(Debug, Clone)]
pub struct FringeScan {
    /// Detuning grid delta/2pi applied to Q1 during the phase stage.
    pub delta_grid_hz: Vec<f64>,
    /// Phase-stage length; the fringe period is 1/t_p in delta.
    pub t_p_s: f64,
    /// P_I: Q3 population at the end of the interference stage.
    pub populations: Vec<f64>,
    /// Average which-way dephasing rate applied during stage 2.
    pub gamma_bar_hz: f64,
}

/// Least-squares sinusoid `P(delta) = a + b cos(2 pi t_p delta + phi0)`.
#[derive(Debug, Clone, Copy)]
pub struct FringeFit {
    pub offset: f64,
    pub amplitude: f64,
    pub phase_rad: f64,
    /// Contrast b/a, clipped into [0, 1].
    pub visibility: f64,
    pub residual_rms: f64,
    /// False for a flat scan, where the phase is meaningless.
    pub phase_defined: bool,
    /// Set when b >= a forced clipping of the visibility.
    pub clipped: bool,
}

fn check_mz4_topology(device: &DeviceModel) -> Result<()> {
    if device.n_qubits() != 4 {
        return Err(Error::Domain(format!(
            "the 4-qubit interferometer needs exactly 4 qubits, device has {}",
            device.n_qubits()
        )));
    }
    for (a, b) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
        if device.couplings().coupling(a, b).is_none() {
            return Err(Error::Domain(format!(
                "missing interferometer coupling Q{a}-Q{b}"
            )));
        }
    }
    Ok(())
}

/// Runs the four-stage protocol once per detuning and records P_I.
pub fn run_mz4(
    device: &DeviceModel,
    gamma_bar_hz: f64,
    delta_grid_hz: &[f64],
    opts: &EvolveOptions,
) -> Result<FringeScan> {
    check_mz4_topology(device)?;
    if delta_grid_hz.is_empty() {
        return Err(Error::Domain("empty detuning grid".into()));
    }
    for w in delta_grid_hz.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Domain("detuning grid must be strictly increasing".into()));
        }
    }
    let basis = SectorBasis::new(4, 1)?;
    let initial = basis.state_from_positions(&[device.position(0)?])?;
    let mut populations = Vec::with_capacity(delta_grid_hz.len());
    for &delta in delta_grid_hz {
        let schedule = mz4_schedule(gamma_bar_hz, delta)?;
        let trace = run_schedule(device, &schedule, initial, &basis, opts)?;
        let p_series = trace.observable("n_Q3")?;
        populations.push(*p_series.last().expect("trace is nonempty"));
    }
    Ok(FringeScan {
        delta_grid_hz: delta_grid_hz.to_vec(),
        t_p_s: MZ4_PHASE_STAGE_S,
        populations,
        gamma_bar_hz,
    })
}

/// Fits the scan with a known-frequency sinusoid (linear least squares on
/// the basis {1, cos, sin}) and reports the visibility b/a.
pub fn fit_fringe(scan: &FringeScan) -> Result<FringeFit> {
    let n = scan.delta_grid_hz.len();
    if n < 6 {
        return Err(Error::Fit(format!("need at least 6 grid points, got {n}")));
    }
    if n != scan.populations.len() {
        return Err(Error::Shape("grid and population lengths differ".into()));
    }
    let span = (scan.delta_grid_hz[n - 1] - scan.delta_grid_hz[0]) * scan.t_p_s;
    if span < 1.0 - 1e-9 {
        return Err(Error::Fit(format!(
            "grid spans {span:.3} fringe periods; need at least one"
        )));
    }

    // Normal equations for P = a + A cos(theta) + B sin(theta).
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for (&delta, &p) in scan.delta_grid_hz.iter().zip(&scan.populations) {
        let theta = core::f64::consts::TAU * scan.t_p_s * delta;
        let row = [1.0, theta.cos(), theta.sin()];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
            rhs[i] += row[i] * p;
        }
    }
    let coef = solve3(m, rhs).ok_or_else(|| Error::Fit("degenerate fringe design matrix".into()))?;
    let (a, cos_w, sin_w) = (coef[0], coef[1], coef[2]);
    let b = (cos_w * cos_w + sin_w * sin_w).sqrt();
    let phase = (-sin_w).atan2(cos_w);

    let mut ss = 0.0;
    for (&delta, &p) in scan.delta_grid_hz.iter().zip(&scan.populations) {
        let theta = core::f64::consts::TAU * scan.t_p_s * delta;
        let model = a + b * (theta + phase).cos();
        ss += (p - model) * (p - model);
    }
    let residual_rms = (ss / n as f64).sqrt();

    let phase_defined = b > 1e-9 * a.abs().max(1e-6);
    let mut clipped = false;
    let visibility = if !phase_defined {
        0.0
    } else if a <= b {
        clipped = true;
        1.0
    } else {
        b / a
    };
    Ok(FringeFit {
        offset: a,
        amplitude: b,
        phase_rad: if phase_defined { phase } else { 0.0 },
        visibility,
        residual_rms,
        phase_defined,
        clipped,
    })
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in (row + 1)..3 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// Runs stages 1-2 plus the decoupled wait and returns the reduced Q1-Q2
/// state (basis |00>, |01>, |10>, |11>, Q1 most significant).
pub fn run_mz4_tomography(
    device: &DeviceModel,
    gamma_bar_hz: f64,
    opts: &EvolveOptions,
) -> Result<DensityOperator> {
    check_mz4_topology(device)?;
    let basis = SectorBasis::new(4, 1)?;
    let initial = basis.state_from_positions(&[device.position(0)?])?;
    let schedule = mz4_tomography_schedule(gamma_bar_hz)?;
    let trace = run_schedule(device, &schedule, initial, &basis, opts)?;
    let final_state = trace.final_state()?;
    let pair = sector_reduce_pair(
        final_state.matrix(),
        &basis,
        device.position(1)?,
        device.position(2)?,
    )?;
    DensityOperator::new(pair.hermitized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::presets::mz4_device;
    use crate::qinfo;
    use alloc::vec;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn delta_grid(points: usize) -> Vec<f64> {
        (0..points).map(|k| 30e6 * k as f64 / (points - 1) as f64).collect()
    }

    #[test]
    fn fit_recovers_synthetic_parameters() {
        let grid = delta_grid(31);
        let scan = FringeScan {
            t_p_s: 100e-9,
            populations: grid
                .iter()
                .map(|&d| 0.5 + 0.3 * (core::f64::consts::TAU * 100e-9 * d + 0.4).cos())
                .collect(),
            delta_grid_hz: grid,
            gamma_bar_hz: 0.0,
        };
        let fit = fit_fringe(&scan).unwrap();
        assert!((fit.offset - 0.5).abs() < 1e-9);
        assert!((fit.amplitude - 0.3).abs() < 1e-9);
        assert!((fit.visibility - 0.6).abs() < 1e-9);
        assert!((fit.phase_rad - 0.4).abs() < 1e-9);
        assert!(fit.residual_rms < 1e-12);
        assert!(fit.phase_defined && !fit.clipped);
    }

    #[test]
    fn fit_flat_scan_has_undefined_phase() {
        let grid = delta_grid(16);
        let scan = FringeScan {
            t_p_s: 100e-9,
            populations: vec![0.25; grid.len()],
            delta_grid_hz: grid,
            gamma_bar_hz: 0.0,
        };
        let fit = fit_fringe(&scan).unwrap();
        assert_eq!(fit.visibility, 0.0);
        assert!(!fit.phase_defined);
    }

    #[test]
    fn fit_is_robust_to_noise() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let grid = delta_grid(31);
        let mut total: f64 = 0.0;
        for _ in 0..100 {
            let populations: Vec<f64> = grid
                .iter()
                .map(|&d| {
                    let clean =
                        0.5 + 0.3 * (core::f64::consts::TAU * 100e-9 * d).cos();
                    clean + 0.01 * rng.sample::<f64, _>(rand_distr::StandardNormal)
                })
                .collect();
            let scan = FringeScan {
                t_p_s: 100e-9,
                populations,
                delta_grid_hz: grid.clone(),
                gamma_bar_hz: 0.0,
            };
            let fit = fit_fringe(&scan).unwrap();
            total += (fit.visibility - 0.6).abs() / 0.6;
        }
        let mean = total / 100.0;
        assert!(mean < 0.02, "mean relative visibility error {mean}");
    }

    #[test]
    fn fit_rejects_degenerate_grids() {
        let scan = FringeScan {
            delta_grid_hz: vec![0.0, 1e6, 2e6, 3e6, 4e6],
            t_p_s: 100e-9,
            populations: vec![0.5; 5],
            gamma_bar_hz: 0.0,
        };
        assert!(matches!(fit_fringe(&scan), Err(Error::Fit(_)))); // 5 points
        let scan = FringeScan {
            delta_grid_hz: (0..8).map(|k| k as f64 * 1e5).collect(),
            t_p_s: 100e-9,
            populations: vec![0.5; 8],
            gamma_bar_hz: 0.0,
        };
        assert!(matches!(fit_fringe(&scan), Err(Error::Fit(_)))); // < 1 period
    }

    #[test]
    fn ideal_fringes_have_high_visibility_and_periodicity() {
        let dev = mz4_device();
        let grid = delta_grid(31);
        let scan = run_mz4(&dev, 0.0, &grid, &EvolveOptions::default()).unwrap();
        let fit = fit_fringe(&scan).unwrap();
        assert!(fit.visibility > 0.99, "V = {}", fit.visibility);

        // One fringe period in delta is 1/t_p = 10 MHz.
        let base = scan.populations[0];
        let periodic = run_mz4(&dev, 0.0, &[10e6], &EvolveOptions::default()).unwrap();
        assert!(
            (periodic.populations[0] - base).abs() < 1e-4,
            "periodicity residual {}",
            (periodic.populations[0] - base).abs()
        );
    }

    #[test]
    fn beamsplitter_minimum_sits_at_the_stage_duration() {
        // Stage 1 is a symmetric three-site star: the fed qubit empties as
        // cos^2(sqrt(2) g t), first minimum at t = 1/(4 sqrt(2) J) = 57 ns
        // for the default splitter coupling.
        use crate::device::SectorBasis;
        use crate::lindblad::run_schedule;
        let dev = mz4_device();
        let basis = SectorBasis::new(4, 1).unwrap();
        let sched = crate::device::Schedule::new(
            5.82e9,
            vec![crate::device::Stage::new(
                "beamsplit",
                120e-9,
                vec![5.820e9, 5.820e9, 5.820e9, 6.190e9],
            )],
        )
        .unwrap();
        let initial = basis.state_from_positions(&[0]).unwrap();
        let opts = EvolveOptions { dt_output_s: 0.25e-9, ..Default::default() };
        let trace = run_schedule(&dev, &sched, initial, &basis, &opts).unwrap();
        let p0 = trace.observable("n_Q0").unwrap();
        let argmin = p0
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let t_min = trace.times_s[argmin];
        assert!(
            (t_min - 57e-9).abs() <= 0.5e-9,
            "minimum at {} ns, expected 57 ns",
            t_min * 1e9
        );
        assert!(p0[argmin] < 1e-3, "residual Q0 population {}", p0[argmin]);
        // Both arms hold equal population there.
        let p1 = trace.observable("n_Q1").unwrap()[argmin];
        let p2 = trace.observable("n_Q2").unwrap()[argmin];
        assert!((p1 - p2).abs() < 1e-9);
    }

    #[test]
    fn tomography_state_is_entangled_at_zero_measurement() {
        let dev = mz4_device();
        let rho = run_mz4_tomography(&dev, 0.0, &EvolveOptions::default()).unwrap();
        let c = qinfo::concurrence(&rho).unwrap();
        assert!(c > 0.99, "concurrence {c}");
        let report =
            qinfo::complementarity_report(&qinfo::project_single_excitation(&rho).unwrap())
                .unwrap();
        assert!(report.bound_gap_purity >= -1e-9);
        assert!(report.bound_gap_entropy >= -1e-9);
    }

    #[test]
    fn visibility_matches_projected_coherence() {
        // Fitted fringe contrast against 2|c'| of the pre-interference
        // state, at a moderate measurement strength.
        let dev = mz4_device();
        let gamma = 0.748e6;
        let grid = delta_grid(31);
        let fit = fit_fringe(&run_mz4(&dev, gamma, &grid, &EvolveOptions::default()).unwrap())
            .unwrap();
        let rho = run_mz4_tomography(&dev, gamma, &EvolveOptions::default()).unwrap();
        let v_state =
            qinfo::visibility_of(&qinfo::project_single_excitation(&rho).unwrap());
        assert!(
            (fit.visibility - v_state).abs() < 0.01,
            "fit {} vs state {}",
            fit.visibility,
            v_state
        );
    }

    #[test]
    fn topology_is_checked() {
        let dev = crate::device::toy_device(4, 3.56e6); // chain, not diamond
        assert!(run_mz4(&dev, 0.0, &delta_grid(31), &EvolveOptions::default()).is_err());
    }
}
