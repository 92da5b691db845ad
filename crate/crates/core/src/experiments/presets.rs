//! Built-in device files and staged schedules for the two interferometers.
//!
//! The only device number quoted by the underlying experiments is the
//! Q0-Q2 hopping rate J/2pi = 3.56 MHz and the readout linewidth
//! kappa/2pi = 6.26 MHz (with the drive anchor A^2 = 0.25 -> nbar = 5.16);
//! every other default here (anharmonicity, dispersive shift, idle points)
//! is a round placeholder for a typical tunable transmon. Defaults are
//! ideal-coherence: T1 and T_phi are infinite unless a config overrides
//! them.

use alloc::vec;
use alloc::vec::Vec;

use crate::device::{CouplingEdge, CouplingGraph, DeviceModel, QubitSpec, Schedule, Stage};
use crate::error::Result;
use crate::readout::ReadoutParams;

/// Common working frequency of the interferometer qubits.
pub const WORKING_FREQ_HZ: f64 = 5.82e9;
/// Quoted Q0-Q2 hopping rate; the 12-qubit splitter edges use it.
pub const DEFAULT_J_HZ: f64 = 3.56e6;
/// Round placeholder for the unpublished couplings along the arms. Slower
/// than the splitter so the merged photon reaches Q15 late in the 200 ns
/// window and the arms stay backflow-free during the first pass.
pub const MZ12_ARM_J_HZ: f64 = 2.6e6;
/// 4-qubit splitter couplings (Q0-Q1, Q0-Q2), chosen so the published
/// 57 ns beamsplit stage is exactly a half splitter: J = 1/(4 sqrt(2) t).
pub const MZ4_J_SPLIT_HZ: f64 = 1.0 / (4.0 * core::f64::consts::SQRT_2 * 57e-9);
/// 4-qubit merger couplings (Q1-Q3, Q2-Q3), matching the 49 ns stage.
pub const MZ4_J_MERGE_HZ: f64 = 1.0 / (4.0 * core::f64::consts::SQRT_2 * 49e-9);
/// Default transmon anharmonicity placeholder.
pub const DEFAULT_ANHARMONICITY_HZ: f64 = -220e6;
/// Readout linewidth of the which-way resonator.
pub const DEFAULT_KAPPA_HZ: f64 = 6.26e6;
/// Dispersive-shift placeholder for the which-way resonator.
pub const DEFAULT_CHI_HZ: f64 = -2.0e6;
/// Calibration anchor: squared drive amplitude 0.25 fills 5.16 photons.
pub const DEFAULT_PHOTON_GAIN: f64 = 5.16 / 0.25;

/// Stage durations of the 4-qubit interferometer protocol.
pub const MZ4_DURATIONS_S: [f64; 4] = [57e-9, 200e-9, 100e-9, 49e-9];
/// Length of the which-way measurement window (stage 2).
pub const MZ4_MEASUREMENT_WINDOW_S: f64 = 200e-9;
/// Length of the phase-accumulation stage.
pub const MZ4_PHASE_STAGE_S: f64 = 100e-9;

/// Chip labels of the 12-qubit interferometer, in device order.
pub const MZ12_LABELS: [usize; 12] = [0, 1, 2, 4, 5, 7, 8, 10, 11, 13, 14, 15];
/// Path 1: upper interferometer arm between the beamsplitters Q0 and Q15.
pub const MZ12_PATH1: [usize; 5] = [1, 4, 5, 7, 13];
/// Path 2: lower arm; Q2 carries the which-way measurement.
pub const MZ12_PATH2: [usize; 5] = [2, 8, 10, 11, 14];
/// Evolution window of the 12-qubit run.
pub const MZ12_DURATION_S: f64 = 200e-9;

fn whichway_readout() -> ReadoutParams {
    ReadoutParams {
        chi_hz: DEFAULT_CHI_HZ,
        kappa_hz: DEFAULT_KAPPA_HZ,
        g_hz: None,
        detuning_hz: Some(0.0),
        photon_gain_nbar_per_amp2: Some(DEFAULT_PHOTON_GAIN),
    }
}

/// Diamond-topology 4-qubit device: Q0 feeds both arms (Q1, Q2), which
/// merge on Q3. Ideal coherence.
pub fn mz4_device() -> DeviceModel {
    mz4_device_with_coherence(None, None)
}

/// As [`mz4_device`] with uniform finite coherence times.
pub fn mz4_device_with_coherence(t1_s: Option<f64>, tphi_s: Option<f64>) -> DeviceModel {
    let idle = [6.165e9, 5.830e9, 5.820e9, 6.190e9];
    let qubits: Vec<QubitSpec> = (0..4)
        .map(|i| QubitSpec {
            index: i,
            idle_frequency_hz: idle[i],
            anharmonicity_hz: DEFAULT_ANHARMONICITY_HZ,
            t1_s,
            tphi_s,
        })
        .collect();
    let edges = vec![
        CouplingEdge { a: 0, b: 1, j_hz: MZ4_J_SPLIT_HZ },
        CouplingEdge { a: 0, b: 2, j_hz: MZ4_J_SPLIT_HZ },
        CouplingEdge { a: 1, b: 3, j_hz: MZ4_J_MERGE_HZ },
        CouplingEdge { a: 2, b: 3, j_hz: MZ4_J_MERGE_HZ },
    ];
    let readout = vec![None, None, Some(whichway_readout()), None];
    DeviceModel::new(qubits, CouplingGraph::new(edges), readout)
        .expect("built-in 4-qubit device is valid")
}

/// 4-qubit device with distinct per-edge couplings. Alignment fixtures use
/// it: distinguishable arms keep the population cost free of the
/// swap-degenerate minima a perfectly symmetric lattice would have.
pub fn mz4_device_asymmetric() -> DeviceModel {
    let mut dev = mz4_device();
    let edges = vec![
        CouplingEdge { a: 0, b: 1, j_hz: 3.0e6 },
        CouplingEdge { a: 0, b: 2, j_hz: 3.3e6 },
        CouplingEdge { a: 1, b: 3, j_hz: 3.6e6 },
        CouplingEdge { a: 2, b: 3, j_hz: 3.9e6 },
    ];
    dev = DeviceModel::new(dev.qubits().to_vec(), CouplingGraph::new(edges), vec![None; 4])
        .expect("asymmetric 4-qubit device is valid");
    dev
}

/// Ring-topology 12-qubit device: Q0 splits into the two five-qubit arms
/// that merge on Q15. Ideal coherence, uniform couplings.
pub fn mz12_device() -> DeviceModel {
    mz12_device_with_coherence(None, None)
}

/// As [`mz12_device`] with uniform finite coherence times.
pub fn mz12_device_with_coherence(t1_s: Option<f64>, tphi_s: Option<f64>) -> DeviceModel {
    let qubits: Vec<QubitSpec> = MZ12_LABELS
        .iter()
        .map(|&label| QubitSpec {
            index: label,
            idle_frequency_hz: WORKING_FREQ_HZ,
            anharmonicity_hz: DEFAULT_ANHARMONICITY_HZ,
            t1_s,
            tphi_s,
        })
        .collect();
    let mut edges = Vec::new();
    let mut chain = |labels: &[usize]| {
        for w in labels.windows(2) {
            let j_hz = if w[0] == 0 { DEFAULT_J_HZ } else { MZ12_ARM_J_HZ };
            edges.push(CouplingEdge { a: w[0], b: w[1], j_hz });
        }
    };
    chain(&[0, 1, 4, 5, 7, 13, 15]);
    chain(&[0, 2, 8, 10, 11, 14, 15]);
    let readout = MZ12_LABELS
        .iter()
        .map(|&l| if l == 2 { Some(whichway_readout()) } else { None })
        .collect();
    DeviceModel::new(qubits, CouplingGraph::new(edges), readout)
        .expect("built-in 12-qubit device is valid")
}

/// 12-qubit device with mildly varied couplings for alignment fixtures.
pub fn mz12_device_asymmetric() -> DeviceModel {
    let base = mz12_device();
    let edges: Vec<CouplingEdge> = base
        .couplings()
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| CouplingEdge {
            a: e.a,
            b: e.b,
            j_hz: 3.2e6 + 0.08e6 * k as f64,
        })
        .collect();
    DeviceModel::new(base.qubits().to_vec(), CouplingGraph::new(edges), vec![None; 12])
        .expect("asymmetric 12-qubit device is valid")
}

/// The four-stage 4-qubit interferometer schedule.
///
/// 1. beamsplit: Q0-Q2 resonant at the working point (57 ns);
/// 2. which-way: qubits decoupled, average dephasing `gamma_bar_hz` applied
///    to Q2 for the full 200 ns window;
/// 3. phase: Q1 offset by `delta_hz` for 100 ns, accumulating
///    `phi = -2 pi delta t_p` on path 1;
/// 4. interfere: Q1-Q3 resonant for 49 ns; the photon merges on Q3.
pub fn mz4_schedule(gamma_bar_hz: f64, delta_hz: f64) -> Result<Schedule> {
    let stages = vec![
        Stage::new(
            "beamsplit",
            MZ4_DURATIONS_S[0],
            vec![5.820e9, 5.820e9, 5.820e9, 6.190e9],
        ),
        Stage::new(
            "whichway",
            MZ4_DURATIONS_S[1],
            vec![6.165e9, 5.830e9, 5.820e9, 6.190e9],
        )
        .with_measurement(2, gamma_bar_hz),
        Stage::new(
            "phase",
            MZ4_DURATIONS_S[2],
            vec![6.165e9, 5.830e9 + delta_hz, 5.820e9, 6.190e9],
        ),
        Stage::new(
            "interfere",
            MZ4_DURATIONS_S[3],
            vec![6.165e9, 5.820e9, 5.820e9, 5.820e9],
        ),
    ];
    Schedule::new(WORKING_FREQ_HZ, stages)
}

/// Tomography variant: stages 1-2, then a decoupled 100 ns wait instead of
/// phase accumulation and interference.
pub fn mz4_tomography_schedule(gamma_bar_hz: f64) -> Result<Schedule> {
    let stages = vec![
        Stage::new(
            "beamsplit",
            MZ4_DURATIONS_S[0],
            vec![5.820e9, 5.820e9, 5.820e9, 6.190e9],
        ),
        Stage::new(
            "whichway",
            MZ4_DURATIONS_S[1],
            vec![6.165e9, 5.830e9, 5.820e9, 6.190e9],
        )
        .with_measurement(2, gamma_bar_hz),
        Stage::new("wait", 100e-9, vec![6.165e9, 5.830e9, 5.820e9, 6.190e9]),
    ];
    Schedule::new(WORKING_FREQ_HZ, stages)
}

/// Single-stage 12-qubit schedule: every qubit at the working frequency,
/// continuous which-way dephasing `gamma_m_hz` on Q2. `stark_residual_hz`
/// models an imperfectly compensated Stark shift as a Q2 frequency offset.
pub fn mz12_schedule(
    gamma_m_hz: f64,
    stark_residual_hz: f64,
    duration_s: f64,
) -> Result<Schedule> {
    let mut freqs = vec![WORKING_FREQ_HZ; MZ12_LABELS.len()];
    let q2_pos = MZ12_LABELS.iter().position(|&l| l == 2).expect("Q2 is in the lattice");
    freqs[q2_pos] += stark_residual_hz;
    let stage = Stage::new("evolve", duration_s, freqs).with_measurement(2, gamma_m_hz);
    Schedule::new(WORKING_FREQ_HZ, vec![stage])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn devices_have_expected_topology() {
        let dev = mz4_device();
        assert_eq!(dev.n_qubits(), 4);
        for (a, b, j) in [
            (0, 1, MZ4_J_SPLIT_HZ),
            (0, 2, MZ4_J_SPLIT_HZ),
            (1, 3, MZ4_J_MERGE_HZ),
            (2, 3, MZ4_J_MERGE_HZ),
        ] {
            assert_eq!(dev.couplings().coupling(a, b), Some(j));
        }
        // Splitter and merger rates sit near the quoted 3.56 MHz scale.
        assert!((MZ4_J_SPLIT_HZ - 3.10e6).abs() < 0.01e6);
        assert!((MZ4_J_MERGE_HZ - 3.61e6).abs() < 0.01e6);
        assert!(dev.couplings().coupling(1, 2).is_none());
        assert!(dev.readout_of(dev.position(2).unwrap()).is_some());

        let dev = mz12_device();
        assert_eq!(dev.n_qubits(), 12);
        // Ring: both paths connect Q0 to Q15.
        assert!(dev.couplings().coupling(0, 1).is_some());
        assert!(dev.couplings().coupling(0, 2).is_some());
        assert!(dev.couplings().coupling(13, 15).is_some());
        assert!(dev.couplings().coupling(14, 15).is_some());
        assert_eq!(dev.couplings().edges().len(), 12);
    }

    #[test]
    fn schedules_validate_against_devices() {
        let dev = mz4_device();
        mz4_schedule(0.333e6, 10e6).unwrap().validate_for(&dev).unwrap();
        mz4_tomography_schedule(1.0e6).unwrap().validate_for(&dev).unwrap();
        let dev = mz12_device();
        let sched = mz12_schedule(5.921e6, 0.0, MZ12_DURATION_S).unwrap();
        sched.validate_for(&dev).unwrap();
        assert_eq!(sched.total_duration_s(), 200e-9);
    }
}
