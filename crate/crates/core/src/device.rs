//! Device model: qubit lattice, experiment schedules, excitation-sector
//! bases, and the operators the engines evolve.
//!
//! Qubits carry the labels printed on the chip (Q0, Q1, Q4, ...), which
//! need not be contiguous; matrices are indexed by *position*, the offset
//! of a qubit in [`DeviceModel::qubits`]. Occupation states are packed into
//! a `u32` whose value reads like the ket: position 0 is the most
//! significant bit, so for two qubits the states order as
//! |00>, |01>, |10>, |11>.
//!
//! All frequencies are stored in Hz and converted to angular units (rad/s)
//! when operators are built. Decay and dephasing rates derive from
//! `Gamma_1 = 1/T1` and `Gamma_phi = 1/T_phi + 2 pi Gamma_m`, with
//! `Gamma_m` the per-stage measurement-induced dephasing rate quoted in Hz.

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

use crate::error::{Error, Result};
use crate::qlinalg::{C64, ComplexMatrix};
use crate::readout::ReadoutParams;

const TWO_PI: f64 = 2.0 * PI;

/// Static parameters of one transmon.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitSpec {
    /// Chip label (the N of "QN").
    pub index: usize,
    pub idle_frequency_hz: f64,
    /// Anharmonicity U/2pi; negative for transmons.
    pub anharmonicity_hz: f64,
    /// Relaxation time; `None` models an ideal (infinite-T1) qubit.
    pub t1_s: Option<f64>,
    /// Pure-dephasing time; `None` models an ideal qubit.
    pub tphi_s: Option<f64>,
}

impl QubitSpec {
    pub fn ideal(index: usize, idle_frequency_hz: f64, anharmonicity_hz: f64) -> Self {
        Self { index, idle_frequency_hz, anharmonicity_hz, t1_s: None, tphi_s: None }
    }

    fn validate(&self) -> Result<()> {
        if !(1e9..20e9).contains(&self.idle_frequency_hz) {
            return Err(Error::Domain(format!(
                "qubit Q{}: idle frequency {} Hz outside the (1, 20) GHz sanity window",
                self.index, self.idle_frequency_hz
            )));
        }
        for (name, v) in [("t1_s", self.t1_s), ("tphi_s", self.tphi_s)] {
            if let Some(t) = v {
                if !(t > 0.0) || !t.is_finite() {
                    return Err(Error::Domain(format!(
                        "qubit Q{}: {name} must be positive and finite (use null for infinity)",
                        self.index
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Undirected nearest-neighbor coupling, by qubit label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingEdge {
    pub a: usize,
    pub b: usize,
    pub j_hz: f64,
}

/// Set of hopping edges.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CouplingGraph {
    edges: Vec<CouplingEdge>,
}

impl CouplingGraph {
    pub fn new(edges: Vec<CouplingEdge>) -> Self {
        Self { edges }
    }

    pub fn edges(&self) -> &[CouplingEdge] {
        &self.edges
    }

    /// The coupling between two labels, if present (order-insensitive).
    pub fn coupling(&self, a: usize, b: usize) -> Option<f64> {
        self.edges
            .iter()
            .find(|e| (e.a == a && e.b == b) || (e.a == b && e.b == a))
            .map(|e| e.j_hz)
    }
}

/// The qubit lattice with its couplings and per-qubit readout parameters.
#[derive(Debug, Clone)]
pub struct DeviceModel {
    qubits: Vec<QubitSpec>,
    couplings: CouplingGraph,
    readout: Vec<Option<ReadoutParams>>,
    positions: BTreeMap<usize, usize>,
}

impl DeviceModel {
    pub fn new(
        qubits: Vec<QubitSpec>,
        couplings: CouplingGraph,
        readout: Vec<Option<ReadoutParams>>,
    ) -> Result<Self> {
        if qubits.is_empty() {
            return Err(Error::Domain("a device needs at least one qubit".into()));
        }
        if readout.len() != qubits.len() {
            return Err(Error::Shape(format!(
                "readout list has {} entries for {} qubits",
                readout.len(),
                qubits.len()
            )));
        }
        let mut positions = BTreeMap::new();
        for (pos, q) in qubits.iter().enumerate() {
            q.validate()?;
            if positions.insert(q.index, pos).is_some() {
                return Err(Error::Index(format!("duplicate qubit label Q{}", q.index)));
            }
        }
        for e in couplings.edges() {
            if e.a == e.b {
                return Err(Error::Index(format!("self-coupling on Q{}", e.a)));
            }
            for label in [e.a, e.b] {
                if !positions.contains_key(&label) {
                    return Err(Error::Index(format!(
                        "coupling references unknown qubit Q{label}"
                    )));
                }
            }
            if !e.j_hz.is_finite() {
                return Err(Error::Domain(format!(
                    "coupling Q{}-Q{} has a non-finite strength",
                    e.a, e.b
                )));
            }
        }
        for r in readout.iter().flatten() {
            r.validate()?;
        }
        Ok(Self { qubits, couplings, readout, positions })
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubits(&self) -> &[QubitSpec] {
        &self.qubits
    }

    pub fn qubit(&self, position: usize) -> &QubitSpec {
        &self.qubits[position]
    }

    pub fn couplings(&self) -> &CouplingGraph {
        &self.couplings
    }

    pub fn readout_of(&self, position: usize) -> Option<&ReadoutParams> {
        self.readout[position].as_ref()
    }

    /// Position of a chip label in the qubit list.
    pub fn position(&self, label: usize) -> Result<usize> {
        self.positions
            .get(&label)
            .copied()
            .ok_or_else(|| Error::Index(format!("device has no qubit Q{label}")))
    }

    pub fn label(&self, position: usize) -> usize {
        self.qubits[position].index
    }

    /// Edges as (position, position, J in Hz).
    pub fn edges_by_position(&self) -> Vec<(usize, usize, f64)> {
        self.couplings
            .edges()
            .iter()
            .map(|e| (self.positions[&e.a], self.positions[&e.b], e.j_hz))
            .collect()
    }
}

/// Deterministic basis of occupation states with bounded total excitation.
///
/// States are ordered by excitation number, then by value (equivalently
/// lexicographically as bitstrings).
#[derive(Debug, Clone, PartialEq)]
pub struct SectorBasis {
    n_qubits: usize,
    max_excitations: usize,
    states: Vec<u32>,
    index: BTreeMap<u32, usize>,
}

impl SectorBasis {
    pub fn new(n_qubits: usize, max_excitations: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 24 {
            return Err(Error::Size(format!("n_qubits = {n_qubits} outside supported 1..=24")));
        }
        if max_excitations == 0 || max_excitations > n_qubits {
            return Err(Error::Domain(format!(
                "max_excitations = {max_excitations} must lie in 1..={n_qubits}"
            )));
        }
        let mut states = vec![0u32];
        for k in 1..=max_excitations {
            // Gosper's hack walks k-bit patterns in increasing numeric order.
            let mut v: u32 = (1 << k) - 1;
            let limit: u32 = 1 << n_qubits;
            while v < limit {
                states.push(v);
                let c = v & v.wrapping_neg();
                let r = v + c;
                v = (((r ^ v) >> 2) / c) | r;
            }
        }
        if states.len() > 100_000 {
            return Err(Error::Size(format!("sector dimension {} exceeds guard", states.len())));
        }
        let index = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        Ok(Self { n_qubits, max_excitations, states, index })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn max_excitations(&self) -> usize {
        self.max_excitations
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    pub fn index_of(&self, state: u32) -> Option<usize> {
        self.index.get(&state).copied()
    }

    /// Occupation of the qubit at `position` in the packed state `v`.
    pub fn occupied(&self, v: u32, position: usize) -> bool {
        v >> (self.n_qubits - 1 - position) & 1 == 1
    }

    fn bit(&self, position: usize) -> u32 {
        1 << (self.n_qubits - 1 - position)
    }

    /// Packed state with the listed positions excited.
    pub fn state_from_positions(&self, excited: &[usize]) -> Result<u32> {
        let mut v = 0u32;
        for &p in excited {
            if p >= self.n_qubits {
                return Err(Error::Index(format!("qubit position {p} out of range")));
            }
            v |= self.bit(p);
        }
        if self.index_of(v).is_none() {
            return Err(Error::Sector(format!(
                "state with {} excitations is outside the max-{} sector",
                v.count_ones(),
                self.max_excitations
            )));
        }
        Ok(v)
    }

    /// Occupation-number diagonal of the qubit at `position`.
    pub fn number_diag(&self, position: usize) -> Vec<f64> {
        self.states
            .iter()
            .map(|&v| if self.occupied(v, position) { 1.0 } else { 0.0 })
            .collect()
    }

    /// Pauli-Z diagonal (2n - 1; the excited state maps to +1).
    pub fn sigma_z_diag(&self, position: usize) -> Vec<f64> {
        self.states
            .iter()
            .map(|&v| if self.occupied(v, position) { 1.0 } else { -1.0 })
            .collect()
    }

    /// sigma_z on one qubit as a diagonal matrix in this basis.
    pub fn sigma_z_matrix(&self, position: usize) -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&self.sigma_z_diag(position))
    }

    /// Bitstring rendering with position 0 leftmost.
    pub fn bitstring(&self, v: u32) -> String {
        let mut s = String::with_capacity(self.n_qubits);
        for p in 0..self.n_qubits {
            s.push(if self.occupied(v, p) { '1' } else { '0' });
        }
        s
    }
}

/// One piecewise-constant segment of an experiment schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub label: String,
    pub duration_s: f64,
    /// Per-position qubit frequency during this stage.
    pub frequencies_hz: Vec<f64>,
    /// Active which-way measurements as (qubit label, Gamma_m/2pi in Hz).
    pub measurements: Vec<(usize, f64)>,
}

impl Stage {
    pub fn new(label: &str, duration_s: f64, frequencies_hz: Vec<f64>) -> Self {
        Self { label: label.into(), duration_s, frequencies_hz, measurements: Vec::new() }
    }

    pub fn with_measurement(mut self, qubit_label: usize, gamma_m_hz: f64) -> Self {
        self.measurements.push((qubit_label, gamma_m_hz));
        self
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.duration_s < 0.0 || !self.duration_s.is_finite() {
            return Err(Error::Domain(format!(
                "stage '{}': duration must be nonnegative",
                self.label
            )));
        }
        if self.frequencies_hz.len() != n_qubits {
            return Err(Error::Shape(format!(
                "stage '{}': {} frequencies for {} qubits",
                self.label,
                self.frequencies_hz.len(),
                n_qubits
            )));
        }
        for (q, g) in &self.measurements {
            if *g < 0.0 || !g.is_finite() {
                return Err(Error::Domain(format!(
                    "stage '{}': measurement rate on Q{q} must be nonnegative",
                    self.label
                )));
            }
        }
        Ok(())
    }
}

/// Ordered stages plus the rotating-frame frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub rotating_frame_hz: f64,
    pub stages: Vec<Stage>,
}

impl Schedule {
    pub fn new(rotating_frame_hz: f64, stages: Vec<Stage>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::Domain("a schedule needs at least one stage".into()));
        }
        Ok(Self { rotating_frame_hz, stages })
    }

    pub fn validate_for(&self, device: &DeviceModel) -> Result<()> {
        for s in &self.stages {
            s.validate(device.n_qubits())?;
            for (label, _) in &s.measurements {
                device.position(*label)?;
            }
        }
        Ok(())
    }

    pub fn total_duration_s(&self) -> f64 {
        self.stages.iter().map(|s| s.duration_s).sum()
    }
}

/// Hard-core-boson Hamiltonian in a sector basis, angular units.
///
/// Diagonal: sum_i 2 pi (f_i - frame) n_i in the rotating frame. Off-diagonal:
/// 2 pi J_ij between states that differ by one hop along a coupled edge.
pub fn build_hcb(
    device: &DeviceModel,
    frequencies_hz: &[f64],
    basis: &SectorBasis,
    frame_hz: f64,
) -> Result<ComplexMatrix> {
    let n = device.n_qubits();
    if frequencies_hz.len() != n {
        return Err(Error::Shape(format!(
            "{} frequencies for {} qubits",
            frequencies_hz.len(),
            n
        )));
    }
    if basis.n_qubits() != n {
        return Err(Error::Shape(format!(
            "basis covers {} qubits, device has {n}",
            basis.n_qubits()
        )));
    }
    let dim = basis.dim();
    let edges = device.edges_by_position();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for (col, &v) in basis.states().iter().enumerate() {
        let mut diag = 0.0;
        for p in 0..n {
            if basis.occupied(v, p) {
                diag += TWO_PI * (frequencies_hz[p] - frame_hz);
            }
        }
        h[(col, col)] = C64::new(diag, 0.0);
        for &(a, b, j_hz) in &edges {
            for (from, to) in [(a, b), (b, a)] {
                if basis.occupied(v, from) && !basis.occupied(v, to) {
                    let w = (v & !basis.bit(from)) | basis.bit(to);
                    let row = basis
                        .index_of(w)
                        .expect("hop conserves excitation number, so the target is in the basis");
                    h[(row, col)] += C64::new(TWO_PI * j_hz, 0.0);
                }
            }
        }
    }
    Ok(h)
}

/// Bose-Hubbard Hamiltonian on the full product space (angular units), for
/// small lattices only; serves as the cross-check oracle for [`build_hcb`].
pub fn build_bose_hubbard(
    device: &DeviceModel,
    frequencies_hz: &[f64],
    local_cutoff: usize,
    frame_hz: f64,
) -> Result<ComplexMatrix> {
    let n = device.n_qubits();
    if n > 5 {
        return Err(Error::Size(format!(
            "full-space Bose-Hubbard oracle supports at most 5 qubits, got {n}"
        )));
    }
    if local_cutoff < 2 {
        return Err(Error::Domain("local_cutoff must be at least 2".into()));
    }
    if frequencies_hz.len() != n {
        return Err(Error::Shape(format!(
            "{} frequencies for {n} qubits",
            frequencies_hz.len()
        )));
    }
    let dim = local_cutoff.checked_pow(n as u32).filter(|&d| d <= 4096).ok_or_else(|| {
        Error::Size(format!("Bose-Hubbard dimension {local_cutoff}^{n} exceeds the 4096 guard"))
    })?;

    // Mixed-radix decode, position 0 most significant.
    let occ = |state: usize, p: usize| -> usize {
        let shift = n - 1 - p;
        let mut s = state;
        for _ in 0..shift {
            s /= local_cutoff;
        }
        s % local_cutoff
    };
    let place = |p: usize| -> usize { local_cutoff.pow((n - 1 - p) as u32) };

    let edges = device.edges_by_position();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut diag = 0.0;
        for p in 0..n {
            let m = occ(col, p) as f64;
            diag += TWO_PI * (frequencies_hz[p] - frame_hz) * m;
            diag += TWO_PI * device.qubit(p).anharmonicity_hz / 2.0 * m * (m - 1.0);
        }
        h[(col, col)] = C64::new(diag, 0.0);
        for &(a, b, j_hz) in &edges {
            // a_dag on `to`, a on `from`, for both orientations of the edge.
            for (to, from) in [(a, b), (b, a)] {
                let n_from = occ(col, from);
                let n_to = occ(col, to);
                if n_from >= 1 && n_to + 1 < local_cutoff {
                    let row = col + place(to) - place(from);
                    let amp = ((n_to + 1) as f64).sqrt() * (n_from as f64).sqrt();
                    h[(row, col)] += C64::new(TWO_PI * j_hz * amp, 0.0);
                }
            }
        }
    }
    Ok(h)
}

/// Collapse operators for one stage, in a sector basis.
///
/// Each qubit with finite T1 contributes `sqrt(1/T1) sigma-`; each qubit
/// with finite T_phi or an active measurement contributes
/// `sqrt(Gamma_phi/2) sigma_z` with `Gamma_phi = 1/T_phi + 2 pi Gamma_m`.
pub fn collapse_operators(
    device: &DeviceModel,
    stage: &Stage,
    basis: &SectorBasis,
) -> Result<Vec<ComplexMatrix>> {
    let n = device.n_qubits();
    if basis.n_qubits() != n {
        return Err(Error::Shape(format!(
            "basis covers {} qubits, device has {n}",
            basis.n_qubits()
        )));
    }
    stage.validate(n)?;
    let dim = basis.dim();
    let mut ops = Vec::new();
    for p in 0..n {
        let q = device.qubit(p);
        if let Some(t1) = q.t1_s {
            let amp = C64::new((1.0 / t1).sqrt(), 0.0);
            let mut c = ComplexMatrix::zeros(dim, dim);
            for (col, &v) in basis.states().iter().enumerate() {
                if basis.occupied(v, p) {
                    let w = v & !basis.bit(p);
                    let row = basis
                        .index_of(w)
                        .expect("decay lowers the excitation number, staying in the basis");
                    c[(row, col)] = amp;
                }
            }
            ops.push(c);
        }
        let mut gamma_phi = q.tphi_s.map_or(0.0, |t| 1.0 / t);
        for (label, gamma_m_hz) in &stage.measurements {
            if device.position(*label)? == p {
                gamma_phi += TWO_PI * gamma_m_hz;
            }
        }
        if gamma_phi > 0.0 {
            let amp = (gamma_phi / 2.0).sqrt();
            let diag: Vec<f64> = basis.sigma_z_diag(p).iter().map(|z| z * amp).collect();
            ops.push(ComplexMatrix::from_real_diag(&diag));
        }
    }
    Ok(ops)
}

/// Reduced 4x4 density operator of the qubit pair at (`pos_a`, `pos_b`),
/// traced over every other qubit, for a state expressed in a sector basis.
///
/// The output basis orders as |00>, |01>, |10>, |11> with `pos_a` the first
/// (most significant) slot.
pub fn sector_reduce_pair(
    rho: &ComplexMatrix,
    basis: &SectorBasis,
    pos_a: usize,
    pos_b: usize,
) -> Result<ComplexMatrix> {
    if rho.rows() != basis.dim() || rho.cols() != basis.dim() {
        return Err(Error::Shape(format!(
            "state is {}x{}, basis dimension is {}",
            rho.rows(),
            rho.cols(),
            basis.dim()
        )));
    }
    let n = basis.n_qubits();
    if pos_a >= n || pos_b >= n || pos_a == pos_b {
        return Err(Error::Index(format!(
            "pair positions ({pos_a}, {pos_b}) invalid for {n} qubits"
        )));
    }
    let pair_mask = basis.bit(pos_a) | basis.bit(pos_b);
    let pair_index = |v: u32| -> usize {
        let a = basis.occupied(v, pos_a) as usize;
        let b = basis.occupied(v, pos_b) as usize;
        (a << 1) | b
    };
    let mut out = ComplexMatrix::zeros(4, 4);
    for (i, &v) in basis.states().iter().enumerate() {
        for (j, &w) in basis.states().iter().enumerate() {
            if v & !pair_mask == w & !pair_mask {
                out[(pair_index(v), pair_index(w))] += rho[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Chain topology with uniform coupling, ideal coherence. Test helper.
#[cfg(test)]
pub(crate) fn toy_device(n: usize, j_hz: f64) -> DeviceModel {
    let qubits = (0..n).map(|i| QubitSpec::ideal(i, 5.82e9, -220e6)).collect();
    let edges = (0..n.saturating_sub(1))
        .map(|i| CouplingEdge { a: i, b: i + 1, j_hz })
        .collect();
    DeviceModel::new(qubits, CouplingGraph::new(edges), vec![None; n]).unwrap()
}
