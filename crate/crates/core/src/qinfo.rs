//! Quantum-information metrics and the complementarity relations that tie
//! them to fringe visibility.
//!
//! The single-photon, two-path description lives in the single-excitation
//! subspace of the two arm qubits: projecting with
//! `P = |10><10| + |01><01|` and renormalizing gives a 2x2 state with
//! populations `p1', p2'` and coherence `c'`. Writing
//! `dp' = p1' - p2'`, `V = 2|c'|`, and `R = sqrt(dp'^2 + V^2)`, its
//! eigenvalues are `(1 +- R)/2`, which yields
//!
//! * purity `P_s = (1 + R^2)/2`, hence `2(1 - P_s) + V^2 = 1 - dp'^2 <= 1`
//!   with equality exactly for balanced paths, and
//! * entropy `S_s = h2((1 + R)/2) <= h2((1 + V)/2) = S_sym(V)`, the
//!   symmetric-path binary-entropy bound.
//!
//! Entropies are base 2 (bits) throughout.

use alloc::format;
use alloc::vec::Vec;

// In no_std builds float math comes from the trait; builds whose dependency
// graph links std resolve the inherent methods instead and see this unused.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::lindblad::DensityOperator;
use crate::qlinalg::{C64, ComplexMatrix, eigh, kron, pauli_y};

/// Normalized single-excitation block of a two-qubit state.
///
/// Basis order is {|10>, |01>}; `weight` is the trace captured by the
/// projector before renormalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleExcitationState {
    /// Population of |10> (photon in path 1).
    pub p1: f64,
    /// Population of |01> (photon in path 2).
    pub p2: f64,
    /// Coherence <10| rho_s |01>.
    pub coherence: C64,
    /// Single-excitation weight s = Tr(P rho) of the unprojected state.
    pub weight: f64,
}

impl SingleExcitationState {
    pub fn new(p1: f64, p2: f64, coherence: C64, weight: f64) -> Result<Self> {
        if (p1 + p2 - 1.0).abs() > 1e-9 || p1 < -1e-12 || p2 < -1e-12 {
            return Err(Error::Domain(format!(
                "populations ({p1}, {p2}) do not form a normalized distribution"
            )));
        }
        if coherence.norm() > (p1.max(0.0) * p2.max(0.0)).sqrt() + 1e-9 {
            return Err(Error::Domain(
                "coherence exceeds the positivity bound sqrt(p1 p2)".into(),
            ));
        }
        if !(weight > 0.0) || weight > 1.0 + 1e-9 {
            return Err(Error::Domain(format!("weight {weight} outside (0, 1]")));
        }
        Ok(Self { p1, p2, coherence, weight: weight.min(1.0) })
    }

    /// Population imbalance p1 - p2.
    pub fn delta_p(&self) -> f64 {
        self.p1 - self.p2
    }

    /// Bloch-vector length R = sqrt(dp^2 + V^2) of the projected state.
    pub fn bloch_length(&self) -> f64 {
        let v = 2.0 * self.coherence.norm();
        (self.delta_p() * self.delta_p() + v * v).sqrt().min(1.0)
    }

    /// The projected state as a 2x2 matrix in the {|10>, |01>} basis.
    pub fn as_matrix(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 0)] = C64::new(self.p1, 0.0);
        m[(1, 1)] = C64::new(self.p2, 0.0);
        m[(0, 1)] = self.coherence;
        m[(1, 0)] = self.coherence.conj();
        m
    }
}

/// Metrics and bound gaps for one projected state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplementarityReport {
    pub visibility: f64,
    pub purity: f64,
    /// Von Neumann entropy in bits.
    pub entropy_bits: f64,
    pub linear_entropy: f64,
    /// `1 - [2(1 - P_s) + V^2]`; equals dp'^2, nonnegative for physical states.
    pub bound_gap_purity: f64,
    /// `S_sym(V) - S_s`; nonnegative for physical states.
    pub bound_gap_entropy: f64,
}

/// Wootters concurrence of a two-qubit state:
/// `C = max(0, l1 - l2 - l3 - l4)` with `l_i` the decreasing square roots
/// of the eigenvalues of `rho (Y x Y) rho* (Y x Y)`.
pub fn concurrence(rho: &DensityOperator) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::Shape(format!(
            "concurrence needs a two-qubit (4x4) state, got dim {}",
            rho.dim()
        )));
    }
    let yy = kron(&pauli_y(), &pauli_y())?;
    let rho_tilde = &(&yy * &rho.matrix().conjugate()) * &yy;

    // Eigenvalues of rho rho_tilde via the Hermitian form
    // sqrt(rho) rho_tilde sqrt(rho).
    let eig = eigh(rho.matrix())?;
    let sqrt_rho = hermitian_sqrt(&eig)?;
    let m = (&(&sqrt_rho * &rho_tilde) * &sqrt_rho).hermitized();
    let mut lambdas: Vec<f64> = Vec::with_capacity(4);
    for mu in eigh(&m)?.eigenvalues {
        if mu < -1e-9 {
            return Err(Error::Numeric(format!(
                "spin-flipped spectrum has eigenvalue {mu} below -1e-9"
            )));
        }
        // Round-off around zero would otherwise surface as sqrt(eps) ~ 1e-8
        // and leak into the lambda differences.
        let clipped = if mu < 4e-13 { 0.0 } else { mu };
        lambdas.push(clipped.sqrt());
    }
    lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0).min(1.0))
}

fn hermitian_sqrt(eig: &crate::qlinalg::HermitianEigenDecomposition) -> Result<ComplexMatrix> {
    for &l in &eig.eigenvalues {
        if l < -1e-9 {
            return Err(Error::Numeric(format!("state eigenvalue {l} below -1e-9")));
        }
    }
    Ok(eig.apply(|l| C64::new(l.max(0.0).sqrt(), 0.0)))
}

/// Projects a two-qubit state onto the single-excitation subspace.
///
/// Basis convention: the 4x4 input orders as {|00>, |01>, |10>, |11>} with
/// the first qubit most significant.
pub fn project_single_excitation(rho: &DensityOperator) -> Result<SingleExcitationState> {
    if rho.dim() != 4 {
        return Err(Error::Shape(format!(
            "single-excitation projection needs a 4x4 state, got dim {}",
            rho.dim()
        )));
    }
    let m = rho.matrix();
    let p1 = m[(2, 2)].re;
    let p2 = m[(1, 1)].re;
    let weight = p1 + p2;
    if weight <= 1e-12 {
        return Err(Error::EmptySector);
    }
    let c = m[(2, 1)] / weight;
    SingleExcitationState::new(p1 / weight, p2 / weight, c, weight.min(1.0))
}

/// Fringe visibility carried by the projected coherence, `V = 2|c'|`.
pub fn visibility_of(state: &SingleExcitationState) -> f64 {
    (2.0 * state.coherence.norm()).min(1.0)
}

/// Purity `Tr(rho_s^2) = (1 + R^2)/2`, in [1/2, 1].
pub fn purity(state: &SingleExcitationState) -> f64 {
    let r = state.bloch_length();
    0.5 * (1.0 + r * r)
}

/// Von Neumann entropy `h2((1 + R)/2)` in bits.
pub fn von_neumann_entropy(state: &SingleExcitationState) -> f64 {
    binary_entropy(0.5 * (1.0 + state.bloch_length()))
}

/// Entropy of a symmetric-path state with visibility `V`: `h2((1 + V)/2)`.
pub fn entropy_bound_sym(visibility: f64) -> Result<f64> {
    if !(0.0..=1.0 + 1e-12).contains(&visibility) {
        return Err(Error::Domain(format!("visibility {visibility} outside [0, 1]")));
    }
    Ok(binary_entropy(0.5 * (1.0 + visibility.min(1.0))))
}

/// Binary entropy in bits, with 0 log 0 = 0.
pub fn binary_entropy(p: f64) -> f64 {
    let q = 1.0 - p;
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(q)
}

/// Evaluates both complementarity bounds for one projected state.
pub fn complementarity_report(state: &SingleExcitationState) -> Result<ComplementarityReport> {
    let visibility = visibility_of(state);
    let p_s = purity(state);
    let s_s = von_neumann_entropy(state);
    let bound_gap_purity = 1.0 - (2.0 * (1.0 - p_s) + visibility * visibility);
    let bound_gap_entropy = entropy_bound_sym(visibility)? - s_s;
    Ok(ComplementarityReport {
        visibility,
        purity: p_s,
        entropy_bits: s_s,
        linear_entropy: 1.0 - p_s,
        bound_gap_purity,
        bound_gap_entropy,
    })
}
