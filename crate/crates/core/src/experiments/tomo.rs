//! Simulated projective tomography: Pauli-basis sampling, linear-inversion
//! reconstruction, and projection back onto physical states.
//!
//! Runs are ideal-by-default elsewhere in the crate (drivers read the
//! density matrix directly); shot sampling here is the opt-in noise study.

use alloc::vec;
use alloc::vec::Vec;

// In no_std builds float math comes from the trait; builds whose dependency
// graph links std resolve the inherent methods instead and see this unused.
#[allow(unused_imports)]
use num_traits::Float;

use rand::Rng;

use crate::error::{Error, Result};
use crate::lindblad::DensityOperator;
use crate::qlinalg::{C64, ComplexMatrix, eigh, kron, pauli_x, pauli_y, pauli_z};
use crate::sme::trajectory_rng;

#[derive(Clone, Copy, PartialEq)]
enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    fn pauli(self) -> ComplexMatrix {
        match self {
            Axis::X => pauli_x(),
            Axis::Y => pauli_y(),
            Axis::Z => pauli_z(),
        }
    }

    /// Unitary sending the measurement eigenbasis to the computational
    /// basis: rows are the +1 / -1 eigenvectors.
    fn rotation(self) -> ComplexMatrix {
        let s = 1.0 / 2f64.sqrt();
        match self {
            Axis::X => ComplexMatrix::new(
                2,
                2,
                vec![
                    C64::new(s, 0.0),
                    C64::new(s, 0.0),
                    C64::new(s, 0.0),
                    C64::new(-s, 0.0),
                ],
            )
            .unwrap(),
            Axis::Y => ComplexMatrix::new(
                2,
                2,
                vec![
                    C64::new(s, 0.0),
                    C64::new(0.0, -s),
                    C64::new(s, 0.0),
                    C64::new(0.0, s),
                ],
            )
            .unwrap(),
            Axis::Z => ComplexMatrix::identity(2),
        }
    }
}

fn n_qubits_of(rho: &DensityOperator) -> Result<usize> {
    match rho.dim() {
        2 => Ok(1),
        4 => Ok(2),
        d => Err(Error::Shape(alloc::format!(
            "tomography supports 1 or 2 qubits, got dimension {d}"
        ))),
    }
}

fn settings(n: usize) -> Vec<Vec<Axis>> {
    if n == 1 {
        Axis::ALL.iter().map(|&a| vec![a]).collect()
    } else {
        let mut out = Vec::with_capacity(9);
        for &a in &Axis::ALL {
            for &b in &Axis::ALL {
                out.push(vec![a, b]);
            }
        }
        out
    }
}

fn setting_rotation(axes: &[Axis]) -> ComplexMatrix {
    let mut u = ComplexMatrix::identity(1);
    for &a in axes {
        u = kron(&u, &a.rotation()).expect("small fixed dimensions");
    }
    u
}

/// Outcome probabilities of one setting: diag(U rho U^+).
fn outcome_probabilities(rho: &ComplexMatrix, u: &ComplexMatrix) -> Vec<f64> {
    let rotated = &(u * rho) * &u.dagger();
    (0..rho.rows()).map(|i| rotated[(i, i)].re.max(0.0)).collect()
}

/// Correlator estimates over all settings: per setting, the mean of the
/// product of outcome signs for the qubits listed in `mask`.
fn sign_product(outcome: usize, n: usize, mask: &[bool]) -> f64 {
    let mut s = 1.0;
    for (q, &m) in mask.iter().enumerate() {
        if m {
            let bit = (outcome >> (n - 1 - q)) & 1;
            s *= if bit == 0 { 1.0 } else { -1.0 };
        }
    }
    s
}

fn reconstruct(n: usize, estimates: &dyn Fn(&[Axis], &[bool]) -> f64) -> ComplexMatrix {
    // rho = 2^-n sum_P <P> P over the full Pauli basis, averaging each
    // marginal over all settings that measure it.
    let dim = 1 << n;
    let mut rho = ComplexMatrix::identity(dim).scaled(C64::new(1.0 / dim as f64, 0.0));
    // Enumerate non-identity Pauli strings by the subset of qubits acted on.
    for subset in 1usize..(1 << n) {
        let active: Vec<usize> = (0..n).filter(|q| subset >> (n - 1 - q) & 1 == 1).collect();
        let choices = 3usize.pow(active.len() as u32);
        for pick in 0..choices {
            let mut axes_on = vec![None; n];
            let mut p = pick;
            for &q in &active {
                axes_on[q] = Some(Axis::ALL[p % 3]);
                p /= 3;
            }
            // Average the estimate over the settings compatible with this
            // string (free qubits range over all axes).
            let free: Vec<usize> = (0..n).filter(|q| axes_on[*q].is_none()).collect();
            let combos = 3usize.pow(free.len() as u32);
            let mut acc = 0.0;
            for combo in 0..combos {
                let mut axes: Vec<Axis> = Vec::with_capacity(n);
                let mut c = combo;
                for q in 0..n {
                    match axes_on[q] {
                        Some(a) => axes.push(a),
                        None => {
                            axes.push(Axis::ALL[c % 3]);
                            c /= 3;
                        }
                    }
                }
                let mask: Vec<bool> = axes_on.iter().map(Option::is_some).collect();
                acc += estimates(&axes, &mask);
            }
            let mean = acc / combos as f64;

            let mut op = ComplexMatrix::identity(1);
            for q in 0..n {
                let factor = match axes_on[q] {
                    Some(a) => a.pauli(),
                    None => ComplexMatrix::identity(2),
                };
                op = kron(&op, &factor).expect("small fixed dimensions");
            }
            rho = &rho + &op.scaled(C64::new(mean / dim as f64, 0.0));
        }
    }
    rho
}

/// Nearest positive-semidefinite unit-trace spectrum: clip the most
/// negative eigenvalues to zero, renormalizing by spreading each clipped
/// deficit over the remaining levels.
fn project_physical(rho: &ComplexMatrix) -> Result<DensityOperator> {
    let eig = eigh(&rho.hermitized())?;
    // Ascending order; walk from the bottom.
    let mut fixed = eig.eigenvalues.clone();
    let d = fixed.len();
    let mut deficit = 0.0;
    for i in 0..d {
        let share = deficit / (d - i) as f64;
        if fixed[i] + share < 0.0 {
            deficit += fixed[i];
            fixed[i] = 0.0;
        } else {
            for f in fixed.iter_mut().skip(i) {
                *f += share;
            }
            break;
        }
    }
    let total: f64 = fixed.iter().sum();
    if total <= 0.0 {
        return Err(Error::Numeric("reconstruction has no positive weight".into()));
    }
    let mut k = 0;
    let m = eig.apply(|_| {
        let v = C64::new(fixed[k] / total, 0.0);
        k += 1;
        v
    });
    DensityOperator::new(m.hermitized())
}

/// Exact-probability reconstruction (the infinite-shot limit): linear
/// inversion is the identity up to round-off.
pub fn reconstruct_exact(rho: &DensityOperator) -> Result<DensityOperator> {
    let n = n_qubits_of(rho)?;
    let all = settings(n);
    let mut table: Vec<(Vec<Axis>, Vec<f64>)> = Vec::with_capacity(all.len());
    for axes in &all {
        let u = setting_rotation(axes);
        table.push((axes.clone(), outcome_probabilities(rho.matrix(), &u)));
    }
    let estimate = |axes: &[Axis], mask: &[bool]| -> f64 {
        let probs = &table
            .iter()
            .find(|(a, _)| a.as_slice() == axes)
            .expect("every setting is tabulated")
            .1;
        probs
            .iter()
            .enumerate()
            .map(|(o, &p)| p * sign_product(o, axes.len(), mask))
            .sum()
    };
    project_physical(&reconstruct(n, &estimate))
}

/// Shot-sampled tomography: `shots` projective outcomes per Pauli setting,
/// linear inversion, then projection to the closest physical spectrum by
/// eigenvalue clipping.
pub fn simulate_tomography(
    rho: &DensityOperator,
    shots: u64,
    seed: u64,
) -> Result<DensityOperator> {
    if shots == 0 {
        return Err(Error::Domain("tomography needs at least one shot".into()));
    }
    let n = n_qubits_of(rho)?;
    let mut rng = trajectory_rng(seed, 0x70_6d_6f);
    let all = settings(n);
    let mut table: Vec<(Vec<Axis>, Vec<f64>)> = Vec::with_capacity(all.len());
    for axes in &all {
        let u = setting_rotation(axes);
        let probs = outcome_probabilities(rho.matrix(), &u);
        // Sample a multinomial by repeated inverse-CDF draws.
        let total: f64 = probs.iter().sum();
        let mut counts = vec![0u64; probs.len()];
        for _ in 0..shots {
            let mut r: f64 = rng.random::<f64>() * total;
            let mut picked = probs.len() - 1;
            for (o, &p) in probs.iter().enumerate() {
                if r < p {
                    picked = o;
                    break;
                }
                r -= p;
            }
            counts[picked] += 1;
        }
        let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / shots as f64).collect();
        table.push((axes.clone(), freqs));
    }
    let estimate = |axes: &[Axis], mask: &[bool]| -> f64 {
        let freqs = &table
            .iter()
            .find(|(a, _)| a.as_slice() == axes)
            .expect("every setting is tabulated")
            .1;
        freqs
            .iter()
            .enumerate()
            .map(|(o, &f)| f * sign_product(o, axes.len(), mask))
            .sum()
    };
    project_physical(&reconstruct(n, &estimate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qinfo;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn random_two_qubit(rng: &mut impl Rng) -> DensityOperator {
        DensityOperator::new(crate::qlinalg::random_density(rng, 4).hermitized()).unwrap()
    }

    #[test]
    fn exact_reconstruction_is_identity() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for _ in 0..20 {
            let rho = random_two_qubit(&mut rng);
            let rec = reconstruct_exact(&rho).unwrap();
            assert!(rec.matrix().distance(rho.matrix()) < 1e-12);
        }
        // Single qubit too.
        let one = DensityOperator::pure(&[C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let rec = reconstruct_exact(&one).unwrap();
        assert!(rec.matrix().distance(one.matrix()) < 1e-12);
    }

    #[test]
    fn sampled_bell_state_fidelity() {
        let s = 1.0 / 2f64.sqrt();
        let bell =
            DensityOperator::pure(&[C64::new(s, 0.0), C64::ZERO, C64::ZERO, C64::new(s, 0.0)])
                .unwrap();
        let mut min_overlap: f64 = 1.0;
        for seed in 0..50 {
            let rec = simulate_tomography(&bell, 10_000, seed).unwrap();
            // Pure-target fidelity reduces to <psi| rho |psi>.
            let overlap = crate::lindblad::expectation(&rec, bell.matrix()).unwrap();
            min_overlap = min_overlap.min(overlap);
        }
        assert!(min_overlap > 0.99, "worst fidelity {min_overlap}");
    }

    #[test]
    fn reconstruction_is_physical_at_low_shots() {
        let rho = DensityOperator::basis_state(4, 0).unwrap();
        let rec = simulate_tomography(&rho, 100, 9).unwrap();
        assert!((rec.trace_real() - 1.0).abs() < 1e-12);
        assert!(rec.min_eigenvalue().unwrap() > -1e-12);
    }

    #[test]
    fn error_decreases_with_shots() {
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        let rho = random_two_qubit(&mut rng);
        let mut mean_err = [0.0f64; 3];
        let shots = [100u64, 1000, 10_000];
        for (i, &s) in shots.iter().enumerate() {
            for seed in 0..50 {
                let rec = simulate_tomography(&rho, s, seed).unwrap();
                mean_err[i] += rec.matrix().distance(rho.matrix()) / 50.0;
            }
        }
        assert!(mean_err[0] > mean_err[1] && mean_err[1] > mean_err[2], "{mean_err:?}");
    }

    #[test]
    fn concurrence_survives_reconstruction() {
        let s = 1.0 / 2f64.sqrt();
        let bell =
            DensityOperator::pure(&[C64::ZERO, C64::new(s, 0.0), C64::new(s, 0.0), C64::ZERO])
                .unwrap();
        let rec = simulate_tomography(&bell, 20_000, 4).unwrap();
        let c = qinfo::concurrence(&rec).unwrap();
        assert!(c > 0.97, "concurrence {c}");
    }
}
