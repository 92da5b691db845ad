//! Dispersive-readout physics for the which-way measurement.
//!
//! The readout cavity is never part of the simulated Hilbert space. Its
//! effect enters through rates: the measurement-induced dephasing rate
//! `Gamma_m = 2 kappa chi^2 nbar / (chi^2 + (kappa/2)^2)` for continuous
//! monitoring, and its pulse-averaged counterpart for decoupled-qubit
//! runs. This module also carries the pointer-state ODE, the Gaussian
//! POVM of single-shot readout, and the tomography-based estimator for
//! the average dephasing rate.
//!
//! All parameters cross this API in the /2pi convention (Hz); the formulas
//! are degree-1 homogeneous in the rates, so values stay in Hz throughout,
//! except where an explicit time constant requires angular units (noted
//! inline).

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use core::f64::consts::PI;

use num_complex::Complex;
// In no_std builds float math comes from the trait; builds whose dependency
// graph links std resolve the inherent methods instead and see this unused.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::qlinalg::{C64, ComplexMatrix};
use crate::quad::adaptive_simpson;

const TWO_PI: f64 = 2.0 * PI;

/// Dispersive-readout parameters of one qubit, all in Hz (/2pi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutParams {
    /// Dispersive shift chi/2pi.
    pub chi_hz: f64,
    /// Resonator linewidth kappa/2pi.
    pub kappa_hz: f64,
    /// Qubit-resonator coupling g/2pi, when known.
    pub g_hz: Option<f64>,
    /// Drive detuning Delta/2pi from the resonator, when known.
    pub detuning_hz: Option<f64>,
    /// Steady-state photons per unit squared drive amplitude.
    pub photon_gain_nbar_per_amp2: Option<f64>,
}

impl ReadoutParams {
    pub fn new(chi_hz: f64, kappa_hz: f64) -> Self {
        Self { chi_hz, kappa_hz, g_hz: None, detuning_hz: None, photon_gain_nbar_per_amp2: None }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.kappa_hz > 0.0) || !self.kappa_hz.is_finite() {
            return Err(Error::Domain("readout kappa_hz must be positive".to_string()));
        }
        if !self.chi_hz.is_finite() {
            return Err(Error::Domain("readout chi_hz must be finite".to_string()));
        }
        Ok(())
    }

    /// Steady-state photon number for a squared drive amplitude, using the
    /// calibrated gain.
    pub fn nbar_for_amp2(&self, amp2: f64) -> Result<f64> {
        let gain = self.photon_gain_nbar_per_amp2.ok_or_else(|| {
            Error::Domain("readout gain (nbar per amp^2) is not calibrated".to_string())
        })?;
        Ok(gain * amp2)
    }
}

/// Transmon-corrected dispersive shift `chi = g^2 eta / (Delta (Delta + eta))`.
pub fn dispersive_shift(g_hz: f64, delta_hz: f64, eta_hz: f64) -> Result<f64> {
    if delta_hz == 0.0 || delta_hz + eta_hz == 0.0 {
        return Err(Error::Domain(
            "dispersive shift is singular at Delta = 0 or Delta = -eta".to_string(),
        ));
    }
    Ok(g_hz * g_hz * eta_hz / (delta_hz * (delta_hz + eta_hz)))
}

/// AC Stark shift `2 chi nbar` of the qubit under `nbar` cavity photons.
pub fn stark_shift(chi_hz: f64, nbar: f64) -> f64 {
    2.0 * chi_hz * nbar
}

/// Measurement-induced dephasing rate (continuous drive, resonant pulse):
/// `Gamma_m = 2 kappa chi^2 nbar / (chi^2 + (kappa/2)^2)`, returned in Hz.
pub fn dephasing_rate_continuous(chi_hz: f64, kappa_hz: f64, nbar: f64) -> f64 {
    let chi2 = chi_hz * chi_hz;
    2.0 * kappa_hz * chi2 * nbar / (chi2 + 0.25 * kappa_hz * kappa_hz)
}

/// Intracavity photon number under a square readout pulse: fills as
/// `n_ss (1 - e^{-kappa t})` until `t_off`, then decays as `e^{-kappa t}`.
/// `kappa_hz` is kappa/2pi; the exponential rate is the angular kappa.
pub fn photon_number(t_s: f64, n_ss: f64, kappa_hz: f64, t_off_s: f64) -> f64 {
    let kappa = TWO_PI * kappa_hz;
    if t_s <= 0.0 {
        return 0.0;
    }
    if t_s <= t_off_s {
        n_ss * (1.0 - (-kappa * t_s).exp())
    } else {
        let n_off = n_ss * (1.0 - (-kappa * t_off_s).exp());
        n_off * (-kappa * (t_s - t_off_s)).exp()
    }
}

/// Pulse-averaged measurement-induced dephasing rate over `[0, t_window]`
/// for a square drive of length `t_pulse`, in Hz.
pub fn average_dephasing_window(
    n_ss: f64,
    readout: &ReadoutParams,
    t_pulse_s: f64,
    t_window_s: f64,
) -> Result<f64> {
    readout.validate()?;
    if t_window_s < t_pulse_s || t_pulse_s < 0.0 {
        return Err(Error::Domain(format!(
            "need 0 <= t_pulse ({t_pulse_s}) <= t_window ({t_window_s})"
        )));
    }
    if t_window_s == 0.0 || n_ss == 0.0 {
        return Ok(0.0);
    }
    let mut gamma_at =
        |t: f64| dephasing_rate_continuous(readout.chi_hz, readout.kappa_hz, {
            photon_number(t, n_ss, readout.kappa_hz, t_pulse_s)
        });
    // Integrate the fill and decay branches separately; the kink at t_off
    // would otherwise stall the adaptive refinement.
    let filled = adaptive_simpson(&mut gamma_at, 0.0, t_pulse_s, 1e-8)?;
    let decayed = adaptive_simpson(&mut gamma_at, t_pulse_s, t_window_s, 1e-8)?;
    Ok((filled + decayed) / t_window_s)
}

/// Average dephasing rate estimated from the measured-to-reference
/// coherence ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingEstimate {
    /// Gamma_m-bar / 2pi in Hz. Negative when the ratio exceeds one.
    pub rate_hz: f64,
    /// Set when the coherence ratio exceeded one (statistical fluctuation).
    pub negative_rate: bool,
}

/// Estimates the average dephasing rate from tomography of the coherence:
/// `Gamma_m-bar = -(1/t_m) ln(|rho01_m| / |rho01_ref|)`, converted to Hz.
pub fn dephasing_from_tomography(
    rho01_m: C64,
    rho01_ref: C64,
    t_m_s: f64,
) -> Result<DephasingEstimate> {
    if !(t_m_s > 0.0) {
        return Err(Error::Domain("measurement time must be positive".to_string()));
    }
    let r_ref = rho01_ref.norm();
    if r_ref <= 0.0 {
        return Err(Error::Domain("reference coherence must be nonzero".to_string()));
    }
    let r_m = rho01_m.norm();
    if r_m == 0.0 {
        return Err(Error::InfiniteRate);
    }
    let rate = -(r_m / r_ref).ln() / t_m_s;
    Ok(DephasingEstimate { rate_hz: rate / TWO_PI, negative_rate: rate < 0.0 })
}

/// Pointer amplitudes of the driven, damped readout cavity conditioned on
/// the qubit state.
#[derive(Debug, Clone)]
pub struct PointerTrace {
    pub times_s: Vec<f64>,
    /// Cavity amplitude conditioned on |g>.
    pub alpha_g: Vec<C64>,
    /// Cavity amplitude conditioned on |e>.
    pub alpha_e: Vec<C64>,
    /// Which-way separation alpha_e - alpha_g.
    pub delta: Vec<C64>,
}

/// Integrates the pointer ODE
/// `alpha_s' = -[kappa/2 + i (Delta + s chi)] alpha_s - i eps(t)`
/// for s = +1 (|e>) and s = -1 (|g>) from vacuum, with the drive sampled
/// per step and held constant across it (exact per-step propagator).
///
/// `drive` carries the drive amplitude eps_d in angular units (rad/s), so
/// the steady state obeys `|alpha|^2 = eps^2 / ((kappa/2)^2 + (Delta+s chi)^2)`
/// with kappa, chi, Delta also angular.
pub fn pointer_amplitudes(
    readout: &ReadoutParams,
    drive: &[f64],
    dt_s: f64,
) -> Result<PointerTrace> {
    readout.validate()?;
    if !(dt_s > 0.0) {
        return Err(Error::Domain("pointer integration needs dt > 0".to_string()));
    }
    let kappa = TWO_PI * readout.kappa_hz;
    let chi = TWO_PI * readout.chi_hz;
    let delta = TWO_PI * readout.detuning_hz.unwrap_or(0.0);
    let fastest = kappa.abs().max(chi.abs()).max(delta.abs());
    if dt_s * fastest >= 0.1 {
        return Err(Error::Domain(format!(
            "dt = {dt_s} s does not resolve the cavity rates (dt * max rate = {})",
            dt_s * fastest
        )));
    }
    let n = drive.len();
    let mut trace = PointerTrace {
        times_s: Vec::with_capacity(n + 1),
        alpha_g: Vec::with_capacity(n + 1),
        alpha_e: Vec::with_capacity(n + 1),
        delta: Vec::with_capacity(n + 1),
    };
    let lambda = |s: f64| Complex::new(kappa / 2.0, delta + s * chi);
    let mut alpha = [C64::ZERO, C64::ZERO];
    trace.times_s.push(0.0);
    trace.alpha_g.push(alpha[0]);
    trace.alpha_e.push(alpha[1]);
    trace.delta.push(C64::ZERO);
    for (k, &eps) in drive.iter().enumerate() {
        for (i, s) in [(0usize, -1.0), (1usize, 1.0)] {
            let lam = lambda(s);
            let decay = (-lam * dt_s).exp();
            // alpha(t+dt) = e^{-lam dt} alpha + (-i eps / lam)(1 - e^{-lam dt})
            let forced = Complex::new(0.0, -eps) / lam;
            alpha[i] = decay * alpha[i] + forced * (C64::ONE - decay);
        }
        trace.times_s.push((k + 1) as f64 * dt_s);
        trace.alpha_g.push(alpha[0]);
        trace.alpha_e.push(alpha[1]);
        trace.delta.push(alpha[1] - alpha[0]);
    }
    Ok(trace)
}

/// Gaussian single-shot readout model: integrated signal distributions
/// centered on s_g and s_e with common width sigma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPovm {
    pub s_g: f64,
    pub s_e: f64,
    pub sigma: f64,
}

impl GaussianPovm {
    pub fn new(s_g: f64, s_e: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain("POVM sigma must be positive".to_string()));
        }
        Ok(Self { s_g, s_e, sigma })
    }

    /// Signal-to-noise convention: `(s_e - s_g)^2 / (4 sigma^2)`.
    pub fn snr(&self) -> f64 {
        let d = self.s_e - self.s_g;
        d * d / (4.0 * self.sigma * self.sigma)
    }

    pub fn likelihood_g(&self, s: f64) -> f64 {
        gaussian_pdf(s, self.s_g, self.sigma)
    }

    pub fn likelihood_e(&self, s: f64) -> f64 {
        gaussian_pdf(s, self.s_e, self.sigma)
    }

    fn log_likelihoods(&self, s: f64) -> (f64, f64) {
        let norm = -(self.sigma * (2.0 * PI).sqrt()).ln();
        let zg = (s - self.s_g) / self.sigma;
        let ze = (s - self.s_e) / self.sigma;
        (norm - 0.5 * zg * zg, norm - 0.5 * ze * ze)
    }
}

fn gaussian_pdf(s: f64, mean: f64, sigma: f64) -> f64 {
    let z = (s - mean) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
}

/// POVM element for outcome `s`: diag(p(s|g), p(s|e)) in the energy basis.
pub fn povm_element(povm: &GaussianPovm, s: f64) -> ComplexMatrix {
    ComplexMatrix::from_real_diag(&[povm.likelihood_g(s), povm.likelihood_e(s)])
}

/// Bayesian update of (p_g, p_e) on observing the integrated signal `s`.
///
/// Posterior weights are combined in log space, so far-tail outcomes do not
/// underflow; the error path only fires for an invalid prior.
pub fn bayes_update(prior: (f64, f64), povm: &GaussianPovm, s: f64) -> Result<(f64, f64)> {
    let (pg, pe) = prior;
    if pg < -1e-12 || pe < -1e-12 || (pg + pe - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("prior ({pg}, {pe}) is not a normalized distribution")));
    }
    let (lg, le) = povm.log_likelihoods(s);
    let wg = if pg > 0.0 { pg.ln() + lg } else { f64::NEG_INFINITY };
    let we = if pe > 0.0 { pe.ln() + le } else { f64::NEG_INFINITY };
    let m = wg.max(we);
    if !m.is_finite() {
        return Err(Error::Numeric("both posterior weights vanished".to_string()));
    }
    let eg = (wg - m).exp();
    let ee = (we - m).exp();
    let z = eg + ee;
    Ok((eg / z, ee / z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn dispersive_shift_limits() {
        // Huge anharmonicity recovers the two-level g^2/Delta.
        let g = 100e6;
        let delta = -1.5e9;
        let two_level = g * g / delta;
        let chi = dispersive_shift(g, delta, 1000.0 * delta).unwrap();
        assert!((chi - two_level).abs() / two_level.abs() < 1e-3);

        assert_eq!(dispersive_shift(0.0, -1.5e9, -0.35e9).unwrap(), 0.0);

        // Direct arithmetic check.
        let chi = dispersive_shift(100e6, -1.5e9, -0.35e9).unwrap();
        let oracle = 100e6f64.powi(2) * -0.35e9 / (-1.5e9 * (-1.5e9 + -0.35e9));
        assert!((chi - oracle).abs() < 1e-6 * oracle.abs());

        assert!(dispersive_shift(1e8, 0.0, -0.35e9).is_err());
        assert!(dispersive_shift(1e8, 0.35e9, -0.35e9).is_err());
    }

    #[test]
    fn stark_shift_values() {
        assert_eq!(stark_shift(1e6, 0.0), 0.0);
        assert!((stark_shift(1e6, 5.16) - 10.32e6).abs() < 1e-6);
        assert_eq!(stark_shift(0.7e6, 8.0), 2.0 * stark_shift(0.7e6, 4.0));
    }

    #[test]
    fn dephasing_rate_special_points() {
        assert_eq!(dephasing_rate_continuous(1e6, 6.26e6, 0.0), 0.0);
        // chi = kappa/2 collapses the Lorentzian to Gamma_m = kappa nbar.
        let kappa = 6.26e6;
        let got = dephasing_rate_continuous(kappa / 2.0, kappa, 5.16);
        assert!((got - kappa * 5.16).abs() < 1e-6 * got);
        // Independent arithmetic evaluation.
        let (chi, nbar) = (2.0e6, 5.16);
        let oracle = 2.0 * kappa * chi * chi * nbar / (chi * chi + kappa * kappa / 4.0);
        assert!((dephasing_rate_continuous(chi, kappa, nbar) - oracle).abs() < 1e-9 * oracle);
    }

    #[test]
    fn photon_number_paper_anchors() {
        let (n_ss, kappa, t_off) = (5.16, 6.26e6, 100e-9);
        assert_eq!(photon_number(0.0, n_ss, kappa, t_off), 0.0);
        let filled = photon_number(100e-9, n_ss, kappa, t_off);
        assert!((filled - 5.06).abs() < 0.01, "n(100 ns) = {filled}");

        // First crossing below 0.1 photons near 199.7 ns.
        let mut t = t_off;
        while photon_number(t, n_ss, kappa, t_off) >= 0.1 {
            t += 1e-11;
        }
        assert!((t - 199.7e-9).abs() < 0.5e-9, "crossing at {} ns", t * 1e9);

        // Continuity at t_off, monotone on both branches.
        let before = photon_number(t_off - 1e-15, n_ss, kappa, t_off);
        let after = photon_number(t_off + 1e-15, n_ss, kappa, t_off);
        assert!((before - after).abs() < 1e-6);
        let mut prev = 0.0;
        for k in 0..=100 {
            let v = photon_number(k as f64 * 1e-9, n_ss, kappa, t_off);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn average_dephasing_against_trapezoid_oracle() {
        let readout = ReadoutParams::new(-2.0e6, 6.26e6);
        let (n_ss, t_pulse, t_window) = (5.16, 100e-9, 200e-9);
        let got = average_dephasing_window(n_ss, &readout, t_pulse, t_window).unwrap();

        // Trapezoid-rule oracle at 1e5 points.
        let n = 100_000;
        let h = t_window / n as f64;
        let gamma = |t: f64| {
            dephasing_rate_continuous(
                readout.chi_hz,
                readout.kappa_hz,
                photon_number(t, n_ss, readout.kappa_hz, t_pulse),
            )
        };
        let mut acc = 0.5 * (gamma(0.0) + gamma(t_window));
        for k in 1..n {
            acc += gamma(k as f64 * h);
        }
        let oracle = acc * h / t_window;
        assert!((got - oracle).abs() < 1e-5 * oracle, "{got} vs {oracle}");

        assert_eq!(average_dephasing_window(0.0, &readout, t_pulse, t_window).unwrap(), 0.0);
    }

    #[test]
    fn average_dephasing_constant_drive_limit() {
        // With kappa >> 1/t the cavity fills instantly: the average is the
        // plateau rate scaled by the duty cycle t_pulse / t_window.
        let readout = ReadoutParams::new(40e6, 2.0e9);
        let (n_ss, t_pulse, t_window) = (3.0, 100e-9, 200e-9);
        let got = average_dephasing_window(n_ss, &readout, t_pulse, t_window).unwrap();
        let plateau = dephasing_rate_continuous(readout.chi_hz, readout.kappa_hz, n_ss);
        let want = plateau * t_pulse / t_window;
        assert!((got - want).abs() < 2e-2 * want, "{got} vs {want}");
    }

    #[test]
    fn tomography_estimator() {
        let same = dephasing_from_tomography(C64::new(0.0, 0.4), C64::new(0.4, 0.0), 200e-9)
            .unwrap();
        assert!(same.rate_hz.abs() < 1e-12);
        assert!(!same.negative_rate);

        // ratio e^{-1} over 200 ns: rate 5e6 s^-1, i.e. ~0.7958 MHz.
        let est = dephasing_from_tomography(
            C64::new(0.5 / core::f64::consts::E, 0.0),
            C64::new(0.5, 0.0),
            200e-9,
        )
        .unwrap();
        assert!((est.rate_hz - 5e6 / TWO_PI).abs() < 1e-3);
        assert!((est.rate_hz - 0.7958e6).abs() < 1e2);

        assert!(matches!(
            dephasing_from_tomography(C64::ZERO, C64::ONE, 1e-7),
            Err(Error::InfiniteRate)
        ));
        let neg =
            dephasing_from_tomography(C64::new(0.6, 0.0), C64::new(0.5, 0.0), 1e-7).unwrap();
        assert!(neg.negative_rate && neg.rate_hz < 0.0);
    }

    #[test]
    fn pointer_amplitudes_reach_steady_state() {
        let mut readout = ReadoutParams::new(1.5e6, 6.26e6);
        readout.detuning_hz = Some(0.0);
        let eps = 2.0e7; // rad/s
        let dt = 1e-10;
        let n = 20_000; // 2 us >> 1/kappa
        let drive = alloc::vec![eps; n];
        let trace = pointer_amplitudes(&readout, &drive, dt).unwrap();

        let kappa = TWO_PI * readout.kappa_hz;
        let chi = TWO_PI * readout.chi_hz;
        for (s, alpha) in [(-1.0, trace.alpha_g.last().unwrap()), (1.0, trace.alpha_e.last().unwrap())]
        {
            let want = Complex::new(0.0, -eps) / Complex::new(kappa / 2.0, s * chi);
            assert!((alpha - want).norm() < 1e-9 * want.norm());
        }

        // Zero drive stays at vacuum; chi = 0 erases which-way information.
        let silent = pointer_amplitudes(&readout, &alloc::vec![0.0; 100], dt).unwrap();
        assert!(silent.alpha_g.iter().all(|a| a.norm() == 0.0));

        let blind = ReadoutParams::new(0.0, 6.26e6);
        let trace = pointer_amplitudes(&blind, &drive[..1000], dt).unwrap();
        assert!(trace.delta.iter().all(|d| d.norm() < 1e-14));
    }

    #[test]
    fn pointer_rejects_coarse_step() {
        let readout = ReadoutParams::new(1.5e6, 6.26e6);
        assert!(pointer_amplitudes(&readout, &[1.0; 4], 1e-6).is_err());
    }

    #[test]
    fn povm_midpoint_resolution_and_projective_limit() {
        let povm = GaussianPovm::new(-1.0, 1.0, 0.8).unwrap();
        let mid = povm_element(&povm, 0.0);
        assert!((mid[(0, 0)].re - mid[(1, 1)].re).abs() < 1e-15);

        // Resolution of identity by quadrature over +-10 sigma.
        for like in [GaussianPovm::likelihood_g, GaussianPovm::likelihood_e] {
            let total = adaptive_simpson(
                &mut |s| like(&povm, s),
                povm.s_g.min(povm.s_e) - 10.0 * povm.sigma,
                povm.s_g.max(povm.s_e) + 10.0 * povm.sigma,
                1e-9,
            )
            .unwrap();
            assert!((total - 1.0).abs() < 1e-6);
        }

        // Narrow sigma at s = s_e is essentially projective.
        let narrow = GaussianPovm::new(-1.0, 1.0, 0.01 * 2.0).unwrap();
        let e = povm_element(&narrow, narrow.s_e);
        assert!(e[(1, 1)].re / e[(0, 0)].re.max(f64::MIN_POSITIVE) > 1e10);
    }

    #[test]
    fn bayes_update_fixed_points() {
        let povm = GaussianPovm::new(-1.0, 1.0, 0.7).unwrap();
        let mid = 0.5 * (povm.s_g + povm.s_e);
        let (pg, pe) = bayes_update((0.5, 0.5), &povm, mid).unwrap();
        assert!((pg - 0.5).abs() < 1e-12 && (pe - 0.5).abs() < 1e-12);

        for s in [-30.0, 0.3, 42.0] {
            let (pg, pe) = bayes_update((1.0, 0.0), &povm, s).unwrap();
            assert_eq!((pg, pe), (1.0, 0.0));
        }

        // Far-tail outcome survives thanks to log-space weights.
        let (pg, pe) = bayes_update((0.5, 0.5), &povm, 1e4).unwrap();
        assert!(pe > pg && (pg + pe - 1.0).abs() < 1e-12);

        assert!(bayes_update((0.7, 0.7), &povm, 0.0).is_err());
    }

    #[test]
    fn bayes_monte_carlo_matches_quadrature() {
        // Draw outcomes from the |g> distribution; the mean posterior p_g
        // equals int p(s|g)^2 / (p(s|g) + p(s|e)) ds (flat prior).
        let povm = GaussianPovm::new(-1.0, 1.0, 1.1).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let s = povm.s_g + povm.sigma * rng.sample::<f64, _>(rand_distr::StandardNormal);
            acc += bayes_update((0.5, 0.5), &povm, s).unwrap().0;
        }
        let mc = acc / n as f64;
        let oracle = adaptive_simpson(
            &mut |s| {
                let g = povm.likelihood_g(s);
                let e = povm.likelihood_e(s);
                g * g / (g + e)
            },
            povm.s_g - 12.0 * povm.sigma,
            povm.s_e + 12.0 * povm.sigma,
            1e-9,
        )
        .unwrap();
        assert!(mc > 0.5);
        // 3 sigma of the Monte-Carlo mean (posterior values are in [0,1]).
        assert!((mc - oracle).abs() < 3.0 * 0.5 / (n as f64).sqrt(), "{mc} vs {oracle}");
    }
}
