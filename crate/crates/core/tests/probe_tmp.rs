// Temporary numeric probe; removed before finalizing.
use mzsim_core::experiments::presets::{MZ12_PATH1, MZ12_PATH2, mz12_device, mz12_schedule};
use mzsim_core::experiments::{Mz12Mode, Mz12Options, run_mz12};
use mzsim_core::device::SectorBasis;
use mzsim_core::lindblad::{EvolveOptions, run_schedule};

#[test]
#[ignore]
fn probe_mz12_profiles() {
    let dev = mz12_device();
    let opts = Mz12Options::default();
    for gamma in [0.0, 5.921e6, 11.195e6, 18.134e6] {
        let trace = run_mz12(&dev, gamma, Mz12Mode::Lindblad, &opts).unwrap();
        let sum_at = |labels: &[usize], k: usize| -> f64 {
            labels
                .iter()
                .map(|&l| trace.observable(&format!("n_Q{l}")).unwrap()[k])
                .sum()
        };
        let mut peak1: (f64, f64) = (0.0, 0.0);
        let mut peak2: (f64, f64) = (0.0, 0.0);
        for (k, &t) in trace.times_s.iter().enumerate() {
            let s1 = sum_at(&MZ12_PATH1, k);
            let s2 = sum_at(&MZ12_PATH2, k);
            if s1 > peak1.0 {
                peak1 = (s1, t);
            }
            if s2 > peak2.0 {
                peak2 = (s2, t);
            }
        }
        let n15 = trace.observable("n_Q15").unwrap();
        let peak15 = n15.iter().cloned().fold(f64::NAN, f64::max);
        println!(
            "gamma {:>8.3} MHz: path1 peak {:.4}@{:.0}ns path2 peak {:.4}@{:.0}ns  n15 final {:.4} peak {:.4}",
            gamma / 1e6,
            peak1.0,
            peak1.1 * 1e9,
            peak2.0,
            peak2.1 * 1e9,
            n15.last().unwrap(),
            peak15
        );
        // print path2 profile coarsely
        let s2_profile: Vec<String> = (0..trace.len())
            .step_by(20)
            .map(|k| format!("{:.3}", sum_at(&MZ12_PATH2, k)))
            .collect();
        println!("  path2(t): {}", s2_profile.join(" "));
    }
}

#[test]
#[ignore]
fn probe_blocked_arm() {
    let dev = mz12_device();
    let opts = Mz12Options::default();
    let full = run_mz12(&dev, 0.0, Mz12Mode::Lindblad, &opts).unwrap();
    let n15_full = full.observable("n_Q15").unwrap();
    let peak_full = n15_full.iter().cloned().fold(f64::NAN, f64::max);
    let argmax_full = n15_full
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    println!(
        "full: n15 final {:.4}, peak {:.4} @ {} ns",
        n15_full.last().unwrap(),
        peak_full,
        full.times_s[argmax_full] * 1e9
    );
    for blocked in [1usize, 2] {
        let basis = SectorBasis::new(12, 1).unwrap();
        let mut sched = mz12_schedule(0.0, 0.0, 200e-9).unwrap();
        let pos = dev.position(blocked).unwrap();
        sched.stages[0].frequencies_hz[pos] = 6.165e9;
        let initial = basis.state_from_positions(&[dev.position(0).unwrap()]).unwrap();
        let t = run_schedule(&dev, &sched, initial, &basis, &EvolveOptions::default()).unwrap();
        let n15 = t.observable("n_Q15").unwrap();
        let peak = n15.iter().cloned().fold(f64::NAN, f64::max);
        println!(
            "blocked Q{}: n15 final {:.4}, peak {:.4}, at-full-peak-time {:.4}",
            blocked,
            n15.last().unwrap(),
            peak,
            n15[argmax_full]
        );
    }
}

#[test]
#[ignore]
fn probe_align_landscape() {
    use mzsim_core::experiments::presets::mz4_device_asymmetric;
    use mzsim_core::experiments::{AlignmentCost, AlignmentProblem, align_frequencies, default_crosstalk};
    // Scan the stage-1 cost along a grid around the optimum.
    let dev = mz4_device_asymmetric();
    for (a, b) in [(0.8e6, -0.6e6), (0.35e6, -0.25e6)] {
        let problem = AlignmentProblem::with_compensable_shifts(
            dev.clone(),
            AlignmentCost::Mz4Stage1,
            default_crosstalk(4, 0.03),
            &[(1, a), (2, b)],
            400,
        )
        .unwrap();
        let out = align_frequencies(&problem).unwrap();
        let want = problem.compensating_offsets_hz();
        println!(
            "inject ({:.2},{:.2}) MHz: recovered ({:.4},{:.4}) want ({:.4},{:.4}) cost {:.3e} evals {}",
            a / 1e6,
            b / 1e6,
            out.offsets_hz[1] / 1e6,
            out.offsets_hz[2] / 1e6,
            want[1] / 1e6,
            want[2] / 1e6,
            out.final_cost,
            out.evaluations
        );
    }
}

#[test]
#[ignore]
fn probe_align_mz12() {
    use mzsim_core::experiments::presets::mz12_device_asymmetric;
    use mzsim_core::experiments::{AlignmentCost, AlignmentProblem, align_frequencies, default_crosstalk};
    let dev = mz12_device_asymmetric();
    for shifts in [
        vec![(2usize, 1.0e6), (6, 1.0e6), (11, 1.0e6)],
        vec![(2usize, 0.4e6), (6, -0.3e6), (11, 0.35e6)],
    ] {
        let problem = AlignmentProblem::with_compensable_shifts(
            dev.clone(),
            AlignmentCost::Mz12,
            default_crosstalk(12, 0.01),
            &shifts,
            500,
        )
        .unwrap();
        let out = align_frequencies(&problem).unwrap();
        let want = problem.compensating_offsets_hz();
        let worst = problem
            .free
            .iter()
            .map(|&p| (out.offsets_hz[p] - want[p]).abs())
            .fold(0.0f64, f64::max);
        println!(
            "shifts {:?}: worst offset error {:.1} Hz, cost {:.3e} -> {:.3e}, evals {}",
            shifts.iter().map(|s| s.1 / 1e6).collect::<Vec<_>>(),
            worst,
            out.initial_cost,
            out.final_cost,
            out.evaluations
        );
    }
}

#[test]
#[ignore]
fn probe_align_stage4() {
    use mzsim_core::experiments::presets::mz4_device_asymmetric;
    use mzsim_core::experiments::{AlignmentCost, AlignmentProblem, align_frequencies, default_crosstalk};
    let dev = mz4_device_asymmetric();
    for shift in [1.0e6, 0.5e6, -0.4e6] {
        let problem = AlignmentProblem::with_compensable_shifts(
            dev.clone(),
            AlignmentCost::Mz4Stage4,
            default_crosstalk(4, 0.03),
            &[(2, shift)],
            500,
        )
        .unwrap();
        let out = align_frequencies(&problem).unwrap();
        let want = problem.compensating_offsets_hz();
        println!(
            "stage4 shift {:.2} MHz: err {:.1} Hz cost {:.3e} -> {:.3e} evals {}",
            shift / 1e6,
            (out.offsets_hz[2] - want[2]).abs(),
            out.initial_cost,
            out.final_cost,
            out.evaluations
        );
    }
}

#[test]
#[ignore]
fn probe_fringe_periodicity() {
    use mzsim_core::experiments::presets::mz4_device;
    use mzsim_core::experiments::run_mz4;
    let dev = mz4_device();
    for rtol in [1e-8f64, 1e-11] {
        let opts = EvolveOptions { rtol, atol: rtol * 1e-2, ..Default::default() };
        let a = run_mz4(&dev, 0.0, &[0.0, 3e6, 7e6], &opts).unwrap();
        let b = run_mz4(&dev, 0.0, &[10e6, 13e6, 17e6], &opts).unwrap();
        let resid: Vec<f64> = a
            .populations
            .iter()
            .zip(&b.populations)
            .map(|(x, y)| (x - y).abs())
            .collect();
        println!("rtol {rtol:e}: periodicity residuals {resid:?}");
    }
}
