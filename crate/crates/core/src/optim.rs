//! Derivative-free simplex minimization (Nelder-Mead).

use alloc::format;
use alloc::vec::Vec;

// In no_std builds float math comes from the trait; builds whose dependency
// graph links std resolve the inherent methods instead and see this unused.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Termination and shape controls for [`nelder_mead`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Hard cap on cost evaluations.
    pub budget: usize,
    /// Stop when every vertex is within this distance of the best one.
    pub simplex_tol: f64,
    /// Stop when the worst-to-best cost spread falls below this.
    pub cost_spread_tol: f64,
    /// Initial per-coordinate displacement for the starting simplex.
    pub init_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { budget: 500, simplex_tol: 1e-9, cost_spread_tol: 1e-12, init_step: 0.1 }
    }
}

/// Minimization outcome with the per-evaluation best-cost history.
#[derive(Debug, Clone)]
pub struct OptimResult {
    pub point: Vec<f64>,
    pub cost: f64,
    pub evaluations: usize,
    /// Best cost seen after each evaluation.
    pub history: Vec<f64>,
}

struct Tracker<'a, F> {
    f: F,
    evals: usize,
    budget: usize,
    history: &'a mut Vec<f64>,
}

impl<F: FnMut(&[f64]) -> f64> Tracker<'_, F> {
    fn eval(&mut self, x: &[f64]) -> Result<Option<f64>> {
        if self.evals >= self.budget {
            return Ok(None);
        }
        self.evals += 1;
        let c = (self.f)(x);
        if c.is_nan() {
            return Err(Error::Optimizer(format!("cost is NaN at {x:?}")));
        }
        let best = self.history.last().copied().unwrap_or(f64::INFINITY);
        self.history.push(best.min(c));
        Ok(Some(c))
    }
}

/// Standard Nelder-Mead with reflection 1, expansion 2, contraction 0.5,
/// shrink 0.5. Returns the best vertex when the simplex collapses, the cost
/// spread vanishes, or the evaluation budget runs out.
pub fn nelder_mead(
    f: impl FnMut(&[f64]) -> f64,
    start: &[f64],
    opts: &NelderMeadOptions,
) -> Result<OptimResult> {
    if start.is_empty() {
        return Err(Error::Optimizer("need at least one parameter".into()));
    }
    if opts.budget == 0 {
        return Err(Error::Optimizer("evaluation budget must be positive".into()));
    }
    let n = start.len();
    let mut history = Vec::new();
    let mut tr = Tracker { f, evals: 0, budget: opts.budget, history: &mut history };

    let c0 = tr
        .eval(start)?
        .ok_or_else(|| Error::Optimizer("budget exhausted before the first evaluation".into()))?;
    if !c0.is_finite() {
        return Err(Error::Optimizer(format!("start cost {c0} is not finite")));
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), c0));
    'build: for i in 0..n {
        let mut p = start.to_vec();
        p[i] += if opts.init_step != 0.0 { opts.init_step } else { 0.1 };
        match tr.eval(&p)? {
            Some(c) => simplex.push((p, c)),
            None => break 'build,
        }
    }

    let finish = |mut simplex: Vec<(Vec<f64>, f64)>, evals: usize, history: Vec<f64>| {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let (point, cost) = simplex.swap_remove(0);
        OptimResult { point, cost, evaluations: evals, history }
    };

    if simplex.len() < n + 1 {
        // Budget too small to even build the simplex; report the best so far.
        let evals = tr.evals;
        return Ok(finish(simplex, evals, history));
    }

    loop {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let spread = simplex[n].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .map(|(p, _)| {
                p.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0f64, f64::max);
        if spread.abs() < opts.cost_spread_tol || size < opts.simplex_tol || tr.evals >= opts.budget
        {
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = alloc::vec![0.0; n];
        for (p, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let second_worst = simplex[n - 1].1;
        let best = simplex[0].1;
        let at = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = at(1.0);
        let Some(c_r) = tr.eval(&reflected)? else { break };
        if c_r < best {
            let expanded = at(2.0);
            match tr.eval(&expanded)? {
                Some(c_e) if c_e < c_r => simplex[n] = (expanded, c_e),
                Some(_) | None => simplex[n] = (reflected, c_r),
            }
            continue;
        }
        if c_r < second_worst {
            simplex[n] = (reflected, c_r);
            continue;
        }
        // Contraction: outside if the reflection improved on the worst,
        // inside otherwise.
        let (contracted, reference) = if c_r < worst.1 {
            (at(0.5), c_r)
        } else {
            (at(-0.5), worst.1)
        };
        match tr.eval(&contracted)? {
            Some(c_c) if c_c <= reference => {
                simplex[n] = (contracted, c_c);
                continue;
            }
            Some(_) => {}
            None => break,
        }
        // Shrink toward the best vertex.
        let anchor = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            for (x, a) in v.0.iter_mut().zip(&anchor) {
                *x = a + 0.5 * (*x - a);
            }
            let p = v.0.clone();
            match tr.eval(&p)? {
                Some(c) => v.1 = c,
                None => break,
            }
        }
    }

    let evals = tr.evals;
    Ok(finish(simplex, evals, history))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convex_bowl() {
        let f = |x: &[f64]| x.iter().map(|v| (v - 3.0) * (v - 3.0)).sum::<f64>();
        // The spread tolerance must sit below cost values ~ (1e-6)^2 for the
        // simplex to keep contracting to the requested accuracy.
        let opts = NelderMeadOptions {
            budget: 2000,
            init_step: 0.5,
            cost_spread_tol: 1e-24,
            ..Default::default()
        };
        let r = nelder_mead(f, &[0.0, 0.0, 0.0], &opts).unwrap();
        for v in &r.point {
            assert!((v - 3.0).abs() < 1e-6, "{:?}", r.point);
        }
    }

    #[test]
    fn rosenbrock_within_budget() {
        let f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            (1.0 - a) * (1.0 - a) + 100.0 * (b - a * a) * (b - a * a)
        };
        let opts = NelderMeadOptions { budget: 400, init_step: 0.5, ..Default::default() };
        let r = nelder_mead(f, &[-1.2, 1.0], &opts).unwrap();
        assert!(r.cost < 1e-8, "cost {} after {} evals", r.cost, r.evaluations);
        assert!(r.evaluations <= 400);
    }

    #[test]
    fn degenerate_budget_returns_start() {
        let f = |x: &[f64]| x[0] * x[0];
        let opts = NelderMeadOptions { budget: 1, ..Default::default() };
        let r = nelder_mead(f, &[2.0], &opts).unwrap();
        assert_eq!(r.point, alloc::vec![2.0]);
        assert_eq!(r.cost, 4.0);
        assert_eq!(r.evaluations, 1);
    }

    #[test]
    fn nan_cost_is_an_error() {
        let f = |x: &[f64]| if x[0] > 0.5 { f64::NAN } else { x[0] };
        let opts = NelderMeadOptions { budget: 100, init_step: 1.0, ..Default::default() };
        assert!(matches!(nelder_mead(f, &[0.0], &opts), Err(Error::Optimizer(_))));
    }

    #[test]
    fn history_is_monotone_best() {
        let f = |x: &[f64]| (x[0] - 1.0).abs() + (x[1] + 2.0).abs();
        let opts = NelderMeadOptions { budget: 300, init_step: 0.3, ..Default::default() };
        let r = nelder_mead(f, &[0.0, 0.0], &opts).unwrap();
        for w in r.history.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
        assert!(r.cost < 1e-6);
    }
}
