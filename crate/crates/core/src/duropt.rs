//! The convex duration program behind every lower bound in the crate:
//! minimize `sum_i w_i p_i` subject to `sum_i c_i p_i^(1-alpha) <= E`.
//!
//! The budget constraint is tight at any optimum (lowering a duration never
//! helps the objective), which makes the program solvable in closed form via
//! the Lagrangian stationarity conditions:
//!
//! ```text
//! p_i = (lambda (alpha-1) c_i / w_i)^(1/alpha)
//! lambda (alpha-1) = (E / S)^(alpha/(1-alpha)),  S = sum_i c_i^(1/alpha) w_i^((alpha-1)/alpha)
//! objective = E^(1/(1-alpha)) * S^(alpha/(alpha-1))
//! ```
//!
//! [`solve_weighted_numeric`] solves the same program by bisection on the
//! multiplier and exists purely as an independent cross-check.

use serde::Serialize;

use crate::model::Alpha;
use crate::{Error, Result};

/// A weighted convex duration program.
///
/// `w_i` are the objective coefficients, `c_i p_i^(1-alpha)` is job `i`'s
/// energy, and `budget` is the shared energy budget.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedProgram {
    pub weights: Vec<f64>,
    pub energy_coeffs: Vec<f64>,
    pub budget: f64,
    pub alpha: Alpha,
}

impl WeightedProgram {
    pub fn new(weights: Vec<f64>, energy_coeffs: Vec<f64>, budget: f64, alpha: Alpha) -> Result<Self> {
        let prog = WeightedProgram { weights, energy_coeffs, budget, alpha };
        prog.check()?;
        Ok(prog)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn check(&self) -> Result<()> {
        if !self.alpha.is_valid() {
            return Err(Error::BadAlpha(self.alpha.get()));
        }
        if self.weights.is_empty() || self.weights.len() != self.energy_coeffs.len() {
            return Err(Error::BadProgram(
                "weights and energy coefficients must have equal nonzero length".to_string(),
            ));
        }
        if let Some(i) = self.weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::BadProgram(format!("weight {i} must be strictly positive")));
        }
        if let Some(i) = self.energy_coeffs.iter().position(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::BadProgram(format!("energy coefficient {i} must be strictly positive")));
        }
        if !(self.budget.is_finite() && self.budget > 0.0) {
            return Err(Error::BadProgram("budget must be strictly positive".to_string()));
        }
        Ok(())
    }
}

/// Optimal durations together with the Lagrange multiplier and objective.
///
/// The budget constraint is tight: `sum_i c_i p_i^(1-alpha) = E` up to a
/// relative 1e-9.
#[derive(Debug, Clone, Serialize)]
pub struct DurationSolution {
    pub durations: Vec<f64>,
    pub multiplier: f64,
    pub objective: f64,
}

/// Closed-form optimum of a weighted duration program.
pub fn solve_weighted(prog: &WeightedProgram) -> Result<DurationSolution> {
    prog.check()?;
    let a = prog.alpha.get();
    let s: f64 = prog
        .energy_coeffs
        .iter()
        .zip(&prog.weights)
        .map(|(c, w)| c.powf(1.0 / a) * w.powf((a - 1.0) / a))
        .sum();
    // k = lambda (alpha - 1), fixed by the tight budget constraint
    let k = (prog.budget / s).powf(a / (1.0 - a));
    let durations = prog
        .energy_coeffs
        .iter()
        .zip(&prog.weights)
        .map(|(c, w)| (k * c / w).powf(1.0 / a))
        .collect();
    let objective = prog.budget.powf(1.0 / (1.0 - a)) * s.powf(a / (a - 1.0));
    Ok(DurationSolution { durations, multiplier: k / (a - 1.0), objective })
}

const BISECT_MAX_ITERS: usize = 200;

/// Numerical oracle for [`solve_weighted`]: monotone bisection on the
/// multiplier over the tight budget constraint.
///
/// `g(lambda) = sum_i c_i (lambda (alpha-1) c_i / w_i)^((1-alpha)/alpha) - E`
/// is strictly decreasing in `lambda`; the search stops once
/// `|g| < 1e-12 * E`. Durations and objective are then evaluated from the
/// stationarity relation, independent of the closed forms above.
pub fn solve_weighted_numeric(prog: &WeightedProgram) -> Result<DurationSolution> {
    prog.check()?;
    let a = prog.alpha.get();
    let e = prog.budget;
    let g = |lambda: f64| -> f64 {
        prog.energy_coeffs
            .iter()
            .zip(&prog.weights)
            .map(|(c, w)| c * (lambda * (a - 1.0) * c / w).powf((1.0 - a) / a))
            .sum::<f64>()
            - e
    };
    let tol = 1e-12 * e;

    let lo = 1e-18;
    if g(lo) < 0.0 {
        return Err(Error::NoConvergence);
    }
    let mut hi = 1.0;
    let mut doublings = 0;
    while g(hi) >= 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > BISECT_MAX_ITERS {
            return Err(Error::NoConvergence);
        }
    }

    let (mut lo, mut hi) = (lo, hi);
    let mut lambda = 0.5 * (lo + hi);
    let mut converged = false;
    for _ in 0..BISECT_MAX_ITERS {
        let gm = g(lambda);
        if gm.abs() <= tol {
            converged = true;
            break;
        }
        if gm > 0.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
        lambda = 0.5 * (lo + hi);
    }
    if !converged && g(lambda).abs() > tol {
        return Err(Error::NoConvergence);
    }

    let durations: Vec<f64> = prog
        .energy_coeffs
        .iter()
        .zip(&prog.weights)
        .map(|(c, w)| (lambda * (a - 1.0) * c / w).powf(1.0 / a))
        .collect();
    let objective = prog.weights.iter().zip(&durations).map(|(w, p)| w * p).sum();
    Ok(DurationSolution { durations, multiplier: lambda, objective })
}

/// Residual energy `sum_i c_i p_i^(1-alpha) - E` of a candidate solution.
pub fn budget_residual(prog: &WeightedProgram, durations: &[f64]) -> f64 {
    let a = prog.alpha.get();
    prog.energy_coeffs
        .iter()
        .zip(durations)
        .map(|(c, p)| c * p.powf(1.0 - a))
        .sum::<f64>()
        - prog.budget
}
