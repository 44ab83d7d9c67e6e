use std::time::{Duration, Instant};

use super::assembly::Assembled;
use super::linsolve::LinearSolver;
use super::sparse::norm2;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            abs_tol: 1e-8,
            rel_tol: 1e-6,
            max_iter: 20,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NewtonReport {
    /// Number of Newton updates applied.
    pub iterations: usize,
    /// Residual norm before each update and after the last one.
    pub residual_history: Vec<f64>,
    pub assembly_time: Duration,
    pub linear_solve_time: Duration,
}

/// A nonlinear system evaluated together with its Jacobian.
pub trait NewtonProblem {
    fn evaluate(&mut self, x: &[f64]) -> Result<Assembled>;

    /// Norm used for the convergence test.
    fn residual_norm(&self, r: &[f64]) -> f64 {
        norm2(r)
    }
}

impl<F> NewtonProblem for F
where
    F: FnMut(&[f64]) -> Result<Assembled>,
{
    fn evaluate(&mut self, x: &[f64]) -> Result<Assembled> {
        self(x)
    }
}

/// Newton iteration from `x`. At least one update is always applied; the
/// iteration stops once `‖r‖ ≤ max(abs_tol, rel_tol ‖r₀‖)`.
pub fn newton_solve<P: NewtonProblem + ?Sized>(
    problem: &mut P,
    mut x: Vec<f64>,
    options: &NewtonOptions,
    solver: &mut LinearSolver,
) -> Result<(Vec<f64>, NewtonReport)> {
    let mut report = NewtonReport::default();
    let mut tol = options.abs_tol;
    for k in 0..=options.max_iter {
        let t = Instant::now();
        let sys = problem.evaluate(&x)?;
        report.assembly_time += t.elapsed();
        let norm = problem.residual_norm(&sys.residual);
        if !norm.is_finite() {
            return Err(Error::NonFiniteResidual { iteration: k });
        }
        report.residual_history.push(norm);
        if k == 0 {
            tol = options.abs_tol.max(options.rel_tol * norm);
        } else if norm <= tol {
            report.iterations = k;
            return Ok((x, report));
        }
        if k == options.max_iter {
            break;
        }
        let t = Instant::now();
        let dx = solver.solve(&sys.into_system());
        report.linear_solve_time += t.elapsed();
        for (xi, di) in x.iter_mut().zip(dx?) {
            *xi += di;
        }
        log::trace!("newton iteration {k}: residual {norm:e}");
    }
    Err(Error::NonConvergence {
        iterations: options.max_iter,
        history: report.residual_history,
    })
}
