//! Sparse direct solve through faer's LU.
//!
//! A CSR matrix `A` has the same arrays as the CSC form of `Aᵀ`, so we
//! factor `Aᵀ` without copying the pattern and solve with its transpose.

use std::sync::Arc;
use std::time::{Duration, Instant};

use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::{Conj, Mat};

use super::sparse::{norm2, CsrMatrix, SparseSystem, SparsityPattern};
use crate::error::{Error, Result};

/// Acceptance threshold on `‖A x − b‖ / ‖b‖`.
pub const SOLVE_TOL: f64 = 1e-10;

const REFINEMENT_STEPS: usize = 3;

/// Direct solver caching the symbolic factorization per sparsity pattern.
#[derive(Default)]
pub struct LinearSolver {
    cache: Option<Cached>,
    /// Cumulative wall time spent in factorization and solves.
    pub elapsed: Duration,
    pub factorizations: usize,
}

struct Cached {
    pattern: Arc<SparsityPattern>,
    symbolic: SymbolicSparseColMat<usize>,
    lu: SymbolicLu<usize>,
}

impl std::fmt::Debug for LinearSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearSolver")
            .field("cached", &self.cache.is_some())
            .field("elapsed", &self.elapsed)
            .field("factorizations", &self.factorizations)
            .finish()
    }
}

impl LinearSolver {
    pub fn new() -> Self {
        Self::default()
    }

    fn symbolic(&mut self, pattern: &Arc<SparsityPattern>) -> Result<&Cached> {
        let hit = self
            .cache
            .as_ref()
            .is_some_and(|c| Arc::ptr_eq(&c.pattern, pattern) || *c.pattern == **pattern);
        if !hit {
            let n = pattern.dim();
            let symbolic = SymbolicSparseColMat::new_checked(
                n,
                n,
                pattern.row_ptr().to_vec(),
                None,
                pattern.col_idx().to_vec(),
            );
            let lu = SymbolicLu::try_new(symbolic.as_ref())
                .map_err(|e| Error::LinearSolve(format!("symbolic factorization: {e:?}")))?;
            self.cache = Some(Cached {
                pattern: pattern.clone(),
                symbolic,
                lu,
            });
        }
        Ok(self.cache.as_ref().unwrap())
    }

    /// Numeric LU of `matrix`, reusable for many right-hand sides.
    pub fn factor(&mut self, matrix: &CsrMatrix) -> Result<Factorization> {
        let start = Instant::now();
        let cached = self.symbolic(matrix.pattern())?;
        let at = SparseColMat::new(cached.symbolic.clone(), matrix.values().to_vec());
        let lu = Lu::try_new_with_symbolic(cached.lu.clone(), at.as_ref()).map_err(|e| match e {
            LuError::SymbolicSingular { index } => {
                Error::LinearSolve(format!("structurally singular matrix (zero pivot at column {index})"))
            }
            LuError::Generic(g) => Error::LinearSolve(format!("numeric factorization: {g:?}")),
        })?;
        self.factorizations += 1;
        self.elapsed += start.elapsed();
        Ok(Factorization {
            matrix: matrix.clone(),
            lu,
        })
    }

    /// Solves `system.matrix * x = system.rhs`.
    pub fn solve(&mut self, system: &SparseSystem) -> Result<Vec<f64>> {
        let n = system.matrix.dim();
        if system.rhs.len() != n {
            return Err(Error::Shape(format!("rhs length {} for matrix of size {n}", system.rhs.len())));
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        let f = self.factor(&system.matrix)?;
        let start = Instant::now();
        let x = f.solve(&system.rhs);
        self.elapsed += start.elapsed();
        x
    }
}

/// LU factors of one matrix.
pub struct Factorization {
    matrix: CsrMatrix,
    lu: Lu<usize, f64>,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorization").field("dim", &self.matrix.dim()).finish()
    }
}

impl Factorization {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    fn apply_inverse(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut m = Mat::<f64>::from_fn(n, 1, |i, _| rhs[i]);
        self.lu.solve_transpose_in_place_with_conj(Conj::No, m.as_mut());
        (0..n).map(|i| m[(i, 0)]).collect()
    }

    /// Solves with iterative refinement and checks `‖A x − b‖ ≤ 1e-10 ‖b‖`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let a = &self.matrix;
        if b.len() != a.dim() {
            return Err(Error::Shape(format!("rhs length {} for matrix of size {}", b.len(), a.dim())));
        }
        let b_norm = norm2(b);
        let mut x = self.apply_inverse(b);
        let mut res_norm = f64::INFINITY;
        for _ in 0..=REFINEMENT_STEPS {
            if let Some(i) = x.iter().position(|v| !v.is_finite()) {
                return Err(Error::LinearSolve(format!(
                    "non-finite solution entry at index {i} (zero or vanishing pivot)"
                )));
            }
            let ax = a.mul_vec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            res_norm = norm2(&r);
            if res_norm <= 1e-14 * b_norm {
                break;
            }
            let dx = self.apply_inverse(&r);
            for (xi, di) in x.iter_mut().zip(dx) {
                *xi += di;
            }
        }
        if !(res_norm <= SOLVE_TOL * b_norm) {
            let ratio = res_norm / b_norm;
            return Err(Error::LinearSolve(format!(
                "relative residual {ratio:e} exceeds {SOLVE_TOL:e} (ill-conditioned or singular)"
            )));
        }
        Ok(x)
    }
}
