//! Cell-wise residual/Jacobian assembly.
//!
//! Local kernels run in parallel; their outputs are scattered in cell order
//! so repeated assemblies are bitwise identical.

use std::collections::BTreeSet;
use std::sync::Arc;

use rayon::prelude::*;

use super::dof::Dof;
use super::sparse::{CsrMatrix, SparseSystem, SparsityPattern};
use crate::error::{Error, Result};

/// Output of one local kernel. `jacobian` is row-major `n x n` with
/// derivatives taken with respect to the local dof *values*.
#[derive(Debug, Clone, Default)]
pub struct LocalSystem {
    pub dofs: Vec<Dof>,
    pub residual: Vec<f64>,
    pub jacobian: Vec<f64>,
}

impl LocalSystem {
    pub fn zeros(dofs: Vec<Dof>) -> Self {
        let n = dofs.len();
        LocalSystem {
            dofs,
            residual: vec![0.0; n],
            jacobian: vec![0.0; n * n],
        }
    }

    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    #[inline]
    pub fn add_jac(&mut self, i: usize, j: usize, v: f64) {
        let n = self.dofs.len();
        self.jacobian[i * n + j] += v;
    }

    fn is_finite(&self) -> bool {
        self.residual.iter().chain(&self.jacobian).all(|v| v.is_finite())
    }
}

/// Collects coupling sets and builds a [`SparsityPattern`].
#[derive(Debug, Clone)]
pub struct PatternBuilder {
    rows: Vec<BTreeSet<usize>>,
}

impl PatternBuilder {
    /// Every diagonal entry is present.
    pub fn new(n: usize) -> Self {
        PatternBuilder {
            rows: (0..n).map(|i| BTreeSet::from([i])).collect(),
        }
    }

    /// Couples every row of `dofs` with every column of `dofs`.
    pub fn couple(&mut self, dofs: &[Dof]) {
        let idx: Vec<usize> = dofs.iter().filter_map(Dof::row).collect();
        for &r in &idx {
            self.rows[r].extend(idx.iter().copied());
        }
    }

    /// Symmetric coupling between two global indices.
    pub fn couple_pair(&mut self, a: usize, b: usize) {
        self.rows[a].insert(b);
        self.rows[b].insert(a);
    }

    pub fn build(self) -> Arc<SparsityPattern> {
        Arc::new(SparsityPattern::from_rows(self.rows))
    }
}

/// Global residual and Jacobian under construction.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub jacobian: CsrMatrix,
    pub residual: Vec<f64>,
}

impl Assembled {
    pub fn zeros(pattern: Arc<SparsityPattern>) -> Self {
        let n = pattern.dim();
        Assembled {
            jacobian: CsrMatrix::zeros(pattern),
            residual: vec![0.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.residual.len()
    }

    /// Evaluates `kernel` on cells `0..n_cells` in parallel and scatters
    /// the results in cell order.
    pub fn add_cells<F>(&mut self, n_cells: usize, kernel: F) -> Result<()>
    where
        F: Fn(usize) -> Result<LocalSystem> + Sync,
    {
        let locals: Vec<LocalSystem> = (0..n_cells).into_par_iter().map(&kernel).collect::<Result<_>>()?;
        for (cell, local) in locals.iter().enumerate() {
            if !local.is_finite() {
                return Err(Error::NonFinite { cell });
            }
            self.scatter(local);
        }
        Ok(())
    }

    pub fn scatter(&mut self, local: &LocalSystem) {
        let n = local.dofs.len();
        for (i, di) in local.dofs.iter().enumerate() {
            let Some(r) = di.row() else { continue };
            self.residual[r] += local.residual[i];
            for (j, dj) in local.dofs.iter().enumerate() {
                let v = local.jacobian[i * n + j];
                if v == 0.0 {
                    continue;
                }
                if let Some((c, s)) = dj.column() {
                    self.jacobian.add(r, c, s * v);
                }
            }
        }
    }

    /// Adds a residual-only load to the row of `dof`.
    pub fn add_residual(&mut self, dof: Dof, v: f64) {
        if let Some(r) = dof.row() {
            self.residual[r] += v;
        }
    }

    /// Newton system `J dx = -r`.
    pub fn into_system(self) -> SparseSystem {
        SparseSystem {
            matrix: self.jacobian,
            rhs: self.residual.into_iter().map(|v| -v).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::element::P1Triangle;
    use crate::mesh::unit_square_mesh;

    fn scalar_dofs(cell: &[usize; 3]) -> Vec<Dof> {
        cell.iter().map(|&n| Dof::Free(n)).collect()
    }

    fn pattern_for(mesh: &crate::mesh::Mesh) -> Arc<SparsityPattern> {
        let mut b = PatternBuilder::new(mesh.node_count());
        for c in mesh.cells() {
            b.couple(&scalar_dofs(c));
        }
        b.build()
    }

    fn mass(mesh: &crate::mesh::Mesh) -> Assembled {
        let mut a = Assembled::zeros(pattern_for(mesh));
        a.add_cells(mesh.cell_count(), |c| {
            let cell = mesh.cells()[c];
            let area = P1Triangle::from_coords(mesh.nodes(), cell).area.abs();
            let mut l = LocalSystem::zeros(scalar_dofs(&cell));
            for i in 0..3 {
                for j in 0..3 {
                    l.add_jac(i, j, area / if i == j { 6.0 } else { 12.0 });
                }
            }
            Ok(l)
        })
        .unwrap();
        a
    }

    fn stiffness(mesh: &crate::mesh::Mesh) -> Assembled {
        let mut a = Assembled::zeros(pattern_for(mesh));
        a.add_cells(mesh.cell_count(), |c| {
            let cell = mesh.cells()[c];
            let t = P1Triangle::from_coords(mesh.nodes(), cell);
            let mut l = LocalSystem::zeros(scalar_dofs(&cell));
            for i in 0..3 {
                for j in 0..3 {
                    let g = t.grads[i][0] * t.grads[j][0] + t.grads[i][1] * t.grads[j][1];
                    l.add_jac(i, j, g * t.area.abs());
                }
            }
            Ok(l)
        })
        .unwrap();
        a
    }

    #[test]
    fn zero_kernels_give_zero_system() {
        let mesh = unit_square_mesh(4);
        let mut a = Assembled::zeros(pattern_for(&mesh));
        a.add_cells(mesh.cell_count(), |c| Ok(LocalSystem::zeros(scalar_dofs(&mesh.cells()[c]))))
            .unwrap();
        assert!(a.jacobian.values().iter().all(|&v| v == 0.0));
        assert!(a.residual.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mass_matrix_totals_domain_area() {
        let mesh = unit_square_mesh(7);
        let m = mass(&mesh);
        let total: f64 = (0..m.dim()).map(|r| m.jacobian.row_sum(r)).sum();
        assert!((total - 1.0).abs() < 1e-12, "{total}");
    }

    #[test]
    fn stiffness_annihilates_constants() {
        let mesh = unit_square_mesh(7);
        let k = stiffness(&mesh);
        let y = k.jacobian.mul_vec(&vec![3.7; k.dim()]);
        assert!(y.iter().all(|v| v.abs() < 1e-12));
        assert!(k.jacobian.pattern().is_structurally_symmetric());
    }

    #[test]
    fn assembly_is_deterministic() {
        let mesh = unit_square_mesh(12);
        let a = stiffness(&mesh);
        for _ in 0..3 {
            let b = stiffness(&mesh);
            assert_eq!(a.jacobian.values(), b.jacobian.values());
        }
    }

    #[test]
    fn non_finite_entry_reports_cell() {
        let mesh = unit_square_mesh(3);
        let mut a = Assembled::zeros(pattern_for(&mesh));
        let err = a
            .add_cells(mesh.cell_count(), |c| {
                let mut l = LocalSystem::zeros(scalar_dofs(&mesh.cells()[c]));
                if c == 5 {
                    l.residual[1] = f64::NAN;
                }
                Ok(l)
            })
            .unwrap_err();
        assert!(matches!(err, Error::NonFinite { cell: 5 }));
    }

    #[test]
    fn linked_and_fixed_dofs_scatter_by_chain_rule() {
        let mut b = PatternBuilder::new(2);
        let dofs = vec![Dof::Free(0), Dof::Linked { index: 1, scale: 2.0, shift: 1.0 }, Dof::Fixed(4.0)];
        b.couple(&dofs);
        let mut a = Assembled::zeros(b.build());
        let mut l = LocalSystem::zeros(dofs);
        l.residual = vec![1.0, 2.0, 3.0];
        l.jacobian = vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        a.scatter(&l);
        assert_eq!(a.residual, vec![1.0, 2.0]);
        assert_eq!(a.jacobian.get(0, 1), 2.0);
        assert_eq!(a.jacobian.get(1, 0), 1.0);
    }
}
