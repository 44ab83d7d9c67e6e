//! Nonlinear elastodynamics of the wall with active fiber stress and the
//! valve attachment load.

pub mod material;

use serde::{Deserialize, Serialize};

pub use material::{
    activation, active_piola, active_with_tangent, neo_hooke_energy, passive_piola, passive_with_tangent, Tangent,
};

use crate::error::{Error, Result};
use crate::fem::element::deformation_from_nodal;
use crate::fem::{Assembled, DofMap, FieldId, LocalSystem, NodalField, P1Triangle, PatternBuilder};
use crate::mesh::Point;
use crate::riis::ValveForces;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolidParams {
    /// Density [kg/m³].
    pub rho: f64,
    /// Shear modulus [Pa].
    pub mu: f64,
    /// Bulk modulus [Pa].
    pub kappa: f64,
    /// Peak active stress [Pa].
    pub a_max: f64,
    /// Activation period [s].
    pub t_max: f64,
}

impl Default for SolidParams {
    fn default() -> Self {
        SolidParams {
            rho: 1e3,
            mu: 5e3,
            kappa: 5e4,
            a_max: 5e3,
            t_max: 0.25,
        }
    }
}

impl SolidParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("rho", self.rho), ("mu", self.mu), ("kappa", self.kappa), ("t_max", self.t_max)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("solid {name} must be positive, got {v}")));
            }
        }
        if !(self.a_max >= 0.0 && self.a_max.is_finite()) {
            return Err(Error::Parameter(format!("solid a_max must be ≥ 0, got {}", self.a_max)));
        }
        Ok(())
    }
}

/// Checks that every fiber is a unit vector.
pub fn validate_fibers(fibers: &[[f64; 2]]) -> Result<()> {
    for (cell, f) in fibers.iter().enumerate() {
        if !((f[0].hypot(f[1]) - 1.0).abs() <= 1e-10) {
            return Err(Error::DegenerateFiber { cell });
        }
    }
    Ok(())
}

/// Total attachment load on the solid nodes, `Σ_k C_k w_{k,a}`.
pub fn attachment_rhs(forces: &[ValveForces], n_nodes: usize, enabled: bool) -> Vec<[f64; 2]> {
    let mut load = vec![[0.0; 2]; n_nodes];
    if enabled {
        for f in forces {
            for (n, v) in f.nodal_load() {
                load[n][0] += v[0];
                load[n][1] += v[1];
            }
        }
    }
    load
}

/// Everything needed to assemble the solid block at one time step.
#[derive(Clone, Copy)]
pub struct SolidAssembly<'a> {
    pub params: &'a SolidParams,
    pub ref_coords: &'a [Point],
    pub cells: &'a [[usize; 3]],
    /// Unit fiber per cell.
    pub fibers: &'a [[f64; 2]],
    pub d_prev: &'a NodalField,
    pub d_prev2: &'a NodalField,
    pub dt: f64,
    /// Time at the new level.
    pub time: f64,
    /// External nodal load, subtracted from the residual.
    pub load: Option<&'a [[f64; 2]]>,
}

impl SolidAssembly<'_> {
    pub fn couple_pattern(&self, pattern: &mut PatternBuilder, dofs: &DofMap, d: FieldId) {
        for c in self.cells {
            pattern.couple(&dofs.cell_dofs(d, c));
        }
    }

    /// Local residual and Jacobian for nodal displacements `dc`.
    pub fn cell_system(&self, ci: usize, dc: &[[f64; 2]; 3]) -> Result<([f64; 6], [[f64; 6]; 6])> {
        let c = self.cells[ci];
        let p = self.params;
        let tri = P1Triangle::from_coords(self.ref_coords, c);
        let area = tri.area.abs();
        let st = deformation_from_nodal(&tri, dc).map_err(|jacobian| Error::InvertedElement {
            region: "solid",
            cell: ci,
            jacobian,
        })?;
        let (mut stress, mut tangent) =
            passive_with_tangent(&st.f, p.mu, p.kappa).map_err(|_| Error::InvertedElement {
                region: "solid",
                cell: ci,
                jacobian: st.j,
            })?;
        let s = if tri.centroid()[1] <= 0.0 {
            activation(self.time, p.a_max, p.t_max)
        } else {
            0.0
        };
        let (pa, ta) =
            active_with_tangent(&st.f, self.fibers[ci], s).map_err(|_| Error::DegenerateFiber { cell: ci })?;
        for i in 0..2 {
            for jj in 0..2 {
                stress[i][jj] += pa[i][jj];
                for k in 0..2 {
                    for l in 0..2 {
                        tangent[i][jj][k][l] += ta[i][jj][k][l];
                    }
                }
            }
        }

        let m = p.rho / (self.dt * self.dt);
        let mut r = [0.0; 6];
        let mut jac = [[0.0; 6]; 6];
        let g = &tri.grads;
        for a in 0..3 {
            for b in 0..3 {
                let mab = area / 12.0 * if a == b { 2.0 } else { 1.0 };
                let db = [dc[b], self.d_prev.vector(c[b]), self.d_prev2.vector(c[b])];
                for i in 0..2 {
                    r[2 * a + i] += m * mab * (db[0][i] - 2.0 * db[1][i] + db[2][i]);
                    jac[2 * a + i][2 * b + i] += m * mab;
                    for k in 0..2 {
                        let mut v = 0.0;
                        for jj in 0..2 {
                            for l in 0..2 {
                                v += tangent[i][jj][k][l] * g[a][jj] * g[b][l];
                            }
                        }
                        jac[2 * a + i][2 * b + k] += area * v;
                    }
                }
            }
            for i in 0..2 {
                r[2 * a + i] += area * (stress[i][0] * g[a][0] + stress[i][1] * g[a][1]);
            }
        }
        Ok((r, jac))
    }

    /// Adds the solid residual and Jacobian at global state `x`.
    pub fn assemble(&self, dofs: &DofMap, d: FieldId, x: &[f64], out: &mut Assembled) -> Result<()> {
        out.add_cells(self.cells.len(), |ci| {
            let c = &self.cells[ci];
            let mut local = LocalSystem::zeros(dofs.cell_dofs(d, c));
            let v: Vec<f64> = local.dofs.iter().map(|dof| dof.value(x)).collect();
            let dc = [[v[0], v[1]], [v[2], v[3]], [v[4], v[5]]];
            let (r, jac) = self.cell_system(ci, &dc)?;
            local.residual.copy_from_slice(&r);
            for (row, j) in local.jacobian.chunks_mut(6).zip(&jac) {
                row.copy_from_slice(j);
            }
            Ok(local)
        })?;
        if let Some(load) = self.load {
            for (node, f) in load.iter().enumerate() {
                for i in 0..2 {
                    if f[i] != 0.0 {
                        out.add_residual(dofs.dof(d, node, i), -f[i]);
                    }
                }
            }
        }
        Ok(())
    }
}
