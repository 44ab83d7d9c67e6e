//! Harmonic extension of interface displacement into the fluid domain.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::fem::{CsrMatrix, Factorization, LinearSolver, NodalField, P1Triangle, SparsityPattern};
use crate::mesh::Mesh;

/// Componentwise discrete Laplace solve with Dirichlet data on the whole
/// boundary. The reference-mesh operator never changes, so it is factored
/// once.
#[derive(Debug)]
pub struct MeshMotionSolver {
    n_nodes: usize,
    /// Interior numbering, `None` for boundary nodes.
    interior: Vec<Option<usize>>,
    boundary: Vec<usize>,
    /// `K_IB` entries: (interior row, boundary node, value).
    coupling: Vec<(usize, usize, f64)>,
    factor: Option<Factorization>,
}

impl MeshMotionSolver {
    pub fn new(mesh: &Mesh, solver: &mut LinearSolver) -> Result<Self> {
        let n = mesh.node_count();
        let mut on_boundary = vec![false; n];
        for e in mesh.boundary_edges() {
            on_boundary[e[0]] = true;
            on_boundary[e[1]] = true;
        }
        let mut interior = vec![None; n];
        let mut boundary = Vec::new();
        let mut ni = 0;
        for (i, &b) in on_boundary.iter().enumerate() {
            if b {
                boundary.push(i);
            } else {
                interior[i] = Some(ni);
                ni += 1;
            }
        }

        let mut local = Vec::with_capacity(mesh.cell_count());
        let mut rows = vec![BTreeSet::new(); ni];
        for &c in mesh.cells() {
            let t = P1Triangle::from_coords(mesh.nodes(), c);
            let mut k = [[0.0; 3]; 3];
            for a in 0..3 {
                for b in 0..3 {
                    k[a][b] = t.area.abs() * (t.grads[a][0] * t.grads[b][0] + t.grads[a][1] * t.grads[b][1]);
                }
            }
            for a in 0..3 {
                if let Some(r) = interior[c[a]] {
                    for b in 0..3 {
                        if let Some(col) = interior[c[b]] {
                            rows[r].insert(col);
                        }
                    }
                }
            }
            local.push((c, k));
        }
        for (r, row) in rows.iter_mut().enumerate() {
            row.insert(r);
        }
        let mut kii = CsrMatrix::zeros(std::sync::Arc::new(SparsityPattern::from_rows(rows)));
        let mut coupling = Vec::new();
        for (c, k) in &local {
            for a in 0..3 {
                let Some(r) = interior[c[a]] else { continue };
                for b in 0..3 {
                    match interior[c[b]] {
                        Some(col) => kii.add(r, col, k[a][b]),
                        None => coupling.push((r, c[b], k[a][b])),
                    }
                }
            }
        }
        let factor = if ni > 0 { Some(solver.factor(&kii)?) } else { None };
        Ok(MeshMotionSolver {
            n_nodes: n,
            interior,
            boundary,
            coupling,
            factor,
        })
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }

    /// Extends `data` (node, displacement) into the domain; boundary nodes
    /// not listed are held at zero.
    pub fn solve(&self, data: &[(usize, [f64; 2])]) -> Result<NodalField> {
        let mut out = NodalField::zeros(self.n_nodes, 2);
        for &(node, v) in data {
            if self.interior.get(node).copied().flatten().is_some() || node >= self.n_nodes {
                return Err(Error::Shape(format!("mesh-motion datum at non-boundary node {node}")));
            }
            if !(v[0].is_finite() && v[1].is_finite()) {
                return Err(Error::Shape(format!("non-finite mesh-motion datum at node {node}")));
            }
            out.set_vector(node, v);
        }
        let Some(factor) = &self.factor else { return Ok(out) };
        for comp in 0..2 {
            let mut rhs = vec![0.0; factor.dim()];
            for &(r, b, k) in &self.coupling {
                rhs[r] -= k * out.node(b)[comp];
            }
            let sol = if rhs.iter().all(|&v| v == 0.0) { rhs } else { factor.solve(&rhs)? };
            for (node, idx) in self.interior.iter().enumerate() {
                if let Some(i) = idx {
                    out.values_mut()[2 * node + comp] = sol[*i];
                }
            }
        }
        Ok(out)
    }
}

/// `(d_new − d_old) / Δt`, node by node.
pub fn domain_velocity(d_new: &NodalField, d_old: &NodalField, dt: f64) -> Result<NodalField> {
    if !(dt > 0.0) {
        return Err(Error::Parameter(format!("time step must be positive, got {dt}")));
    }
    if d_new.node_count() != d_old.node_count() || d_new.components() != d_old.components() {
        return Err(Error::Shape("domain_velocity: field shapes differ".into()));
    }
    let v = d_new.values().iter().zip(d_old.values()).map(|(a, b)| (a - b) / dt).collect();
    NodalField::from_values(d_new.node_count(), d_new.components(), v)
}
