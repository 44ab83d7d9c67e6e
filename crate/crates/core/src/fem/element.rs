//! Linear triangle geometry, shape functions and deformation kinematics.

use crate::error::{Error, Result};
use crate::fem::NodalField;
use crate::mesh::{Mesh, Point};

/// 2x2 tensor, row-major: `t[i][j]`.
pub type Tensor2 = [[f64; 2]; 2];

pub const IDENTITY: Tensor2 = [[1.0, 0.0], [0.0, 1.0]];

pub fn det(t: &Tensor2) -> f64 {
    t[0][0] * t[1][1] - t[0][1] * t[1][0]
}

pub fn inverse(t: &Tensor2) -> Tensor2 {
    let d = det(t);
    [[t[1][1] / d, -t[0][1] / d], [-t[1][0] / d, t[0][0] / d]]
}

pub fn transpose(t: &Tensor2) -> Tensor2 {
    [[t[0][0], t[1][0]], [t[0][1], t[1][1]]]
}

/// P1 shape functions at reference point `(xi, eta)`.
pub fn shape_values(xi: [f64; 2]) -> [f64; 3] {
    [1.0 - xi[0] - xi[1], xi[0], xi[1]]
}

/// Affine triangle: signed area and constant shape-function gradients.
#[derive(Debug, Clone, Copy)]
pub struct P1Triangle {
    pub vertices: [Point; 3],
    pub area: f64,
    pub grads: [[f64; 2]; 3],
}

impl P1Triangle {
    pub fn new(vertices: [Point; 3]) -> Self {
        let [a, b, c] = vertices;
        let j = [[b[0] - a[0], c[0] - a[0]], [b[1] - a[1], c[1] - a[1]]];
        let dj = det(&j);
        // grad N = J^{-T} grad_ref N
        let inv_t = [[j[1][1] / dj, -j[1][0] / dj], [-j[0][1] / dj, j[0][0] / dj]];
        let g_ref = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        let mut grads = [[0.0; 2]; 3];
        for (g, r) in grads.iter_mut().zip(g_ref) {
            g[0] = inv_t[0][0] * r[0] + inv_t[0][1] * r[1];
            g[1] = inv_t[1][0] * r[0] + inv_t[1][1] * r[1];
        }
        P1Triangle {
            vertices,
            area: 0.5 * dj,
            grads,
        }
    }

    pub fn from_coords(coords: &[Point], cell: [usize; 3]) -> Self {
        P1Triangle::new([coords[cell[0]], coords[cell[1]], coords[cell[2]]])
    }

    /// Physical point for reference coordinates `xi`.
    pub fn map(&self, xi: [f64; 2]) -> Point {
        let n = shape_values(xi);
        let v = &self.vertices;
        [
            n[0] * v[0][0] + n[1] * v[1][0] + n[2] * v[2][0],
            n[0] * v[0][1] + n[1] * v[1][1] + n[2] * v[2][1],
        ]
    }

    pub fn centroid(&self) -> Point {
        self.map([1.0 / 3.0, 1.0 / 3.0])
    }

    /// Gradient of a P1 vector field with nodal values `u`: `g[i][j] = d u_i / d x_j`.
    pub fn vector_gradient(&self, u: &[[f64; 2]; 3]) -> Tensor2 {
        let mut g = [[0.0; 2]; 2];
        for (ua, ga) in u.iter().zip(&self.grads) {
            for i in 0..2 {
                for j in 0..2 {
                    g[i][j] += ua[i] * ga[j];
                }
            }
        }
        g
    }

    /// Longest edge.
    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        (0..3)
            .map(|k| crate::mesh::dist(v[k], v[(k + 1) % 3]))
            .fold(0.0, f64::max)
    }
}

/// Deformation gradient `F = I + grad d` and `J = det F` at a point of a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformationState {
    pub f: Tensor2,
    pub j: f64,
}

/// Deformation state of the P1 displacement field in `cell` at reference
/// point `quad_point`. With linear elements the result is constant per cell.
pub fn deformation_state(
    mesh: &Mesh,
    displacement: &NodalField,
    cell: usize,
    quad_point: [f64; 2],
) -> Result<DeformationState> {
    if displacement.components() != 2 || displacement.node_count() != mesh.node_count() {
        return Err(Error::Shape("displacement does not match mesh".into()));
    }
    let _ = quad_point;
    let c = mesh.cells()[cell];
    let tri = P1Triangle::from_coords(mesh.nodes(), c);
    let d = [displacement.vector(c[0]), displacement.vector(c[1]), displacement.vector(c[2])];
    deformation_from_nodal(&tri, &d).map_err(|j| Error::InvertedElement {
        region: mesh.region().as_str(),
        cell,
        jacobian: j,
    })
}

/// `F` and `J` from nodal displacements; `Err(J)` when `J <= 0`.
pub fn deformation_from_nodal(tri: &P1Triangle, d: &[[f64; 2]; 3]) -> std::result::Result<DeformationState, f64> {
    let g = tri.vector_gradient(d);
    let f = [[1.0 + g[0][0], g[0][1]], [g[1][0], 1.0 + g[1][1]]];
    let j = det(&f);
    if j > 0.0 && j.is_finite() {
        Ok(DeformationState { f, j })
    } else {
        Err(j)
    }
}
