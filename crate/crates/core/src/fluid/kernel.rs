//! Semi-implicit ALE Navier–Stokes cell kernel.
//!
//! Local unknown order: `[u0x, u0y, u1x, u1y, u2x, u2y, p0, p1, p2]`.
//! The kernel is linear in these values: `r = K v − b`.

use std::sync::OnceLock;

use super::FluidParams;
use crate::error::{Error, Result};
use crate::fem::element::shape_values;
use crate::fem::{quadrature_rule, P1Triangle, QuadratureRule};
use crate::mesh::Point;
use crate::riis::{support_quadrature, ValveInstance};

pub const LOCAL: usize = 9;

pub type BodyForce<'a> = &'a (dyn Fn(Point) -> [f64; 2] + Sync);

fn base_rule() -> &'static QuadratureRule {
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    RULE.get_or_init(|| quadrature_rule(2, 2).expect("degree-2 triangle rule"))
}

/// Cell data at the new geometry.
#[derive(Debug, Clone, Copy)]
pub struct FluidCell {
    pub vertices: [Point; 3],
    pub u_prev: [[f64; 2]; 3],
    pub u_ale: [[f64; 2]; 3],
}

#[derive(Debug, Clone)]
pub struct CellOperator {
    pub k: [[f64; LOCAL]; LOCAL],
    pub b: [f64; LOCAL],
    /// Largest resistive coefficient seen at the quadrature points.
    pub sigma_max: f64,
    pub tau: f64,
}

impl CellOperator {
    pub fn residual(&self, v: &[f64; LOCAL]) -> [f64; LOCAL] {
        let mut r = [0.0; LOCAL];
        for i in 0..LOCAL {
            r[i] = self.k[i].iter().zip(v).map(|(a, b)| a * b).sum::<f64>() - self.b[i];
        }
        r
    }
}

/// Pressure-stabilization parameter `β h² / (μ + ρ h²/Δt + σ h²)`.
pub fn stabilization_tau(params: &FluidParams, h: f64, dt: f64, sigma: f64) -> f64 {
    let h2 = h * h;
    params.beta * h2 / (params.mu + params.rho * h2 / dt + sigma * h2)
}

/// Builds the local operator of one fluid cell. `cell` is only used for
/// error reporting.
pub fn fluid_cell_operator(
    params: &FluidParams,
    data: &FluidCell,
    dt: f64,
    valves: &[ValveInstance],
    body_force: Option<BodyForce<'_>>,
    cell: usize,
) -> Result<CellOperator> {
    let tri = P1Triangle::new(data.vertices);
    if !(tri.area > 0.0) {
        return Err(Error::InvertedElement {
            region: "fluid",
            cell,
            jacobian: tri.area,
        });
    }
    let area = tri.area;
    let g = &tri.grads;
    let active: Vec<&ValveInstance> = valves
        .iter()
        .filter(|v| v.coefficient != 0.0 && v.touches(&data.vertices))
        .collect();
    let rule = if active.is_empty() { base_rule() } else { support_quadrature() };

    let mut k = [[0.0; LOCAL]; LOCAL];
    let mut b = [0.0; LOCAL];
    let mass = params.rho / dt;
    let mut sigma_max: f64 = 0.0;

    for (xi, w) in rule.triangle_points() {
        let wq = 2.0 * area * w;
        let n = shape_values(xi);
        let x = tri.map(xi);
        let mut adv = [0.0; 2];
        let mut un = [0.0; 2];
        let mut ua = [0.0; 2];
        for a in 0..3 {
            for i in 0..2 {
                adv[i] += n[a] * (data.u_prev[a][i] - data.u_ale[a][i]);
                un[i] += n[a] * data.u_prev[a][i];
                ua[i] += n[a] * data.u_ale[a][i];
            }
        }
        let sigma: f64 = active.iter().map(|v| v.coefficient_at(x)).sum();
        sigma_max = sigma_max.max(sigma);
        let f = body_force.map_or([0.0; 2], |bf| bf(x));
        for a in 0..3 {
            for i in 0..2 {
                b[2 * a + i] += wq * n[a] * (mass * un[i] + sigma * ua[i] + f[i]);
            }
            for c in 0..3 {
                let conv = adv[0] * g[c][0] + adv[1] * g[c][1];
                let diag = wq * n[a] * ((mass + sigma) * n[c] + params.rho * conv);
                k[2 * a][2 * c] += diag;
                k[2 * a + 1][2 * c + 1] += diag;
            }
        }
    }

    let h = tri.diameter();
    let tau = stabilization_tau(params, h, dt, sigma_max);
    for a in 0..3 {
        for c in 0..3 {
            let gg = g[a][0] * g[c][0] + g[a][1] * g[c][1];
            for i in 0..2 {
                k[2 * a + i][2 * c + i] += params.mu * area * gg;
                for j in 0..2 {
                    k[2 * a + i][2 * c + j] += params.mu * area * g[c][i] * g[a][j];
                }
                // −∫ p div v  and  −∫ q div u
                k[2 * a + i][6 + c] -= g[a][i] * area / 3.0;
                k[6 + a][2 * c + i] -= g[c][i] * area / 3.0;
            }
            k[6 + a][6 + c] -= tau * area * gg;
        }
    }
    Ok(CellOperator { k, b, sigma_max, tau })
}

/// Imposed normal pressure on a boundary edge: traction `−p n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureLoad {
    pub nodes: [usize; 2],
    /// Third vertex of the adjacent cell, used to orient the outward normal.
    pub opposite: usize,
    pub pressure: f64,
}

/// Momentum residual contribution `+p ∫ N_a n ds` of a pressure load at
/// the given coordinates, one entry per edge node.
pub fn pressure_load_residual(load: &PressureLoad, coords: &[Point]) -> [[f64; 2]; 2] {
    let (a, b) = (coords[load.nodes[0]], coords[load.nodes[1]]);
    let c = coords[load.opposite];
    let t = [b[0] - a[0], b[1] - a[1]];
    // n·L, outward
    let mut n = [t[1], -t[0]];
    if (c[0] - a[0]) * n[0] + (c[1] - a[1]) * n[1] > 0.0 {
        n = [-n[0], -n[1]];
    }
    let r = [0.5 * load.pressure * n[0], 0.5 * load.pressure * n[1]];
    [r, r]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riis::{Polyline, SmoothedDelta};

    fn params() -> FluidParams {
        FluidParams { rho: 1.06e3, mu: 3.5e-3, beta: 0.1 }
    }

    fn cell() -> FluidCell {
        FluidCell {
            vertices: [[0.0, 0.0], [1e-3, 0.2e-3], [0.3e-3, 1.1e-3]],
            u_prev: [[0.1, 0.02], [-0.05, 0.03], [0.07, -0.01]],
            u_ale: [[0.01, 0.0], [0.0, -0.02], [0.03, 0.01]],
        }
    }

    fn valve(lambda: f64, offset: Point) -> ValveInstance {
        let g = Polyline::new(vec![[-1e-3 + offset[0], 0.5e-3 + offset[1]], [2e-3 + offset[0], 0.4e-3 + offset[1]]]).unwrap();
        ValveInstance::new(g, SmoothedDelta::new(1.5e-3).unwrap(), 1e4, lambda)
    }

    #[test]
    fn open_valve_matches_no_valve() {
        let a = fluid_cell_operator(&params(), &cell(), 5e-4, &[], None, 0).unwrap();
        let b = fluid_cell_operator(&params(), &cell(), 5e-4, &[valve(0.0, [0.0; 2])], None, 0).unwrap();
        assert_eq!(a.k, b.k);
        assert_eq!(a.b, b.b);
        let c = fluid_cell_operator(&params(), &cell(), 5e-4, &[valve(1.0, [0.0; 2])], None, 0).unwrap();
        assert!(c.sigma_max > 0.0 && c.tau < a.tau);
    }

    #[test]
    fn inverted_cell_is_reported() {
        let mut c = cell();
        c.vertices.swap(1, 2);
        let err = fluid_cell_operator(&params(), &c, 5e-4, &[], None, 17).unwrap_err();
        assert!(matches!(err, Error::InvertedElement { cell: 17, region: "fluid", .. }));
    }

    #[test]
    fn frame_shift_invariance() {
        let shift_u = [0.3, -0.2];
        let shift_x = [0.01, 0.02];
        let v: [f64; LOCAL] = [0.05, 0.01, -0.02, 0.04, 0.06, 0.0, 10.0, 12.0, 9.0];
        let base = fluid_cell_operator(&params(), &cell(), 5e-4, &[valve(1.0, [0.0; 2])], None, 0).unwrap();
        let r0 = base.residual(&v);

        let mut c = cell();
        for a in 0..3 {
            for i in 0..2 {
                c.vertices[a][i] += shift_x[i];
                c.u_prev[a][i] += shift_u[i];
                c.u_ale[a][i] += shift_u[i];
            }
        }
        let mut vs = v;
        for a in 0..3 {
            vs[2 * a] += shift_u[0];
            vs[2 * a + 1] += shift_u[1];
        }
        let shifted = fluid_cell_operator(&params(), &c, 5e-4, &[valve(1.0, shift_x)], None, 0).unwrap();
        let r1 = shifted.residual(&vs);
        let scale = r0.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..LOCAL {
            assert!((r0[i] - r1[i]).abs() <= 1e-9 * scale, "{i}: {} vs {}", r0[i], r1[i]);
        }
    }

    #[test]
    fn pressure_load_points_outward() {
        let coords = [[0.0, 0.0], [0.0, 2.0], [1.0, 1.0]];
        let load = PressureLoad { nodes: [0, 1], opposite: 2, pressure: 3.0 };
        let r = pressure_load_residual(&load, &coords);
        assert_eq!(r[0], [-3.0, 0.0]);
        let load = PressureLoad { nodes: [1, 0], opposite: 2, pressure: 3.0 };
        assert_eq!(pressure_load_residual(&load, &coords)[1], [-3.0, 0.0]);
    }
}
