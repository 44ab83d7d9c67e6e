//! ALE Navier–Stokes with resistive valves, pressure stabilization and
//! harmonic mesh motion.

pub mod kernel;
pub mod mesh_motion;

use serde::{Deserialize, Serialize};

pub use kernel::{
    fluid_cell_operator, pressure_load_residual, stabilization_tau, BodyForce, CellOperator, FluidCell, PressureLoad,
};
pub use mesh_motion::{domain_velocity, MeshMotionSolver};

use crate::error::{Error, Result};
use crate::fem::{
    newton_solve, Assembled, Dof, DofMap, DofSpec, FieldId, LinearSolver, LocalSystem, NewtonOptions, NodalField,
    PatternBuilder,
};
use crate::mesh::{Mesh, Point};
use crate::riis::ValveInstance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidParams {
    /// Density [kg/m³].
    pub rho: f64,
    /// Dynamic viscosity [Pa s].
    pub mu: f64,
    /// Pressure-stabilization coefficient.
    #[serde(default = "default_beta")]
    pub beta: f64,
}

fn default_beta() -> f64 {
    0.1
}

impl Default for FluidParams {
    fn default() -> Self {
        FluidParams { rho: 1.06e3, mu: 3.5e-3, beta: 0.1 }
    }
}

impl FluidParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("rho", self.rho), ("mu", self.mu), ("beta", self.beta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("fluid {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Where the fluid unknowns live in a [`DofMap`].
#[derive(Debug, Clone, Copy)]
pub struct FluidFields {
    pub u: FieldId,
    pub p: FieldId,
}

/// Everything needed to assemble the fluid block at one time step.
#[derive(Clone, Copy)]
pub struct FluidAssembly<'a> {
    pub params: &'a FluidParams,
    /// Node coordinates at the new time level.
    pub coords: &'a [Point],
    pub cells: &'a [[usize; 3]],
    pub u_prev: &'a NodalField,
    pub u_ale: &'a NodalField,
    pub dt: f64,
    pub valves: &'a [ValveInstance],
    pub body_force: Option<BodyForce<'a>>,
    pub pressure_loads: &'a [PressureLoad],
}

impl FluidAssembly<'_> {
    fn local_dofs(&self, dofs: &DofMap, f: &FluidFields, cell: &[usize; 3]) -> Vec<Dof> {
        let mut d = dofs.cell_dofs(f.u, cell);
        d.extend(dofs.cell_dofs(f.p, cell));
        d
    }

    pub fn couple_pattern(&self, pattern: &mut PatternBuilder, dofs: &DofMap, f: &FluidFields) {
        for c in self.cells {
            pattern.couple(&self.local_dofs(dofs, f, c));
        }
    }

    pub fn cell_input(&self, c: &[usize; 3]) -> FluidCell {
        FluidCell {
            vertices: c.map(|n| self.coords[n]),
            u_prev: c.map(|n| self.u_prev.vector(n)),
            u_ale: c.map(|n| self.u_ale.vector(n)),
        }
    }

    /// Adds the fluid residual and Jacobian at global state `x`.
    pub fn assemble(&self, dofs: &DofMap, f: &FluidFields, x: &[f64], out: &mut Assembled) -> Result<()> {
        out.add_cells(self.cells.len(), |ci| {
            let c = &self.cells[ci];
            let op = fluid_cell_operator(self.params, &self.cell_input(c), self.dt, self.valves, self.body_force, ci)?;
            let mut local = LocalSystem::zeros(self.local_dofs(dofs, f, c));
            let mut v = [0.0; kernel::LOCAL];
            for (vi, d) in v.iter_mut().zip(&local.dofs) {
                *vi = d.value(x);
            }
            local.residual.copy_from_slice(&op.residual(&v));
            for (row, k) in local.jacobian.chunks_mut(kernel::LOCAL).zip(&op.k) {
                row.copy_from_slice(k);
            }
            Ok(local)
        })?;
        for load in self.pressure_loads {
            let r = pressure_load_residual(load, self.coords);
            for (k, &node) in load.nodes.iter().enumerate() {
                for i in 0..2 {
                    out.add_residual(dofs.dof(f.u, node, i), r[k][i]);
                }
            }
        }
        Ok(())
    }
}

/// One fluid step on a fixed mesh with Dirichlet velocity data.
pub struct RigidFluidStep<'a> {
    pub mesh: &'a Mesh,
    pub params: FluidParams,
    pub dt: f64,
    pub u_prev: &'a NodalField,
    pub dirichlet: &'a dyn Fn(usize) -> Option<[f64; 2]>,
    pub body_force: Option<BodyForce<'a>>,
    pub valves: &'a [ValveInstance],
    /// Fix the pressure constant by zero mean. Only meaningful when the
    /// velocity is prescribed on the whole boundary.
    pub pin_mean_pressure: bool,
}

impl RigidFluidStep<'_> {
    /// Returns `(u, p)` at the new level.
    pub fn solve(&self, solver: &mut LinearSolver) -> Result<(NodalField, NodalField)> {
        self.params.validate()?;
        let n = self.mesh.node_count();
        let mut dofs = DofMap::new();
        let u = dofs.add_field("u", n, 2);
        let p = dofs.add_field("p", n, 1);
        for node in 0..n {
            if let Some(v) = (self.dirichlet)(node) {
                dofs.set(u, node, 0, DofSpec::Fixed(v[0]));
                dofs.set(u, node, 1, DofSpec::Fixed(v[1]));
            }
        }
        if self.pin_mean_pressure {
            dofs.set(p, 0, 0, DofSpec::Fixed(0.0));
        }
        dofs.finalize();
        let fields = FluidFields { u, p };
        let zero = NodalField::zeros(n, 2);
        let asm = FluidAssembly {
            params: &self.params,
            coords: self.mesh.nodes(),
            cells: self.mesh.cells(),
            u_prev: self.u_prev,
            u_ale: &zero,
            dt: self.dt,
            valves: self.valves,
            body_force: self.body_force,
            pressure_loads: &[],
        };
        let mut pb = PatternBuilder::new(dofs.len());
        asm.couple_pattern(&mut pb, &dofs, &fields);
        let pattern = pb.build();
        let mut problem = |x: &[f64]| {
            let mut a = Assembled::zeros(pattern.clone());
            asm.assemble(&dofs, &fields, x, &mut a)?;
            Ok(a)
        };
        let (x, _) = newton_solve(&mut problem, vec![0.0; dofs.len()], &NewtonOptions::default(), solver)?;
        let mut pv = dofs.extract(p, &x);
        if self.pin_mean_pressure {
            // constant pressure is a null mode here; shift to zero mean
            let (mut int, mut area) = (0.0, 0.0);
            for c in self.mesh.cells() {
                let a = crate::mesh::signed_area(&c.map(|k| self.mesh.nodes()[k]));
                int += a * (pv[c[0]] + pv[c[1]] + pv[c[2]]) / 3.0;
                area += a;
            }
            let mean = int / area;
            pv.iter_mut().for_each(|v| *v -= mean);
        }
        Ok((
            NodalField::from_values(n, 2, dofs.extract(u, &x))?,
            NodalField::from_values(n, 1, pv)?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::unit_square_mesh;
    use std::f64::consts::PI;

    struct Exact;
    impl Exact {
        fn u(x: Point) -> [f64; 2] {
            let (sx, cx, sy, cy) = ((PI * x[0]).sin(), (PI * x[0]).cos(), (PI * x[1]).sin(), (PI * x[1]).cos());
            [2.0 * PI * sx * sx * sy * cy, -2.0 * PI * sx * cx * sy * sy]
        }
        fn grad_u(x: Point) -> [[f64; 2]; 2] {
            let (sx, cx, sy, cy) = ((PI * x[0]).sin(), (PI * x[0]).cos(), (PI * x[1]).sin(), (PI * x[1]).cos());
            let p2 = 2.0 * PI * PI;
            [
                [p2 * 2.0 * sx * cx * sy * cy, p2 * sx * sx * (cy * cy - sy * sy)],
                [-p2 * (cx * cx - sx * sx) * sy * sy, -p2 * 2.0 * sx * cx * sy * cy],
            ]
        }
        fn laplacian_u(x: Point) -> [f64; 2] {
            let (sx, cx, sy, cy) = ((PI * x[0]).sin(), (PI * x[0]).cos(), (PI * x[1]).sin(), (PI * x[1]).cos());
            let p3 = 2.0 * PI * PI * PI;
            // u1 = 2π sx² sy cy, u2 = −2π sx cx sy²
            let u1 = p3 * (2.0 * (cx * cx - sx * sx) * sy * cy - 4.0 * sx * sx * sy * cy);
            let u2 = -p3 * (-4.0 * sx * cx * sy * sy + 2.0 * sx * cx * (cy * cy - sy * sy));
            [u1, u2]
        }
        fn p(x: Point) -> f64 {
            (PI * x[0]).sin() * (PI * x[1]).cos()
        }
        fn grad_p(x: Point) -> [f64; 2] {
            [PI * (PI * x[0]).cos() * (PI * x[1]).cos(), -PI * (PI * x[0]).sin() * (PI * x[1]).sin()]
        }
    }

    /// L2 velocity error of one step of the frozen-advection scheme whose
    /// exact solution is steady.
    fn mms_error(n: usize) -> (f64, f64) {
        let mesh = unit_square_mesh(n);
        let params = FluidParams { rho: 1.0, mu: 1.0, beta: 0.1 };
        let force = |x: Point| {
            let u = Exact::u(x);
            let g = Exact::grad_u(x);
            let l = Exact::laplacian_u(x);
            let gp = Exact::grad_p(x);
            [0, 1].map(|i| params.rho * (g[i][0] * u[0] + g[i][1] * u[1]) - params.mu * l[i] + gp[i])
        };
        let u_prev = NodalField::from_fn(mesh.node_count(), |i| Exact::u(mesh.nodes()[i]));
        let boundary: std::collections::HashSet<usize> = mesh.boundary_edges().into_iter().flatten().collect();
        let dirichlet = |node: usize| boundary.contains(&node).then_some([0.0, 0.0]);
        let step = RigidFluidStep {
            mesh: &mesh,
            params,
            dt: 1.0,
            u_prev: &u_prev,
            dirichlet: &dirichlet,
            body_force: Some(&force),
            valves: &[],
            pin_mean_pressure: true,
        };
        let (u, p) = step.solve(&mut LinearSolver::new()).unwrap();
        let rule = quadrature_rule(2, 4).unwrap();
        let mut err = 0.0;
        let mut perr = 0.0;
        for &c in mesh.cells() {
            let t = P1Triangle::from_coords(mesh.nodes(), c);
            for (xi, w) in rule.triangle_points() {
                let nsh = shape_values(xi);
                let x = t.map(xi);
                let e = Exact::u(x);
                for i in 0..2 {
                    let uh: f64 = (0..3).map(|a| nsh[a] * u.vector(c[a])[i]).sum();
                    err += 2.0 * t.area * w * (uh - e[i]).powi(2);
                }
                let ph: f64 = (0..3).map(|a| nsh[a] * p.scalar(c[a])).sum();
                perr += 2.0 * t.area * w * (ph - Exact::p(x)).powi(2);
            }
        }
        (err.sqrt(), perr.sqrt())
    }

    use crate::fem::element::shape_values;
    use crate::fem::{quadrature_rule, P1Triangle};

    #[test]
    fn manufactured_solution_converges_second_order() {
        let errs: Vec<(f64, f64)> = [8, 16, 32, 64].iter().map(|&n| mms_error(n)).collect();
        let rates: Vec<(f64, f64)> = errs
            .windows(2)
            .map(|w| ((w[0].0 / w[1].0).log2(), (w[0].1 / w[1].1).log2()))
            .collect();
        eprintln!("errors {errs:?} rates {rates:?}");
        assert!(rates[2].0 >= 2.0, "velocity rates {rates:?}");
        assert!(rates[2].1 >= 1.0, "pressure rates {rates:?}");
    }

    #[test]
    fn rest_state_is_fixed_point() {
        let mesh = unit_square_mesh(6);
        let u_prev = NodalField::zeros(mesh.node_count(), 2);
        let boundary: std::collections::HashSet<usize> = mesh.boundary_edges().into_iter().flatten().collect();
        let dirichlet = |node: usize| boundary.contains(&node).then_some([0.0, 0.0]);
        let step = RigidFluidStep {
            mesh: &mesh,
            params: FluidParams::default(),
            dt: 5e-4,
            u_prev: &u_prev,
            dirichlet: &dirichlet,
            body_force: None,
            valves: &[],
            pin_mean_pressure: true,
        };
        let (u, p) = step.solve(&mut LinearSolver::new()).unwrap();
        assert_eq!(u.max_abs(), 0.0);
        assert_eq!(p.max_abs(), 0.0);
    }

    #[test]
    fn params_validation() {
        assert!(FluidParams::default().validate().is_ok());
        assert!(FluidParams { mu: 0.0, ..Default::default() }.validate().is_err());
    }
}
