//! Geometrically explicit monolithic time stepping.
//!
//! Each step moves the fluid mesh with the solid displacement of the previous
//! level, freezes the valve geometry and the valve forces, and then solves
//! fluid velocity, pressure and solid displacement together by Newton's
//! method. Fluid velocity at interface nodes is not an unknown of its own:
//! it is tied to the solid displacement through `u = (d − dⁿ)/Δt`, so the
//! fluid momentum rows at the interface add into the solid rows and traction
//! continuity holds in the summed weak form.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::fem::{
    newton_solve, Assembled, DofMap, DofSpec, FieldId, LinearSolver, NewtonOptions, NewtonProblem, NodalField,
    PatternBuilder, SparsityPattern,
};
use crate::fluid::kernel::PressureLoad;
use crate::fluid::{domain_velocity, FluidAssembly, FluidFields, FluidParams, MeshMotionSolver};
use crate::mesh::{current_coordinates, locate_point, signed_area, FacetTag, MeshPair, Point};
use crate::riis::{
    contact_weights, pressure_jump, valve_force, Polyline, ValveForces, ValveInstance, ValveState, ValveSurface,
    DEFAULT_V_MIN,
};
use crate::solid::{attachment_rhs, validate_fibers, SolidAssembly, SolidParams};

/// Interface kinematics must hold to this accuracy after every step [m/s].
pub const INTERFACE_TOL: f64 = 1e-12;

/// Physical and numerical settings of a coupled run.
#[derive(Debug, Clone, PartialEq)]
pub struct FsiConfig {
    pub fluid: FluidParams,
    pub solid: SolidParams,
    /// Time step [s].
    pub dt: f64,
    /// Apply the valve attachment load on the solid.
    pub attachment_force: bool,
    /// Smallest admissible contact volume of a valve with the solid [m²].
    pub v_min: f64,
    pub newton: NewtonOptions,
    /// Hold solid nodes on `exterior` facets at zero displacement.
    pub clamp_exterior: bool,
    /// Normal pressure [Pa] imposed on fluid facets carrying the tag.
    pub boundary_pressure: Vec<(FacetTag, f64)>,
}

impl Default for FsiConfig {
    fn default() -> Self {
        FsiConfig {
            fluid: FluidParams::default(),
            solid: SolidParams::default(),
            dt: 5e-4,
            attachment_force: true,
            v_min: DEFAULT_V_MIN,
            newton: NewtonOptions::default(),
            clamp_exterior: false,
            boundary_pressure: Vec::new(),
        }
    }
}

impl FsiConfig {
    pub fn validate(&self) -> Result<()> {
        self.fluid.validate()?;
        self.solid.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Parameter(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.v_min > 0.0) {
            return Err(Error::Parameter(format!("v_min must be positive, got {}", self.v_min)));
        }
        let n = &self.newton;
        if !(n.abs_tol > 0.0 && n.rel_tol >= 0.0 && n.max_iter > 0) {
            return Err(Error::Parameter(format!("invalid Newton options {n:?}")));
        }
        for (tag, p) in &self.boundary_pressure {
            if !matches!(tag, FacetTag::Inlet | FacetTag::Outlet) || !p.is_finite() {
                return Err(Error::Parameter(format!("boundary pressure {p} on `{tag}` facets")));
            }
        }
        Ok(())
    }
}

/// Solution and history at one time level.
#[derive(Debug, Clone)]
pub struct FsiState {
    pub step: usize,
    /// Time [s].
    pub t: f64,
    /// Fluid velocity [m/s] and pressure [Pa].
    pub u: NodalField,
    pub p: NodalField,
    /// Solid displacement at this level and the two before [m].
    pub d: NodalField,
    pub d_prev: NodalField,
    pub d_prev2: NodalField,
    /// Fluid mesh displacement at this level and the one before [m].
    pub d_ale: NodalField,
    pub d_ale_prev: NodalField,
    /// Fluid mesh velocity used in the last step [m/s].
    pub u_ale: NodalField,
    /// Controller state of every valve.
    pub valves: Vec<ValveSurface>,
    /// Valve geometry and coefficient in force during the last step.
    pub instances: Vec<ValveInstance>,
    /// Valve forces applied in the last step; empty before the first one.
    pub forces: Vec<ValveForces>,
}

impl FsiState {
    pub fn is_finite(&self) -> bool {
        [&self.u, &self.p, &self.d, &self.d_prev, &self.d_prev2, &self.d_ale, &self.d_ale_prev, &self.u_ale]
            .iter()
            .all(|f| f.is_finite())
    }
}

/// Wall time per category. `compute_g` covers valve forces, contact
/// weights and the attachment load.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepTimings {
    pub total: Duration,
    pub linear_solve: Duration,
    pub fluid_assembly: Duration,
    pub solid_assembly: Duration,
    pub compute_g: Duration,
    pub mesh_motion: Duration,
}

impl std::ops::AddAssign for StepTimings {
    fn add_assign(&mut self, o: Self) {
        self.total += o.total;
        self.linear_solve += o.linear_solve;
        self.fluid_assembly += o.fluid_assembly;
        self.solid_assembly += o.solid_assembly;
        self.compute_g += o.compute_g;
        self.mesh_motion += o.mesh_motion;
    }
}

/// Per-valve quantities of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct ValveReport {
    pub name: String,
    /// Fluid force `F` on the valve from the previous level [N/m].
    pub force: [f64; 2],
    /// Contact volume `V` [m²].
    pub volume: f64,
    /// `F / V` [N/m³].
    pub density: [f64; 2],
    /// Resultant of the assembled attachment load [N/m]; zero when disabled.
    pub load_resultant: [f64; 2],
    /// Torque of the attachment density minus the torque of `F`, about the origin.
    pub residual_torque: f64,
    /// Level-n pressure jump fed to the controller [Pa].
    pub pressure_jump: f64,
    /// Blend after the controller update.
    pub lambda: f64,
    pub state: ValveState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub step: usize,
    /// Time at the new level [s].
    pub t: f64,
    pub newton_iterations: usize,
    pub residual_history: Vec<f64>,
    pub timings: StepTimings,
    pub valves: Vec<ValveReport>,
    /// Total linear momentum of fluid and solid at the new level [kg/s].
    pub momentum: [f64; 2],
    /// Largest `‖u − (d − dⁿ)/Δt‖` over interface nodes [m/s].
    pub interface_mismatch: f64,
}

#[derive(Debug, Clone, Copy)]
struct Fields {
    fluid: FluidFields,
    d: FieldId,
}

/// Meshes, operators and cached factorizations of one coupled problem.
pub struct FsiModel {
    pair: MeshPair,
    fibers: Vec<[f64; 2]>,
    config: FsiConfig,
    mesh_motion: MeshMotionSolver,
    clamped: Vec<bool>,
    pressure_loads: Vec<PressureLoad>,
    pattern: Arc<SparsityPattern>,
    row_weights: Vec<f64>,
    solver: LinearSolver,
}

impl FsiModel {
    /// `fibers` holds one unit vector per solid cell.
    pub fn new(pair: MeshPair, fibers: Vec<[f64; 2]>, config: FsiConfig) -> Result<Self> {
        config.validate()?;
        if fibers.len() != pair.solid.cell_count() {
            return Err(Error::Shape(format!(
                "{} fibers for {} solid cells",
                fibers.len(),
                pair.solid.cell_count()
            )));
        }
        validate_fibers(&fibers)?;
        let mut solver = LinearSolver::new();
        let mesh_motion = MeshMotionSolver::new(&pair.fluid, &mut solver)?;

        let mut clamped = vec![false; pair.solid.node_count()];
        if config.clamp_exterior {
            for n in pair.solid.nodes_with_tag(FacetTag::Exterior) {
                clamped[n] = true;
            }
        }

        let mut opposite = HashMap::new();
        for c in pair.fluid.cells() {
            for k in 0..3 {
                let (a, b) = (c[k], c[(k + 1) % 3]);
                opposite.insert([a.min(b), a.max(b)], c[(k + 2) % 3]);
            }
        }
        let mut pressure_loads = Vec::new();
        for &(tag, pressure) in &config.boundary_pressure {
            for f in pair.fluid.facets_with_tag(tag) {
                let [a, b] = f.nodes;
                pressure_loads.push(PressureLoad {
                    nodes: f.nodes,
                    opposite: opposite[&[a.min(b), a.max(b)]],
                    pressure,
                });
            }
        }

        let mut model = FsiModel {
            pair,
            fibers,
            config,
            mesh_motion,
            clamped,
            pressure_loads,
            pattern: Arc::new(SparsityPattern::from_rows(Vec::new())),
            row_weights: Vec::new(),
            solver,
        };
        let zero = NodalField::zeros(model.pair.solid.node_count(), 2);
        let (dofs, fields) = model.dof_map(&zero);
        let mut pb = PatternBuilder::new(dofs.len());
        for c in model.pair.fluid.cells() {
            let mut local = dofs.cell_dofs(fields.fluid.u, c);
            local.extend(dofs.cell_dofs(fields.fluid.p, c));
            pb.couple(&local);
        }
        for c in model.pair.solid.cells() {
            pb.couple(&dofs.cell_dofs(fields.d, c));
        }
        model.pattern = pb.build();
        model.row_weights = model.residual_weights(&dofs, &fields);
        Ok(model)
    }

    pub fn meshes(&self) -> &MeshPair {
        &self.pair
    }

    pub fn config(&self) -> &FsiConfig {
        &self.config
    }

    pub fn fibers(&self) -> &[[f64; 2]] {
        &self.fibers
    }

    /// Number of unknowns of the monolithic system.
    pub fn unknowns(&self) -> usize {
        self.pattern.dim()
    }

    /// Rest state at `t = 0` with `d̂⁻¹ = d̂⁰ = 0`.
    pub fn initial_state(&self, valves: Vec<ValveSurface>) -> Result<FsiState> {
        let nf = self.pair.fluid.node_count();
        let ns = self.pair.solid.node_count();
        let instances = valves
            .iter()
            .map(|v| Ok(v.instance(v.reference_geometry()?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(FsiState {
            step: 0,
            t: 0.0,
            u: NodalField::zeros(nf, 2),
            p: NodalField::zeros(nf, 1),
            d: NodalField::zeros(ns, 2),
            d_prev: NodalField::zeros(ns, 2),
            d_prev2: NodalField::zeros(ns, 2),
            d_ale: NodalField::zeros(nf, 2),
            d_ale_prev: NodalField::zeros(nf, 2),
            u_ale: NodalField::zeros(nf, 2),
            valves,
            instances,
            forces: Vec::new(),
        })
    }

    /// Dof numbering with interface fluid velocities tied to `d` relative to `d_n`.
    fn dof_map(&self, d_n: &NodalField) -> (DofMap, Fields) {
        let dt = self.config.dt;
        let mut dofs = DofMap::new();
        let u = dofs.add_field("u", self.pair.fluid.node_count(), 2);
        let p = dofs.add_field("p", self.pair.fluid.node_count(), 1);
        let d = dofs.add_field("d", self.pair.solid.node_count(), 2);
        for (node, _) in self.clamped.iter().enumerate().filter(|(_, &c)| c) {
            for i in 0..2 {
                dofs.set(d, node, i, DofSpec::Fixed(0.0));
            }
        }
        for &(f, s) in self.pair.interface.pairs() {
            let dn = d_n.vector(s);
            for i in 0..2 {
                let spec = if self.clamped[s] {
                    DofSpec::Fixed(-dn[i] / dt)
                } else {
                    DofSpec::Link {
                        field: d,
                        node: s,
                        component: i,
                        scale: 1.0 / dt,
                        shift: -dn[i] / dt,
                    }
                };
                dofs.set(u, f, i, spec);
            }
        }
        dofs.finalize();
        (dofs, Fields { fluid: FluidFields { u, p }, d })
    }

    /// Momentum rows are scaled by `1/(μ_s L)` and continuity rows by
    /// `t_max/L²`, with `L` the fluid bounding-box diagonal.
    fn residual_weights(&self, dofs: &DofMap, fields: &Fields) -> Vec<f64> {
        let nodes = self.pair.fluid.nodes();
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in nodes {
            for i in 0..2 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        let l = (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
        let momentum = 1.0 / (self.config.solid.mu * l);
        let continuity = self.config.solid.t_max / (l * l);
        let mut w = vec![momentum; dofs.len()];
        for n in 0..self.pair.fluid.node_count() {
            if let Some(r) = dofs.dof(fields.fluid.p, n, 0).row() {
                w[r] = continuity;
            }
        }
        w
    }

    /// Fluid mesh displacement extending the solid interface displacement `d`.
    pub fn extend_interface(&self, d: &NodalField) -> Result<NodalField> {
        let datum: Vec<_> = self.pair.interface.pairs().iter().map(|&(f, s)| (f, d.vector(s))).collect();
        self.mesh_motion.solve(&datum)
    }

    /// Valve geometry moved with the fluid mesh displacement where the
    /// reference point lies in the fluid, and with the solid displacement
    /// where it lies in the wall.
    pub fn displace_valve(&self, reference: &Polyline, d_ale: &NodalField, d: &NodalField) -> Result<Polyline> {
        let interp = |coords: &[Point], cells: &[[usize; 3]], field: &NodalField, p: Point| {
            locate_point(coords, cells, p).map(|(ci, l)| {
                let c = cells[ci];
                let mut out = [0.0; 2];
                for k in 0..3 {
                    let v = field.vector(c[k]);
                    out[0] += l[k] * v[0];
                    out[1] += l[k] * v[1];
                }
                out
            })
        };
        let (fluid, solid) = (&self.pair.fluid, &self.pair.solid);
        let points = reference
            .points()
            .iter()
            .map(|&p| {
                interp(fluid.nodes(), fluid.cells(), d_ale, p)
                    .or_else(|| interp(solid.nodes(), solid.cells(), d, p))
                    .map(|u| [p[0] + u[0], p[1] + u[1]])
                    .ok_or_else(|| Error::DegenerateGeometry(format!("valve point {p:?} lies outside both meshes")))
            })
            .collect::<Result<Vec<_>>>()?;
        Polyline::new(points)
    }

    /// Linear momentum `ρ_f ∫ u + ρ_s ∫ (d − d_prev)/Δt`, integrated
    /// exactly for piecewise linear fields.
    fn momentum(&self, fluid_coords: &[Point], u: &NodalField, d: &NodalField, d_prev: &NodalField) -> [f64; 2] {
        let mut m = [0.0; 2];
        for c in self.pair.fluid.cells() {
            let a = signed_area(&c.map(|k| fluid_coords[k])) / 3.0;
            for &k in c {
                let v = u.vector(k);
                m[0] += self.config.fluid.rho * a * v[0];
                m[1] += self.config.fluid.rho * a * v[1];
            }
        }
        let solid = &self.pair.solid;
        for ci in 0..solid.cell_count() {
            let a = solid.signed_area(ci) / 3.0;
            for &k in &solid.cells()[ci] {
                let (x, y) = (d.vector(k), d_prev.vector(k));
                m[0] += self.config.solid.rho * a * (x[0] - y[0]) / self.config.dt;
                m[1] += self.config.solid.rho * a * (x[1] - y[1]) / self.config.dt;
            }
        }
        m
    }

    /// Advances `state` by one time step. `state` is left untouched; on
    /// error nothing is returned.
    pub fn step(&mut self, state: &FsiState) -> Result<(FsiState, StepReport)> {
        let start = Instant::now();
        let dt = self.config.dt;
        let t_new = state.t + dt;
        let mut timings = StepTimings::default();
        let fluid = &self.pair.fluid;
        let solid = &self.pair.solid;

        // mesh motion driven by the solid interface displacement of level n
        let clock = Instant::now();
        let d_ale = self.extend_interface(&state.d)?;
        let u_ale = domain_velocity(&d_ale, &state.d_ale, dt)?;
        let coords_new = current_coordinates(fluid, &d_ale)?;
        for (cell, c) in fluid.cells().iter().enumerate() {
            let jacobian = 2.0 * signed_area(&c.map(|k| coords_new[k]));
            if !(jacobian > 0.0) {
                return Err(Error::InvertedElement { region: "fluid", cell, jacobian });
            }
        }
        timings.mesh_motion = clock.elapsed();

        // controller on the level-n pressure
        let coords_n = current_coordinates(fluid, &state.d_ale)?;
        let mut valves = state.valves.clone();
        let mut jumps = Vec::with_capacity(valves.len());
        for (valve, inst) in valves.iter_mut().zip(&state.instances) {
            let dp = pressure_jump(
                &inst.geometry,
                valve.epsilon(),
                valve.spec().downstream,
                &coords_n,
                fluid.cells(),
                state.p.values(),
            )?;
            valve.update(dp, dt);
            jumps.push(dp);
        }

        // explicit valve forces and the attachment load
        let clock = Instant::now();
        let mut instances = Vec::with_capacity(valves.len());
        let mut forces = Vec::with_capacity(valves.len());
        for (valve, old) in valves.iter().zip(&state.instances) {
            let f = valve_force(old, &coords_n, fluid.cells(), &state.u, &state.u_ale);
            let geometry = self.displace_valve(&valve.reference_geometry()?, &d_ale, &state.d)?;
            let inst = valve.instance(geometry);
            let w = contact_weights(&inst, solid.nodes(), solid.cells(), &state.d)?;
            forces.push(ValveForces::new(valve.name(), f, w, self.config.v_min)?);
            instances.push(inst);
        }
        let load = attachment_rhs(&forces, solid.node_count(), self.config.attachment_force);
        timings.compute_g = clock.elapsed();

        // monolithic solve on the frozen geometry
        let (dofs, fields) = self.dof_map(&state.d);
        let fluid_asm = FluidAssembly {
            params: &self.config.fluid,
            coords: &coords_new,
            cells: fluid.cells(),
            u_prev: &state.u,
            u_ale: &u_ale,
            dt,
            valves: &instances,
            body_force: None,
            pressure_loads: &self.pressure_loads,
        };
        let solid_asm = SolidAssembly {
            params: &self.config.solid,
            ref_coords: solid.nodes(),
            cells: solid.cells(),
            fibers: &self.fibers,
            d_prev: &state.d,
            d_prev2: &state.d_prev,
            dt,
            time: t_new,
            load: Some(&load),
        };
        let mut x0 = vec![0.0; dofs.len()];
        dofs.scatter(fields.fluid.u, state.u.values(), &mut x0);
        dofs.scatter(fields.fluid.p, state.p.values(), &mut x0);
        let guess: Vec<f64> = state
            .d
            .values()
            .iter()
            .zip(state.d_prev.values())
            .map(|(a, b)| 2.0 * a - b)
            .collect();
        dofs.scatter(fields.d, &guess, &mut x0);

        let mut problem = Monolithic {
            fluid: fluid_asm,
            solid: solid_asm,
            dofs: &dofs,
            fields,
            pattern: &self.pattern,
            weights: &self.row_weights,
            fluid_time: Duration::ZERO,
            solid_time: Duration::ZERO,
        };
        let (x, newton) = newton_solve(&mut problem, x0, &self.config.newton, &mut self.solver)?;
        timings.fluid_assembly = problem.fluid_time;
        timings.solid_assembly = problem.solid_time;
        timings.linear_solve = newton.linear_solve_time;

        let nf = fluid.node_count();
        let u = NodalField::from_values(nf, 2, dofs.extract(fields.fluid.u, &x))?;
        let p = NodalField::from_values(nf, 1, dofs.extract(fields.fluid.p, &x))?;
        let d = NodalField::from_values(solid.node_count(), 2, dofs.extract(fields.d, &x))?;

        let mut mismatch: f64 = 0.0;
        for &(f, s) in self.pair.interface.pairs() {
            let (uf, dn, dd) = (u.vector(f), state.d.vector(s), d.vector(s));
            let e = (uf[0] - (dd[0] - dn[0]) / dt).hypot(uf[1] - (dd[1] - dn[1]) / dt);
            mismatch = mismatch.max(e);
        }
        assert!(mismatch <= INTERFACE_TOL, "interface kinematics violated by {mismatch:e} m/s");

        let momentum = self.momentum(&coords_new, &u, &d, &state.d);
        let valve_reports = valves
            .iter()
            .zip(&forces)
            .zip(&jumps)
            .map(|((v, f), &dp)| ValveReport {
                name: v.name().to_string(),
                force: f.force.force,
                volume: f.weights.volume,
                density: f.density,
                load_resultant: if self.config.attachment_force { f.load_resultant() } else { [0.0; 2] },
                residual_torque: f.residual_torque(),
                pressure_jump: dp,
                lambda: v.state.lambda,
                state: v.state,
            })
            .collect();

        let new_state = FsiState {
            step: state.step + 1,
            t: t_new,
            u,
            p,
            d,
            d_prev: state.d.clone(),
            d_prev2: state.d_prev.clone(),
            d_ale,
            d_ale_prev: state.d_ale.clone(),
            u_ale,
            valves,
            instances,
            forces,
        };
        if !new_state.is_finite() {
            return Err(Error::NonFiniteResidual { iteration: newton.iterations });
        }
        timings.total = start.elapsed();
        let report = StepReport {
            step: new_state.step,
            t: t_new,
            newton_iterations: newton.iterations,
            residual_history: newton.residual_history,
            timings,
            valves: valve_reports,
            momentum,
            interface_mismatch: mismatch,
        };
        Ok((new_state, report))
    }

    /// Scaled residual norm of the monolithic system at `next`, evaluated on
    /// the geometry of the step that produced it from `prev`. Zero (up to
    /// solver tolerance) for a state returned by [`FsiModel::step`].
    pub fn step_residual(&self, prev: &FsiState, next: &FsiState) -> Result<f64> {
        let (dofs, fields) = self.dof_map(&prev.d);
        let coords = current_coordinates(&self.pair.fluid, &next.d_ale)?;
        let load = attachment_rhs(&next.forces, self.pair.solid.node_count(), self.config.attachment_force);
        let mut problem = Monolithic {
            fluid: FluidAssembly {
                params: &self.config.fluid,
                coords: &coords,
                cells: self.pair.fluid.cells(),
                u_prev: &prev.u,
                u_ale: &next.u_ale,
                dt: self.config.dt,
                valves: &next.instances,
                body_force: None,
                pressure_loads: &self.pressure_loads,
            },
            solid: SolidAssembly {
                params: &self.config.solid,
                ref_coords: self.pair.solid.nodes(),
                cells: self.pair.solid.cells(),
                fibers: &self.fibers,
                d_prev: &prev.d,
                d_prev2: &prev.d_prev,
                dt: self.config.dt,
                time: next.t,
                load: Some(&load),
            },
            dofs: &dofs,
            fields,
            pattern: &self.pattern,
            weights: &self.row_weights,
            fluid_time: Duration::ZERO,
            solid_time: Duration::ZERO,
        };
        let mut x = vec![0.0; dofs.len()];
        dofs.scatter(fields.fluid.u, next.u.values(), &mut x);
        dofs.scatter(fields.fluid.p, next.p.values(), &mut x);
        dofs.scatter(fields.d, next.d.values(), &mut x);
        let sys = problem.evaluate(&x)?;
        Ok(problem.residual_norm(&sys.residual))
    }

    /// Runs `steps` steps from `state`, handing every new state to `observe`.
    /// Stops at the first error from either the step or the observer.
    pub fn run<F>(&mut self, mut state: FsiState, steps: usize, mut observe: F) -> Result<FsiState>
    where
        F: FnMut(&FsiState, &StepReport) -> Result<()>,
    {
        for _ in 0..steps {
            let (next, report) = self.step(&state)?;
            observe(&next, &report)?;
            state = next;
        }
        Ok(state)
    }
}

/// One coupled step; see [`FsiModel::step`].
pub fn fsi_step(model: &mut FsiModel, state: &FsiState) -> Result<(FsiState, StepReport)> {
    model.step(state)
}

struct Monolithic<'a> {
    fluid: FluidAssembly<'a>,
    solid: SolidAssembly<'a>,
    dofs: &'a DofMap,
    fields: Fields,
    pattern: &'a Arc<SparsityPattern>,
    weights: &'a [f64],
    fluid_time: Duration,
    solid_time: Duration,
}

impl NewtonProblem for Monolithic<'_> {
    fn evaluate(&mut self, x: &[f64]) -> Result<Assembled> {
        let mut out = Assembled::zeros(self.pattern.clone());
        let t = Instant::now();
        self.fluid.assemble(self.dofs, &self.fields.fluid, x, &mut out)?;
        self.fluid_time += t.elapsed();
        let t = Instant::now();
        self.solid.assemble(self.dofs, self.fields.d, x, &mut out)?;
        self.solid_time += t.elapsed();
        Ok(out)
    }

    fn residual_norm(&self, r: &[f64]) -> f64 {
        r.iter().zip(self.weights).map(|(v, w)| (v * w).powi(2)).sum::<f64>().sqrt()
    }
}
