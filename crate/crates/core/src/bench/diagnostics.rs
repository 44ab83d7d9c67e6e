//! Observers evaluated on a state; none of them modifies it.

use crate::coupled::{FsiModel, FsiState, StepReport};
use crate::error::{Error, Result};
use crate::fem::NodalField;
use crate::mesh::{current_coordinates, signed_area, Mesh, Point};
use crate::riis::{pressure_jump, Polyline, Side};

/// Center of mass of fluid and solid [m].
///
/// The fluid has uniform density on its deformed mesh. The solid mass is
/// carried by the reference configuration, so its density in the deformed
/// configuration is `ρ_s / Ĵ` and the solid mass stays fixed under
/// compression. Both integrals are exact for piecewise linear motion.
pub fn center_of_mass(
    fluid: &Mesh,
    fluid_displacement: &NodalField,
    solid: &Mesh,
    solid_displacement: &NodalField,
    rho_f: f64,
    rho_s: f64,
) -> Result<Point> {
    let xf = current_coordinates(fluid, fluid_displacement)?;
    let xs = current_coordinates(solid, solid_displacement)?;
    let mut mass = 0.0;
    let mut moment = [0.0; 2];
    for c in fluid.cells() {
        let v = c.map(|k| xf[k]);
        let m = rho_f * signed_area(&v);
        mass += m;
        for i in 0..2 {
            moment[i] += m * (v[0][i] + v[1][i] + v[2][i]) / 3.0;
        }
    }
    for (ci, c) in solid.cells().iter().enumerate() {
        let m = rho_s * solid.signed_area(ci);
        mass += m;
        for i in 0..2 {
            moment[i] += m * (xs[c[0]][i] + xs[c[1]][i] + xs[c[2]][i]) / 3.0;
        }
    }
    Ok([moment[0] / mass, moment[1] / mass])
}

/// Signed distance to `geometry`, positive on `side`.
fn side_distance(geometry: &Polyline, side: Side, x: Point) -> f64 {
    let p = geometry.project(x);
    let left = if p.cross >= 0.0 { p.distance } else { -p.distance };
    match side {
        Side::Left => left,
        Side::Right => -left,
    }
}

/// Area of the fluid on `side` of a straight valve line, clipping every
/// triangle by the linear interpolant of the signed distance. Exact for
/// straight valves; for curved ones the cut is linear inside each cell.
pub fn chamber_area(coords: &[Point], cells: &[[usize; 3]], geometry: &Polyline, side: Side) -> f64 {
    let mut total = 0.0;
    for c in cells {
        let v = c.map(|k| coords[k]);
        let s = v.map(|x| side_distance(geometry, side, x));
        let mut poly: Vec<Point> = Vec::with_capacity(4);
        for k in 0..3 {
            let (a, b) = (k, (k + 1) % 3);
            if s[a] >= 0.0 {
                poly.push(v[a]);
            }
            if (s[a] >= 0.0) != (s[b] >= 0.0) {
                let t = s[a] / (s[a] - s[b]);
                poly.push([v[a][0] + t * (v[b][0] - v[a][0]), v[a][1] + t * (v[b][1] - v[a][1])]);
            }
        }
        for k in 1..poly.len().saturating_sub(1) {
            total += signed_area(&[poly[0], poly[k], poly[k + 1]]);
        }
    }
    total
}

/// Per-valve columns of a diagnostics row.
#[derive(Debug, Clone, PartialEq)]
pub struct ValveDiagnostics {
    pub name: String,
    /// `p_downstream − p_upstream` at the row's time level [Pa].
    pub pressure_jump: f64,
    /// Fluid force used for the attachment load of the step [N/m].
    pub force: [f64; 2],
    /// Contact volume [m²].
    pub volume: f64,
    /// `‖F/V‖` [N/m³].
    pub density: f64,
    /// Torque of the attachment load minus the torque of `F` [N]. The two
    /// resultants agree, so the value does not depend on the reference point.
    pub residual_torque: f64,
    /// Fluid area on the downstream side of the valve [m²].
    pub downstream_area: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRow {
    pub step: usize,
    /// Time [s].
    pub t: f64,
    /// Center of mass [m].
    pub com: Point,
    /// Vertical center-of-mass velocity, by differencing the previous row [m/s].
    pub com_velocity: f64,
    /// `max ‖u‖` over fluid nodes [m/s].
    pub max_velocity: f64,
    pub valves: Vec<ValveDiagnostics>,
}

/// Fixed leading CSV columns; per-valve columns follow in valve order.
pub const BASE_COLUMNS: [&str; 6] = ["step", "t", "com_x", "com_y", "com_vy", "u_max"];
/// Per-valve column suffixes, prefixed by `<valve name>_`.
pub const VALVE_COLUMNS: [&str; 7] = ["dp", "fx", "fy", "volume", "density", "torque", "downstream_area"];

/// Current fluid node displacement: the extension of the solid interface
/// displacement of `state`, so the fluid boundary matches the solid.
pub fn fluid_displacement(model: &FsiModel, state: &FsiState) -> Result<NodalField> {
    model.extend_interface(&state.d)
}

pub fn system_center_of_mass(model: &FsiModel, state: &FsiState) -> Result<Point> {
    let pair = model.meshes();
    let cfg = model.config();
    center_of_mass(
        &pair.fluid,
        &fluid_displacement(model, state)?,
        &pair.solid,
        &state.d,
        cfg.fluid.rho,
        cfg.solid.rho,
    )
}

/// Pressure jump of valve `k`, using the pressure of `state` on the mesh it
/// was computed on. Fails if either side has no cell beyond the support.
pub fn chamber_pressure_jump(model: &FsiModel, state: &FsiState, k: usize) -> Result<f64> {
    let valve = state
        .valves
        .get(k)
        .ok_or_else(|| Error::Parameter(format!("no valve with index {k}")))?;
    let fluid = &model.meshes().fluid;
    let coords = current_coordinates(fluid, &state.d_ale)?;
    pressure_jump(
        &state.instances[k].geometry,
        valve.epsilon(),
        valve.spec().downstream,
        &coords,
        fluid.cells(),
        state.p.values(),
    )
}

/// Builds the row for `state`; `previous` supplies the center of mass of
/// the last row for the velocity.
pub fn diagnostics_row(
    model: &FsiModel,
    state: &FsiState,
    report: &StepReport,
    previous: (f64, Point),
) -> Result<DiagnosticsRow> {
    let fluid = &model.meshes().fluid;
    let disp = fluid_displacement(model, state)?;
    let coords = current_coordinates(fluid, &disp)?;
    let com = system_center_of_mass(model, state)?;
    let (t_prev, com_prev) = previous;
    let com_velocity = if state.t > t_prev { (com[1] - com_prev[1]) / (state.t - t_prev) } else { 0.0 };
    let mut valves = Vec::with_capacity(state.valves.len());
    for (k, (valve, vr)) in state.valves.iter().zip(&report.valves).enumerate() {
        let geometry = model.displace_valve(&valve.reference_geometry()?, &disp, &state.d)?;
        valves.push(ValveDiagnostics {
            name: valve.name().to_string(),
            pressure_jump: chamber_pressure_jump(model, state, k)?,
            force: vr.force,
            volume: vr.volume,
            density: vr.density[0].hypot(vr.density[1]),
            residual_torque: vr.residual_torque,
            downstream_area: chamber_area(&coords, fluid.cells(), &geometry, valve.spec().downstream),
        });
    }
    Ok(DiagnosticsRow {
        step: state.step,
        t: state.t,
        com,
        com_velocity,
        max_velocity: state.u.max_norm(),
        valves,
    })
}

/// Downstream area of every valve at the reference configuration.
pub fn initial_areas(model: &FsiModel, state: &FsiState) -> Result<Vec<f64>> {
    let fluid = &model.meshes().fluid;
    let disp = fluid_displacement(model, state)?;
    let coords = current_coordinates(fluid, &disp)?;
    state
        .valves
        .iter()
        .map(|v| {
            let geometry = model.displace_valve(&v.reference_geometry()?, &disp, &state.d)?;
            Ok(chamber_area(&coords, fluid.cells(), &geometry, v.spec().downstream))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_annulus_benchmark, unit_square_mesh};

    #[test]
    fn undeformed_annulus_is_centred() {
        let pair = generate_annulus_benchmark(0.025, 0.01, 0.002).unwrap();
        let zf = NodalField::zeros(pair.fluid.node_count(), 2);
        let zs = NodalField::zeros(pair.solid.node_count(), 2);
        let c = center_of_mass(&pair.fluid, &zf, &pair.solid, &zs, 1060.0, 1000.0).unwrap();
        // exact mirror symmetry in x; the disc triangulation is only
        // approximately symmetric in y
        assert!(c[0].abs() <= 1e-10 * 0.025, "{c:?}");
        assert!(c[1].abs() <= 1e-3 * 0.025, "{c:?}");
    }

    #[test]
    fn translation_shifts_the_center_exactly() {
        let pair = generate_annulus_benchmark(0.025, 0.01, 0.003).unwrap();
        let zf = NodalField::zeros(pair.fluid.node_count(), 2);
        let zs = NodalField::zeros(pair.solid.node_count(), 2);
        let shift = [0.013, -0.007];
        let tf = NodalField::from_fn(pair.fluid.node_count(), |_| shift);
        let ts = NodalField::from_fn(pair.solid.node_count(), |_| shift);
        let c0 = center_of_mass(&pair.fluid, &zf, &pair.solid, &zs, 1060.0, 1000.0).unwrap();
        let c1 = center_of_mass(&pair.fluid, &tf, &pair.solid, &ts, 1060.0, 1000.0).unwrap();
        for i in 0..2 {
            assert!((c1[i] - c0[i] - shift[i]).abs() <= 1e-15, "{c0:?} {c1:?}");
        }
    }

    /// Subdivides each deformed triangle `levels` times and sums midpoint
    /// contributions; for the solid the density is `ρ / J`, with `J` the
    /// area ratio of the deformed to the reference sub-triangle.
    fn refined_oracle(pair: &crate::mesh::MeshPair, df: &NodalField, ds: &NodalField, levels: usize) -> Point {
        let (rf, rs) = (1060.0, 1000.0);
        let mut mass = 0.0;
        let mut mom = [0.0; 2];
        let n = 1 << levels;
        let mut add = |x: [Point; 3], xr: [Point; 3], rho: f64, mass_from_ref: bool| {
            for i in 0..n {
                for j in 0..n - i {
                    let mut tris = vec![[(i, j), (i + 1, j), (i, j + 1)]];
                    if i + j + 1 < n {
                        tris.push([(i + 1, j), (i + 1, j + 1), (i, j + 1)]);
                    }
                    for t in tris {
                        let map = |p: [Point; 3], (a, b): (usize, usize)| -> Point {
                            let (s, r) = (a as f64 / n as f64, b as f64 / n as f64);
                            let w = [1.0 - s - r, s, r];
                            [
                                w[0] * p[0][0] + w[1] * p[1][0] + w[2] * p[2][0],
                                w[0] * p[0][1] + w[1] * p[1][1] + w[2] * p[2][1],
                            ]
                        };
                        let sub = t.map(|q| map(x, q));
                        let subr = t.map(|q| map(xr, q));
                        let area = if mass_from_ref { signed_area(&subr) } else { signed_area(&sub) };
                        let m = rho * area;
                        mass += m;
                        for k in 0..2 {
                            mom[k] += m * (sub[0][k] + sub[1][k] + sub[2][k]) / 3.0;
                        }
                    }
                }
            }
        };
        let xf = current_coordinates(&pair.fluid, df).unwrap();
        for c in pair.fluid.cells() {
            add(c.map(|k| xf[k]), c.map(|k| pair.fluid.nodes()[k]), rf, false);
        }
        let xs = current_coordinates(&pair.solid, ds).unwrap();
        for c in pair.solid.cells() {
            add(c.map(|k| xs[k]), c.map(|k| pair.solid.nodes()[k]), rs, true);
        }
        [mom[0] / mass, mom[1] / mass]
    }

    #[test]
    fn asymmetric_deformation_matches_refined_quadrature() {
        let pair = generate_annulus_benchmark(0.025, 0.01, 0.003).unwrap();
        let warp = |p: Point| [1e-3 * (40.0 * p[1]).sin() + 2e-4, 8e-4 * (30.0 * p[0] + 0.3).cos() * (1.0 + 20.0 * p[0])];
        let df = NodalField::from_fn(pair.fluid.node_count(), |i| warp(pair.fluid.nodes()[i]));
        let ds = NodalField::from_fn(pair.solid.node_count(), |i| warp(pair.solid.nodes()[i]));
        let c = center_of_mass(&pair.fluid, &df, &pair.solid, &ds, 1060.0, 1000.0).unwrap();
        let oracle = refined_oracle(&pair, &df, &ds, 3);
        for i in 0..2 {
            assert!((c[i] - oracle[i]).abs() <= 1e-8, "{c:?} vs {oracle:?}");
        }
    }

    #[test]
    fn chamber_area_splits_the_square() {
        let m = unit_square_mesh(9);
        let line = Polyline::new(vec![[-0.5, 0.37], [1.5, 0.37]]).unwrap();
        let below = chamber_area(m.nodes(), m.cells(), &line, Side::Right);
        let above = chamber_area(m.nodes(), m.cells(), &line, Side::Left);
        assert!((below - 0.37).abs() < 1e-14, "{below}");
        assert!((above - 0.63).abs() < 1e-14, "{above}");
        let slanted = Polyline::new(vec![[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let a = chamber_area(m.nodes(), m.cells(), &slanted, Side::Right);
        assert!((a - 0.5).abs() < 1e-14, "{a}");
    }
}
