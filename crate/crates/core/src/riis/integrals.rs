//! Valve force, contact volume and attachment load integrals.
//!
//! Cells that can intersect the delta support are integrated with a
//! degree-4 rule; all other cells contribute exactly zero and are skipped.

use std::sync::OnceLock;

use super::delta::SmoothedDelta;
use super::geometry::Polyline;
use crate::error::{Error, Result};
use crate::fem::element::deformation_from_nodal;
use crate::fem::{quadrature_rule, NodalField, P1Triangle, QuadratureRule};
use crate::mesh::{dist, Point};

/// Default lower bound on the contact volume before the valve is
/// considered detached from the structure.
pub const DEFAULT_V_MIN: f64 = 1e-12;

/// Rule used on cells touching a delta support.
pub fn support_quadrature() -> &'static QuadratureRule {
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    RULE.get_or_init(|| quadrature_rule(2, 4).expect("degree-4 triangle rule"))
}

/// A valve frozen at one configuration: geometry, kernel width and the
/// effective coefficient `R λ / ε`.
#[derive(Debug, Clone)]
pub struct ValveInstance {
    pub geometry: Polyline,
    pub delta: SmoothedDelta,
    pub coefficient: f64,
}

impl ValveInstance {
    pub fn new(geometry: Polyline, delta: SmoothedDelta, resistance: f64, lambda: f64) -> Self {
        let coefficient = resistance * lambda / delta.epsilon();
        ValveInstance {
            geometry,
            delta,
            coefficient,
        }
    }

    #[inline]
    pub fn weight_at(&self, x: Point) -> f64 {
        self.delta.eval(self.geometry.distance(x))
    }

    /// `R λ / ε · δ(φ(x))`.
    #[inline]
    pub fn coefficient_at(&self, x: Point) -> f64 {
        if self.coefficient == 0.0 {
            return 0.0;
        }
        self.coefficient * self.weight_at(x)
    }

    /// Conservative test whether the triangle can meet the support.
    pub fn touches(&self, tri: &[Point; 3]) -> bool {
        let c = [
            (tri[0][0] + tri[1][0] + tri[2][0]) / 3.0,
            (tri[0][1] + tri[1][1] + tri[2][1]) / 3.0,
        ];
        let r = tri.iter().map(|&v| dist(v, c)).fold(0.0, f64::max);
        self.geometry.distance(c) - r <= self.delta.epsilon()
    }
}

/// Resistive force density `R λ / ε · δ(φ(x)) (u − u_ALE)`.
pub fn resistive_density(valve: &ValveInstance, u: [f64; 2], u_ale: [f64; 2], x: Point) -> [f64; 2] {
    let c = valve.coefficient_at(x);
    [c * (u[0] - u_ale[0]), c * (u[1] - u_ale[1])]
}

/// Force resultant and its moment about the origin.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ForceIntegral {
    pub force: [f64; 2],
    pub torque: f64,
}

fn cell_values(field: &NodalField, c: &[usize; 3]) -> [[f64; 2]; 3] {
    [field.vector(c[0]), field.vector(c[1]), field.vector(c[2])]
}

/// `F = ∫ R λ/ε δ(φ) (u − u_ALE) dx` over the fluid mesh at coordinates
/// `coords`.
pub fn valve_force(
    valve: &ValveInstance,
    coords: &[Point],
    cells: &[[usize; 3]],
    u: &NodalField,
    u_ale: &NodalField,
) -> ForceIntegral {
    let mut out = ForceIntegral::default();
    if valve.coefficient == 0.0 {
        return out;
    }
    let rule = support_quadrature();
    for c in cells {
        let tri = P1Triangle::from_coords(coords, *c);
        if !valve.touches(&tri.vertices) {
            continue;
        }
        let (uc, wc) = (cell_values(u, c), cell_values(u_ale, c));
        let jac = 2.0 * tri.area.abs();
        for (xi, w) in rule.triangle_points() {
            let x = tri.map(xi);
            let k = valve.coefficient_at(x);
            if k == 0.0 {
                continue;
            }
            let n = crate::fem::element::shape_values(xi);
            let mut rel = [0.0; 2];
            for a in 0..3 {
                rel[0] += n[a] * (uc[a][0] - wc[a][0]);
                rel[1] += n[a] * (uc[a][1] - wc[a][1]);
            }
            let f = [k * rel[0] * w * jac, k * rel[1] * w * jac];
            out.force[0] += f[0];
            out.force[1] += f[1];
            out.torque += x[0] * f[1] - x[1] * f[0];
        }
    }
    out
}

/// Contact volume `V = ∫ Ĵ δ(φ(x̂ + d̂)) dx̂` with its nodal split
/// `w_a = ∫ Ĵ δ N_a dx̂` and first moment `∫ Ĵ δ (x̂ + d̂) dx̂`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContactWeights {
    pub volume: f64,
    /// `(node, w_a)`, sorted by node, nonzero weights only.
    pub nodal: Vec<(usize, f64)>,
    pub first_moment: [f64; 2],
}

/// Integrates the contact weights over the solid reference mesh displaced
/// by `d`.
pub fn contact_weights(
    valve: &ValveInstance,
    ref_coords: &[Point],
    cells: &[[usize; 3]],
    d: &NodalField,
) -> Result<ContactWeights> {
    let rule = support_quadrature();
    let mut nodal = std::collections::BTreeMap::<usize, f64>::new();
    let mut out = ContactWeights::default();
    for (ci, c) in cells.iter().enumerate() {
        let dc = cell_values(d, c);
        let cur = [0, 1, 2].map(|a| [ref_coords[c[a]][0] + dc[a][0], ref_coords[c[a]][1] + dc[a][1]]);
        if !valve.touches(&cur) {
            continue;
        }
        let tri = P1Triangle::from_coords(ref_coords, *c);
        let j = deformation_from_nodal(&tri, &dc)
            .map_err(|jacobian| Error::InvertedElement {
                region: "solid",
                cell: ci,
                jacobian,
            })?
            .j;
        let jac = 2.0 * tri.area.abs() * j;
        let deformed = P1Triangle::new(cur);
        let mut local = [0.0; 3];
        for (xi, w) in rule.triangle_points() {
            let x = deformed.map(xi);
            let wd = valve.weight_at(x) * w * jac;
            if wd == 0.0 {
                continue;
            }
            out.volume += wd;
            out.first_moment[0] += wd * x[0];
            out.first_moment[1] += wd * x[1];
            let n = crate::fem::element::shape_values(xi);
            for a in 0..3 {
                local[a] += wd * n[a];
            }
        }
        for a in 0..3 {
            if local[a] != 0.0 {
                *nodal.entry(c[a]).or_default() += local[a];
            }
        }
    }
    out.nodal = nodal.into_iter().collect();
    Ok(out)
}

/// `F`, `V` and the density `C = F / V` of one valve at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct ValveForces {
    pub force: ForceIntegral,
    pub weights: ContactWeights,
    pub density: [f64; 2],
}

impl ValveForces {
    /// Fails with an assumption violation when `V < v_min`.
    pub fn new(valve_name: &str, force: ForceIntegral, weights: ContactWeights, v_min: f64) -> Result<Self> {
        let v = weights.volume;
        if !(v >= v_min) {
            return Err(Error::AssumptionViolation {
                valve: valve_name.to_string(),
                volume: v,
                threshold: v_min,
            });
        }
        let density = [force.force[0] / v, force.force[1] / v];
        Ok(ValveForces {
            force,
            weights,
            density,
        })
    }

    /// Consistent nodal load `C w_a` on the solid.
    pub fn nodal_load(&self) -> impl Iterator<Item = (usize, [f64; 2])> + '_ {
        self.weights
            .nodal
            .iter()
            .map(|&(n, w)| (n, [self.density[0] * w, self.density[1] * w]))
    }

    /// `Σ_a C w_a`, equal to `F` up to rounding by partition of unity.
    pub fn load_resultant(&self) -> [f64; 2] {
        self.nodal_load().fold([0.0; 2], |s, (_, f)| [s[0] + f[0], s[1] + f[1]])
    }

    /// Moment of the attachment density about the origin.
    pub fn attachment_torque(&self) -> f64 {
        let m = self.weights.first_moment;
        m[0] * self.density[1] - m[1] * self.density[0]
    }

    /// Attachment torque minus the torque of the fluid-side force; the
    /// force-matching construction leaves this unbalanced in general.
    pub fn residual_torque(&self) -> f64 {
        self.attachment_torque() - self.force.torque
    }
}

/// Pointwise attachment density `ĝ = C δ(φ(x̂ + d̂))`, given the deformed point.
pub fn attachment_density(forces: &ValveForces, valve: &ValveInstance, deformed_point: Point) -> [f64; 2] {
    let w = valve.weight_at(deformed_point);
    [forces.density[0] * w, forces.density[1] * w]
}

/// Plain contact volume; see [`contact_weights`].
pub fn valve_volume(
    valve_name: &str,
    valve: &ValveInstance,
    ref_coords: &[Point],
    cells: &[[usize; 3]],
    d: &NodalField,
    v_min: f64,
) -> Result<f64> {
    let w = contact_weights(valve, ref_coords, cells, d)?;
    if !(w.volume >= v_min) {
        return Err(Error::AssumptionViolation {
            valve: valve_name.to_string(),
            volume: w.volume,
            threshold: v_min,
        });
    }
    Ok(w.volume)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_channel_benchmark, unit_square_mesh};
    use proptest::prelude::*;

    fn scaled_square(n: usize, s: f64) -> (Vec<Point>, Vec<[usize; 3]>) {
        let m = unit_square_mesh(n);
        (m.nodes().iter().map(|p| [p[0] * s, p[1] * s]).collect(), m.cells().to_vec())
    }

    fn valve(points: Vec<Point>, eps: f64, r: f64) -> ValveInstance {
        ValveInstance::new(Polyline::new(points).unwrap(), SmoothedDelta::new(eps).unwrap(), r, 1.0)
    }

    /// Midpoint rule on a uniform `m x m` grid of `[0, s]^2`.
    fn grid_integral(m: usize, s: f64, f: impl Fn(Point) -> f64) -> f64 {
        let h = s / m as f64;
        let mut sum = 0.0;
        for i in 0..m {
            for j in 0..m {
                sum += f([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]);
            }
        }
        sum * h * h
    }

    #[test]
    fn peak_density_magnitude() {
        let v = valve(vec![[0.0, 0.0], [1.0, 0.0]], 1.5e-3, 1e4);
        let f = resistive_density(&v, [1.0, 0.0], [0.0, 0.0], [0.5, 0.0]);
        let expect = 1e4 / (1.5e-3 * 1.5e-3);
        assert!((f[0] - expect).abs() < 1e-6 * expect);
        assert!((expect - 4.444_444_444e9).abs() < 1.0);
        assert_eq!(resistive_density(&v, [0.3, -2.0], [0.3, -2.0], [0.5, 0.0]), [0.0, 0.0]);
        assert_eq!(resistive_density(&v, [1.0, 1.0], [0.0, 0.0], [0.5, 0.002]), [0.0, 0.0]);
    }

    #[test]
    fn zero_mismatch_gives_zero_force() {
        let (x, cells) = scaled_square(16, 1.0);
        let v = valve(vec![[-0.1, 0.5], [1.1, 0.5]], 0.05, 10.0);
        let u = NodalField::from_fn(x.len(), |i| [x[i][1], -x[i][0]]);
        let f = valve_force(&v, &x, &cells, &u, &u);
        assert_eq!(f.force, [0.0, 0.0]);
    }

    #[test]
    fn slab_integral_limit() {
        let (eps, r, c) = (0.05, 10.0, [0.7, -0.2]);
        let v = valve(vec![[-0.1, 0.5], [1.1, 0.5]], eps, r);
        let exact = [r / eps * c[0], r / eps * c[1]];
        let mut errs = Vec::new();
        for n in [16, 32, 64] {
            let (x, cells) = scaled_square(n, 1.0);
            let u = NodalField::from_fn(x.len(), |_| c);
            let zero = NodalField::zeros(x.len(), 2);
            let f = valve_force(&v, &x, &cells, &u, &zero).force;
            errs.push(((f[0] - exact[0]).hypot(f[1] - exact[1])) / exact[0].hypot(exact[1]));
        }
        assert!(errs[2] < 1e-3, "{errs:?}");
        assert!(errs[2] < errs[0], "{errs:?}");
    }

    #[test]
    fn tilted_segment_matches_refined_quadrature() {
        let v = valve(vec![[0.2, 0.25], [0.8, 0.7]], 0.04, 3.0);
        let uf = |p: Point| [0.3 + p[0] - 2.0 * p[1], -0.1 + 0.5 * p[0]];
        let (x, cells) = scaled_square(40, 1.0);
        let u = NodalField::from_fn(x.len(), |i| uf(x[i]));
        let zero = NodalField::zeros(x.len(), 2);
        let f = valve_force(&v, &x, &cells, &u, &zero).force;
        let oracle = [0, 1].map(|k| grid_integral(2000, 1.0, |p| v.coefficient_at(p) * uf(p)[k]));
        for k in 0..2 {
            assert!((f[k] - oracle[k]).abs() <= 0.01 * oracle[0].hypot(oracle[1]), "{f:?} vs {oracle:?}");
        }
    }

    #[test]
    fn detached_valve_is_an_assumption_violation() {
        let pair = generate_channel_benchmark(0.08, 0.02, 0.002, 0.004).unwrap();
        let v = valve(vec![[0.04, -0.004], [0.04, 0.004]], 1.5e-3, 1e4);
        let d = NodalField::zeros(pair.solid.node_count(), 2);
        let err = valve_volume("mv", &v, pair.solid.nodes(), pair.solid.cells(), &d, DEFAULT_V_MIN).unwrap_err();
        assert!(matches!(err, Error::AssumptionViolation { ref valve, .. } if valve == "mv"));
    }

    #[test]
    fn strip_penetration_volume() {
        // wall occupies y ∈ [0, 0.4]; segment enters from below to depth p
        let (eps, p) = (0.03, 0.15);
        let cap = eps * (std::f64::consts::PI / 4.0 - 1.0 / std::f64::consts::PI);
        let exact = p + cap;
        let v = valve(vec![[0.5, -0.5], [0.5, p]], eps, 1.0);
        let errs: Vec<f64> = [40, 80, 160]
            .iter()
            .map(|&n| {
                let m = unit_square_mesh(n);
                let x: Vec<Point> = m.nodes().iter().map(|q| [q[0], 0.4 * q[1]]).collect();
                let d = NodalField::zeros(x.len(), 2);
                let vol = valve_volume("v", &v, &x, m.cells(), &d, DEFAULT_V_MIN).unwrap();
                (vol - exact).abs() / exact
            })
            .collect();
        assert!(errs[2] < errs[1] && errs[1] < errs[0], "{errs:?}");
        assert!(errs[2] < 2e-4, "{errs:?}");
    }

    #[test]
    fn dilation_scales_with_jacobian() {
        let alpha = 0.1;
        let (x, cells) = scaled_square(50, 1.0);
        let v = valve(vec![[0.1, 0.3], [0.9, 0.6]], 0.05, 1.0);
        let d = NodalField::from_fn(x.len(), |i| [alpha * x[i][0], alpha * x[i][1]]);
        let vol = valve_volume("v", &v, &x, &cells, &d, DEFAULT_V_MIN).unwrap();
        let s = 1.0 + alpha;
        let oracle = grid_integral(2000, 1.0, |p| s * s * v.weight_at([s * p[0], s * p[1]]));
        assert!((vol - oracle).abs() < 1e-3 * oracle, "{vol} vs {oracle}");
    }

    #[test]
    fn zero_force_gives_zero_attachment() {
        let (x, cells) = scaled_square(10, 1.0);
        let v = valve(vec![[0.0, 0.5], [1.0, 0.5]], 0.1, 1.0);
        let w = contact_weights(&v, &x, &cells, &NodalField::zeros(x.len(), 2)).unwrap();
        let forces = ValveForces::new("v", ForceIntegral::default(), w, DEFAULT_V_MIN).unwrap();
        assert!(forces.nodal_load().all(|(_, f)| f == [0.0, 0.0]));
        assert_eq!(attachment_density(&forces, &v, [0.5, 0.5]), [0.0, 0.0]);
    }

    #[test]
    fn attachment_vanishes_outside_support() {
        let (x, cells) = scaled_square(10, 1.0);
        let v = valve(vec![[0.0, 0.5], [1.0, 0.5]], 0.1, 1.0);
        let w = contact_weights(&v, &x, &cells, &NodalField::zeros(x.len(), 2)).unwrap();
        let f = ForceIntegral { force: [2.0, 1.0], torque: 0.0 };
        let forces = ValveForces::new("v", f, w, DEFAULT_V_MIN).unwrap();
        assert_eq!(attachment_density(&forces, &v, [0.5, 0.8]), [0.0, 0.0]);
        assert!(attachment_density(&forces, &v, [0.5, 0.5])[0] > 0.0);
        assert!(forces.nodal_load().all(|(n, _)| (x[n][1] - 0.5).abs() < 0.1 + 0.1 + 1e-12));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn load_resultant_matches_force(
            fx in -1e3f64..1e3, fy in -1e3f64..1e3,
            a in -0.05f64..0.05, b in -0.05f64..0.05, y0 in 0.3f64..0.7,
        ) {
            let (x, cells) = scaled_square(24, 1.0);
            let v = valve(vec![[-0.2, y0], [0.5, y0 + 0.1], [1.2, y0]], 0.06, 1.0);
            let d = NodalField::from_fn(x.len(), |i| [a * x[i][1], b * x[i][0] * x[i][1]]);
            let w = contact_weights(&v, &x, &cells, &d).unwrap();
            let f = ForceIntegral { force: [fx, fy], torque: 0.0 };
            let forces = ValveForces::new("v", f, w, DEFAULT_V_MIN).unwrap();
            let r = forces.load_resultant();
            let err = (r[0] - fx).hypot(r[1] - fy);
            prop_assert!(err <= 1e-12 * (1.0 + fx.hypot(fy)), "err {}", err);
        }
    }
}
