//! Resistive immersed valves and the attachment force that transfers the
//! valve load to the structure.

pub mod controller;
pub mod delta;
pub mod geometry;
pub mod integrals;

use serde::{Deserialize, Serialize};

pub use controller::{controller_step, ValveMode, ValveState};
pub use delta::{smoothed_delta, SmoothedDelta};
pub use geometry::{Polyline, Projection, Side};
pub use integrals::{
    attachment_density, contact_weights, resistive_density, support_quadrature, valve_force, valve_volume,
    ContactWeights, ForceIntegral, ValveForces, ValveInstance, DEFAULT_V_MIN,
};

use crate::error::{Error, Result};
use crate::mesh::Point;

/// How the blend `λ` evolves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ValveControl {
    /// `λ` stays at its initial value.
    Fixed,
    /// Pressure-jump driven state machine.
    #[default]
    Pressure,
}

/// User-facing valve definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValveSpec {
    pub name: String,
    pub closed: Vec<Point>,
    pub open: Vec<Point>,
    pub half_thickness: f64,
    pub resistance: f64,
    pub ramp_open: f64,
    pub ramp_close: f64,
    /// Side of the closed polyline facing downstream.
    pub downstream: Side,
    #[serde(default)]
    pub control: ValveControl,
    #[serde(default = "one")]
    pub initial_lambda: f64,
    /// Prescribed rigid offset of the configuration.
    #[serde(default)]
    pub displacement: Point,
}

fn one() -> f64 {
    1.0
}

/// Validated valve with its controller state.
#[derive(Debug, Clone)]
pub struct ValveSurface {
    spec: ValveSpec,
    closed: Polyline,
    open: Polyline,
    delta: SmoothedDelta,
    pub state: ValveState,
}

impl ValveSurface {
    pub fn new(spec: ValveSpec) -> Result<Self> {
        let delta = SmoothedDelta::new(spec.half_thickness)?;
        if !(spec.resistance >= 0.0 && spec.resistance.is_finite()) {
            return Err(Error::Parameter(format!("valve `{}`: resistance must be ≥ 0", spec.name)));
        }
        if !(spec.ramp_open > 0.0 && spec.ramp_close > 0.0) {
            return Err(Error::Parameter(format!("valve `{}`: ramp durations must be positive", spec.name)));
        }
        if !(0.0..=1.0).contains(&spec.initial_lambda) {
            return Err(Error::Parameter(format!("valve `{}`: initial_lambda must lie in [0, 1]", spec.name)));
        }
        let closed = Polyline::new(spec.closed.clone())?;
        let open = Polyline::new(spec.open.clone())?;
        if closed.points().len() != open.points().len() {
            return Err(Error::DegenerateGeometry(format!(
                "valve `{}`: open and closed configurations differ in vertex count",
                spec.name
            )));
        }
        let state = ValveState::at(spec.initial_lambda);
        Ok(ValveSurface {
            spec,
            closed,
            open,
            delta,
            state,
        })
    }

    pub fn spec(&self) -> &ValveSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn delta(&self) -> SmoothedDelta {
        self.delta
    }

    pub fn epsilon(&self) -> f64 {
        self.delta.epsilon()
    }

    /// Blended reference configuration at the current `λ`, with the
    /// prescribed offset applied.
    pub fn reference_geometry(&self) -> Result<Polyline> {
        let d = self.spec.displacement;
        Polyline::blend(&self.closed, &self.open, self.state.lambda)?.map(|p| [p[0] + d[0], p[1] + d[1]])
    }

    /// Freezes the valve at `geometry` with the current `λ`.
    pub fn instance(&self, geometry: Polyline) -> ValveInstance {
        ValveInstance::new(geometry, self.delta, self.spec.resistance, self.state.lambda)
    }

    /// Applies one controller step; a no-op for fixed valves.
    pub fn update(&mut self, dp: f64, dt: f64) {
        if self.spec.control == ValveControl::Pressure {
            self.state = controller_step(self.state, dp, self.spec.ramp_open, self.spec.ramp_close, dt);
        }
    }
}

/// `p_downstream − p_upstream`: area-weighted mean pressures over cells whose
/// centroid lies farther than `ε` from the valve on either side. Fails when
/// either side has no such cell.
pub fn pressure_jump(
    geometry: &Polyline,
    epsilon: f64,
    downstream: Side,
    coords: &[Point],
    cells: &[[usize; 3]],
    pressure: &[f64],
) -> Result<f64> {
    let mut acc = [[0.0; 2]; 2];
    for c in cells {
        let v = [coords[c[0]], coords[c[1]], coords[c[2]]];
        let centroid = [(v[0][0] + v[1][0] + v[2][0]) / 3.0, (v[0][1] + v[1][1] + v[2][1]) / 3.0];
        let proj = geometry.project(centroid);
        if proj.distance <= epsilon || proj.cross == 0.0 {
            continue;
        }
        let side = if proj.cross > 0.0 { Side::Left } else { Side::Right };
        let k = usize::from(side == downstream);
        let area = crate::mesh::signed_area(&v).abs();
        let p = (pressure[c[0]] + pressure[c[1]] + pressure[c[2]]) / 3.0;
        acc[k][0] += area * p;
        acc[k][1] += area;
    }
    if acc[0][1] <= 0.0 || acc[1][1] <= 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "valve does not separate the fluid: {} side has no cells beyond the support",
            if acc[1][1] <= 0.0 { "downstream" } else { "upstream" }
        )));
    }
    Ok(acc[1][0] / acc[1][1] - acc[0][0] / acc[0][1])
}
