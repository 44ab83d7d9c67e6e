//! Run configuration, stored as TOML.
//!
//! ```toml
//! dt = 5e-4                  # time step [s]
//! final_time = 0.25          # [s]
//! attachment_force = true
//! convergence_dts = [1e-3, 5e-4, 2.5e-4]
//!
//! [geometry]
//! scenario = "annulus"       # or "channel"
//! radius = 0.025
//! wall_thickness = 0.012
//! mesh_size = 0.00125
//!
//! [fluid]                    # rho, mu, beta
//! [solid]                    # rho, mu, kappa, a_max, t_max
//! [newton]                   # abs_tol, rel_tol, max_iter
//! [output]                   # directory, snapshot_every, diagnostics_every
//! [[valves]]                 # one table per valve, see `ValveSpec`
//! ```
//!
//! Channel geometry takes `length`, `height`, `wall_thickness`, `mesh_size`,
//! `inlet_pressure` and `outlet_pressure` instead of `radius`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coupled::FsiConfig;
use crate::error::{Error, Result};
use crate::fem::NewtonOptions;
use crate::fluid::FluidParams;
use crate::mesh::FacetTag;
use crate::riis::{Polyline, Side, ValveControl, ValveSpec, ValveSurface, DEFAULT_V_MIN};
use crate::solid::SolidParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "lowercase", deny_unknown_fields)]
pub enum Geometry {
    /// Fluid disc inside a free solid annulus, both centred at the origin.
    Annulus {
        radius: f64,
        wall_thickness: f64,
        mesh_size: f64,
    },
    /// Straight channel between two clamped wall strips, with normal
    /// pressures imposed on the open ends.
    Channel {
        length: f64,
        height: f64,
        wall_thickness: f64,
        mesh_size: f64,
        #[serde(default)]
        inlet_pressure: f64,
        #[serde(default)]
        outlet_pressure: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        let o = NewtonOptions::default();
        NewtonConfig {
            abs_tol: o.abs_tol,
            rel_tol: o.rel_tol,
            max_iter: o.max_iter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Field snapshot every this many steps; 0 disables snapshots.
    #[serde(default)]
    pub snapshot_every: usize,
    /// Diagnostics row every this many steps.
    #[serde(default = "one")]
    pub diagnostics_every: usize,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

fn default_v_min() -> f64 {
    DEFAULT_V_MIN
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: PathBuf::from("riis-output"),
            snapshot_every: 0,
            diagnostics_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Time step [s].
    pub dt: f64,
    /// Final time [s].
    pub final_time: f64,
    #[serde(default = "yes")]
    pub attachment_force: bool,
    /// Time steps used by the convergence study [s].
    #[serde(default)]
    pub convergence_dts: Vec<f64>,
    /// Smallest admissible valve contact volume [m²].
    #[serde(default = "default_v_min")]
    pub v_min: f64,
    pub geometry: Geometry,
    #[serde(default)]
    pub fluid: FluidParams,
    #[serde(default)]
    pub solid: SolidParams,
    #[serde(default)]
    pub newton: NewtonConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub valves: Vec<ValveSpec>,
}

/// Horizontal closed valve through the centre of a disc of radius `radius`,
/// reaching `2ε` into the wall on both sides. Downstream is the lower half.
pub fn annulus_valve(radius: f64, half_thickness: f64) -> Result<ValveSpec> {
    let a = radius + 2.0 * half_thickness;
    let closed = Polyline::segment([-a, 0.0], [a, 0.0], 32)?.points().to_vec();
    Ok(ValveSpec {
        name: "valve".into(),
        closed: closed.clone(),
        open: closed,
        half_thickness,
        resistance: 1e4,
        ramp_open: 0.01,
        ramp_close: 0.035,
        downstream: Side::Right,
        control: ValveControl::Fixed,
        initial_lambda: 1.0,
        displacement: [0.0, 0.0],
    })
}

/// Vertical closed valve across a channel at `x`, reaching `2ε` into both
/// walls. Downstream is the outlet side.
pub fn channel_valve(x: f64, height: f64, half_thickness: f64) -> Result<ValveSpec> {
    let a = 0.5 * height + 2.0 * half_thickness;
    let closed = Polyline::segment([x, -a], [x, a], 16)?.points().to_vec();
    Ok(ValveSpec {
        name: "valve".into(),
        closed: closed.clone(),
        open: closed,
        half_thickness,
        resistance: 1e4,
        ramp_open: 0.01,
        ramp_close: 0.035,
        downstream: Side::Right,
        control: ValveControl::Fixed,
        initial_lambda: 1.0,
        displacement: [0.0, 0.0],
    })
}

impl SimConfig {
    /// Contracting annulus with a closed mid-plane valve.
    pub fn annulus_benchmark() -> Self {
        let radius = 0.025;
        SimConfig {
            dt: 5e-4,
            final_time: 0.25,
            attachment_force: true,
            convergence_dts: vec![1e-3, 5e-4, 2.5e-4],
            v_min: DEFAULT_V_MIN,
            geometry: Geometry::Annulus {
                radius,
                wall_thickness: 0.012,
                mesh_size: 0.00125,
            },
            fluid: FluidParams::default(),
            solid: SolidParams::default(),
            newton: NewtonConfig::default(),
            output: OutputConfig::default(),
            valves: vec![annulus_valve(radius, 3e-3).expect("static valve geometry")],
        }
    }

    /// Closed valve in a clamped channel loaded by an outlet pressure.
    pub fn channel_benchmark() -> Self {
        let (length, height) = (0.04, 0.01);
        SimConfig {
            dt: 1e-3,
            final_time: 0.03,
            attachment_force: true,
            convergence_dts: Vec::new(),
            v_min: DEFAULT_V_MIN,
            geometry: Geometry::Channel {
                length,
                height,
                wall_thickness: 0.004,
                mesh_size: 0.001,
                inlet_pressure: 0.0,
                outlet_pressure: 50.0,
            },
            fluid: FluidParams::default(),
            solid: SolidParams { a_max: 0.0, ..SolidParams::default() },
            newton: NewtonConfig::default(),
            output: OutputConfig::default(),
            valves: vec![channel_valve(0.5 * length, height, 1.5e-3).expect("static valve geometry")],
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: SimConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// SHA-256 of the canonical TOML form, hex encoded.
    pub fn digest(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }

    /// Number of steps to reach `final_time`.
    pub fn steps(&self) -> usize {
        (self.final_time / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("dt", self.dt)?;
        if !(self.final_time >= 0.0 && self.final_time.is_finite()) {
            return Err(Error::Config(format!("final_time must be >= 0, got {}", self.final_time)));
        }
        let steps = self.final_time / self.dt;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
            return Err(Error::Config(format!(
                "final_time {} is not a multiple of dt {}",
                self.final_time, self.dt
            )));
        }
        for &dt in &self.convergence_dts {
            positive("convergence time step", dt)?;
        }
        positive("v_min", self.v_min)?;
        match self.geometry {
            Geometry::Annulus {
                radius,
                wall_thickness,
                mesh_size,
            } => {
                positive("radius", radius)?;
                positive("wall_thickness", wall_thickness)?;
                positive("mesh_size", mesh_size)?;
            }
            Geometry::Channel {
                length,
                height,
                wall_thickness,
                mesh_size,
                inlet_pressure,
                outlet_pressure,
            } => {
                positive("length", length)?;
                positive("height", height)?;
                positive("wall_thickness", wall_thickness)?;
                positive("mesh_size", mesh_size)?;
                if !(inlet_pressure.is_finite() && outlet_pressure.is_finite()) {
                    return Err(Error::Config("boundary pressures must be finite".into()));
                }
            }
        }
        if self.output.diagnostics_every == 0 {
            return Err(Error::Config("diagnostics_every must be at least 1".into()));
        }
        let mut names = std::collections::BTreeSet::new();
        for v in &self.valves {
            if !names.insert(v.name.as_str()) {
                return Err(Error::Config(format!("duplicate valve name `{}`", v.name)));
            }
            ValveSurface::new(v.clone()).map_err(|e| Error::Config(format!("valve `{}`: {e}", v.name)))?;
        }
        self.fsi_config().validate().map_err(|e| Error::Config(e.to_string()))
    }

    /// Solver settings for the coupled stepper.
    pub fn fsi_config(&self) -> FsiConfig {
        let (clamp_exterior, boundary_pressure) = match self.geometry {
            Geometry::Annulus { .. } => (false, Vec::new()),
            Geometry::Channel {
                inlet_pressure,
                outlet_pressure,
                ..
            } => (
                true,
                vec![(FacetTag::Inlet, inlet_pressure), (FacetTag::Outlet, outlet_pressure)],
            ),
        };
        FsiConfig {
            fluid: self.fluid,
            solid: self.solid,
            dt: self.dt,
            attachment_force: self.attachment_force,
            v_min: self.v_min,
            newton: NewtonOptions {
                abs_tol: self.newton.abs_tol,
                rel_tol: self.newton.rel_tol,
                max_iter: self.newton.max_iter,
            },
            clamp_exterior,
            boundary_pressure,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid_and_round_trip() {
        for config in [SimConfig::annulus_benchmark(), SimConfig::channel_benchmark()] {
            config.validate().unwrap();
            let text = config.to_toml().unwrap();
            let back = SimConfig::from_toml(&text).unwrap();
            assert_eq!(back, config);
            assert_eq!(back.digest().unwrap(), config.digest().unwrap());
            assert_eq!(back.to_toml().unwrap(), text);
        }
    }

    #[test]
    fn digest_tracks_content() {
        let a = SimConfig::annulus_benchmark();
        let b = SimConfig { dt: 2.5e-4, ..a.clone() };
        assert_ne!(a.digest().unwrap(), b.digest().unwrap());
        assert_eq!(a.digest().unwrap().len(), 64);
    }

    #[test]
    fn minimal_file_uses_defaults() {
        let text = r#"
            dt = 1e-3
            final_time = 0.01
            [geometry]
            scenario = "annulus"
            radius = 0.02
            wall_thickness = 0.01
            mesh_size = 0.002
        "#;
        let c = SimConfig::from_toml(text).unwrap();
        assert!(c.attachment_force);
        assert_eq!(c.steps(), 10);
        assert_eq!(c.fluid, FluidParams::default());
        assert!(c.valves.is_empty());
        assert_eq!(c.output.diagnostics_every, 1);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = SimConfig::annulus_benchmark();
        let cases = [
            SimConfig { dt: 0.0, ..base.clone() },
            SimConfig { dt: -1e-3, ..base.clone() },
            SimConfig { final_time: -1.0, ..base.clone() },
            SimConfig { final_time: 0.2501, ..base.clone() },
            SimConfig { v_min: 0.0, ..base.clone() },
            SimConfig { solid: SolidParams { mu: 0.0, ..base.solid }, ..base.clone() },
            SimConfig { valves: vec![base.valves[0].clone(), base.valves[0].clone()], ..base.clone() },
            SimConfig {
                output: OutputConfig { diagnostics_every: 0, ..base.output.clone() },
                ..base.clone()
            },
        ];
        for c in cases {
            assert!(c.validate().is_err(), "{c:?}");
        }
        assert!(SimConfig::from_toml("dt = 1e-3\nfinal_time = 0.0\nbogus = 1\n").is_err());
        assert!(SimConfig::from_toml("dt = ").is_err());
    }
}
