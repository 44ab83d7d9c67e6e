//! Benchmark driver: builds a model from a [`SimConfig`], runs it, records
//! diagnostics, and runs the time step and pressure sweeps.

pub mod config;
pub mod diagnostics;
pub mod output;

use std::time::SystemTime;

use crate::coupled::{FsiModel, FsiState, StepTimings};
use crate::error::{Error, Result};
use crate::fem::NodalField;
use crate::mesh::{circumferential_fibers, generate_annulus_benchmark, generate_channel_benchmark, MeshPair, Point};
use crate::riis::ValveSurface;

pub use config::{Geometry, SimConfig};
pub use diagnostics::{DiagnosticsRow, ValveDiagnostics};

/// Fields of one saved time level.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub fluid_displacement: NodalField,
    pub u: NodalField,
    pub p: NodalField,
    pub d: NodalField,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingRow {
    pub step: usize,
    pub newton_iterations: usize,
    pub timings: StepTimings,
}

/// Everything recorded during a run. A step failure ends the run early and
/// is kept in `failure`; rows up to the last completed step stay valid.
#[derive(Debug)]
pub struct Trajectory {
    pub digest: String,
    pub meshes: MeshPair,
    pub initial_com: Point,
    /// Downstream chamber area of every valve at `t = 0` [m²].
    pub initial_areas: Vec<f64>,
    pub rows: Vec<DiagnosticsRow>,
    pub timings: Vec<TimingRow>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: FsiState,
    pub failure: Option<Error>,
    pub started: SystemTime,
    pub finished: SystemTime,
    pub threads: usize,
}

impl Trajectory {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }

    pub fn last_row(&self) -> Option<&DiagnosticsRow> {
        self.rows.last()
    }

    /// Vertical center-of-mass displacement at the last recorded row [m].
    pub fn com_drift(&self) -> Option<f64> {
        self.rows.last().map(|r| r.com[1] - self.initial_com[1])
    }

    /// Summed wall time per category over all steps.
    pub fn total_timings(&self) -> StepTimings {
        let mut total = StepTimings::default();
        for row in &self.timings {
            total += row.timings;
        }
        total
    }
}

/// Meshes, fibers and initial state for `config`.
pub fn build_model(config: &SimConfig) -> Result<(FsiModel, FsiState)> {
    config.validate()?;
    let (pair, fibers) = match config.geometry {
        Geometry::Annulus {
            radius,
            wall_thickness,
            mesh_size,
        } => {
            let pair = generate_annulus_benchmark(radius, wall_thickness, mesh_size)?;
            let fibers = circumferential_fibers(&pair.solid);
            (pair, fibers)
        }
        Geometry::Channel {
            length,
            height,
            wall_thickness,
            mesh_size,
            ..
        } => {
            let pair = generate_channel_benchmark(length, height, mesh_size, wall_thickness)?;
            let fibers = vec![[1.0, 0.0]; pair.solid.cell_count()];
            (pair, fibers)
        }
    };
    let model = FsiModel::new(pair, fibers, config.fsi_config())?;
    let valves = config
        .valves
        .iter()
        .map(|v| ValveSurface::new(v.clone()))
        .collect::<Result<Vec<_>>>()?;
    let state = model.initial_state(valves)?;
    Ok((model, state))
}

fn snapshot(model: &FsiModel, state: &FsiState) -> Result<Snapshot> {
    Ok(Snapshot {
        step: state.step,
        t: state.t,
        fluid_displacement: diagnostics::fluid_displacement(model, state)?,
        u: state.u.clone(),
        p: state.p.clone(),
        d: state.d.clone(),
    })
}

/// Runs `config` to its final time. Setup errors are returned directly;
/// step errors end the run and are stored in [`Trajectory::failure`].
pub fn run_simulation(config: &SimConfig) -> Result<Trajectory> {
    let started = SystemTime::now();
    let digest = config.digest()?;
    let (mut model, mut state) = build_model(config)?;
    let initial_com = diagnostics::system_center_of_mass(&model, &state)?;
    let initial_areas = diagnostics::initial_areas(&model, &state)?;
    let snapshot_every = config.output.snapshot_every;
    let every = config.output.diagnostics_every;
    let steps = config.steps();
    let mut snapshots = Vec::new();
    if snapshot_every > 0 {
        snapshots.push(snapshot(&model, &state)?);
    }
    log::info!(
        "{} unknowns, {steps} steps of {:e} s",
        model.unknowns(),
        config.dt
    );

    let mut rows: Vec<DiagnosticsRow> = Vec::new();
    let mut timings = Vec::with_capacity(steps);
    let mut failure = None;
    for n in 1..=steps {
        let (next, report) = match model.step(&state) {
            Ok(r) => r,
            Err(e) => {
                log::error!("step {n} failed: {e}");
                failure = Some(e);
                break;
            }
        };
        timings.push(TimingRow {
            step: next.step,
            newton_iterations: report.newton_iterations,
            timings: report.timings,
        });
        if n % every == 0 || n == steps {
            let previous = rows.last().map_or((0.0, initial_com), |r| (r.t, r.com));
            match diagnostics::diagnostics_row(&model, &next, &report, previous) {
                Ok(row) => rows.push(row),
                Err(e) => {
                    failure = Some(e);
                    state = next;
                    break;
                }
            }
        }
        if snapshot_every > 0 && n % snapshot_every == 0 {
            snapshots.push(snapshot(&model, &next)?);
        }
        if n % 100 == 0 {
            log::info!("step {n}/{steps}, t = {:.4} s, {} Newton iterations", next.t, report.newton_iterations);
        }
        state = next;
    }

    Ok(Trajectory {
        digest,
        meshes: model.meshes().clone(),
        initial_com,
        initial_areas,
        rows,
        timings,
        snapshots,
        final_state: state,
        failure,
        started,
        finished: SystemTime::now(),
        threads: rayon::current_num_threads(),
    })
}

/// Least-squares slope and intercept of `y` against `x`, with `R²`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Parameter("linear fit needs at least two paired samples".into()));
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Parameter("linear fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok((slope, my - slope * mx, r2))
}

/// Center-of-mass drift against time step.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub dts: Vec<f64>,
    /// `|z̄(T) − z̄(0)|` per time step [m].
    pub drifts: Vec<f64>,
    /// Slope of `log drift` against `log Δt`.
    pub order: f64,
}

/// Repeats `config` at every time step in `dts` with the attachment load on.
/// With `write` set, each run goes to its own subdirectory of the configured
/// output directory and `convergence.csv` collects the drifts, including
/// the runs completed before a failure.
pub fn convergence_study(config: &SimConfig, dts: &[f64], write: bool) -> Result<ConvergenceStudy> {
    let mut distinct: Vec<f64> = dts.to_vec();
    distinct.sort_by(|a, b| b.total_cmp(a));
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Config("convergence study needs at least three distinct time steps".into()));
    }
    if !config.attachment_force {
        return Err(Error::Config("convergence study requires the attachment load".into()));
    }
    let base = config.output.directory.clone();
    let mut done_dts = Vec::new();
    let mut drifts = Vec::new();
    let mut result = Ok(());
    for &dt in &distinct {
        let mut cfg = config.clone();
        cfg.dt = dt;
        cfg.output.directory = base.join(format!("dt_{dt:e}"));
        let traj = match run_simulation(&cfg) {
            Ok(t) => t,
            Err(e) => {
                result = Err(e);
                break;
            }
        };
        if write {
            if let Err(e) = output::write_outputs(&traj, &cfg) {
                result = Err(e);
                break;
            }
        }
        if let Some(e) = traj.failure {
            result = Err(e);
            break;
        }
        let drift = traj.com_drift().map(f64::abs).unwrap_or(0.0);
        log::info!("dt = {dt:e}: drift {drift:e} m");
        done_dts.push(dt);
        drifts.push(drift);
    }
    if write {
        output::write_convergence_csv(&base.join("convergence.csv"), &done_dts, &drifts)?;
    }
    result?;
    let logs = |v: &[f64]| v.iter().map(|a| a.ln()).collect::<Vec<_>>();
    let order = if drifts.iter().all(|&d| d > 0.0) {
        linear_fit(&logs(&done_dts), &logs(&drifts))?.0
    } else {
        f64::NAN
    };
    Ok(ConvergenceStudy {
        dts: done_dts,
        drifts,
        order,
    })
}

/// Attachment density against pressure jump for a closed channel valve.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearityStudy {
    pub imposed: Vec<f64>,
    /// Pressure jump across the valve at the final time [Pa].
    pub pressure_jumps: Vec<f64>,
    /// `‖F/V‖` at the final time [N/m³].
    pub densities: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Runs a channel `config` once per imposed outlet pressure and fits
/// `‖F/V‖` linearly against the measured pressure jump of the first valve.
pub fn channel_linearity(config: &SimConfig, outlet_pressures: &[f64]) -> Result<LinearityStudy> {
    if !matches!(config.geometry, Geometry::Channel { .. }) || config.valves.is_empty() {
        return Err(Error::Config("pressure sweep needs a channel with a valve".into()));
    }
    let mut pressure_jumps = Vec::new();
    let mut densities = Vec::new();
    for &p in outlet_pressures {
        let mut cfg = config.clone();
        if let Geometry::Channel {
            ref mut outlet_pressure,
            ..
        } = cfg.geometry
        {
            *outlet_pressure = p;
        }
        let traj = run_simulation(&cfg)?;
        if let Some(e) = traj.failure {
            return Err(e);
        }
        let row = traj
            .last_row()
            .ok_or_else(|| Error::Config("pressure sweep needs a positive final time".into()))?;
        pressure_jumps.push(row.valves[0].pressure_jump);
        densities.push(row.valves[0].density);
    }
    let (slope, intercept, r_squared) = linear_fit(&pressure_jumps, &densities)?;
    Ok(LinearityStudy {
        imposed: outlet_pressures.to_vec(),
        pressure_jumps,
        densities,
        slope,
        intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_annulus(final_time: f64) -> SimConfig {
        let mut c = SimConfig::annulus_benchmark();
        c.geometry = Geometry::Annulus {
            radius: 0.025,
            wall_thickness: 0.012,
            mesh_size: 0.004,
        };
        c.dt = 1e-3;
        c.final_time = final_time;
        c
    }

    #[test]
    fn zero_final_time_gives_only_the_initial_snapshot() {
        let mut c = small_annulus(0.0);
        c.output.snapshot_every = 1;
        let t = run_simulation(&c).unwrap();
        assert!(t.rows.is_empty() && t.timings.is_empty());
        assert_eq!(t.snapshots.len(), 1);
        assert!(t.completed());
        assert_eq!(t.final_state.step, 0);
    }

    #[test]
    fn rows_follow_the_cadence_and_include_the_last_step() {
        let mut c = small_annulus(0.005);
        c.output.diagnostics_every = 2;
        c.output.snapshot_every = 2;
        let t = run_simulation(&c).unwrap();
        let steps: Vec<usize> = t.rows.iter().map(|r| r.step).collect();
        assert_eq!(steps, vec![2, 4, 5]);
        assert_eq!(t.timings.len(), 5);
        let snaps: Vec<usize> = t.snapshots.iter().map(|s| s.step).collect();
        assert_eq!(snaps, vec![0, 2, 4]);
    }

    #[test]
    fn snapshots_do_not_change_diagnostics() {
        let mut c = small_annulus(0.004);
        let plain = run_simulation(&c).unwrap();
        c.output.snapshot_every = 1;
        let with = run_simulation(&c).unwrap();
        assert_eq!(plain.rows, with.rows);
    }

    #[test]
    fn step_failure_is_recorded_with_partial_rows() {
        let mut c = small_annulus(0.003);
        c.v_min = 1.0;
        let t = run_simulation(&c).unwrap();
        assert!(matches!(t.failure, Some(Error::AssumptionViolation { .. })));
        assert!(t.rows.is_empty());
    }

    #[test]
    fn convergence_study_rejects_bad_requests() {
        let c = small_annulus(0.002);
        assert!(convergence_study(&c, &[1e-3, 1e-3, 5e-4], false).is_err());
        let mut off = c.clone();
        off.attachment_force = false;
        assert!(convergence_study(&off, &[1e-3, 5e-4, 2.5e-4], false).is_err());
    }

    #[test]
    fn linear_fit_recovers_a_line() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let (s, i, r2) = linear_fit(&x, &y).unwrap();
        assert!((s - 3.0).abs() < 1e-14 && (i + 1.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }
}
