//! Files written for a run: `diagnostics.csv`, `timings.csv`,
//! `manifest.json` and legacy ASCII VTK snapshots under `snapshots/`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::json;

use super::config::SimConfig;
use super::diagnostics::{DiagnosticsRow, BASE_COLUMNS, VALVE_COLUMNS};
use super::{Snapshot, TimingRow, Trajectory};
use crate::error::{Error, Result};
use crate::fem::NodalField;
use crate::mesh::{current_coordinates, Mesh};

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn diagnostics_columns(valve_names: &[&str]) -> Vec<String> {
    let mut cols: Vec<String> = BASE_COLUMNS.iter().map(|c| c.to_string()).collect();
    for name in valve_names {
        cols.extend(VALVE_COLUMNS.iter().map(|c| format!("{name}_{c}")));
    }
    cols
}

fn csv_text(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Shape(format!("csv: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Shape(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Header line of `diagnostics.csv`.
pub fn diagnostics_header(valve_names: &[&str]) -> String {
    diagnostics_columns(valve_names).join(",")
}

pub fn format_diagnostics(valve_names: &[&str], rows: &[DiagnosticsRow]) -> Result<String> {
    let lines = rows.iter().map(|r| {
        let mut v = vec![r.step.to_string()];
        v.extend([r.t, r.com[0], r.com[1], r.com_velocity, r.max_velocity].map(|x| format!("{x:e}")));
        for d in &r.valves {
            v.extend(
                [
                    d.pressure_jump,
                    d.force[0],
                    d.force[1],
                    d.volume,
                    d.density,
                    d.residual_torque,
                    d.downstream_area,
                ]
                .map(|x| format!("{x:e}")),
            );
        }
        v
    });
    csv_text(&diagnostics_columns(valve_names), lines)
}

pub const TIMING_COLUMNS: [&str; 8] = [
    "step",
    "newton_iterations",
    "total",
    "linear_solve",
    "fluid_assembly",
    "solid_assembly",
    "compute_g",
    "mesh_motion",
];

/// Wall times in seconds.
pub fn format_timings(rows: &[TimingRow]) -> Result<String> {
    let lines = rows.iter().map(|r| {
        let t = &r.timings;
        let mut v = vec![r.step.to_string(), r.newton_iterations.to_string()];
        v.extend(
            [t.total, t.linear_solve, t.fluid_assembly, t.solid_assembly, t.compute_g, t.mesh_motion]
                .map(|d| format!("{:e}", d.as_secs_f64())),
        );
        v
    });
    let header: Vec<String> = TIMING_COLUMNS.iter().map(|c| c.to_string()).collect();
    csv_text(&header, lines)
}

pub fn write_convergence_csv(path: &Path, dts: &[f64], drifts: &[f64]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let header = ["dt".to_string(), "com_drift".to_string()];
    let lines = dts.iter().zip(drifts).map(|(dt, d)| vec![format!("{dt:e}"), format!("{d:e}")]);
    write(path, &csv_text(&header, lines)?)
}

/// Legacy ASCII VTK unstructured grid on the deformed mesh. Point fields
/// are scalars (one component) or 2D vectors written with a zero third
/// component.
pub fn format_vtk(mesh: &Mesh, displacement: &NodalField, fields: &[(&str, &NodalField)]) -> Result<String> {
    let coords = current_coordinates(mesh, displacement)?;
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{} mesh", mesh.region());
    let _ = writeln!(s, "ASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", coords.len());
    for p in &coords {
        let _ = writeln!(s, "{:e} {:e} 0", p[0], p[1]);
    }
    let n = mesh.cell_count();
    let _ = writeln!(s, "CELLS {n} {}", 4 * n);
    for c in mesh.cells() {
        let _ = writeln!(s, "3 {} {} {}", c[0], c[1], c[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {n}");
    for _ in 0..n {
        let _ = writeln!(s, "5");
    }
    let _ = writeln!(s, "POINT_DATA {}", coords.len());
    for (name, field) in fields {
        if field.node_count() != coords.len() {
            return Err(Error::Shape(format!("field `{name}` has {} nodes", field.node_count())));
        }
        match field.components() {
            1 => {
                let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
                for i in 0..field.node_count() {
                    let _ = writeln!(s, "{:e}", field.scalar(i));
                }
            }
            2 => {
                let _ = writeln!(s, "VECTORS {name} double");
                for i in 0..field.node_count() {
                    let v = field.vector(i);
                    let _ = writeln!(s, "{:e} {:e} 0", v[0], v[1]);
                }
            }
            c => return Err(Error::Shape(format!("field `{name}` has {c} components"))),
        }
    }
    Ok(s)
}

/// Writes the fluid and solid files of one snapshot; returns their paths.
pub fn write_snapshot(dir: &Path, fluid: &Mesh, solid: &Mesh, snap: &Snapshot) -> Result<[PathBuf; 2]> {
    let fluid_path = dir.join(format!("fluid_{:06}.vtk", snap.step));
    let solid_path = dir.join(format!("solid_{:06}.vtk", snap.step));
    let f = format_vtk(
        fluid,
        &snap.fluid_displacement,
        &[("u", &snap.u), ("p", &snap.p), ("d", &snap.fluid_displacement)],
    )?;
    write(&fluid_path, &f)?;
    write(&solid_path, &format_vtk(solid, &snap.d, &[("d", &snap.d)])?)?;
    Ok([fluid_path, solid_path])
}

fn unix_seconds(t: SystemTime) -> f64 {
    t.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub fn manifest(traj: &Trajectory, config: &SimConfig) -> serde_json::Value {
    let (status, category, message) = match &traj.failure {
        None => ("completed", None, None),
        Some(e) => ("failed", Some(e.category()), Some(e.to_string())),
    };
    json!({
        "config_digest": traj.digest,
        "started_unix": unix_seconds(traj.started),
        "finished_unix": unix_seconds(traj.finished),
        "status": status,
        "failure_category": category,
        "failure_message": message,
        "steps_requested": config.steps(),
        "steps_completed": traj.timings.len(),
        "dt": config.dt,
        "threads": traj.threads,
        "fluid_cells": traj.meshes.fluid.cell_count(),
        "solid_cells": traj.meshes.solid.cell_count(),
        "initial_com": traj.initial_com,
        "valves": config.valves.iter().map(|v| v.name.as_str()).collect::<Vec<_>>(),
    })
}

/// Writes every output file of `traj` into the configured directory.
pub fn write_outputs(traj: &Trajectory, config: &SimConfig) -> Result<()> {
    let dir = &config.output.directory;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let names: Vec<&str> = config.valves.iter().map(|v| v.name.as_str()).collect();
    write(&dir.join("diagnostics.csv"), &format_diagnostics(&names, &traj.rows)?)?;
    write(&dir.join("timings.csv"), &format_timings(&traj.timings)?)?;
    write(&dir.join("config.toml"), &config.to_toml()?)?;
    if !traj.snapshots.is_empty() {
        let snap_dir = dir.join("snapshots");
        std::fs::create_dir_all(&snap_dir).map_err(|e| Error::io(&snap_dir, e))?;
        for snap in &traj.snapshots {
            write_snapshot(&snap_dir, &traj.meshes.fluid, &traj.meshes.solid, snap)?;
        }
    }
    let text = serde_json::to_string_pretty(&manifest(traj, config)).map_err(|e| Error::Config(e.to_string()))?;
    write(&dir.join("manifest.json"), &text)
}
