//! Benchmark mesh generators.
//!
//! The disc/annulus generator meshes the right half-plane (x >= 0) and mirrors
//! it, so the resulting meshes are exactly symmetric under x -> -x. Node
//! coordinates on the shared circle are produced by the same routine for both
//! subdomains, which makes the interface conforming bit for bit.

use std::collections::HashMap;
use std::f64::consts::PI;

use super::{edge_key, signed_area, Facet, FacetTag, Mesh, MeshPair, Point, Region};
use crate::error::{Error, Result};

/// Point on a circle of radius `r`, parametrized over the right half:
/// angle `-pi/2 + pi * j / m`. Axis and equator points are exact.
fn ring_point(r: f64, j: usize, m: usize) -> Point {
    if j == 0 {
        [0.0, -r]
    } else if j == m {
        [0.0, r]
    } else if 2 * j == m {
        [r, 0.0]
    } else {
        let theta = -0.5 * PI + PI * j as f64 / m as f64;
        [r * theta.cos(), r * theta.sin()]
    }
}

/// Half-plane mesh under construction; nodes with x == 0 lie on the mirror axis.
#[derive(Default)]
struct HalfMesh {
    nodes: Vec<Point>,
    cells: Vec<[usize; 3]>,
}

impl HalfMesh {
    fn add_node(&mut self, p: Point) -> usize {
        self.nodes.push(p);
        self.nodes.len() - 1
    }

    fn add_cell(&mut self, mut c: [usize; 3]) {
        let a = signed_area(&[self.nodes[c[0]], self.nodes[c[1]], self.nodes[c[2]]]);
        if a < 0.0 {
            c.swap(1, 2);
        }
        self.cells.push(c);
    }

    /// Lawson edge flips towards a Delaunay triangulation. Edges on the
    /// mirror axis are boundary edges of the half mesh and are never touched.
    fn delaunay_flips(&mut self) {
        for _ in 0..100 {
            let mut edges: HashMap<[usize; 2], Vec<usize>> = HashMap::new();
            for (ci, c) in self.cells.iter().enumerate() {
                for k in 0..3 {
                    edges.entry(edge_key(c[k], c[(k + 1) % 3])).or_default().push(ci);
                }
            }
            let mut keys: Vec<_> = edges.keys().copied().collect();
            keys.sort_unstable();
            let mut touched = vec![false; self.cells.len()];
            let mut flips = 0;
            for e in keys {
                let tris = &edges[&e];
                if tris.len() != 2 || touched[tris[0]] || touched[tris[1]] {
                    continue;
                }
                let (t0, t1) = (tris[0], tris[1]);
                let opp = |t: usize| -> usize {
                    *self.cells[t].iter().find(|&&v| v != e[0] && v != e[1]).unwrap()
                };
                let (a, b) = (e[0], e[1]);
                let (c, d) = (opp(t0), opp(t1));
                let [pa, pb, pc, pd] = [a, b, c, d].map(|i| self.nodes[i]);
                if opposite_angle_sum(pa, pb, pc, pd) <= PI + 1e-10 {
                    continue;
                }
                // the flipped pair must stay valid
                let n1 = [c, d, a];
                let n2 = [d, c, b];
                let area = |t: &[usize; 3]| signed_area(&[self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]]);
                // a and b must lie strictly on opposite sides of the new edge (c, d)
                let (s1, s2) = (area(&n1), area(&[c, d, b]));
                if s1 * s2 >= 0.0 || s1.abs() < 1e-14 || s2.abs() < 1e-14 {
                    continue;
                }
                self.cells[t0] = n1;
                self.cells[t1] = n2;
                for t in [t0, t1] {
                    let cell = self.cells[t];
                    if signed_area(&[self.nodes[cell[0]], self.nodes[cell[1]], self.nodes[cell[2]]]) < 0.0 {
                        self.cells[t].swap(1, 2);
                    }
                }
                touched[t0] = true;
                touched[t1] = true;
                flips += 1;
            }
            if flips == 0 {
                break;
            }
        }
    }

    /// Mirrors the half mesh across x = 0.
    fn mirror(self, region: Region, tag_of: impl Fn(Point, Point) -> FacetTag) -> Mesh {
        let mut nodes = self.nodes.clone();
        let mut image = vec![0usize; self.nodes.len()];
        for (i, p) in self.nodes.iter().enumerate() {
            if p[0] == 0.0 {
                image[i] = i;
            } else {
                image[i] = nodes.len();
                nodes.push([-p[0], p[1]]);
            }
        }
        let mut cells = self.cells.clone();
        for c in &self.cells {
            // reflection flips orientation
            cells.push([image[c[0]], image[c[2]], image[c[1]]]);
        }
        finish(region, nodes, cells, tag_of)
    }
}

fn angle_at(p: Point, a: Point, b: Point) -> f64 {
    let u = [a[0] - p[0], a[1] - p[1]];
    let v = [b[0] - p[0], b[1] - p[1]];
    let cross = u[0] * v[1] - u[1] * v[0];
    let dot = u[0] * v[0] + u[1] * v[1];
    cross.abs().atan2(dot)
}

/// Sum of the angles opposite to edge (a, b) in triangles (a, b, c) and (a, b, d).
fn opposite_angle_sum(a: Point, b: Point, c: Point, d: Point) -> f64 {
    angle_at(c, a, b) + angle_at(d, a, b)
}

fn finish(region: Region, nodes: Vec<Point>, cells: Vec<[usize; 3]>, tag_of: impl Fn(Point, Point) -> FacetTag) -> Mesh {
    let mut mesh = Mesh::new(region, nodes, cells, Vec::new());
    let facets = mesh
        .boundary_edges()
        .into_iter()
        .map(|e| Facet {
            nodes: e,
            tag: tag_of(mesh.nodes[e[0]], mesh.nodes[e[1]]),
        })
        .collect();
    mesh.facets = facets;
    mesh
}

/// Number of half-circle intervals for a ring of radius `r`; always even so
/// the ring carries a node on the equator (y = 0).
fn half_intervals(r: f64, h: f64) -> usize {
    2 * ((PI * r / (2.0 * h)).round() as usize).max(1)
}

/// Disc (fluid) inside an annulus (solid), conforming on the shared circle.
///
/// Tags: `interface` on the shared circle in both meshes, `exterior` on the
/// outer solid circle. Both meshes are mirror-symmetric about x = 0.
pub fn generate_annulus_benchmark(fluid_radius: f64, wall_thickness: f64, target_h: f64) -> Result<MeshPair> {
    if !(fluid_radius > 0.0) || !(wall_thickness > 0.0) || !(target_h > 0.0) {
        return Err(Error::Generation(format!(
            "dimensions must be positive (radius {fluid_radius}, wall {wall_thickness}, h {target_h})"
        )));
    }
    if target_h >= fluid_radius / 5.0 {
        return Err(Error::Generation(format!(
            "target_h {target_h} too coarse: must be below fluid_radius / 5 = {}",
            fluid_radius / 5.0
        )));
    }
    let radius = fluid_radius;
    let n_rings = ((radius / target_h).round() as usize).max(2);
    let m_outer = half_intervals(radius, target_h);

    // fluid half disc
    let mut half = HalfMesh::default();
    let center = half.add_node([0.0, 0.0]);
    let mut prev: Vec<usize> = vec![center];
    for k in 1..=n_rings {
        let r = if k == n_rings { radius } else { radius * k as f64 / n_rings as f64 };
        let m = if k == n_rings { m_outer } else { half_intervals(r, target_h) };
        let ring: Vec<usize> = (0..=m).map(|j| half.add_node(ring_point(r, j, m))).collect();
        if prev.len() == 1 {
            for j in 0..m {
                half.add_cell([prev[0], ring[j], ring[j + 1]]);
            }
        } else {
            let ma = prev.len() - 1;
            let mb = m;
            let (mut i, mut j) = (0usize, 0usize);
            while i < ma || j < mb {
                // advance along the ring whose next node comes first in angle
                let advance_outer = i == ma || (j < mb && (j + 1) * ma <= (i + 1) * mb);
                if advance_outer {
                    half.add_cell([prev[i], ring[j], ring[j + 1]]);
                    j += 1;
                } else {
                    half.add_cell([prev[i], ring[j], prev[i + 1]]);
                    i += 1;
                }
            }
        }
        prev = ring;
    }
    half.delaunay_flips();
    let on_circle = |p: Point, r: f64| ((p[0] * p[0] + p[1] * p[1]).sqrt() - r).abs() <= 1e-9 * r;
    let fluid = half.mirror(Region::Fluid, |a, b| {
        if on_circle(a, radius) && on_circle(b, radius) {
            FacetTag::Interface
        } else {
            FacetTag::Exterior
        }
    });

    // solid half annulus, structured in (r, theta)
    let n_layers = ((wall_thickness / target_h).ceil() as usize).max(2);
    let outer = radius + wall_thickness;
    let mut half = HalfMesh::default();
    let mut rings: Vec<Vec<usize>> = Vec::with_capacity(n_layers + 1);
    for i in 0..=n_layers {
        let r = if i == 0 {
            radius
        } else if i == n_layers {
            outer
        } else {
            radius + wall_thickness * i as f64 / n_layers as f64
        };
        rings.push((0..=m_outer).map(|j| half.add_node(ring_point(r, j, m_outer))).collect());
    }
    for i in 0..n_layers {
        let (a, b) = (&rings[i], &rings[i + 1]);
        for j in 0..m_outer {
            half.add_cell([a[j], b[j], b[j + 1]]);
            half.add_cell([a[j], b[j + 1], a[j + 1]]);
        }
    }
    let solid = half.mirror(Region::Solid, |a, b| {
        if on_circle(a, radius) && on_circle(b, radius) {
            FacetTag::Interface
        } else {
            FacetTag::Exterior
        }
    });

    MeshPair::new(fluid, solid)
}

/// Unit circumferential fiber direction per solid cell, evaluated at the
/// cell centroid: the tangent to the concentric circle through it.
pub fn circumferential_fibers(mesh: &Mesh) -> Vec<[f64; 2]> {
    (0..mesh.cell_count())
        .map(|c| {
            let p = mesh.cell_points(c);
            let x = (p[0][0] + p[1][0] + p[2][0]) / 3.0;
            let y = (p[0][1] + p[1][1] + p[2][1]) / 3.0;
            let r = x.hypot(y);
            [-y / r, x / r]
        })
        .collect()
}

fn grid_cells(cells: &mut Vec<[usize; 3]>, id: impl Fn(usize, usize) -> usize, nx: usize, ny: usize) {
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                cells.push([a, b, c]);
                cells.push([a, c, d]);
            } else {
                cells.push([a, b, d]);
                cells.push([b, c, d]);
            }
        }
    }
}

/// Straight channel `[0, length] x [-height/2, height/2]` with solid wall strips
/// of thickness `wall_thickness` above and below.
///
/// Fluid tags: `inlet` (x = 0), `outlet` (x = length), `interface` (walls).
/// Solid tags: `interface` on the shared edges, `exterior` elsewhere.
pub fn generate_channel_benchmark(length: f64, height: f64, target_h: f64, wall_thickness: f64) -> Result<MeshPair> {
    if !(length > 0.0) || !(height > 0.0) || !(target_h > 0.0) || !(wall_thickness > 0.0) {
        return Err(Error::Generation(format!(
            "dimensions must be positive (length {length}, height {height}, h {target_h}, wall {wall_thickness})"
        )));
    }
    if target_h >= height / 4.0 {
        return Err(Error::Generation(format!(
            "target_h {target_h} too coarse: must be below height / 4 = {}",
            height / 4.0
        )));
    }
    let nx = (length / target_h).ceil() as usize;
    let ny = (height / target_h).ceil() as usize;
    let nw = ((wall_thickness / target_h).ceil() as usize).max(2);
    let half = 0.5 * height;
    let xs: Vec<f64> = (0..=nx)
        .map(|i| if i == nx { length } else { length * i as f64 / nx as f64 })
        .collect();
    let coord = |from: f64, to: f64, k: usize, n: usize| -> f64 {
        if k == 0 {
            from
        } else if k == n {
            to
        } else {
            from + (to - from) * k as f64 / n as f64
        }
    };

    let mut nodes = Vec::new();
    for j in 0..=ny {
        for &x in &xs {
            nodes.push([x, coord(-half, half, j, ny)]);
        }
    }
    let mut cells = Vec::new();
    grid_cells(&mut cells, |i, j| j * (nx + 1) + i, nx, ny);
    let fluid = finish(Region::Fluid, nodes, cells, |a, b| {
        if a[0] == 0.0 && b[0] == 0.0 {
            FacetTag::Inlet
        } else if a[0] == length && b[0] == length {
            FacetTag::Outlet
        } else {
            FacetTag::Interface
        }
    });

    // lower strip then upper strip, both from the interface outward
    let mut nodes = Vec::new();
    let mut cells = Vec::new();
    let per_strip = (nw + 1) * (nx + 1);
    for k in 0..=nw {
        for &x in &xs {
            nodes.push([x, coord(-half - wall_thickness, -half, k, nw)]);
        }
    }
    for k in 0..=nw {
        for &x in &xs {
            nodes.push([x, coord(half, half + wall_thickness, k, nw)]);
        }
    }
    grid_cells(&mut cells, |i, k| k * (nx + 1) + i, nx, nw);
    grid_cells(&mut cells, |i, k| per_strip + k * (nx + 1) + i, nx, nw);
    let solid = finish(Region::Solid, nodes, cells, |a, b| {
        if (a[1] == half && b[1] == half) || (a[1] == -half && b[1] == -half) {
            FacetTag::Interface
        } else {
            FacetTag::Exterior
        }
    });
    MeshPair::new(fluid, solid)
}

/// Structured `n x n` triangulation of the unit square, all edges tagged `exterior`.
pub fn unit_square_mesh(n: usize) -> Mesh {
    let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            nodes.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    let mut cells = Vec::with_capacity(2 * n * n);
    grid_cells(&mut cells, |i, j| j * (n + 1) + i, n, n);
    finish(Region::Fluid, nodes, cells, |_, _| FacetTag::Exterior)
}
