//! Triangle meshes for the fluid and solid subdomains.
//!
//! Both subdomains are meshed separately and share matched nodes along the
//! fluid-solid interface. Meshes are immutable once generated; all motion is
//! expressed through displacement fields on top of the reference coordinates.

mod generate;
mod io;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::NodalField;

pub use generate::{
    circumferential_fibers, generate_annulus_benchmark, generate_channel_benchmark,
    unit_square_mesh,
};
pub use io::{read_mesh, write_mesh};

/// A point in the plane [m].
pub type Point = [f64; 2];

/// Tolerance used to decide whether two reference nodes coincide [m].
pub const CONFORMITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Fluid,
    Solid,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Fluid => "fluid",
            Region::Solid => "solid",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fluid" => Ok(Region::Fluid),
            "solid" => Ok(Region::Solid),
            other => Err(Error::Parameter(format!("unknown region `{other}`"))),
        }
    }
}

/// Label carried by every boundary facet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FacetTag {
    Interface,
    Exterior,
    Inlet,
    Outlet,
}

impl FacetTag {
    pub fn as_str(self) -> &'static str {
        match self {
            FacetTag::Interface => "interface",
            FacetTag::Exterior => "exterior",
            FacetTag::Inlet => "inlet",
            FacetTag::Outlet => "outlet",
        }
    }
}

impl fmt::Display for FacetTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FacetTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interface" => Ok(FacetTag::Interface),
            "exterior" => Ok(FacetTag::Exterior),
            "inlet" => Ok(FacetTag::Inlet),
            "outlet" => Ok(FacetTag::Outlet),
            other => Err(Error::Parameter(format!("unknown facet tag `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Facet {
    pub nodes: [usize; 2],
    pub tag: FacetTag,
}

/// Simplicial (triangle) mesh of one subdomain in its reference configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    region: Region,
    nodes: Vec<Point>,
    cells: Vec<[usize; 3]>,
    facets: Vec<Facet>,
}

impl Mesh {
    /// Builds a mesh without checking it; see [`validate`] for the checks.
    pub fn new(region: Region, nodes: Vec<Point>, cells: Vec<[usize; 3]>, facets: Vec<Facet>) -> Self {
        Mesh {
            region,
            nodes,
            cells,
            facets,
        }
    }

    /// Spatial dimension. Only planar meshes are supported.
    pub fn dim(&self) -> usize {
        2
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_points(&self, cell: usize) -> [Point; 3] {
        let c = self.cells[cell];
        [self.nodes[c[0]], self.nodes[c[1]], self.nodes[c[2]]]
    }

    /// Signed reference area of a cell (positive for counter-clockwise ordering).
    pub fn signed_area(&self, cell: usize) -> f64 {
        signed_area(&self.cell_points(cell))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.cell_count()).map(|c| self.signed_area(c)).sum()
    }

    /// Sorted, deduplicated list of nodes on facets with the given tag.
    pub fn nodes_with_tag(&self, tag: FacetTag) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .facets
            .iter()
            .filter(|f| f.tag == tag)
            .flat_map(|f| f.nodes)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn facets_with_tag(&self, tag: FacetTag) -> impl Iterator<Item = &Facet> {
        self.facets.iter().filter(move |f| f.tag == tag)
    }

    /// Edges belonging to exactly one cell, as sorted node pairs.
    pub fn boundary_edges(&self) -> Vec<[usize; 2]> {
        let mut count: HashMap<[usize; 2], usize> = HashMap::new();
        for c in &self.cells {
            for k in 0..3 {
                *count.entry(edge_key(c[k], c[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        let mut out: Vec<[usize; 2]> = count
            .into_iter()
            .filter_map(|(e, n)| (n == 1).then_some(e))
            .collect();
        out.sort_unstable();
        out
    }

    /// Longest edge of the cell in the given coordinates.
    pub fn cell_diameter_in(coords: &[Point], cell: [usize; 3]) -> f64 {
        let mut h: f64 = 0.0;
        for k in 0..3 {
            let a = coords[cell[k]];
            let b = coords[cell[(k + 1) % 3]];
            h = h.max(dist(a, b));
        }
        h
    }
}

pub(crate) fn edge_key(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

pub fn signed_area(p: &[Point; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}

pub fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Matched (fluid node, solid node) pairs on the shared interface.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InterfaceMap {
    pairs: Vec<(usize, usize)>,
}

impl InterfaceMap {
    pub fn from_pairs(pairs: Vec<(usize, usize)>) -> Self {
        InterfaceMap { pairs }
    }

    /// Pairs every interface-tagged fluid node with the coinciding solid node.
    pub fn match_nodes(fluid: &Mesh, solid: &Mesh) -> Result<Self> {
        let f_nodes = fluid.nodes_with_tag(FacetTag::Interface);
        let s_nodes = solid.nodes_with_tag(FacetTag::Interface);
        if f_nodes.len() != s_nodes.len() {
            return Err(Error::Validation(format!(
                "interface node counts differ: fluid {} vs solid {}",
                f_nodes.len(),
                s_nodes.len()
            )));
        }
        let mut used = vec![false; s_nodes.len()];
        let mut pairs = Vec::with_capacity(f_nodes.len());
        for &f in &f_nodes {
            let x = fluid.nodes[f];
            let hit = s_nodes
                .iter()
                .enumerate()
                .find(|(k, &s)| !used[*k] && dist(x, solid.nodes[s]) <= CONFORMITY_TOL);
            match hit {
                Some((k, &s)) => {
                    used[k] = true;
                    pairs.push((f, s));
                }
                None => {
                    return Err(Error::Validation(format!(
                        "fluid interface node {f} at {x:?} has no matching solid node"
                    )))
                }
            }
        }
        Ok(InterfaceMap { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct MeshPair {
    pub fluid: Mesh,
    pub solid: Mesh,
    pub interface: InterfaceMap,
}

impl MeshPair {
    /// Matches interface nodes and checks the pair; fails on any validation issue.
    pub fn new(fluid: Mesh, solid: Mesh) -> Result<Self> {
        let interface = InterfaceMap::match_nodes(&fluid, &solid)?;
        let pair = MeshPair {
            fluid,
            solid,
            interface,
        };
        let report = validate(&pair);
        if !report.pass {
            return Err(Error::Validation(report.summary()));
        }
        Ok(pair)
    }
}

/// Outcome of [`validate`]. Failures are listed, never raised.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    /// (region, cell) for cells with non-positive reference area.
    pub inverted_cells: Vec<(Region, usize)>,
    pub out_of_range_cells: Vec<(Region, usize)>,
    pub untagged_facets: Vec<(Region, [usize; 2])>,
    /// Tagged facets that are not boundary edges, or boundary edges tagged twice.
    pub bad_tags: Vec<(Region, [usize; 2])>,
    /// (fluid node, solid node, distance) for interface pairs that do not coincide.
    pub interface_mismatch: Vec<(usize, usize, f64)>,
    /// Fluid interface nodes that are missing or duplicated in the map.
    pub interface_coverage: Vec<usize>,
    pub pass: bool,
}

impl ValidationReport {
    pub fn summary(&self) -> String {
        format!(
            "inverted={:?} out_of_range={:?} untagged={:?} bad_tags={:?} interface_mismatch={:?} interface_coverage={:?}",
            self.inverted_cells,
            self.out_of_range_cells,
            self.untagged_facets,
            self.bad_tags,
            self.interface_mismatch,
            self.interface_coverage
        )
    }
}

fn check_mesh(mesh: &Mesh, report: &mut ValidationReport) {
    let region = mesh.region;
    let n = mesh.node_count();
    for (c, cell) in mesh.cells.iter().enumerate() {
        if cell.iter().any(|&i| i >= n) {
            report.out_of_range_cells.push((region, c));
            continue;
        }
        if mesh.signed_area(c) <= 0.0 {
            report.inverted_cells.push((region, c));
        }
    }
    if !report.out_of_range_cells.is_empty() {
        return;
    }
    let boundary = mesh.boundary_edges();
    let mut tags: HashMap<[usize; 2], usize> = HashMap::new();
    for f in &mesh.facets {
        *tags.entry(edge_key(f.nodes[0], f.nodes[1])).or_insert(0) += 1;
    }
    for e in &boundary {
        match tags.get(e) {
            None => report.untagged_facets.push((region, *e)),
            Some(&k) if k > 1 => report.bad_tags.push((region, *e)),
            _ => {}
        }
    }
    let boundary_set: std::collections::HashSet<[usize; 2]> = boundary.into_iter().collect();
    let mut spurious: Vec<[usize; 2]> = tags.keys().filter(|e| !boundary_set.contains(*e)).copied().collect();
    spurious.sort_unstable();
    report.bad_tags.extend(spurious.into_iter().map(|e| (region, e)));
}

/// Checks cell orientation, index ranges, tag completeness and interface conformity.
pub fn validate(pair: &MeshPair) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_mesh(&pair.fluid, &mut report);
    check_mesh(&pair.solid, &mut report);

    let mut seen = vec![0usize; pair.fluid.node_count()];
    for &(f, s) in pair.interface.pairs() {
        if f >= pair.fluid.node_count() || s >= pair.solid.node_count() {
            report.interface_coverage.push(f);
            continue;
        }
        seen[f] += 1;
        let d = dist(pair.fluid.nodes[f], pair.solid.nodes[s]);
        if d > CONFORMITY_TOL {
            report.interface_mismatch.push((f, s, d));
        }
    }
    for f in pair.fluid.nodes_with_tag(FacetTag::Interface) {
        if seen[f] != 1 {
            report.interface_coverage.push(f);
        }
    }
    report.pass = report.inverted_cells.is_empty()
        && report.out_of_range_cells.is_empty()
        && report.untagged_facets.is_empty()
        && report.bad_tags.is_empty()
        && report.interface_mismatch.is_empty()
        && report.interface_coverage.is_empty();
    report
}

/// Cell containing `p` and its barycentric coordinates, by linear search.
/// Points on shared edges go to the first cell found.
pub fn locate_point(coords: &[Point], cells: &[[usize; 3]], p: Point) -> Option<(usize, [f64; 3])> {
    cells.iter().enumerate().find_map(|(ci, c)| {
        let v = c.map(|k| coords[k]);
        let area = signed_area(&v);
        if area == 0.0 {
            return None;
        }
        let l0 = signed_area(&[p, v[1], v[2]]) / area;
        let l1 = signed_area(&[v[0], p, v[2]]) / area;
        let l2 = 1.0 - l0 - l1;
        let tol = -1e-12;
        (l0 >= tol && l1 >= tol && l2 >= tol).then_some((ci, [l0, l1, l2]))
    })
}

/// Deformed coordinates `x̂ + d̂` for every node. The mesh itself is untouched.
pub fn current_coordinates(mesh: &Mesh, displacement: &NodalField) -> Result<Vec<Point>> {
    if displacement.components() != mesh.dim() || displacement.node_count() != mesh.node_count() {
        return Err(Error::Shape(format!(
            "displacement has {} nodes x {} components, {} mesh has {} nodes x {}",
            displacement.node_count(),
            displacement.components(),
            mesh.region,
            mesh.node_count(),
            mesh.dim()
        )));
    }
    Ok(mesh
        .nodes
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let d = displacement.vector(i);
            [x[0] + d[0], x[1] + d[1]]
        })
        .collect())
}
