//! Plain-text mesh format.
//!
//! ```text
//! riis-mesh 1
//! region fluid
//! nodes <N>
//! <x> <y>            (N lines)
//! cells <M>
//! <a> <b> <c>        (M lines, 0-based node indices)
//! facets <K>
//! <a> <b> <tag>      (K lines; tag in interface|exterior|inlet|outlet)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Coordinates are
//! written with full round-trip precision.

use std::fmt::Write as _;
use std::path::Path;

use super::{Facet, Mesh};
use crate::error::{Error, Result};

pub fn write_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    std::fs::write(path, format_mesh(mesh)).map_err(|e| Error::io(path, e))
}

pub fn read_mesh(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mesh(&text)
}

pub(crate) fn format_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "riis-mesh 1");
    let _ = writeln!(s, "region {}", mesh.region());
    let _ = writeln!(s, "nodes {}", mesh.node_count());
    for p in mesh.nodes() {
        let _ = writeln!(s, "{:e} {:e}", p[0], p[1]);
    }
    let _ = writeln!(s, "cells {}", mesh.cell_count());
    for c in mesh.cells() {
        let _ = writeln!(s, "{} {} {}", c[0], c[1], c[2]);
    }
    let _ = writeln!(s, "facets {}", mesh.facets().len());
    for f in mesh.facets() {
        let _ = writeln!(s, "{} {} {}", f.nodes[0], f.nodes[1], f.tag);
    }
    s
}

struct Lines<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let item = self
            .items
            .get(self.pos)
            .copied()
            .ok_or_else(|| Error::Parameter(format!("mesh: unexpected end, expected {what}")))?;
        self.pos += 1;
        Ok(item)
    }

    fn count(&mut self, key: &str) -> Result<usize> {
        let (n, line) = self.next(key)?;
        line.strip_prefix(key)
            .and_then(|rest| rest.trim().parse().ok())
            .ok_or_else(|| bad(n, &format!("expected `{key} <count>`")))
    }

    fn numbers<T: std::str::FromStr>(&mut self, what: &str, len: usize) -> Result<Vec<T>> {
        let (n, line) = self.next(what)?;
        let v: Vec<T> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(n, &format!("bad {what}")))?;
        if v.len() != len {
            return Err(bad(n, &format!("expected {len} values for {what}")));
        }
        Ok(v)
    }
}

fn bad(line: usize, what: &str) -> Error {
    Error::Parameter(format!("mesh line {}: {what}", line + 1))
}

pub(crate) fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut lines = Lines {
        items: text
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect(),
        pos: 0,
    };

    let (n, header) = lines.next("header")?;
    if header != "riis-mesh 1" {
        return Err(bad(n, "expected `riis-mesh 1`"));
    }
    let (n, line) = lines.next("region")?;
    let region = line
        .strip_prefix("region ")
        .ok_or_else(|| bad(n, "expected `region <name>`"))?
        .trim()
        .parse()?;

    let n_nodes = lines.count("nodes")?;
    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let v: Vec<f64> = lines.numbers("node coordinates", 2)?;
        nodes.push([v[0], v[1]]);
    }
    let n_cells = lines.count("cells")?;
    let mut cells = Vec::with_capacity(n_cells);
    for _ in 0..n_cells {
        let v: Vec<usize> = lines.numbers("cell node indices", 3)?;
        cells.push([v[0], v[1], v[2]]);
    }
    let n_facets = lines.count("facets")?;
    let mut facets = Vec::with_capacity(n_facets);
    for _ in 0..n_facets {
        let (n, line) = lines.next("facet")?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(bad(n, "expected `<a> <b> <tag>`"));
        }
        let a = parts[0].parse().map_err(|_| bad(n, "bad node index"))?;
        let b = parts[1].parse().map_err(|_| bad(n, "bad node index"))?;
        facets.push(Facet {
            nodes: [a, b],
            tag: parts[2].parse()?,
        });
    }
    Ok(Mesh::new(region, nodes, cells, facets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_annulus_benchmark;

    #[test]
    fn round_trip_is_lossless() {
        let pair = generate_annulus_benchmark(0.025, 0.005, 0.004).unwrap();
        for mesh in [&pair.fluid, &pair.solid] {
            let back = parse_mesh(&format_mesh(mesh)).unwrap();
            assert_eq!(&back, mesh);
        }
    }

    #[test]
    fn file_round_trip() {
        let pair = generate_annulus_benchmark(0.025, 0.005, 0.004).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("solid.mesh");
        write_mesh(&pair.solid, &path).unwrap();
        assert_eq!(read_mesh(&path).unwrap(), pair.solid);
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(parse_mesh("riis-mesh 2\n").is_err());
        assert!(parse_mesh("riis-mesh 1\nregion fluid\nnodes 1\n0.0\n").is_err());
        assert!(parse_mesh("riis-mesh 1\nregion gas\n").is_err());
        let ok = "riis-mesh 1\nregion solid\nnodes 3\n0 0\n1 0\n0 1\ncells 1\n0 1 2\nfacets 1\n0 1 exterior\n";
        assert_eq!(parse_mesh(ok).unwrap().cell_count(), 1);
    }
}
