//! Plain-text mesh format.
//!
//! ```text
//! dim n_nodes n_elements
//! x [y]                      (n_nodes lines)
//! i j [k]                    (n_elements lines, 0-based)
//! edge i j tag               (one line per boundary facet; i == j in 1D)
//! ```
//!
//! Coordinates are written in shortest round-trip form, so reading a
//! written mesh reproduces it bit for bit.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{BoundaryTag, Mesh, Point};
use crate::error::{Error, Result};

pub fn write_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", mesh.dim, mesh.n_nodes(), mesh.n_elements());
    for p in &mesh.nodes {
        if mesh.dim == 1 {
            let _ = writeln!(out, "{:?}", p[0]);
        } else {
            let _ = writeln!(out, "{:?} {:?}", p[0], p[1]);
        }
    }
    for e in 0..mesh.n_elements() {
        let line: Vec<String> = mesh.element(e).iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    for &b in &mesh.boundary_edges {
        let edge = &mesh.edges[b];
        let tag = edge.tag.unwrap_or(BoundaryTag::Robin);
        let _ = writeln!(out, "edge {} {} {}", edge.nodes[0], edge.nodes[1], tag);
    }
    out
}

pub fn read_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty mesh file".into()))?;
    let head: Vec<usize> = header
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad header `{header}`")))
        })
        .collect::<Result<_>>()?;
    let [dim, n_nodes, n_elements] = head[..] else {
        return Err(Error::Parse(format!("header must have three fields: `{header}`")));
    };
    let mut nodes: Vec<Point> = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let line = lines.next().ok_or_else(|| Error::Parse("truncated node list".into()))?;
        let xs: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad coordinate in `{line}`")))
            })
            .collect::<Result<_>>()?;
        if xs.len() != dim {
            return Err(Error::Parse(format!(
                "node line `{line}` should have {dim} coordinates"
            )));
        }
        nodes.push(if dim == 1 { [xs[0], 0.0] } else { [xs[0], xs[1]] });
    }
    let mut conn = Vec::with_capacity(n_elements * (dim + 1));
    for _ in 0..n_elements {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse("truncated element list".into()))?;
        let idx: Vec<usize> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad index in `{line}`")))
            })
            .collect::<Result<_>>()?;
        if idx.len() != dim + 1 {
            return Err(Error::Parse(format!(
                "element line `{line}` should have {} indices",
                dim + 1
            )));
        }
        conn.extend(idx);
    }
    let mut tags: HashMap<(usize, usize), BoundaryTag> = HashMap::new();
    for line in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts[..] {
            ["edge", i, j, tag] => {
                let i: usize = i.parse().map_err(|_| Error::Parse(format!("bad edge line `{line}`")))?;
                let j: usize = j.parse().map_err(|_| Error::Parse(format!("bad edge line `{line}`")))?;
                tags.insert((i.min(j), i.max(j)), tag.parse()?);
            }
            _ => return Err(Error::Parse(format!("unexpected line `{line}`"))),
        }
    }
    Mesh::from_parts(dim, nodes, conn, move |a, b| tags.get(&(a, b)).copied())
}

#[cfg(test)]
mod tests {
    use super::super::{geometric_refine, triangulate, uniform_interval_mesh, Polygon};
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let m = triangulate(&Polygon::l_shape(true), 0.5).unwrap();
        let m = geometric_refine(&m, &[[0.0, 0.0]], 0.125, 4).unwrap();
        let text = write_mesh(&m);
        let back = read_mesh(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(write_mesh(&back), text);

        let m1 = uniform_interval_mesh(7).unwrap();
        let back1 = read_mesh(&write_mesh(&m1)).unwrap();
        assert_eq!(back1, m1);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_mesh("").is_err());
        assert!(read_mesh("2 1 0\n0.0\n").is_err());
        assert!(read_mesh("1 2 1\n0\n1\n0 1\nedge 0 0 bogus\n").is_err());
    }
}
