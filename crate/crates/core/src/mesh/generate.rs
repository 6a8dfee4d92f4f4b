use std::collections::HashMap;

use super::{BoundaryTag, Mesh, Point, Polygon};
use crate::error::{Error, Result};

/// Uniform mesh of `(0,1)` with `n` segments. The left endpoint is tagged
/// Dirichlet and the right endpoint Robin.
pub fn uniform_interval_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::Mesh("need at least one element".into()));
    }
    let nodes: Vec<Point> = (0..=n).map(|i| [i as f64 / n as f64, 0.0]).collect();
    interval_mesh_from_nodes(nodes)
}

/// 1D mesh on sorted breakpoints; the first node is Dirichlet, the last Robin.
pub fn interval_mesh_from_nodes(nodes: Vec<Point>) -> Result<Mesh> {
    let n = nodes.len() - 1;
    let conn: Vec<usize> = (0..n).flat_map(|i| [i, i + 1]).collect();
    Mesh::from_parts(1, nodes, conn, move |a, _| {
        if a == 0 {
            Some(BoundaryTag::Dirichlet)
        } else if a == n {
            Some(BoundaryTag::Robin)
        } else {
            None
        }
    })
}

/// Structured triangulation of a grid-aligned polygon.
///
/// The bounding box is split into square cells of side at most `target_h`,
/// chosen so that every polygon vertex is a grid point; cells inside the
/// polygon are cut into two triangles along their `/` diagonal.
pub fn triangulate(domain: &Polygon, target_h: f64) -> Result<Mesh> {
    if !(target_h > 0.0) {
        return Err(Error::Mesh(format!("target_h must be positive, got {target_h}")));
    }
    if target_h > domain.diameter() {
        return Err(Error::Mesh("target_h exceeds the domain diameter".into()));
    }
    let (lo, hi) = domain.bounding_box();
    let w = hi[0] - lo[0];
    let on_grid = |n: usize| {
        let s = w / n as f64;
        domain.vertices.iter().all(|v| {
            let gx = (v[0] - lo[0]) / s;
            let gy = (v[1] - lo[1]) / s;
            (gx - gx.round()).abs() < 1e-9 && (gy - gy.round()).abs() < 1e-9
        })
    };
    let n_min = (w / target_h - 1e-12).ceil().max(1.0) as usize;
    let nx = (n_min..n_min + 64)
        .find(|&n| on_grid(n))
        .ok_or_else(|| Error::Unsupported("polygon is not aligned with a square grid".into()))?;
    let s = w / nx as f64;
    let ny = ((hi[1] - lo[1]) / s).round() as usize;
    if ((hi[1] - lo[1]) / s - ny as f64).abs() > 1e-9 {
        return Err(Error::Unsupported(
            "bounding box height is not a multiple of the cell size".into(),
        ));
    }
    for (j, v) in domain.vertices.iter().enumerate() {
        let next = domain.vertices[(j + 1) % domain.vertices.len()];
        if (v[0] - next[0]).abs() > 1e-12 && (v[1] - next[1]).abs() > 1e-12 {
            return Err(Error::Unsupported(format!("polygon side {j} is not axis-aligned")));
        }
    }

    let grid_point = |i: usize, j: usize| -> Point { [lo[0] + i as f64 * s, lo[1] + j as f64 * s] };
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut nodes: Vec<Point> = Vec::new();
    let mut conn: Vec<usize> = Vec::new();
    let mut node_at = |i: usize, j: usize, nodes: &mut Vec<Point>| -> usize {
        *index.entry((i, j)).or_insert_with(|| {
            nodes.push(grid_point(i, j));
            nodes.len() - 1
        })
    };
    for j in 0..ny {
        for i in 0..nx {
            let center = [lo[0] + (i as f64 + 0.5) * s, lo[1] + (j as f64 + 0.5) * s];
            if !domain.contains(center) {
                continue;
            }
            let a = node_at(i, j, &mut nodes);
            let b = node_at(i + 1, j, &mut nodes);
            let c = node_at(i + 1, j + 1, &mut nodes);
            let d = node_at(i, j + 1, &mut nodes);
            conn.extend_from_slice(&[a, b, c, a, c, d]);
        }
    }
    if conn.is_empty() {
        return Err(Error::Mesh("no cells inside the polygon".into()));
    }
    let tol = 1e-9 * s;
    let tags = |a: usize, b: usize, nodes: &[Point]| -> Option<BoundaryTag> {
        domain
            .side_containing(nodes[a], nodes[b], tol)
            .map(|side| domain.boundary_tags[side])
    };
    let snapshot = nodes.clone();
    Mesh::from_parts(2, nodes, conn, move |a, b| tags(a, b, &snapshot))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_interval() {
        let m = uniform_interval_mesh(1).unwrap();
        assert_eq!(m.n_nodes(), 2);
        assert_eq!(m.n_elements(), 1);
    }

    #[test]
    fn four_intervals() {
        let m = uniform_interval_mesh(4).unwrap();
        assert!((m.h - 0.25).abs() < 1e-15);
        for (i, p) in m.nodes.iter().enumerate() {
            assert_eq!(p[0], i as f64 / 4.0);
        }
    }

    #[test]
    fn unit_square_one_cell() {
        let m = triangulate(&Polygon::unit_square(), 1.0).unwrap();
        assert_eq!(m.n_elements(), 2);
        assert_eq!(m.n_nodes(), 4);
        m.validate().unwrap();
    }

    #[test]
    fn unit_square_area() {
        let m = triangulate(&Polygon::unit_square(), 0.5).unwrap();
        assert_eq!(m.n_elements(), 8);
        assert!((m.total_measure() - 1.0).abs() < 1e-14);
        assert!(m.shape_reg <= 3.0);
        m.validate().unwrap();
    }

    #[test]
    fn l_shape_area_and_tags() {
        let m = triangulate(&Polygon::l_shape(true), 0.5).unwrap();
        assert!((m.total_measure() - 3.0).abs() < 1e-14);
        m.validate().unwrap();
        let neumann = m
            .boundary_edges
            .iter()
            .filter(|&&e| m.edges[e].tag == Some(BoundaryTag::Neumann))
            .count();
        // two cells along each reentrant side
        assert_eq!(neumann, 4);
    }

    #[test]
    fn l_shape_odd_target_snaps_to_grid() {
        let m = triangulate(&Polygon::l_shape(false), 0.3).unwrap();
        m.validate().unwrap();
        assert!(m.find_node([0.0, 0.0], 1e-12).is_some());
        assert!((m.total_measure() - 3.0).abs() < 1e-12);
    }
}
