use std::collections::HashMap;

use super::{dist, BoundaryTag, Mesh, Point};
use crate::error::{Error, Result};

/// Geometric grading towards the given corners.
///
/// Each of the `layers` passes cuts every element touching a corner `c` at
/// the points `c + sigma (v - c)` on its corner-incident facets. All
/// elements around `c` are cut at the same points, so the result stays
/// conforming without closure. After `L` passes the element at the corner
/// has size `sigma^L` times the original.
pub fn geometric_refine(mesh: &Mesh, corners: &[Point], sigma: f64, layers: usize) -> Result<Mesh> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::Parameter {
            name: "sigma",
            reason: format!("grading factor must lie in (0,1), got {sigma}"),
        });
    }
    let tol = 1e-12 * mesh.h.max(1e-300);
    let corner_nodes: Vec<usize> = corners
        .iter()
        .map(|&c| {
            mesh.find_node(c, tol)
                .ok_or_else(|| Error::Mesh(format!("corner ({}, {}) is not a mesh node", c[0], c[1])))
        })
        .collect::<Result<_>>()?;
    if layers == 0 {
        return Ok(mesh.clone());
    }
    if mesh.dim == 1 {
        refine_1d(mesh, &corner_nodes, sigma, layers)
    } else {
        refine_2d(mesh, &corner_nodes, sigma, layers)
    }
}

fn refine_1d(mesh: &Mesh, corners: &[usize], sigma: f64, layers: usize) -> Result<Mesh> {
    let mut xs: Vec<f64> = mesh.nodes.iter().map(|p| p[0]).collect();
    let corner_x: Vec<f64> = corners.iter().map(|&c| mesh.nodes[c][0]).collect();
    for _ in 0..layers {
        let mut extra = Vec::new();
        for &c in &corner_x {
            let pos = xs.iter().position(|&x| x == c).expect("corner node present");
            if pos + 1 < xs.len() {
                extra.push(c + sigma * (xs[pos + 1] - c));
            }
            if pos > 0 {
                extra.push(c + sigma * (xs[pos - 1] - c));
            }
        }
        xs.extend(extra);
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
    }
    let first = mesh.edges[mesh.boundary_edges[0]].tag;
    let (x_lo, x_hi) = (xs[0], xs[xs.len() - 1]);
    let tag_at = |x: f64| -> Option<BoundaryTag> {
        mesh.boundary_edges
            .iter()
            .map(|&e| &mesh.edges[e])
            .find(|e| mesh.nodes[e.nodes[0]][0] == x)
            .and_then(|e| e.tag)
            .or(first)
    };
    let (tag_lo, tag_hi) = (tag_at(x_lo), tag_at(x_hi));
    let n = xs.len() - 1;
    let nodes: Vec<Point> = xs.iter().map(|&x| [x, 0.0]).collect();
    let conn: Vec<usize> = (0..n).flat_map(|i| [i, i + 1]).collect();
    Mesh::from_parts(1, nodes, conn, move |a, _| {
        if a == 0 {
            tag_lo
        } else if a == n {
            tag_hi
        } else {
            None
        }
    })
}

fn refine_2d(mesh: &Mesh, corners: &[usize], sigma: f64, layers: usize) -> Result<Mesh> {
    let mut nodes = mesh.nodes.clone();
    let mut tris: Vec<[usize; 3]> = (0..mesh.n_elements())
        .map(|e| {
            let el = mesh.element(e);
            [el[0], el[1], el[2]]
        })
        .collect();
    let mut tags: HashMap<(usize, usize), BoundaryTag> = mesh
        .boundary_edges
        .iter()
        .map(|&i| {
            let e = &mesh.edges[i];
            ((e.nodes[0], e.nodes[1]), e.tag.unwrap_or(BoundaryTag::Robin))
        })
        .collect();
    let key = |a: usize, b: usize| (a.min(b), a.max(b));

    for _ in 0..layers {
        for &c in corners {
            let mut split_points: HashMap<usize, usize> = HashMap::new();
            let mut next = Vec::with_capacity(tris.len() + 8);
            for t in tris.drain(..) {
                let Some(pos) = t.iter().position(|&v| v == c) else {
                    next.push(t);
                    continue;
                };
                // rotate so the corner comes first, keeping orientation
                let (a, b) = (t[(pos + 1) % 3], t[(pos + 2) % 3]);
                let mut cut = |v: usize, nodes: &mut Vec<Point>| -> usize {
                    *split_points.entry(v).or_insert_with(|| {
                        let (pc, pv) = (nodes[c], nodes[v]);
                        nodes.push([pc[0] + sigma * (pv[0] - pc[0]), pc[1] + sigma * (pv[1] - pc[1])]);
                        nodes.len() - 1
                    })
                };
                let a2 = cut(a, &mut nodes);
                let b2 = cut(b, &mut nodes);
                for (v, v2) in [(a, a2), (b, b2)] {
                    if let Some(&tag) = tags.get(&key(c, v)) {
                        tags.insert(key(c, v2), tag);
                        tags.insert(key(v2, v), tag);
                    }
                }
                next.push([c, a2, b2]);
                // split the remaining quadrilateral a2-a-b-b2 along its shorter diagonal
                if dist(nodes[a2], nodes[b]) <= dist(nodes[a], nodes[b2]) {
                    next.push([a2, a, b]);
                    next.push([a2, b, b2]);
                } else {
                    next.push([a2, a, b2]);
                    next.push([a, b, b2]);
                }
            }
            tris = next;
        }
    }
    let conn: Vec<usize> = tris.iter().flat_map(|t| t.iter().copied()).collect();
    Mesh::from_parts(2, nodes, conn, move |a, b| tags.get(&key(a, b)).copied())
}

#[cfg(test)]
mod tests {
    use super::super::{triangulate, uniform_interval_mesh, Polygon};
    use super::*;

    #[test]
    fn zero_layers_is_identity() {
        let m = triangulate(&Polygon::l_shape(true), 0.5).unwrap();
        let r = geometric_refine(&m, &[[0.0, 0.0]], 0.125, 0).unwrap();
        assert_eq!(m, r);
    }

    #[test]
    fn one_dimensional_breakpoints() {
        let m = uniform_interval_mesh(4).unwrap();
        let h0 = 0.25;
        let r = geometric_refine(&m, &[[0.0, 0.0]], 0.5, 3).unwrap();
        let xs: Vec<f64> = r.nodes.iter().map(|p| p[0]).take(4).collect();
        assert_eq!(xs, vec![0.0, 0.125 * h0, 0.25 * h0, 0.5 * h0]);
        r.validate().unwrap();
        assert_eq!(r.edges[r.boundary_edges[0]].tag, Some(BoundaryTag::Dirichlet));
    }

    #[test]
    fn l_shape_example_grading() {
        let m = triangulate(&Polygon::l_shape(true), 0.5).unwrap();
        let coarse_min = m.min_element_diameter();
        let r = geometric_refine(&m, &[[0.0, 0.0]], 0.125, 10).unwrap();
        r.validate().unwrap();
        assert!(r.min_element_diameter() <= 0.125f64.powi(10) * coarse_min * (1.0 + 1e-12));
        assert!((r.total_measure() - 3.0).abs() < 1e-12);
        // reentrant sides keep their Neumann tags
        let neumann_len: f64 = r
            .boundary_edges
            .iter()
            .map(|&e| &r.edges[e])
            .filter(|e| e.tag == Some(BoundaryTag::Neumann))
            .map(|e| e.length)
            .sum();
        assert!((neumann_len - 2.0).abs() < 1e-12);
    }

    #[test]
    fn corner_must_be_node() {
        let m = triangulate(&Polygon::unit_square(), 0.5).unwrap();
        assert!(geometric_refine(&m, &[[0.3, 0.3]], 0.5, 2).is_err());
    }
}
