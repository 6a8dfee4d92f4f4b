//! Simplicial meshes in 1D and 2D with classified skeleton.
//!
//! A facet ("edge") of a 1D mesh is a node; its measure is one, and edge
//! integrals reduce to point evaluations. Every facet stores its adjacent
//! elements with the unit normal pointing out of the first of them.

mod generate;
mod io;
mod polygon;
mod refine;

use std::collections::HashMap;

use crate::error::{Error, Result};

pub use generate::{triangulate, uniform_interval_mesh};
pub use io::{read_mesh, write_mesh};
pub use polygon::{dist, BoundaryTag, DomainId, Point, Polygon};
pub use refine::geometric_refine;

/// A facet of the mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// End nodes (equal for 1D facets).
    pub nodes: [usize; 2],
    /// First adjacent element and, for interior facets, the second.
    pub elements: (usize, Option<usize>),
    /// Unit normal pointing out of `elements.0`.
    pub normal: Point,
    pub length: f64,
    pub tag: Option<BoundaryTag>,
}

impl Edge {
    pub fn is_interior(&self) -> bool {
        self.elements.1.is_some()
    }

    /// Map `t in [0,1]` to a point on the facet.
    pub fn point(&self, mesh: &Mesh, t: f64) -> Point {
        let a = mesh.nodes[self.nodes[0]];
        let b = mesh.nodes[self.nodes[1]];
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub dim: usize,
    pub nodes: Vec<Point>,
    /// Flat connectivity with `dim + 1` nodes per element. 1D elements are
    /// ordered left to right, triangles counterclockwise.
    connectivity: Vec<usize>,
    pub edges: Vec<Edge>,
    pub interior_edges: Vec<usize>,
    pub boundary_edges: Vec<usize>,
    /// Facets of each element, `dim + 1` per element. For triangles, local
    /// facet `j` joins local vertices `j` and `(j + 1) % 3`; in 1D, facet 0
    /// is the left node.
    element_facets: Vec<usize>,
    /// Maximum element diameter.
    pub h: f64,
    /// Maximum ratio of element diameter to inscribed-circle diameter.
    pub shape_reg: f64,
}

impl Mesh {
    /// Build a mesh from nodes and connectivity. `tag_of` supplies the tag
    /// of each boundary facet by its (sorted) node pair; untagged boundary
    /// facets become Robin facets.
    pub fn from_parts(
        dim: usize,
        nodes: Vec<Point>,
        connectivity: Vec<usize>,
        tag_of: impl Fn(usize, usize) -> Option<BoundaryTag>,
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Mesh(format!("unsupported dimension {dim}")));
        }
        let stride = dim + 1;
        if connectivity.len() % stride != 0 || connectivity.is_empty() {
            return Err(Error::Mesh("connectivity length is not a multiple of dim + 1".into()));
        }
        if let Some(&bad) = connectivity.iter().find(|&&i| i >= nodes.len()) {
            return Err(Error::Mesh(format!("node index {bad} out of range")));
        }
        let n_el = connectivity.len() / stride;
        let mut edges: Vec<Edge> = Vec::with_capacity(n_el * stride);
        let mut element_facets = vec![usize::MAX; n_el * stride];
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(n_el * stride);
        let mut h: f64 = 0.0;
        let mut shape_reg: f64 = 0.0;

        for e in 0..n_el {
            let el = &connectivity[e * stride..(e + 1) * stride];
            if dim == 1 {
                let (a, b) = (nodes[el[0]], nodes[el[1]]);
                let len = b[0] - a[0];
                if len <= 0.0 {
                    return Err(Error::Mesh(format!("element {e} is not oriented left to right")));
                }
                h = h.max(len);
                shape_reg = shape_reg.max(1.0);
                for (local, &node) in el.iter().enumerate() {
                    let key = (node, node);
                    let outward = if local == 0 { [-1.0, 0.0] } else { [1.0, 0.0] };
                    attach(
                        &mut edges,
                        &mut lookup,
                        key,
                        e,
                        outward,
                        1.0,
                        e * stride + local,
                        &mut element_facets,
                    )?;
                }
            } else {
                let p = [nodes[el[0]], nodes[el[1]], nodes[el[2]]];
                let area2 = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
                if area2 <= 0.0 {
                    return Err(Error::Mesh(format!("element {e} is degenerate or clockwise")));
                }
                let lens = [dist(p[0], p[1]), dist(p[1], p[2]), dist(p[2], p[0])];
                let diam = lens.iter().cloned().fold(0.0, f64::max);
                let inradius = area2 / (lens[0] + lens[1] + lens[2]);
                h = h.max(diam);
                shape_reg = shape_reg.max(diam / (2.0 * inradius));
                for j in 0..3 {
                    let (a, b) = (el[j], el[(j + 1) % 3]);
                    let (pa, pb) = (nodes[a], nodes[b]);
                    let len = lens[j];
                    // outward normal of a counterclockwise triangle
                    let outward = [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len];
                    let key = (a.min(b), a.max(b));
                    attach(
                        &mut edges,
                        &mut lookup,
                        key,
                        e,
                        outward,
                        len,
                        e * stride + j,
                        &mut element_facets,
                    )?;
                }
            }
        }

        let mut interior_edges = Vec::new();
        let mut boundary_edges = Vec::new();
        for (i, edge) in edges.iter_mut().enumerate() {
            if edge.is_interior() {
                interior_edges.push(i);
            } else {
                edge.tag = Some(tag_of(edge.nodes[0], edge.nodes[1]).unwrap_or(BoundaryTag::Robin));
                boundary_edges.push(i);
            }
        }

        Ok(Mesh {
            dim,
            nodes,
            connectivity,
            edges,
            interior_edges,
            boundary_edges,
            element_facets,
            h,
            shape_reg,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.connectivity.len() / (self.dim + 1)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let s = self.dim + 1;
        &self.connectivity[e * s..(e + 1) * s]
    }

    pub fn element_facets(&self, e: usize) -> &[usize] {
        let s = self.dim + 1;
        &self.element_facets[e * s..(e + 1) * s]
    }

    pub fn connectivity(&self) -> &[usize] {
        &self.connectivity
    }

    pub fn element_points(&self, e: usize) -> Vec<Point> {
        self.element(e).iter().map(|&i| self.nodes[i]).collect()
    }

    /// Length (1D) or area (2D) of element `e`.
    pub fn element_measure(&self, e: usize) -> f64 {
        let el = self.element(e);
        if self.dim == 1 {
            self.nodes[el[1]][0] - self.nodes[el[0]][0]
        } else {
            let p = [self.nodes[el[0]], self.nodes[el[1]], self.nodes[el[2]]];
            0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]))
        }
    }

    pub fn element_diameter(&self, e: usize) -> f64 {
        let p = self.element_points(e);
        let mut d: f64 = 0.0;
        for a in &p {
            for b in &p {
                d = d.max(dist(*a, *b));
            }
        }
        d
    }

    pub fn centroid(&self, e: usize) -> Point {
        let p = self.element_points(e);
        let n = p.len() as f64;
        [
            p.iter().map(|q| q[0]).sum::<f64>() / n,
            p.iter().map(|q| q[1]).sum::<f64>() / n,
        ]
    }

    pub fn total_measure(&self) -> f64 {
        (0..self.n_elements()).map(|e| self.element_measure(e)).sum()
    }

    pub fn min_element_diameter(&self) -> f64 {
        (0..self.n_elements())
            .map(|e| self.element_diameter(e))
            .fold(f64::INFINITY, f64::min)
    }

    /// Barycentric coordinates of `p` with respect to element `e`
    /// (two entries in 1D, three in 2D).
    pub fn barycentric(&self, e: usize, p: Point) -> Vec<f64> {
        let el = self.element(e);
        if self.dim == 1 {
            let (a, b) = (self.nodes[el[0]][0], self.nodes[el[1]][0]);
            let t = (p[0] - a) / (b - a);
            vec![1.0 - t, t]
        } else {
            let (a, b, c) = (self.nodes[el[0]], self.nodes[el[1]], self.nodes[el[2]]);
            let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
            let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (p[1] - a[1]) * (c[0] - a[0])) / det;
            let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / det;
            vec![1.0 - l1 - l2, l1, l2]
        }
    }

    pub fn contains_point(&self, e: usize, p: Point, tol: f64) -> bool {
        self.barycentric(e, p).iter().all(|&l| l >= -tol)
    }

    /// Map reference coordinates (`[0,1]` or the unit triangle) to element `e`.
    pub fn map_to_element(&self, e: usize, xi: &[f64]) -> Point {
        let el = self.element(e);
        if self.dim == 1 {
            let (a, b) = (self.nodes[el[0]][0], self.nodes[el[1]][0]);
            [a + xi[0] * (b - a), 0.0]
        } else {
            let (a, b, c) = (self.nodes[el[0]], self.nodes[el[1]], self.nodes[el[2]]);
            [
                a[0] + xi[0] * (b[0] - a[0]) + xi[1] * (c[0] - a[0]),
                a[1] + xi[0] * (b[1] - a[1]) + xi[1] * (c[1] - a[1]),
            ]
        }
    }

    /// Index of the node at `p`, if one exists within `tol`.
    pub fn find_node(&self, p: Point, tol: f64) -> Option<usize> {
        self.nodes.iter().position(|&q| dist(p, q) <= tol)
    }

    /// Elements incident to node `n`.
    pub fn node_patch(&self, n: usize) -> Vec<usize> {
        (0..self.n_elements())
            .filter(|&e| self.element(e).contains(&n))
            .collect()
    }

    /// Check the conformity and orientation invariants.
    pub fn validate(&self) -> Result<()> {
        let stride = self.dim + 1;
        let mut uses = vec![0usize; self.edges.len()];
        for &f in &self.element_facets {
            if f >= self.edges.len() {
                return Err(Error::Mesh("element facet index out of range".into()));
            }
            uses[f] += 1;
        }
        for (i, edge) in self.edges.iter().enumerate() {
            let expected = if edge.is_interior() { 2 } else { 1 };
            if uses[i] != expected {
                return Err(Error::Mesh(format!("facet {i} is shared by {} elements", uses[i])));
            }
            let nn = (edge.normal[0].powi(2) + edge.normal[1].powi(2)).sqrt();
            if (nn - 1.0).abs() > 1e-12 {
                return Err(Error::Mesh(format!("facet {i} normal is not unit length")));
            }
            if let (first, Some(second)) = edge.elements {
                let out_second = self.outward_normal(second, i);
                if (out_second[0] + edge.normal[0]).abs() > 1e-12 || (out_second[1] + edge.normal[1]).abs() > 1e-12 {
                    return Err(Error::Mesh(format!("facet {i}: n- != -n+")));
                }
                let out_first = self.outward_normal(first, i);
                if (out_first[0] - edge.normal[0]).abs() > 1e-12 || (out_first[1] - edge.normal[1]).abs() > 1e-12 {
                    return Err(Error::Mesh(format!(
                        "facet {i}: stored normal does not point out of the first element"
                    )));
                }
            } else if edge.tag.is_none() {
                return Err(Error::Mesh(format!("boundary facet {i} has no tag")));
            }
        }
        let n_int = self.edges.iter().filter(|e| e.is_interior()).count();
        if n_int != self.interior_edges.len() || n_int + self.boundary_edges.len() != self.edges.len() {
            return Err(Error::Mesh("edge classification is inconsistent".into()));
        }
        if self.element_facets.len() != self.n_elements() * stride {
            return Err(Error::Mesh("element facet table has wrong size".into()));
        }
        Ok(())
    }

    /// Unit normal on facet `f` pointing out of element `e`.
    pub fn outward_normal(&self, e: usize, f: usize) -> Point {
        let el = self.element(e);
        let facets = self.element_facets(e);
        let local = facets.iter().position(|&g| g == f).expect("facet not on element");
        if self.dim == 1 {
            if local == 0 {
                [-1.0, 0.0]
            } else {
                [1.0, 0.0]
            }
        } else {
            let (pa, pb) = (self.nodes[el[local]], self.nodes[el[(local + 1) % 3]]);
            let len = dist(pa, pb);
            [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len]
        }
    }

    /// Sign (`+1` or `-1`) of the normal of facet `f` seen from element `e`:
    /// `+1` when `e` is the facet's first element.
    pub fn facet_side(&self, e: usize, f: usize) -> f64 {
        if self.edges[f].elements.0 == e {
            1.0
        } else {
            -1.0
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn attach(
    edges: &mut Vec<Edge>,
    lookup: &mut HashMap<(usize, usize), usize>,
    key: (usize, usize),
    element: usize,
    outward: Point,
    length: f64,
    slot: usize,
    element_facets: &mut [usize],
) -> Result<()> {
    match lookup.get(&key) {
        Some(&idx) => {
            let edge = &mut edges[idx];
            if edge.elements.1.is_some() {
                return Err(Error::Mesh(format!(
                    "facet {key:?} is shared by more than two elements"
                )));
            }
            edge.elements.1 = Some(element);
            element_facets[slot] = idx;
        }
        None => {
            let idx = edges.len();
            edges.push(Edge {
                nodes: [key.0, key.1],
                elements: (element, None),
                normal: outward,
                length,
                tag: None,
            });
            lookup.insert(key, idx);
            element_facets[slot] = idx;
        }
    }
    Ok(())
}

/// Degrees of freedom per wavelength: `2 pi N / k` in 1D and
/// `2 pi sqrt(N) / k` in 2D.
pub fn n_lambda(n_dofs: usize, k: f64, dim: usize) -> f64 {
    let n = n_dofs as f64;
    if dim == 1 {
        2.0 * std::f64::consts::PI * n / k
    } else {
        2.0 * std::f64::consts::PI * n.sqrt() / k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_lambda_conventions() {
        let two_pi = 2.0 * std::f64::consts::PI;
        assert!((n_lambda(100, two_pi, 1) - 100.0).abs() < 1e-12);
        assert!((n_lambda(50, std::f64::consts::PI, 1) - 100.0).abs() < 1e-12);
        assert!((n_lambda(10000, two_pi, 2) - 100.0).abs() < 1e-12);
    }

    #[test]
    fn interval_mesh_topology() {
        let m = uniform_interval_mesh(10).unwrap();
        assert_eq!(m.boundary_edges.len(), 2);
        assert_eq!(m.interior_edges.len(), 9);
        m.validate().unwrap();
        let left = &m.edges[m.boundary_edges[0]];
        assert_eq!(left.tag, Some(BoundaryTag::Dirichlet));
    }

    #[test]
    fn detects_overshared_facet() {
        // three triangles on one edge
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [0.5, -1.0], [0.6, 2.0]];
        let conn = vec![0, 1, 2, 1, 0, 3, 0, 1, 4];
        assert!(Mesh::from_parts(2, nodes, conn, |_, _| None).is_err());
    }
}
